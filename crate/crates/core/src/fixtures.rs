//! Standard algebras, coalgebras, and modules used across the test suites
//! and the CLI verification harness. Ungraded algebras sit in cohomological
//! degree 0; basis weights carry the truncation level (powers of x, PBW
//! length), so products that escape the window are flagged as overflow.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgebraSpec, ModuleSpec};
use crate::coalgebra::{CoalgebraSpec, CoSide, ComoduleSpec};
use crate::field::Field;
use crate::functional::Functional;
use crate::graded::{BasisElem, BasisId, DegreeWindow, GradedVectorSpace, Space};

fn degree_zero_space(field: Field, window: DegreeWindow, elems: Vec<BasisElem>) -> Space {
    let mut basis = BTreeMap::new();
    basis.insert(0, elems);
    Arc::new(GradedVectorSpace::new(field, window, basis).unwrap())
}

/// k[x] truncated at x^cap: basis 1, x, .., x^cap in degree 0 with weight =
/// power. Products past the cap overflow. Augmentation x -> 0.
pub fn poly_one_var(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let cap = window.weight_cap;
    let elems = (0..=cap)
        .map(|j| BasisElem {
            label: if j == 0 { "1".into() } else if j == 1 { "x".into() } else { format!("x^{j}") },
            weight: j,
        })
        .collect();
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    for a in 1..=cap {
        for b in 1..=cap {
            if a + b <= cap {
                let ida = BasisId { degree: 0, index: a as usize };
                let idb = BasisId { degree: 0, index: b as usize };
                let idab = BasisId { degree: 0, index: (a + b) as usize };
                alg.set_product(ida, idb, vec![(idab, field.one())]);
            }
        }
    }
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// The one-dimensional k[x]-module k_a on which x acts by `a`.
pub fn poly_character_module(alg: &Arc<AlgebraSpec>, a: crate::field::Scalar) -> ModuleSpec {
    let field = alg.field();
    let carrier = GradedVectorSpace::line(field, alg.carrier.window, "m");
    let m0 = BasisId { degree: 0, index: 0 };
    let mut module = ModuleSpec::new(Arc::clone(alg), carrier);
    for id in alg.non_unit_ids() {
        // x^j acts by a^j
        let j = alg.carrier.weight(id);
        let c = a.pow(j as u64);
        if !c.is_zero() {
            module.set_action(id, m0, vec![(m0, c)]);
        }
    }
    module
}

/// k[eps]/eps^2 (dual numbers), ungraded: basis 1, eps with eps^2 = 0.
pub fn dual_numbers(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let elems = vec![
        BasisElem { label: "1".into(), weight: 0 },
        BasisElem { label: "eps".into(), weight: 1 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    let e = BasisId { degree: 0, index: 1 };
    alg.set_product(e, e, vec![]);
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// k[x]/(x^2 - 1), ungraded; has no augmentation with alpha(x) = 0, the
/// thematic curved fixture.
pub fn involution_algebra(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let elems = vec![
        BasisElem { label: "1".into(), weight: 0 },
        BasisElem { label: "x".into(), weight: 1 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    let x = BasisId { degree: 0, index: 1 };
    let unit = BasisId { degree: 0, index: 0 };
    alg.set_product(x, x, vec![(unit, field.one())]);
    Arc::new(alg)
}

/// The monomial algebra k<x,y>/(x^2, y^2, xy): basis 1, x, y, yx.
pub fn monomial_three_rel(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let elems = vec![
        BasisElem { label: "1".into(), weight: 0 },
        BasisElem { label: "x".into(), weight: 1 },
        BasisElem { label: "y".into(), weight: 1 },
        BasisElem { label: "yx".into(), weight: 2 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    let x = BasisId { degree: 0, index: 1 };
    let y = BasisId { degree: 0, index: 2 };
    let yx = BasisId { degree: 0, index: 3 };
    for (a, b, v) in [
        (x, x, vec![]),
        (y, y, vec![]),
        (x, y, vec![]),
        (y, x, vec![(yx, field.one())]),
        (x, yx, vec![]),
        (y, yx, vec![]),
        (yx, x, vec![]),
        (yx, y, vec![]),
        (yx, yx, vec![]),
    ] {
        alg.set_product(a, b, v);
    }
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// k[x]/(x^3) with x in internal degree 1 (carried by the weight), the
/// standard non-quadratic fixture.
pub fn truncated_cubic(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let elems = vec![
        BasisElem { label: "1".into(), weight: 0 },
        BasisElem { label: "x".into(), weight: 1 },
        BasisElem { label: "x^2".into(), weight: 2 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    let x = BasisId { degree: 0, index: 1 };
    let x2 = BasisId { degree: 0, index: 2 };
    alg.set_product(x, x, vec![(x2, field.one())]);
    alg.set_product(x, x2, vec![]);
    alg.set_product(x2, x, vec![]);
    alg.set_product(x2, x2, vec![]);
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// U(g) for the two-dimensional Lie algebra with [x, y] = c y (c = 0:
/// abelian; c = 1: solvable), truncated at PBW length = weight cap.
/// PBW basis x^i y^j with the rewriting rule y x = x y - c y.
pub fn enveloping_two_dim(field: Field, window: DegreeWindow, c: i64) -> Arc<AlgebraSpec> {
    let cap = window.weight_cap;
    let mut elems = Vec::new();
    let mut index_of = std::collections::HashMap::new();
    for w in 0..=cap {
        for i in (0..=w).rev() {
            let j = w - i;
            let label = match (i, j) {
                (0, 0) => "1".to_string(),
                _ => {
                    let xs = match i { 0 => String::new(), 1 => "x".into(), _ => format!("x^{i}") };
                    let ys = match j { 0 => String::new(), 1 => "y".into(), _ => format!("y^{j}") };
                    if xs.is_empty() { ys } else if ys.is_empty() { xs } else { format!("{xs}{ys}") }
                }
            };
            index_of.insert((i, j), elems.len());
            elems.push(BasisElem { label, weight: w });
        }
    }
    let carrier = degree_zero_space(field, window, elems);
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    let cval = field.from_i64(c);

    // normal ordering: monomials as coefficient maps (i, j) -> scalar
    type Mono = std::collections::BTreeMap<(u32, u32), crate::field::Scalar>;
    let add_to = |m: &mut Mono, key: (u32, u32), v: crate::field::Scalar| {
        let slot = m.entry(key).or_insert_with(|| field.zero());
        *slot = slot.add(&v);
        if slot.is_zero() {
            m.remove(&key);
        }
    };
    // y^j * x = (y^{j-1} x) y ... derive y^j x recursively: y x = x y - c y
    fn yj_x(j: u32, field: Field, cval: &crate::field::Scalar) -> Vec<((u32, u32), crate::field::Scalar)> {
        if j == 0 {
            return vec![((1, 0), field.one())];
        }
        // y^j x = y^{j-1} (x y - c y) = (y^{j-1} x) y - c y^j
        let prev = yj_x(j - 1, field, cval);
        let mut out: Vec<((u32, u32), crate::field::Scalar)> = prev
            .into_iter()
            .map(|((a, b), s)| ((a, b + 1), s))
            .collect();
        out.push(((0, j), cval.neg()));
        out
    }
    // multiply normal monomials: (x^i y^j)(x^k y^l)
    let mul_mono = |i: u32, j: u32, k: u32, l: u32| -> Mono {
        // push x^k through y^j one x at a time
        let mut acc: Mono = Mono::new();
        acc.insert((i, j), field.one());
        for _ in 0..k {
            let mut next: Mono = Mono::new();
            for ((a, b), s) in &acc {
                for ((da, db), t) in yj_x(*b, field, &cval) {
                    add_to(&mut next, (a + da, db), s.mul(&t));
                }
            }
            acc = next;
        }
        let mut out: Mono = Mono::new();
        for ((a, b), s) in acc {
            add_to(&mut out, (a, b + l), s);
        }
        out
    };

    for (&(i, j), &ia) in &index_of {
        for (&(k, l), &ib) in &index_of {
            if (i, j) == (0, 0) || (k, l) == (0, 0) {
                continue;
            }
            if i + j + k + l > cap {
                continue; // weight rule flags these as overflow
            }
            let prod = mul_mono(i, j, k, l);
            let val = prod
                .into_iter()
                .map(|((a, b), s)| {
                    (BasisId { degree: 0, index: index_of[&(a, b)] }, s)
                })
                .collect();
            alg.set_product(
                BasisId { degree: 0, index: ia },
                BasisId { degree: 0, index: ib },
                val,
            );
        }
    }
    let unit = BasisId { degree: 0, index: index_of[&(0, 0)] };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// A small genuinely graded DG-algebra: generators u (degree 1) and
/// w (degree 2) with u^2 = w, uw = wu = w^2 = 0, d(u) = w, d(w) = 0.
/// Augmented by killing u and w; sign-sensitive fixture for the bar side.
pub fn small_dg_algebra(field: Field, window: DegreeWindow) -> Arc<AlgebraSpec> {
    let mut basis = BTreeMap::new();
    basis.insert(0, vec![BasisElem { label: "1".into(), weight: 0 }]);
    basis.insert(1, vec![BasisElem { label: "u".into(), weight: 1 }]);
    basis.insert(2, vec![BasisElem { label: "w".into(), weight: 1 }]);
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, window, basis).unwrap());
    let mut alg = AlgebraSpec::new(carrier.clone(), "1").unwrap();
    let u = BasisId { degree: 1, index: 0 };
    let w = BasisId { degree: 2, index: 0 };
    alg.set_product(u, u, vec![(w, field.one())]);
    alg.set_product(u, w, vec![]);
    alg.set_product(w, u, vec![]);
    alg.set_product(w, w, vec![]);
    let d = crate::graded::GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        if id == u {
            vec![(w, field.one())]
        } else {
            vec![]
        }
    });
    alg.differential = Some(d);
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// The coalgebra C = k ⊕ k x dual to the dual numbers: x is primitive.
pub fn dual_numbers_dual(field: Field, window: DegreeWindow) -> Arc<CoalgebraSpec> {
    let elems = vec![
        BasisElem { label: "1".into(), weight: 0 },
        BasisElem { label: "x".into(), weight: 1 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let one = BasisId { degree: 0, index: 0 };
    let x = BasisId { degree: 0, index: 1 };
    let counit = Functional::from_pairs(field, 0, [(one, field.one())]);
    let mut co = CoalgebraSpec::new(carrier, counit);
    co.set_comul(one, vec![(field.one(), one, one)]);
    co.set_comul(x, vec![(field.one(), x, one), (field.one(), one, x)]);
    co.coaugmentation = Some(vec![(one, field.one())]);
    Arc::new(co)
}

/// Dual of k x k: two group-like elements. Coaugmented via g1 but not
/// conilpotent.
pub fn two_group_likes(field: Field, window: DegreeWindow) -> Arc<CoalgebraSpec> {
    let elems = vec![
        BasisElem { label: "g1".into(), weight: 0 },
        BasisElem { label: "g2".into(), weight: 0 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let g1 = BasisId { degree: 0, index: 0 };
    let g2 = BasisId { degree: 0, index: 1 };
    let counit = Functional::from_pairs(field, 0, [(g1, field.one()), (g2, field.one())]);
    let mut co = CoalgebraSpec::new(carrier, counit);
    co.set_comul(g1, vec![(field.one(), g1, g1)]);
    co.set_comul(g2, vec![(field.one(), g2, g2)]);
    co.coaugmentation = Some(vec![(g1, field.one())]);
    Arc::new(co)
}

/// The dual-numbers dual written in the skewed basis g = 1* + x, x: the
/// counit section g is a basis vector but not group-like, so the cobar
/// construction with section g acquires genuine curvature.
pub fn skewed_primitive_coalgebra(field: Field, window: DegreeWindow) -> Arc<CoalgebraSpec> {
    let elems = vec![
        BasisElem { label: "g".into(), weight: 0 },
        BasisElem { label: "x".into(), weight: 1 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let g = BasisId { degree: 0, index: 0 };
    let x = BasisId { degree: 0, index: 1 };
    let counit = Functional::from_pairs(field, 0, [(g, field.one())]);
    let mut co = CoalgebraSpec::new(carrier, counit);
    let neg = field.one().neg();
    co.set_comul(g, vec![(field.one(), g, g), (neg.clone(), x, x)]);
    co.set_comul(
        x,
        vec![
            (field.one(), x, g),
            (field.one(), g, x),
            (field.from_i64(-2), x, x),
        ],
    );
    // the unique group-like is g - x
    co.coaugmentation = Some(vec![(g, field.one()), (x, neg)]);
    Arc::new(co)
}

/// Dual of the upper-triangular 2x2 matrices: cosemisimple part is the dual
/// of the diagonal, and F_1 = C.
pub fn upper_triangular_dual(field: Field, window: DegreeWindow) -> Arc<CoalgebraSpec> {
    let elems = vec![
        BasisElem { label: "e11".into(), weight: 0 },
        BasisElem { label: "e12".into(), weight: 0 },
        BasisElem { label: "e22".into(), weight: 0 },
    ];
    let carrier = degree_zero_space(field, window, elems);
    let e11 = BasisId { degree: 0, index: 0 };
    let e12 = BasisId { degree: 0, index: 1 };
    let e22 = BasisId { degree: 0, index: 2 };
    let counit = Functional::from_pairs(field, 0, [(e11, field.one()), (e22, field.one())]);
    let mut co = CoalgebraSpec::new(carrier, counit);
    co.set_comul(e11, vec![(field.one(), e11, e11)]);
    co.set_comul(e22, vec![(field.one(), e22, e22)]);
    co.set_comul(e12, vec![(field.one(), e11, e12), (field.one(), e12, e22)]);
    Arc::new(co)
}

/// The terminal CDG-coalgebra fixture: C^0 = k gamma, C^{-2} = k c, zero
/// differential, curvature h(c) = 1, comultiplication making gamma
/// group-like and c "primitive over gamma". Returned as the underlying
/// coalgebra; the curvature functional is supplied by the caller.
pub fn terminal_cdg_coalgebra_carrier(field: Field, window: DegreeWindow) -> Arc<CoalgebraSpec> {
    let mut basis = BTreeMap::new();
    basis.insert(0, vec![BasisElem { label: "g".into(), weight: 0 }]);
    basis.insert(-2, vec![BasisElem { label: "c".into(), weight: 1 }]);
    let carrier = Arc::new(GradedVectorSpace::new(field, window, basis).unwrap());
    let g = BasisId { degree: 0, index: 0 };
    let c = BasisId { degree: -2, index: 0 };
    let counit = Functional::from_pairs(field, 0, [(g, field.one())]);
    let mut co = CoalgebraSpec::new(carrier, counit);
    co.set_comul(g, vec![(field.one(), g, g)]);
    co.set_comul(c, vec![(field.one(), g, c), (field.one(), c, g)]);
    co.coaugmentation = Some(vec![(g, field.one())]);
    Arc::new(co)
}

/// The one-dimensional trivial comodule k via the coaugmentation.
pub fn trivial_comodule(co: &Arc<CoalgebraSpec>, side: CoSide) -> ComoduleSpec {
    let gamma = co
        .coaugmentation
        .clone()
        .expect("trivial comodule needs a coaugmentation");
    let carrier = GradedVectorSpace::line(co.field(), co.carrier.window, "k");
    let m = BasisId { degree: 0, index: 0 };
    let mut com = ComoduleSpec::new(Arc::clone(co), carrier, side);
    com.set_coaction(
        m,
        gamma.iter().map(|(g, s)| (s.clone(), *g, m)).collect(),
    );
    com
}
