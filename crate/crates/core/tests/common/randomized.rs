//! Seeded random fixture generators for the verification suites: monomial
//! algebras (subword-closed bases, hence associative), their dual
//! coalgebras with optionally skewed counit sections, and random modules
//! respecting the fixture relations.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;

use kdual_core::algebra::AlgebraSpec;
use kdual_core::coalgebra::CoalgebraSpec;
use kdual_core::field::Field;
use kdual_core::functional::Functional;
use kdual_core::graded::{BasisElem, BasisId, DegreeWindow, GradedVectorSpace, Space};

/// A random monomial algebra on two generators: the basis is a random
/// subword-closed set of words, so concatenation-or-zero is associative.
pub fn random_monomial_algebra(
    field: Field,
    window: DegreeWindow,
    rng: &mut StdRng,
) -> Arc<AlgebraSpec> {
    let mut words: Vec<String> = vec!["".into(), "x".into(), "y".into()];
    for len in 2..=3 {
        let candidates: Vec<String> = words
            .iter()
            .filter(|w| w.len() == len - 1)
            .flat_map(|w| ["x", "y"].iter().map(move |g| format!("{w}{g}")))
            .collect();
        for c in candidates {
            // subword-closed: the suffix of length len-1 must be present
            let suffix = &c[1..];
            if words.iter().any(|w| w == suffix) && rng.gen_bool(0.5) && words.len() < 8 {
                words.push(c);
            }
        }
    }
    let elems: Vec<BasisElem> = words
        .iter()
        .map(|w| BasisElem {
            label: if w.is_empty() { "1".into() } else { w.clone() },
            weight: w.len() as u32,
        })
        .collect();
    let mut basis = BTreeMap::new();
    basis.insert(0, elems);
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, window, basis).unwrap());
    let mut alg = AlgebraSpec::new(carrier, "1").unwrap();
    for (i, wa) in words.iter().enumerate() {
        for (j, wb) in words.iter().enumerate() {
            if wa.is_empty() || wb.is_empty() {
                continue;
            }
            let cat = format!("{wa}{wb}");
            let val = match words.iter().position(|w| *w == cat) {
                Some(k) => vec![(BasisId { degree: 0, index: k }, field.one())],
                None => vec![],
            };
            if (wa.len() + wb.len()) as u32 <= window.weight_cap {
                alg.set_product(
                    BasisId { degree: 0, index: i },
                    BasisId { degree: 0, index: j },
                    val,
                );
            }
        }
    }
    let unit = BasisId { degree: 0, index: 0 };
    alg.augmentation = Some(Functional::from_pairs(field, 0, [(unit, field.one())]));
    Arc::new(alg)
}

/// A random retraction v with v(1) = 1 and random values on the rest.
pub fn random_retraction(alg: &AlgebraSpec, rng: &mut StdRng) -> Functional {
    let field = alg.field();
    let mut v = Functional::from_pairs(field, 0, [(alg.unit, field.one())]);
    for id in alg.non_unit_ids() {
        if id.degree == 0 && rng.gen_bool(0.5) {
            v.set(id, field.from_i64(rng.gen_range(-3..=3)));
        }
    }
    v
}

/// The plain dual coalgebra of a finite monomial algebra: basis-adapted
/// coaugmentation gamma = 1*.
pub fn dual_coalgebra(alg: &Arc<AlgebraSpec>) -> (Arc<CoalgebraSpec>, BasisId) {
    let mut rng_zero = <StdRng as rand::SeedableRng>::seed_from_u64(0);
    // zero skew: reuse the skewed constructor deterministically
    let _ = &mut rng_zero;
    skewed_dual_with(alg, |_k| None)
}

fn skewed_dual_with(
    alg: &Arc<AlgebraSpec>,
    skew_of: impl Fn(usize) -> Option<i64>,
) -> (Arc<CoalgebraSpec>, BasisId) {
    let field = alg.field();
    let n = alg.carrier.total_dim();
    let window = alg.carrier.window;
    let elems: Vec<BasisElem> = alg
        .carrier
        .ids()
        .iter()
        .map(|id| BasisElem {
            label: if *id == alg.unit {
                "g".into()
            } else {
                format!("{}*", alg.carrier.label(*id))
            },
            weight: alg.carrier.weight(*id),
        })
        .collect();
    let mut basis = BTreeMap::new();
    basis.insert(0, elems);
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, window, basis).unwrap());
    let mut skew = vec![field.zero(); n];
    for (k, id) in alg.carrier.ids().iter().enumerate() {
        if *id != alg.unit {
            if let Some(v) = skew_of(k) {
                skew[k] = field.from_i64(v);
            }
        }
    }
    let unit_pos = alg
        .carrier
        .ids()
        .iter()
        .position(|id| *id == alg.unit)
        .unwrap();
    let ids = alg.carrier.ids();
    let expand = |k: usize| -> Vec<(usize, kdual_core::field::Scalar)> {
        if k == unit_pos {
            let mut out = vec![(unit_pos, field.one())];
            for (j, r) in skew.iter().enumerate() {
                if !r.is_zero() {
                    out.push((j, r.neg()));
                }
            }
            out
        } else {
            vec![(k, field.one())]
        }
    };
    let counit = Functional::from_pairs(
        field,
        0,
        [(BasisId { degree: 0, index: unit_pos }, field.one())],
    );
    let mut co = CoalgebraSpec::new(Arc::clone(&carrier), counit);
    let dual_mu = |target: usize| -> Vec<(kdual_core::field::Scalar, BasisId, BasisId)> {
        let mut val = Vec::new();
        for (ka, a) in ids.iter().enumerate() {
            for (kb, b) in ids.iter().enumerate() {
                let coeff = match alg.mul_basis(*a, *b) {
                    kdual_core::algebra::Product::Elem(p) => p
                        .iter()
                        .filter(|(t, _)| t.index == target && t.degree == 0)
                        .fold(field.zero(), |acc, (_, s)| acc.add(s)),
                    kdual_core::algebra::Product::Overflow => field.zero(),
                };
                if coeff.is_zero() {
                    continue;
                }
                for (ia, sa) in expand(ka) {
                    for (ib, sb) in expand(kb) {
                        val.push((
                            coeff.mul(&sa).mul(&sb),
                            BasisId { degree: 0, index: ia },
                            BasisId { degree: 0, index: ib },
                        ));
                    }
                }
            }
        }
        val
    };
    for (kc, _c) in ids.iter().enumerate() {
        if kc == unit_pos {
            let mut total = dual_mu(kc);
            for (j, r) in skew.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                for (s, x, y) in dual_mu(j) {
                    total.push((s.mul(r), x, y));
                }
            }
            co.set_comul(BasisId { degree: 0, index: kc }, total);
        } else {
            co.set_comul(BasisId { degree: 0, index: kc }, dual_mu(kc));
        }
    }
    let mut gamma = vec![(BasisId { degree: 0, index: unit_pos }, field.one())];
    for (j, r) in skew.iter().enumerate() {
        if !r.is_zero() {
            gamma.push((BasisId { degree: 0, index: j }, r.neg()));
        }
    }
    co.coaugmentation = Some(kdual_core::graded::gelem_normalize(gamma));
    (Arc::new(co), BasisId { degree: 0, index: unit_pos })
}

/// The dual coalgebra of a finite monomial algebra, in a basis where the
/// counit section may be skewed by a random combination of the other dual
/// basis vectors: g = 1* + sum r_c c*. Sections based at g then produce
/// genuinely curved cobar constructions.
pub fn skewed_dual_coalgebra(
    alg: &Arc<AlgebraSpec>,
    rng: &mut StdRng,
) -> (Arc<CoalgebraSpec>, BasisId) {
    let picks: Vec<Option<i64>> = (0..alg.carrier.total_dim())
        .map(|_| {
            if rng.gen_bool(0.4) {
                Some(rng.gen_range(-2..=2))
            } else {
                None
            }
        })
        .collect();
    skewed_dual_with(alg, |k| picks[k])
}
