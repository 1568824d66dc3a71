//! Curved DG algebras and coalgebras, their module species (CDG-modules,
//! CDG-comodules, CDG-contramodules), morphisms with change-of-connection
//! data, Hom complexes, and restriction along morphisms.
//!
//! Sign conventions: the Koszul rule throughout; the dual algebra C* is
//! multiplied so that left comodules become left C*-modules, i.e.
//! (a*b)(c) = sum b(c_(1)) a(c_(2)). These choices are policed by the
//! d²-law checks over Q on every construction.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgebraSpec, ModuleSpec, Product};
use crate::coalgebra::{CoSide, CoalgebraSpec, ComoduleSpec};
use crate::cocontra::ContramoduleSpec;
use crate::error::Error;
use crate::field::Scalar;
use crate::functional::Functional;
use crate::graded::{
    gelem_add, gelem_normalize, gelem_scale, gelem_sub, BasisElem, BasisId, GElem, GradedMap,
    GradedVectorSpace, Space,
};
use crate::matrix;

// ---------------------------------------------------------------------------
// star actions of functionals (the C*-module structures)

/// a * b in C*: (a*b)(c) = sum b(c_(1)) a(c_(2)).
pub fn star_fn(co: &CoalgebraSpec, a: &Functional, b: &Functional) -> Functional {
    let field = co.field();
    let mut out = Functional::zero(field, a.degree + b.degree);
    for c in co.carrier.ids() {
        if c.degree != -(a.degree + b.degree) {
            continue;
        }
        let mut acc = field.zero();
        for (s, x, y) in co.comul_basis(c) {
            let bx = b.eval_basis(x);
            if bx.is_zero() {
                continue;
            }
            let ay = a.eval_basis(y);
            if ay.is_zero() {
                continue;
            }
            acc = acc.add(&s.mul(&bx).mul(&ay));
        }
        out.set(c, acc);
    }
    out
}

/// b * x for a left comodule element x: apply b to the coalgebra leg of the
/// coaction, nu(x) = sum c ⊗ m.
pub fn star_left(com: &ComoduleSpec, b: &Functional, x: BasisId) -> GElem {
    debug_assert_eq!(com.side, CoSide::Left);
    let mut out: GElem = Vec::new();
    for (s, c, m) in com.coaction_basis(x) {
        let bc = b.eval_basis(c);
        if !bc.is_zero() {
            out.push((m, s.mul(&bc)));
        }
    }
    gelem_normalize(out)
}

/// x * b for a right comodule element x: nu(x) = sum m ⊗ c, with the sign
/// (-1)^{|b|} pinned by the change-of-retraction isomorphisms of the bar
/// construction.
pub fn star_right(com: &ComoduleSpec, x: BasisId, b: &Functional) -> GElem {
    debug_assert_eq!(com.side, CoSide::Right);
    let mut out: GElem = Vec::new();
    for (s, c, m) in com.coaction_basis(x) {
        let bc = b.eval_basis(c);
        if !bc.is_zero() {
            out.push((m, s.mul(&bc).signed(b.degree as i64)));
        }
    }
    gelem_normalize(out)
}

/// b * p for a contramodule element p: pi of the rank-one map c -> b(c) p.
pub fn star_contra(contra: &ContramoduleSpec, b: &Functional, p: BasisId) -> GElem {
    let mut out: GElem = Vec::new();
    for c in contra.coalgebra.carrier.ids() {
        let bc = b.eval_basis(c);
        if !bc.is_zero() {
            out.extend(gelem_scale(&contra.contra_basis(c, p), &bc));
        }
    }
    gelem_normalize(out)
}

pub fn star_left_elem(com: &ComoduleSpec, b: &Functional, v: &GElem) -> GElem {
    let mut acc: GElem = Vec::new();
    for (x, s) in v {
        acc.extend(gelem_scale(&star_left(com, b, *x), s));
    }
    gelem_normalize(acc)
}

pub fn star_right_elem(com: &ComoduleSpec, v: &GElem, b: &Functional) -> GElem {
    let mut acc: GElem = Vec::new();
    for (x, s) in v {
        acc.extend(gelem_scale(&star_right(com, *x, b), s));
    }
    gelem_normalize(acc)
}

pub fn star_contra_elem(contra: &ContramoduleSpec, b: &Functional, v: &GElem) -> GElem {
    let mut acc: GElem = Vec::new();
    for (p, s) in v {
        acc.extend(gelem_scale(&star_contra(contra, b, *p), s));
    }
    gelem_normalize(acc)
}

// ---------------------------------------------------------------------------
// curved structures

/// A CDG-algebra: graded algebra, odd derivation d of degree +1, curvature
/// element h in B^2 with d²(b) = hb - bh and d(h) = 0. The underlying
/// `AlgebraSpec` carries d; `h` lives here.
#[derive(Clone, Debug)]
pub struct CdgAlgebra {
    pub algebra: Arc<AlgebraSpec>,
    pub h: GElem,
}

impl CdgAlgebra {
    pub fn uncurved(algebra: Arc<AlgebraSpec>) -> CdgAlgebra {
        CdgAlgebra { algebra, h: Vec::new() }
    }

    pub fn d(&self) -> GradedMap {
        self.algebra
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.algebra.carrier, &self.algebra.carrier, 1))
    }

    /// [h, z] = h z - z h (h has even degree 2, so no sign).
    pub fn h_commutator(&self, z: &GElem) -> Option<GElem> {
        let hz = self.algebra.mul_elems(&self.h, z)?;
        let zh = self.algebra.mul_elems(z, &self.h)?;
        Some(gelem_sub(&hz, &zh))
    }

    pub fn check(&self) -> Result<(), Error> {
        self.algebra.check_associativity()?;
        self.algebra.check_leibniz()?;
        if !self.h.is_empty() && crate::graded::gelem_degree(&self.h) != Some(2) {
            return Err(Error::axiom("curvature", "h", "h must sit in degree 2"));
        }
        let d = self.d();
        // (i) d²(b) = hb - bh
        for b in self.algebra.carrier.ids() {
            let lhs = d.apply(&d.col(b));
            let Some(rhs) = self.h_commutator(&vec![(b, self.algebra.field().one())]) else {
                continue;
            };
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-ring-axiom-i",
                    self.algebra.carrier.label(b),
                    "d^2(b) != hb - bh",
                ));
            }
        }
        // (ii) d(h) = 0
        if !d.apply(&self.h).is_empty() {
            return Err(Error::axiom("cdg-ring-axiom-ii", "h", "d(h) != 0"));
        }
        Ok(())
    }
}

/// A CDG-coalgebra: graded coalgebra, odd coderivation d of degree +1,
/// curvature linear function h : C^{-2} -> k with d²(c) = h*c - c*h and
/// h(d(c)) = 0.
#[derive(Clone, Debug)]
pub struct CdgCoalgebra {
    pub coalgebra: Arc<CoalgebraSpec>,
    pub h: Functional,
}

impl CdgCoalgebra {
    pub fn uncurved(coalgebra: Arc<CoalgebraSpec>) -> CdgCoalgebra {
        let h = Functional::zero(coalgebra.field(), 2);
        CdgCoalgebra { coalgebra, h }
    }

    pub fn d(&self) -> GradedMap {
        self.coalgebra
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.coalgebra.carrier, &self.coalgebra.carrier, 1))
    }

    /// C viewed as a left comodule over itself (coaction = comultiplication).
    pub fn self_left_comodule(&self) -> ComoduleSpec {
        let mut com = ComoduleSpec::new(
            Arc::clone(&self.coalgebra),
            Arc::clone(&self.coalgebra.carrier),
            CoSide::Left,
        );
        for c in self.coalgebra.carrier.ids() {
            com.set_coaction(c, self.coalgebra.comul_basis(c));
        }
        com
    }

    pub fn self_right_comodule(&self) -> ComoduleSpec {
        let mut com = ComoduleSpec::new(
            Arc::clone(&self.coalgebra),
            Arc::clone(&self.coalgebra.carrier),
            CoSide::Right,
        );
        for c in self.coalgebra.carrier.ids() {
            // right coaction stores (coeff, c-part, m-part) with the tensor
            // order m ⊗ c, so the comultiplication legs swap slots
            let coact = self
                .coalgebra
                .comul_basis(c)
                .into_iter()
                .map(|(s, x, y)| (s, y, x))
                .collect();
            com.set_coaction(c, coact);
        }
        com
    }

    pub fn check(&self) -> Result<(), Error> {
        self.coalgebra.check_coassociativity()?;
        self.coalgebra.check_counit()?;
        self.coalgebra.check_coaugmentation()?;
        if self.h.degree != 2 {
            return Err(Error::axiom("curvature", "h", "h must have degree 2"));
        }
        let d = self.d();
        self.coalgebra.check_coderivation(&d)?;
        let left = self.self_left_comodule();
        let right = self.self_right_comodule();
        // (i) d²(c) = h*c - c*h
        for c in self.coalgebra.carrier.ids() {
            let lhs = d.apply(&d.col(c));
            let rhs = gelem_sub(
                &star_left(&left, &self.h, c),
                &star_right(&right, c, &self.h),
            );
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-coalgebra-axiom-i",
                    self.coalgebra.carrier.label(c),
                    "d^2(c) != h*c - c*h",
                ));
            }
            // (ii) h(d(c)) = 0
            if !self.h.eval(&d.col(c)).is_zero() {
                return Err(Error::axiom(
                    "cdg-coalgebra-axiom-ii",
                    self.coalgebra.carrier.label(c),
                    "h(d(c)) != 0",
                ));
            }
        }
        Ok(())
    }
}

/// Left CDG-module over a CDG-algebra: d_M² = h x (axiom v).
#[derive(Clone, Debug)]
pub struct CdgModule {
    pub base: Arc<CdgAlgebra>,
    pub module: ModuleSpec,
}

impl CdgModule {
    pub fn d(&self) -> GradedMap {
        self.module
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.module.carrier, &self.module.carrier, 1))
    }

    pub fn check(&self) -> Result<(), Error> {
        let field = self.module.carrier.field;
        // module axioms without d² = 0
        {
            let mut plain = self.module.clone();
            plain.differential = None;
            plain.check()?;
        }
        let d = self.d();
        let da = self.base.d();
        // Leibniz
        for a in self.base.algebra.carrier.ids() {
            for m in self.module.carrier.ids() {
                let Product::Elem(am) = self.module.act_basis(a, m) else { continue };
                let lhs = d.apply(&am);
                let t1 = self.module.act(&da.col(a), &vec![(m, field.one())]);
                let t2 = self.module.act(&vec![(a, field.one())], &d.col(m));
                let (Some(t1), Some(t2)) = (t1, t2) else { continue };
                let rhs = gelem_add(&t1, &gelem_scale(&t2, &field.one().signed(a.degree as i64)));
                if lhs != rhs {
                    return Err(Error::axiom(
                        "module-leibniz",
                        format!(
                            "({}, {})",
                            self.base.algebra.carrier.label(a),
                            self.module.carrier.label(m)
                        ),
                        "d(am) != d(a)m + (-1)^|a| a d(m)",
                    ));
                }
            }
        }
        // (v) d² = h . (-)
        for m in self.module.carrier.ids() {
            let lhs = d.apply(&d.col(m));
            let Some(rhs) = self.module.act(&self.base.h, &vec![(m, field.one())]) else {
                continue;
            };
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-module-axiom-v",
                    self.module.carrier.label(m),
                    "d^2(x) != h x",
                ));
            }
        }
        Ok(())
    }
}

/// Left CDG-comodule over a CDG-coalgebra: d_M² = h * x (axiom v); right
/// CDG-comodules obey d_N²(y) = -y * h (axiom vi).
#[derive(Clone, Debug)]
pub struct CdgComodule {
    pub base: Arc<CdgCoalgebra>,
    pub comodule: ComoduleSpec,
}

impl CdgComodule {
    pub fn d(&self) -> GradedMap {
        self.comodule
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.comodule.carrier, &self.comodule.carrier, 1))
    }

    pub fn check(&self) -> Result<(), Error> {
        {
            let mut plain = self.comodule.clone();
            plain.differential = None;
            plain.check()?;
        }
        let d = self.d();
        self.comodule.check_coaction_chain_map(&d)?;
        for m in self.comodule.carrier.ids() {
            let lhs = d.apply(&d.col(m));
            let rhs = match self.comodule.side {
                CoSide::Left => star_left(&self.comodule, &self.base.h, m),
                CoSide::Right => gelem_scale(
                    &star_right(&self.comodule, m, &self.base.h),
                    &self.comodule.carrier.field.one().neg(),
                ),
            };
            if lhs != rhs {
                return Err(Error::axiom(
                    match self.comodule.side {
                        CoSide::Left => "cdg-comodule-axiom-v",
                        CoSide::Right => "cdg-comodule-axiom-vi",
                    },
                    self.comodule.carrier.label(m),
                    "d^2 != species h-law",
                ));
            }
        }
        Ok(())
    }
}

/// Left CDG-contramodule over a CDG-coalgebra: d_P² = h * p (axiom vii).
#[derive(Clone, Debug)]
pub struct CdgContramodule {
    pub base: Arc<CdgCoalgebra>,
    pub contramodule: ContramoduleSpec,
}

impl CdgContramodule {
    pub fn d(&self) -> GradedMap {
        self.contramodule.differential.clone().unwrap_or_else(|| {
            GradedMap::zero(&self.contramodule.carrier, &self.contramodule.carrier, 1)
        })
    }

    pub fn check(&self) -> Result<(), Error> {
        {
            let mut plain = self.contramodule.clone();
            plain.differential = None;
            plain.check()?;
        }
        let d = self.d();
        self.contramodule.check_contraderivation(&d)?;
        for p in self.contramodule.carrier.ids() {
            let lhs = d.apply(&d.col(p));
            let rhs = star_contra(&self.contramodule, &self.base.h, p);
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-contramodule-axiom-vii",
                    self.contramodule.carrier.label(p),
                    "d^2(p) != h * p",
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// morphisms with change-of-connection data

/// (f, a) : B -> A between CDG-algebras; a in A^1 is the
/// change-of-connection element.
#[derive(Clone, Debug)]
pub struct CdgAlgebraMorphism {
    pub f: GradedMap,
    pub a: GElem,
}

impl CdgAlgebraMorphism {
    /// Axioms (iii) f(d z) = d f(z) + [a, f(z)] and
    /// (iv) f(h_B) = h_A + d(a) + a², plus multiplicativity and unitality.
    pub fn check(&self, src: &CdgAlgebra, tgt: &CdgAlgebra) -> Result<(), Error> {
        let field = src.algebra.field();
        if !self.f.col(src.algebra.unit).eq(&tgt.algebra.unit_elem()) {
            return Err(Error::axiom("morphism", "1", "f(1) != 1"));
        }
        for x in src.algebra.carrier.ids() {
            for y in src.algebra.carrier.ids() {
                let Product::Elem(xy) = src.algebra.mul_basis(x, y) else { continue };
                let lhs = self.f.apply(&xy);
                let Some(rhs) = tgt.algebra.mul_elems(&self.f.col(x), &self.f.col(y)) else {
                    continue;
                };
                if lhs != rhs {
                    return Err(Error::axiom(
                        "morphism",
                        format!("({}, {})", src.algebra.carrier.label(x), src.algebra.carrier.label(y)),
                        "f not multiplicative",
                    ));
                }
            }
        }
        let db = src.d();
        let da = tgt.d();
        for z in src.algebra.carrier.ids() {
            let lhs = self.f.apply(&db.col(z));
            let fz = self.f.col(z);
            let afz = tgt.algebra.mul_elems(&self.a, &fz);
            let fza = tgt.algebra.mul_elems(&fz, &self.a);
            let (Some(afz), Some(fza)) = (afz, fza) else { continue };
            let comm = gelem_sub(&afz, &gelem_scale(&fza, &field.one().signed(z.degree as i64)));
            let rhs = gelem_add(&da.apply(&fz), &comm);
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-morphism-axiom-iii",
                    src.algebra.carrier.label(z),
                    "f(dz) != d f(z) + [a, f(z)]",
                ));
            }
        }
        let lhs = self.f.apply(&src.h);
        let a2 = tgt
            .algebra
            .mul_elems(&self.a, &self.a)
            .ok_or_else(|| Error::Unsupported("a^2 overflows the window".into()))?;
        let rhs = gelem_add(&gelem_add(&tgt.h, &da.apply(&self.a)), &a2);
        if lhs != rhs {
            return Err(Error::axiom(
                "cdg-morphism-axiom-iv",
                "h",
                "f(h_B) != h_A + d(a) + a^2",
            ));
        }
        Ok(())
    }

    /// (f, a) . (g, b) = (f . g, a + f(b)).
    pub fn compose(&self, inner: &CdgAlgebraMorphism) -> Result<CdgAlgebraMorphism, Error> {
        Ok(CdgAlgebraMorphism {
            f: self.f.compose(&inner.f)?,
            a: gelem_add(&self.a, &self.f.apply(&inner.a)),
        })
    }
}

/// (f, a) : C -> D between CDG-coalgebras; a : C^{-1} -> k is the
/// change-of-connection linear function.
#[derive(Clone, Debug)]
pub struct CdgCoalgebraMorphism {
    pub f: GradedMap,
    pub a: Functional,
}

impl CdgCoalgebraMorphism {
    pub fn check(&self, src: &CdgCoalgebra, tgt: &CdgCoalgebra) -> Result<(), Error> {
        // coalgebra homomorphism: (f⊗f) mu_C = mu_D f and eps_D f = eps_C
        for c in src.coalgebra.carrier.ids() {
            let lhs = tgt.coalgebra.comul_elem(&self.f.col(c));
            let mut rhs = Vec::new();
            for (s, x, y) in src.coalgebra.comul_basis(c) {
                for (fx, cx) in self.f.col(x) {
                    for (fy, cy) in self.f.col(y) {
                        rhs.push((s.mul(&cx).mul(&cy), fx, fy));
                    }
                }
            }
            if lhs != crate::coalgebra::pair_normalize(rhs) {
                return Err(Error::axiom(
                    "morphism",
                    src.coalgebra.carrier.label(c),
                    "f not comultiplicative",
                ));
            }
            let e_lhs = tgt.coalgebra.counit.eval(&self.f.col(c));
            let e_rhs = src.coalgebra.counit.eval_basis(c);
            if e_lhs != e_rhs {
                return Err(Error::axiom(
                    "morphism",
                    src.coalgebra.carrier.label(c),
                    "f not counital",
                ));
            }
        }
        let dc = src.d();
        let dd = tgt.d();
        let left = src.self_left_comodule();
        let right = src.self_right_comodule();
        for c in src.coalgebra.carrier.ids() {
            // (iii) d_D(f(c)) = f(d_C(c)) + f(a*c) - (-1)^{|c|} f(c*a)
            let lhs = dd.apply(&self.f.col(c));
            let t1 = self.f.apply(&dc.col(c));
            let t2 = self.f.apply(&star_left(&left, &self.a, c));
            let t3 = self.f.apply(&star_right(&right, c, &self.a));
            let rhs = gelem_sub(
                &gelem_add(&t1, &t2),
                &gelem_scale(&t3, &self.f.source.field.one().signed(c.degree as i64)),
            );
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-morphism-axiom-iii",
                    src.coalgebra.carrier.label(c),
                    "d_D f != f d_C + f(a*c) - (-1)^|c| f(c*a)",
                ));
            }
            // (iv) h_D(f(c)) = h_C(c) + a(d_C(c)) + (a*a)(c)
            let lhs = tgt.h.eval(&self.f.col(c));
            let a2 = star_fn(&src.coalgebra, &self.a, &self.a);
            let rhs = src
                .h
                .eval_basis(c)
                .add(&self.a.eval(&dc.col(c)))
                .add(&a2.eval_basis(c));
            if lhs != rhs {
                return Err(Error::axiom(
                    "cdg-morphism-axiom-iv",
                    src.coalgebra.carrier.label(c),
                    "h_D(f(c)) != h_C(c) + a(d c) + a*a(c)",
                ));
            }
        }
        Ok(())
    }

    /// (f, a) . (g, b) = (f . g, b + a . g) for C --(g,b)--> D --(f,a)--> E.
    pub fn compose(&self, inner: &CdgCoalgebraMorphism) -> Result<CdgCoalgebraMorphism, Error> {
        let mut a = inner.a.clone();
        // a . g as a functional on the source of g
        let mut pulled = Functional::zero(a.field, self.a.degree);
        for c in inner.f.source.ids() {
            let v = self.a.eval(&inner.f.col(c));
            if !v.is_zero() {
                pulled.set(c, v);
            }
        }
        a = a.add(&pulled);
        Ok(CdgCoalgebraMorphism {
            f: self.f.compose(&inner.f)?,
            a,
        })
    }
}

// ---------------------------------------------------------------------------
// connection twists

/// Twist a CDG-algebra by a in B^1: d'(z) = d(z) + [a, z],
/// h' = h + d(a) + a². The identity pair (id, a) : (B, d', h') -> (B, d, h)
/// is then a change-of-connection isomorphism.
pub fn twist_algebra(b: &CdgAlgebra, a: &GElem) -> Result<CdgAlgebra, Error> {
    let d = b.d();
    let field = b.algebra.field();
    let carrier = Arc::clone(&b.algebra.carrier);
    let d2 = GradedMap::from_fn(&carrier, &carrier, 1, |z| {
        let ze = vec![(z, field.one())];
        let az = b.algebra.mul_elems(a, &ze).unwrap_or_default();
        let za = b.algebra.mul_elems(&ze, a).unwrap_or_default();
        let comm = gelem_sub(&az, &gelem_scale(&za, &field.one().signed(z.degree as i64)));
        gelem_add(&d.col(z), &comm)
    });
    let a2 = b
        .algebra
        .mul_elems(a, a)
        .ok_or_else(|| Error::Unsupported("a^2 overflows".into()))?;
    let h = gelem_add(&gelem_add(&b.h, &d.apply(a)), &a2);
    let mut alg = (*b.algebra).clone();
    alg.differential = Some(d2);
    Ok(CdgAlgebra {
        algebra: Arc::new(alg),
        h,
    })
}

/// Twist a CDG-coalgebra by a degree-1 functional a:
/// d'(c) = d(c) + a*c - (-1)^{|c|} c*a, h' = h + a . d + a*a.
pub fn twist_coalgebra(c: &CdgCoalgebra, a: &Functional) -> CdgCoalgebra {
    let d = c.d();
    let field = c.coalgebra.field();
    let left = c.self_left_comodule();
    let right = c.self_right_comodule();
    let carrier = Arc::clone(&c.coalgebra.carrier);
    let d2 = GradedMap::from_fn(&carrier, &carrier, 1, |z| {
        let t = gelem_sub(
            &star_left(&left, a, z),
            &gelem_scale(&star_right(&right, z, a), &field.one().signed(z.degree as i64)),
        );
        gelem_add(&d.col(z), &t)
    });
    let mut h = c.h.clone();
    // a(d(-)) as a degree-2 functional
    let mut ad = Functional::zero(field, 2);
    for z in c.coalgebra.carrier.ids() {
        if z.degree == -2 {
            let v = a.eval(&d.col(z));
            if !v.is_zero() {
                ad.set(z, v);
            }
        }
    }
    h = h.add(&ad).add(&star_fn(&c.coalgebra, a, a));
    let mut co = (*c.coalgebra).clone();
    co.differential = Some(d2);
    CdgCoalgebra {
        coalgebra: Arc::new(co),
        h,
    }
}

/// Twist of a left CDG-module differential: d'(x) = d(x) + a x.
pub fn twist_module(m: &CdgModule, base2: &Arc<CdgAlgebra>, a: &GElem) -> Result<CdgModule, Error> {
    let d = m.d();
    let field = m.module.carrier.field;
    let carrier = Arc::clone(&m.module.carrier);
    let mut cols = BTreeMap::new();
    for x in carrier.ids() {
        let ax = m
            .module
            .act(a, &vec![(x, field.one())])
            .ok_or_else(|| Error::Unsupported("a x overflows".into()))?;
        cols.insert(x, gelem_add(&d.col(x), &ax));
    }
    let d2 = GradedMap::from_fn(&carrier, &carrier, 1, |x| cols[&x].clone());
    let mut module = m.module.clone();
    module.differential = Some(d2);
    Ok(CdgModule {
        base: Arc::clone(base2),
        module,
    })
}

/// Twist of a left CDG-comodule differential: d'(x) = d(x) + a * x.
pub fn twist_comodule(m: &CdgComodule, base2: &Arc<CdgCoalgebra>, a: &Functional) -> CdgComodule {
    let d = m.d();
    let carrier = Arc::clone(&m.comodule.carrier);
    let com = m.comodule.clone();
    let d2 = GradedMap::from_fn(&carrier, &carrier, 1, |x| {
        gelem_add(&d.col(x), &star_left(&com, a, x))
    });
    let mut comodule = m.comodule.clone();
    comodule.differential = Some(d2);
    CdgComodule {
        base: Arc::clone(base2),
        comodule,
    }
}

/// Twist of a left CDG-contramodule differential: d'(p) = d(p) + a * p.
pub fn twist_contramodule(
    m: &CdgContramodule,
    base2: &Arc<CdgCoalgebra>,
    a: &Functional,
) -> CdgContramodule {
    let d = m.d();
    let carrier = Arc::clone(&m.contramodule.carrier);
    let contra = m.contramodule.clone();
    let d2 = GradedMap::from_fn(&carrier, &carrier, 1, |p| {
        gelem_add(&d.col(p), &star_contra(&contra, a, p))
    });
    let mut contramodule = m.contramodule.clone();
    contramodule.differential = Some(d2);
    CdgContramodule {
        base: Arc::clone(base2),
        contramodule,
    }
}

// ---------------------------------------------------------------------------
// Hom complexes

/// The complex of B-linear homogeneous maps between two left CDG-modules:
/// carrier basis = a computed basis of Hom_B(L, M) per degree, with
/// d(f) = d_M f - (-1)^{|f|} f d_L. The differential squares to zero even
/// when h != 0 (the curvature terms cancel).
pub struct HomComplex {
    pub space: Space,
    pub d: GradedMap,
    /// the actual map underlying each basis vector
    pub vectors: Vec<(BasisId, GradedMap)>,
}

/// Basis of the space of homogeneous B-linear maps L -> M of degree n:
/// f(b x) = (-1)^{n |b|} b f(x).
fn module_hom_basis(l: &CdgModule, m: &CdgModule, n: i32) -> Vec<GradedMap> {
    let field = l.module.carrier.field;
    let lsp = &l.module.carrier;
    let msp = &m.module.carrier;
    // unknowns: entries f[(x, y)] for x in L, y in M with |y| = |x| + n
    let mut unknowns: Vec<(BasisId, BasisId)> = Vec::new();
    for x in lsp.ids() {
        for y in msp.ids_in_degree(x.degree + n) {
            unknowns.push((x, y));
        }
    }
    let upos: std::collections::HashMap<(BasisId, BasisId), usize> =
        unknowns.iter().enumerate().map(|(k, u)| (*u, k)).collect();
    // constraints per (b, x, y'): coefficient rows
    let mut rows: Vec<matrix::SVec> = Vec::new();
    for b in l.base.algebra.carrier.ids() {
        if b == l.base.algebra.unit {
            continue;
        }
        for x in lsp.ids() {
            let Product::Elem(bx) = l.module.act_basis(b, x) else { continue };
            // f(bx) - (-1)^{n|b|} b f(x) = 0, componentwise in M
            let mut comp: std::collections::HashMap<BasisId, matrix::SVec> =
                std::collections::HashMap::new();
            for (xx, s) in &bx {
                for y in msp.ids_in_degree(xx.degree + n) {
                    if let Some(k) = upos.get(&(*xx, y)) {
                        comp.entry(y).or_default().push((*k, s.clone()));
                    }
                }
            }
            // b f(x): f(x) = sum over y of f[(x,y)] y; b y via action
            for y in msp.ids_in_degree(x.degree + n) {
                let Some(k) = upos.get(&(x, y)) else { continue };
                let Product::Elem(by) = m.module.act_basis(b, y) else { continue };
                let sgn = field.one().signed(n as i64 * b.degree as i64).neg();
                for (yy, s) in by {
                    comp.entry(yy).or_default().push((*k, s.mul(&sgn)));
                }
            }
            for (_, row) in comp {
                let row = matrix::svec_normalize(row);
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let mat = matrix::SparseMat::from_triplets(
        field,
        rows.len(),
        unknowns.len(),
        rows.iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, s)| (r, *c, s.clone()))),
    );
    mat.kernel_basis()
        .into_iter()
        .map(|k| {
            let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
            for (pos, s) in k {
                let (x, y) = unknowns[pos];
                cols.entry(x).or_default().push((y, s));
            }
            GradedMap::from_fn(lsp, msp, n, |x| cols.get(&x).cloned().unwrap_or_default())
        })
        .collect()
}

/// Hom_B(L, M) as a complex, over the degree range the windows see.
pub fn hom_complex(l: &CdgModule, m: &CdgModule) -> Result<HomComplex, Error> {
    let field = l.module.carrier.field;
    let lo = m.module.carrier.window.lo - l.module.carrier.window.hi;
    let hi = m.module.carrier.window.hi - l.module.carrier.window.lo;
    let window = crate::graded::DegreeWindow::new(lo, hi.max(lo), u32::MAX)?;
    let mut per_degree: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
    let mut vectors: Vec<(BasisId, GradedMap)> = Vec::new();
    for n in lo..=hi {
        let basis = module_hom_basis(l, m, n);
        if basis.is_empty() {
            continue;
        }
        let slot = per_degree.entry(n).or_default();
        for (i, f) in basis.into_iter().enumerate() {
            let id = BasisId { degree: n, index: slot.len() };
            slot.push(BasisElem { label: format!("f{n}_{i}"), weight: 0 });
            vectors.push((id, f));
        }
    }
    let space = Arc::new(GradedVectorSpace::new(field, window, per_degree)?);
    let dl = l.d();
    let dm = m.d();
    // express d(f) in the chosen basis per degree
    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    for (id, f) in &vectors {
        let n = id.degree;
        let df = dm
            .compose(f)?
            .add(&f.compose(&dl)?.scale(&field.one().signed(n as i64).neg()))?;
        // membership in span of degree n+1 basis
        let basis_next: Vec<&GradedMap> = vectors
            .iter()
            .filter(|(j, _)| j.degree == n + 1)
            .map(|(_, g)| g)
            .collect();
        if df.is_zero() {
            continue;
        }
        // flatten maps to vectors over (x, y) pairs for membership
        let flatten = |g: &GradedMap| -> matrix::SVec {
            let mut v = Vec::new();
            for (x, col) in g.cols_iter() {
                for (y, s) in col {
                    // pair index: stable hash via ordering
                    let key = pair_index(&l.module.carrier, &m.module.carrier, *x, *y);
                    v.push((key, s.clone()));
                }
            }
            matrix::svec_normalize(v)
        };
        let cols_flat: Vec<matrix::SVec> = basis_next.iter().map(|g| flatten(g)).collect();
        let dim = l.module.carrier.total_dim() * m.module.carrier.total_dim();
        let coords = matrix::membership(field, dim, &cols_flat, &flatten(&df)).ok_or_else(|| {
            Error::axiom("hom-complex", "d", "d(f) is not B-linear")
        })?;
        let ids_next: Vec<BasisId> = vectors
            .iter()
            .filter(|(j, _)| j.degree == n + 1)
            .map(|(j, _)| *j)
            .collect();
        let img: GElem = coords
            .into_iter()
            .map(|(k, s)| (ids_next[k], s))
            .collect();
        cols.insert(*id, gelem_normalize(img));
    }
    let d = GradedMap::from_fn(&space, &space, 1, |id| cols.get(&id).cloned().unwrap_or_default());
    // d² = 0 even in the curved case
    let dd = d.compose(&d)?;
    if !dd.is_zero() {
        return Err(Error::axiom("hom-complex", "d", "d^2 != 0 on Hom(L, M)"));
    }
    Ok(HomComplex { space, d, vectors })
}

fn pair_index(lsp: &Space, msp: &Space, x: BasisId, y: BasisId) -> usize {
    let lf = crate::graded::Flattener::new(lsp);
    let mf = crate::graded::Flattener::new(msp);
    lf.pos(x) * mf.dim() + mf.pos(y)
}

// ---------------------------------------------------------------------------
// restriction along morphisms

/// Restrict a left CDG-module along (f, a) : B -> A: the B-action is
/// b . x = f(b) x and the differential twists to d'(x) = d(x) + a x.
pub fn restrict_module(
    phi: &CdgAlgebraMorphism,
    src: &Arc<CdgAlgebra>,
    x: &CdgModule,
) -> Result<CdgModule, Error> {
    let field = x.module.carrier.field;
    let mut module = ModuleSpec::new(Arc::clone(&src.algebra), Arc::clone(&x.module.carrier));
    for b in src.algebra.carrier.ids() {
        if b == src.algebra.unit {
            continue;
        }
        for m in x.module.carrier.ids() {
            if let Some(v) = x.module.act(&phi.f.col(b), &vec![(m, field.one())]) {
                module.set_action(b, m, v);
            }
        }
    }
    let d = x.d();
    let carrier = Arc::clone(&x.module.carrier);
    let mut cols = BTreeMap::new();
    for m in carrier.ids() {
        let am = x
            .module
            .act(&phi.a, &vec![(m, field.one())])
            .ok_or_else(|| Error::Unsupported("a x overflows".into()))?;
        cols.insert(m, gelem_add(&d.col(m), &am));
    }
    module.differential = Some(GradedMap::from_fn(&carrier, &carrier, 1, |m| cols[&m].clone()));
    Ok(CdgModule {
        base: Arc::clone(src),
        module,
    })
}

/// Corestriction of a left CDG-comodule along (f, a) : C -> D: the
/// D-coaction is (f ⊗ id) . nu and the differential twists to
/// d'(x) = d(x) + a * x (a evaluated through the original C-coaction).
pub fn corestrict_comodule(
    phi: &CdgCoalgebraMorphism,
    tgt: &Arc<CdgCoalgebra>,
    x: &CdgComodule,
) -> CdgComodule {
    let mut comodule = ComoduleSpec::new(
        Arc::clone(&tgt.coalgebra),
        Arc::clone(&x.comodule.carrier),
        x.comodule.side,
    );
    for m in x.comodule.carrier.ids() {
        let mut coact = Vec::new();
        for (s, c, mm) in x.comodule.coaction_basis(m) {
            for (fc, cf) in phi.f.col(c) {
                coact.push((s.mul(&cf), fc, mm));
            }
        }
        comodule.set_coaction(m, coact);
    }
    let d = x.d();
    let old = x.comodule.clone();
    let carrier = Arc::clone(&x.comodule.carrier);
    let a = phi.a.clone();
    comodule.differential = Some(GradedMap::from_fn(&carrier, &carrier, 1, |m| {
        gelem_add(&d.col(m), &star_left(&old, &a, m))
    }));
    CdgComodule {
        base: Arc::clone(tgt),
        comodule,
    }
}

/// Contrarestriction of a left CDG-contramodule along (f, a) : C -> D.
pub fn contrarestrict_contramodule(
    phi: &CdgCoalgebraMorphism,
    tgt: &Arc<CdgCoalgebra>,
    x: &CdgContramodule,
) -> CdgContramodule {
    // the D-contraaction on rank-one e_{d,p}: pull back along f:
    // pi_D(e_{d,p}) = pi_C(c -> <f(c), d> p)
    let mut contramodule = ContramoduleSpec::new(
        Arc::clone(&tgt.coalgebra),
        Arc::clone(&x.contramodule.carrier),
    );
    let field = x.contramodule.carrier.field;
    for dd in tgt.coalgebra.carrier.ids() {
        for p in x.contramodule.carrier.ids() {
            let mut img: GElem = Vec::new();
            for c in x.contramodule.coalgebra.carrier.ids() {
                let coeff: Scalar = phi
                    .f
                    .col(c)
                    .iter()
                    .filter(|(y, _)| *y == dd)
                    .fold(field.zero(), |acc, (_, s)| acc.add(s));
                if !coeff.is_zero() {
                    img.extend(gelem_scale(&x.contramodule.contra_basis(c, p), &coeff));
                }
            }
            contramodule.set_contra(dd, p, img);
        }
    }
    let d = x.d();
    let old = x.contramodule.clone();
    let carrier = Arc::clone(&x.contramodule.carrier);
    let a = phi.a.clone();
    contramodule.differential = Some(GradedMap::from_fn(&carrier, &carrier, 1, |p| {
        gelem_add(&d.col(p), &star_contra(&old, &a, p))
    }));
    CdgContramodule {
        base: Arc::clone(tgt),
        contramodule,
    }
}
