//! Graded associative algebras with unit, optional augmentation and
//! differential, plus left modules over them. Multiplication is stored as a
//! sparse structure-constant table; products that escape the truncation
//! window are flagged as overflow rather than silently dropped.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::Error;
use crate::field::Scalar;
use crate::functional::Functional;
use crate::graded::{gelem_add, gelem_normalize, gelem_scale, BasisId, GElem, GradedMap, Space};
use crate::par::maybe_par_find;

/// Result of multiplying two basis vectors: an element, or an overflow
/// marker when the true product lives outside the window.
#[derive(Clone, Debug, PartialEq)]
pub enum Product {
    Elem(GElem),
    Overflow,
}

impl Product {
    pub fn into_elem(self) -> Option<GElem> {
        match self {
            Product::Elem(e) => Some(e),
            Product::Overflow => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    pub carrier: Space,
    pub unit: BasisId,
    table: HashMap<(BasisId, BasisId), GElem>,
    /// Pairs whose product escapes the degree window (weight overflow is
    /// detected from basis weights and need not be listed).
    overflow: HashSet<(BasisId, BasisId)>,
    pub augmentation: Option<Functional>,
    pub differential: Option<GradedMap>,
}

impl AlgebraSpec {
    pub fn new(carrier: Space, unit_label: &str) -> Result<AlgebraSpec, Error> {
        let unit = carrier.find(0, unit_label).ok_or_else(|| Error::BasisMismatch {
            degree: 0,
            detail: format!("unit label `{unit_label}` not in degree-0 basis"),
        })?;
        Ok(AlgebraSpec {
            carrier,
            unit,
            table: HashMap::new(),
            overflow: HashSet::new(),
            augmentation: None,
            differential: None,
        })
    }

    pub fn set_product(&mut self, a: BasisId, b: BasisId, value: GElem) {
        let v = gelem_normalize(value);
        if v.is_empty() {
            self.table.remove(&(a, b));
        } else {
            self.table.insert((a, b), v);
        }
    }

    pub fn mark_overflow(&mut self, a: BasisId, b: BasisId) {
        self.overflow.insert((a, b));
    }

    pub fn field(&self) -> crate::field::Field {
        self.carrier.field
    }

    fn weight_overflows(&self, a: BasisId, b: BasisId) -> bool {
        self.carrier.weight(a) + self.carrier.weight(b) > self.carrier.window.weight_cap
    }

    pub fn mul_basis(&self, a: BasisId, b: BasisId) -> Product {
        if a == self.unit {
            return Product::Elem(vec![(b, self.field().one())]);
        }
        if b == self.unit {
            return Product::Elem(vec![(a, self.field().one())]);
        }
        if self.weight_overflows(a, b) || self.overflow.contains(&(a, b)) {
            return Product::Overflow;
        }
        if !self.carrier.window.contains(a.degree + b.degree) {
            return Product::Overflow;
        }
        Product::Elem(self.table.get(&(a, b)).cloned().unwrap_or_default())
    }

    /// Bilinear extension; `None` when any contributing product overflows.
    pub fn mul_elems(&self, x: &GElem, y: &GElem) -> Option<GElem> {
        let mut acc: GElem = Vec::new();
        for (a, ca) in x {
            for (b, cb) in y {
                match self.mul_basis(*a, *b) {
                    Product::Elem(e) => acc.extend(gelem_scale(&e, &ca.mul(cb))),
                    Product::Overflow => return None,
                }
            }
        }
        Some(gelem_normalize(acc))
    }

    pub fn unit_elem(&self) -> GElem {
        vec![(self.unit, self.field().one())]
    }

    /// Basis vectors other than the unit; in an augmentation-adapted basis
    /// these span a complement of k·1.
    pub fn non_unit_ids(&self) -> Vec<BasisId> {
        self.carrier.ids().into_iter().filter(|id| *id != self.unit).collect()
    }

    /// Unit laws and associativity on all basis triples whose products stay
    /// inside the window. Returns the first violated instance.
    pub fn check_associativity(&self) -> Result<(), Error> {
        let ids = self.carrier.ids();
        let mut triples = Vec::new();
        for &a in &ids {
            for &b in &ids {
                for &c in &ids {
                    triples.push((a, b, c));
                }
            }
        }
        let bad = maybe_par_find(&triples, |&(a, b, c)| {
            let left = match self.mul_basis(a, b).into_elem() {
                Some(ab) => self.mul_elems(&ab, &vec![(c, self.field().one())]),
                None => None,
            };
            let right = match self.mul_basis(b, c).into_elem() {
                Some(bc) => self.mul_elems(&vec![(a, self.field().one())], &bc),
                None => None,
            };
            match (left, right) {
                (Some(l), Some(r)) if l != r => Some((a, b, c)),
                _ => None,
            }
        });
        if let Some((a, b, c)) = bad {
            return Err(Error::axiom(
                "associativity",
                format!(
                    "({}, {}, {})",
                    self.carrier.label(a),
                    self.carrier.label(b),
                    self.carrier.label(c)
                ),
                "(ab)c != a(bc)",
            ));
        }
        Ok(())
    }

    pub fn check_augmentation(&self) -> Result<(), Error> {
        let Some(alpha) = &self.augmentation else { return Ok(()) };
        if alpha.degree != 0 {
            return Err(Error::axiom("augmentation", "alpha", "must have degree 0"));
        }
        if !alpha.eval_basis(self.unit).is_one() {
            return Err(Error::axiom("augmentation", "1", "alpha(1) != 1"));
        }
        for a in self.carrier.ids() {
            for b in self.carrier.ids() {
                if let Product::Elem(ab) = self.mul_basis(a, b) {
                    let lhs = alpha.eval(&ab);
                    let rhs = alpha.eval_basis(a).mul(&alpha.eval_basis(b));
                    if lhs != rhs {
                        return Err(Error::axiom(
                            "augmentation",
                            format!("({}, {})", self.carrier.label(a), self.carrier.label(b)),
                            "alpha not multiplicative",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Leibniz rule d(ab) = d(a)b + (-1)^{|a|} a d(b) wherever the products
    /// involved stay inside the window.
    pub fn check_leibniz(&self) -> Result<(), Error> {
        let Some(d) = &self.differential else { return Ok(()) };
        for a in self.carrier.ids() {
            for b in self.carrier.ids() {
                let Product::Elem(ab) = self.mul_basis(a, b) else { continue };
                let lhs = d.apply(&ab);
                let da_b = self.mul_elems(&d.col(a), &vec![(b, self.field().one())]);
                let a_db = self.mul_elems(&vec![(a, self.field().one())], &d.col(b));
                let (Some(da_b), Some(a_db)) = (da_b, a_db) else { continue };
                let rhs = gelem_add(&da_b, &gelem_scale(&a_db, &self.field().one().signed(a.degree as i64)));
                if lhs != rhs {
                    return Err(Error::axiom(
                        "leibniz",
                        format!("({}, {})", self.carrier.label(a), self.carrier.label(b)),
                        "d(ab) != d(a)b + (-1)^|a| a d(b)",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Full DG-algebra axiom suite: associativity, unit, augmentation,
    /// Leibniz, d^2 = 0 and alpha . d = 0. Curved variants are checked by
    /// the `cdg` module instead.
    pub fn check(&self) -> Result<(), Error> {
        self.check_associativity()?;
        self.check_augmentation()?;
        self.check_leibniz()?;
        if let Some(d) = &self.differential {
            if d.degree != 1 {
                return Err(Error::axiom("differential", "d", "must have degree +1"));
            }
            let dd = d.compose(d)?;
            if !dd.is_zero() {
                return Err(Error::axiom("d-squared", "d", "d^2 != 0"));
            }
            if let Some(alpha) = &self.augmentation {
                for id in self.carrier.ids() {
                    if !alpha.eval(&d.col(id)).is_zero() {
                        return Err(Error::axiom(
                            "augmentation",
                            self.carrier.label(id),
                            "alpha(d(a)) != 0",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A left module over an algebra.
#[derive(Clone, Debug)]
pub struct ModuleSpec {
    pub algebra: Arc<AlgebraSpec>,
    pub carrier: Space,
    action: HashMap<(BasisId, BasisId), GElem>,
    pub differential: Option<GradedMap>,
}

impl ModuleSpec {
    pub fn new(algebra: Arc<AlgebraSpec>, carrier: Space) -> ModuleSpec {
        ModuleSpec {
            algebra,
            carrier,
            action: HashMap::new(),
            differential: None,
        }
    }

    pub fn set_action(&mut self, a: BasisId, m: BasisId, value: GElem) {
        let v = gelem_normalize(value);
        if v.is_empty() {
            self.action.remove(&(a, m));
        } else {
            self.action.insert((a, m), v);
        }
    }

    pub fn act_basis(&self, a: BasisId, m: BasisId) -> Product {
        if a == self.algebra.unit {
            return Product::Elem(vec![(m, self.carrier.field.one())]);
        }
        let w = self.algebra.carrier.weight(a) + self.carrier.weight(m);
        if w > self.carrier.window.weight_cap
            || !self.carrier.window.contains(a.degree + m.degree)
        {
            return Product::Overflow;
        }
        Product::Elem(self.action.get(&(a, m)).cloned().unwrap_or_default())
    }

    pub fn act(&self, x: &GElem, m: &GElem) -> Option<GElem> {
        let mut acc: GElem = Vec::new();
        for (a, ca) in x {
            for (b, cb) in m {
                match self.act_basis(*a, *b) {
                    Product::Elem(e) => acc.extend(gelem_scale(&e, &ca.mul(cb))),
                    Product::Overflow => return None,
                }
            }
        }
        Some(gelem_normalize(acc))
    }

    /// Associativity (ab)m = a(bm), unitality, and (when differentials are
    /// present) the module Leibniz rule and d^2 = 0.
    pub fn check(&self) -> Result<(), Error> {
        let field = self.carrier.field;
        for a in self.algebra.carrier.ids() {
            for b in self.algebra.carrier.ids() {
                for m in self.carrier.ids() {
                    let left = match self.algebra.mul_basis(a, b).into_elem() {
                        Some(ab) => self.act(&ab, &vec![(m, field.one())]),
                        None => None,
                    };
                    let right = match self.act_basis(b, m).into_elem() {
                        Some(bm) => self.act(&vec![(a, field.one())], &bm),
                        None => None,
                    };
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            return Err(Error::axiom(
                                "module-associativity",
                                format!(
                                    "({}, {}, {})",
                                    self.algebra.carrier.label(a),
                                    self.algebra.carrier.label(b),
                                    self.carrier.label(m)
                                ),
                                "(ab)m != a(bm)",
                            ));
                        }
                    }
                }
            }
        }
        if let Some(dm) = &self.differential {
            let da = self
                .algebra
                .differential
                .clone()
                .unwrap_or_else(|| GradedMap::zero(&self.algebra.carrier, &self.algebra.carrier, 1));
            for a in self.algebra.carrier.ids() {
                for m in self.carrier.ids() {
                    let Product::Elem(am) = self.act_basis(a, m) else { continue };
                    let lhs = dm.apply(&am);
                    let t1 = self.act(&da.col(a), &vec![(m, field.one())]);
                    let t2 = self.act(&vec![(a, field.one())], &dm.col(m));
                    let (Some(t1), Some(t2)) = (t1, t2) else { continue };
                    let rhs = gelem_add(&t1, &gelem_scale(&t2, &field.one().signed(a.degree as i64)));
                    if lhs != rhs {
                        return Err(Error::axiom(
                            "module-leibniz",
                            format!("({}, {})", self.algebra.carrier.label(a), self.carrier.label(m)),
                            "d(am) != d(a)m + (-1)^|a| a d(m)",
                        ));
                    }
                }
            }
            let dd = dm.compose(dm)?;
            if !dd.is_zero() {
                return Err(Error::axiom("d-squared", "d_M", "d^2 != 0"));
            }
        }
        Ok(())
    }
}

/// The one-dimensional module k_alpha on which the algebra acts through a
/// degree-0 character chi (for the augmentation, chi = alpha).
pub fn character_module(algebra: &Arc<AlgebraSpec>, chi: &Functional, label: &str) -> ModuleSpec {
    let carrier = crate::graded::GradedVectorSpace::line(
        algebra.field(),
        algebra.carrier.window,
        label,
    );
    let m0 = BasisId { degree: 0, index: 0 };
    let mut module = ModuleSpec::new(Arc::clone(algebra), carrier);
    for a in algebra.carrier.ids() {
        let c: Scalar = chi.eval_basis(a);
        if !c.is_zero() && a != algebra.unit {
            module.set_action(a, m0, vec![(m0, c)]);
        }
    }
    module
}
