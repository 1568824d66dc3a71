//! Homogeneous linear functionals on graded spaces.

use std::collections::HashMap;

use crate::field::{Field, Scalar};
use crate::graded::{BasisId, GElem};

/// A homogeneous functional of degree `n`: nonzero only on elements of
/// degree `-n` (so that the value sits in degree 0).
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub field: Field,
    pub degree: i32,
    vals: HashMap<BasisId, Scalar>,
}

impl Functional {
    pub fn zero(field: Field, degree: i32) -> Functional {
        Functional {
            field,
            degree,
            vals: HashMap::new(),
        }
    }

    pub fn from_pairs(
        field: Field,
        degree: i32,
        pairs: impl IntoIterator<Item = (BasisId, Scalar)>,
    ) -> Functional {
        let mut f = Functional::zero(field, degree);
        for (id, c) in pairs {
            f.set(id, c);
        }
        f
    }

    pub fn set(&mut self, id: BasisId, c: Scalar) {
        assert_eq!(
            id.degree, -self.degree,
            "functional of degree {} evaluated away from degree {}",
            self.degree, -self.degree
        );
        if c.is_zero() {
            self.vals.remove(&id);
        } else {
            self.vals.insert(id, c);
        }
    }

    pub fn eval_basis(&self, id: BasisId) -> Scalar {
        if id.degree != -self.degree {
            return self.field.zero();
        }
        self.vals.get(&id).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn eval(&self, v: &GElem) -> Scalar {
        let mut acc = self.field.zero();
        for (id, c) in v {
            let x = self.eval_basis(*id);
            if !x.is_zero() {
                acc = acc.add(&x.mul(c));
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn add(&self, rhs: &Functional) -> Functional {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for (id, c) in &rhs.vals {
            let s = out.eval_basis(*id).add(c);
            out.set(*id, s);
        }
        out
    }

    pub fn neg(&self) -> Functional {
        Functional {
            field: self.field,
            degree: self.degree,
            vals: self.vals.iter().map(|(id, c)| (*id, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Functional {
        if c.is_zero() {
            return Functional::zero(self.field, self.degree);
        }
        Functional {
            field: self.field,
            degree: self.degree,
            vals: self.vals.iter().map(|(id, x)| (*id, x.mul(c))).collect(),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = (&BasisId, &Scalar)> {
        self.vals.iter()
    }
}
