//! Degreewise homology of (pre)complexes by exact Gaussian elimination.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::graded::{DegreeWindow, GradedMap, Space};
use crate::par::maybe_par_map;

/// Per-degree homology dimensions together with the sub-window on which the
/// numbers are exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyReport {
    pub dims: BTreeMap<i32, usize>,
    pub valid_lo: i32,
    pub valid_hi: i32,
}

impl HomologyReport {
    pub fn dim(&self, degree: i32) -> Option<usize> {
        if degree < self.valid_lo || degree > self.valid_hi {
            return None;
        }
        Some(self.dims.get(&degree).copied().unwrap_or(0))
    }

    pub fn is_zero_on(&self, lo: i32, hi: i32) -> bool {
        (lo.max(self.valid_lo)..=hi.min(self.valid_hi))
            .all(|d| self.dims.get(&d).copied().unwrap_or(0) == 0)
    }
}

/// Homology of `... -> X --d_in--> Y --d_out--> Z -> ...` at every degree of
/// the middle space Y that both maps cover exactly. Checks d_out . d_in = 0
/// on the validity range and reports the offending degree otherwise.
pub fn homology(d_in: &GradedMap, d_out: &GradedMap) -> Result<HomologyReport, Error> {
    if d_in.degree != 1 || d_out.degree != 1 {
        return Err(Error::Shape(format!(
            "homology expects degree +1 differentials, got {} and {}",
            d_in.degree, d_out.degree
        )));
    }
    d_in.target.compatible_with(&d_out.source)?;
    let y: &Space = &d_out.source;

    // a degree i of Y is valid when d_out is exact at i and d_in at i-1
    let valid = DegreeWindow {
        lo: d_out.valid.lo.max(d_in.valid.lo + 1),
        hi: d_out.valid.hi.min(d_in.valid.hi + 1),
        weight_cap: d_out.valid.weight_cap,
    };
    if valid.lo > valid.hi {
        return Ok(HomologyReport {
            dims: BTreeMap::new(),
            valid_lo: valid.lo,
            valid_hi: valid.hi,
        });
    }

    let degrees: Vec<i32> = (valid.lo..=valid.hi).collect();
    let per_degree = maybe_par_map(&degrees, |&deg| {
        let m_out = d_out.to_matrix(deg);
        let m_in = d_in.to_matrix(deg - 1);
        // composability at this degree
        if !m_out.mul(&m_in).map(|m| m.is_zero()).unwrap_or(false) {
            return Err(Error::NotAComplex { degree: deg });
        }
        let dim_y = y.dim(deg);
        let rank_out = m_out.rank();
        let rank_in = m_in.rank();
        Ok((deg, dim_y - rank_out - rank_in))
    });

    let mut dims = BTreeMap::new();
    for r in per_degree {
        let (deg, h) = r?;
        if h > 0 {
            dims.insert(deg, h);
        }
    }
    Ok(HomologyReport {
        dims,
        valid_lo: valid.lo,
        valid_hi: valid.hi,
    })
}

/// Homology of a single square-zero differential d : X -> X of degree +1.
pub fn homology_of(d: &GradedMap) -> Result<HomologyReport, Error> {
    homology(d, d)
}

/// The mapping cone of a chain map f : (X, d_x) -> (Y, d_y) of degree 0:
/// carrier Y ⊕ X[1] with differential (y, x) -> (d_y y + f x, -d_x x).
/// Returns the cone carrier and its differential; labels from X are
/// suffixed with `'`.
pub fn mapping_cone(
    f: &GradedMap,
    d_x: &GradedMap,
    d_y: &GradedMap,
) -> Result<(Space, GradedMap), Error> {
    use crate::graded::{BasisElem, BasisId, GradedVectorSpace};
    use std::sync::Arc;

    let field = f.source.field;
    let x = &f.source;
    let y = &f.target;
    // the cone carrier spans both supports: hull of the two windows
    let xw = x.window.shift(1);
    let window = DegreeWindow {
        lo: y.window.lo.min(xw.lo),
        hi: y.window.hi.max(xw.hi),
        weight_cap: y.window.weight_cap.min(xw.weight_cap),
    };
    let mut basis: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
    // Y part first, then X[1] part, per degree
    let mut x_offset: BTreeMap<i32, usize> = BTreeMap::new();
    for deg in window.lo..=window.hi {
        let mut elems = Vec::new();
        for e in y.elems(deg) {
            elems.push(e.clone());
        }
        x_offset.insert(deg, elems.len());
        for e in x.elems(deg + 1) {
            elems.push(BasisElem {
                label: format!("{}'", e.label),
                weight: e.weight,
            });
        }
        if !elems.is_empty() {
            basis.insert(deg, elems);
        }
    }
    let cone: Space = Arc::new(GradedVectorSpace::new(field, window, basis)?);
    let embed_y = |id: BasisId| -> Option<BasisId> {
        if window.contains(id.degree) {
            Some(id)
        } else {
            None
        }
    };
    let embed_x = |id: BasisId| -> Option<BasisId> {
        let deg = id.degree - 1;
        if window.contains(deg) {
            Some(BasisId {
                degree: deg,
                index: x_offset.get(&deg).copied().unwrap_or(0) + id.index,
            })
        } else {
            None
        }
    };
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    let mut cols: BTreeMap<BasisId, crate::graded::GElem> = BTreeMap::new();
    for id in cone.ids() {
        let off = x_offset.get(&id.degree).copied().unwrap_or(0);
        let mut img: Vec<(BasisId, crate::field::Scalar)> = Vec::new();
        let mut lost = false;
        if id.index < off {
            // Y part: d_y
            let yid = BasisId { degree: id.degree, index: id.index };
            for (t, s) in d_y.col(yid) {
                match embed_y(t) {
                    Some(tid) => img.push((tid, s)),
                    None => lost = true,
                }
            }
        } else {
            // X[1] part (original degree id.degree + 1): f and -d_x
            let xid = BasisId { degree: id.degree + 1, index: id.index - off };
            for (t, s) in f.col(xid) {
                match embed_y(t) {
                    Some(tid) => img.push((tid, s)),
                    None => lost = true,
                }
            }
            for (t, s) in d_x.col(xid) {
                match embed_x(t) {
                    Some(tid) => img.push((tid, s.neg())),
                    None => lost = true,
                }
            }
        }
        if lost {
            dropped.insert(id.degree);
        }
        let img = crate::graded::gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(id, img);
        }
    }
    let mut d = GradedMap::from_fn(&cone, &cone, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    // validity: both differentials and the map must be exact, and nothing
    // may have been cut off by the cone window
    let base = d_y
        .valid
        .intersect(&d_x.valid.shift(1))
        .intersect(&f.valid);
    let (vlo, vhi) =
        crate::graded::validity_interval(&base, &|deg| !dropped.contains(&deg));
    d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: base.weight_cap };
    Ok((cone, d))
}
