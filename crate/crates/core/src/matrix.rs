//! Sparse exact matrices and Gaussian elimination over [`Field`].
//!
//! Pivot columns are always scanned left to right, so echelon forms, quotient
//! representatives, and kernel bases are deterministic: the first listed
//! basis vector wins. Row pivots prefer sparse rows with small entries to
//! limit fill and coefficient growth.

use crate::error::Error;
use crate::field::{Field, Scalar};

/// A sparse vector: sorted `(index, coeff)` pairs with nonzero coefficients.
pub type SVec = Vec<(usize, Scalar)>;

/// Normalize a list of (index, coeff) pairs: sort, merge, drop zeros.
pub fn svec_normalize(mut v: SVec) -> SVec {
    v.sort_by_key(|(i, _)| *i);
    let mut out: SVec = Vec::with_capacity(v.len());
    for (i, c) in v {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc = acc.add(&c),
            _ => out.push((i, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

pub fn svec_add(a: &SVec, b: &SVec) -> SVec {
    let mut v = a.clone();
    v.extend_from_slice(b);
    svec_normalize(v)
}

pub fn svec_scale(a: &SVec, c: &Scalar) -> SVec {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(i, x)| (*i, x.mul(c))).collect()
}

pub fn svec_sub(a: &SVec, b: &SVec) -> SVec {
    let mut v = a.clone();
    v.extend(b.iter().map(|(i, c)| (*i, c.neg())));
    svec_normalize(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
    /// Row-major storage; each row sorted by column index.
    data: Vec<SVec>,
}

impl SparseMat {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            field,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = SparseMat::zero(field, n, n);
        for i in 0..n {
            m.data[i].push((i, field.one()));
        }
        m
    }

    pub fn from_triplets(
        field: Field,
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Self {
        let mut m = SparseMat::zero(field, rows, cols);
        for (r, c, x) in triplets {
            assert!(r < rows && c < cols, "triplet out of range");
            m.data[r].push((c, x));
        }
        for row in &mut m.data {
            let v = std::mem::take(row);
            *row = svec_normalize(v);
        }
        m
    }

    /// Build from column vectors.
    pub fn from_columns(field: Field, rows: usize, cols: &[SVec]) -> Self {
        let trip = cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, x)| (*i, j, x.clone())));
        SparseMat::from_triplets(field, rows, cols.len(), trip)
    }

    pub fn row(&self, r: usize) -> &SVec {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.data[r]
            .iter()
            .find(|(j, _)| *j == c)
            .map(|(_, x)| x.clone())
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn column(&self, c: usize) -> SVec {
        let mut out = Vec::new();
        for (r, row) in self.data.iter().enumerate() {
            if let Some((_, x)) = row.iter().find(|(j, _)| *j == c) {
                out.push((r, x.clone()));
            }
        }
        out
    }

    pub fn columns(&self) -> Vec<SVec> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, x) in row {
                cols[*c].push((r, x.clone()));
            }
        }
        cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn transpose(&self) -> SparseMat {
        let trip = self
            .data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, x)| (*c, r, x.clone())));
        SparseMat::from_triplets(self.field, self.cols, self.rows, trip.collect::<Vec<_>>())
    }

    pub fn add(&self, rhs: &SparseMat) -> Result<SparseMat, Error> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "add {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = self.clone();
        for (r, row) in rhs.data.iter().enumerate() {
            out.data[r] = svec_add(&out.data[r], row);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> SparseMat {
        let mut out = self.clone();
        for row in &mut out.data {
            *row = svec_scale(row, c);
        }
        out
    }

    pub fn mul(&self, rhs: &SparseMat) -> Result<SparseMat, Error> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "mul {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = SparseMat::zero(self.field, self.rows, rhs.cols);
        for (r, row) in self.data.iter().enumerate() {
            let mut acc: SVec = Vec::new();
            for (k, x) in row {
                for (c, y) in &rhs.data[*k] {
                    acc.push((*c, x.mul(y)));
                }
            }
            out.data[r] = svec_normalize(acc);
        }
        Ok(out)
    }

    /// Apply to a sparse column vector.
    pub fn apply(&self, v: &SVec) -> SVec {
        let mut acc: SVec = Vec::new();
        for (j, c) in v {
            assert!(*j < self.cols, "vector index out of range");
            for (r, row) in self.data.iter().enumerate() {
                if let Some((_, x)) = row.iter().find(|(k, _)| k == j) {
                    acc.push((r, x.mul(c)));
                }
            }
        }
        svec_normalize(acc)
    }
}

/// Row echelon data: `transform * original = reduced`, with `reduced` in
/// reduced row echelon form and `pivots[k] = (row, col)` per pivot.
pub struct Echelon {
    pub reduced: SparseMat,
    pub transform: SparseMat,
    pub pivots: Vec<(usize, usize)>,
}

impl SparseMat {
    pub fn echelon(&self) -> Echelon {
        let mut work = self.data.clone();
        let mut tr: Vec<SVec> = (0..self.rows).map(|r| vec![(r, self.field.one())]).collect();
        let mut pivots = Vec::new();
        let mut used = vec![false; self.rows];

        for col in 0..self.cols {
            // candidate pivot: unused row with leading entry in `col`,
            // preferring short rows with small entries
            let mut best: Option<(usize, usize, usize)> = None;
            for (r, row) in work.iter().enumerate() {
                if used[r] {
                    continue;
                }
                if let Some((c0, x)) = row.first() {
                    if *c0 == col {
                        let key = (row.len(), x.size());
                        if best.map_or(true, |(_, l, s)| key < (l, s)) {
                            best = Some((r, key.0, key.1));
                        }
                    }
                }
            }
            let Some((pr, _, _)) = best else { continue };
            used[pr] = true;
            // normalize pivot row
            let pv = work[pr].first().unwrap().1.clone();
            let inv = pv.inv().unwrap();
            work[pr] = svec_scale(&work[pr], &inv);
            tr[pr] = svec_scale(&tr[pr], &inv);
            // eliminate col from every other row
            let prow = work[pr].clone();
            let trow = tr[pr].clone();
            for r in 0..self.rows {
                if r == pr {
                    continue;
                }
                if let Some((_, x)) = work[r].iter().find(|(c, _)| *c == col) {
                    let f = x.neg();
                    work[r] = svec_add(&work[r], &svec_scale(&prow, &f));
                    tr[r] = svec_add(&tr[r], &svec_scale(&trow, &f));
                }
            }
            pivots.push((pr, col));
        }

        Echelon {
            reduced: SparseMat {
                rows: self.rows,
                cols: self.cols,
                field: self.field,
                data: work,
            },
            transform: SparseMat {
                rows: self.rows,
                cols: self.rows,
                field: self.field,
                data: tr,
            },
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of the right kernel {x : Mx = 0}, one sparse column per free
    /// column, in free-column order.
    pub fn kernel_basis(&self) -> Vec<SVec> {
        let ech = self.echelon();
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|(_, c)| *c).collect();
        let mut out = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v: SVec = vec![(free, self.field.one())];
            for (r, c) in &ech.pivots {
                let x = ech.reduced.data[*r]
                    .iter()
                    .find(|(j, _)| *j == free)
                    .map(|(_, x)| x.clone());
                if let Some(x) = x {
                    v.push((*c, x.neg()));
                }
            }
            out.push(svec_normalize(v));
        }
        out
    }
}

/// Outcome of solving `A x = b`.
pub enum Solve {
    /// A solution vector (sparse, length `cols`).
    Solution(SVec),
    /// Certificate of inconsistency: y with yA = 0 and y·b != 0.
    Inconsistent { left_null: SVec },
}

/// Solve `A x = b` exactly. On success returns one solution; on failure a
/// left-null certificate.
pub fn solve(a: &SparseMat, b: &SVec) -> Solve {
    let ech = a.echelon();
    // tb = transform * b
    let mut tb: Vec<Scalar> = vec![a.field.zero(); a.rows];
    for r in 0..a.rows {
        let mut acc = a.field.zero();
        for (k, x) in ech.transform.row(r) {
            if let Some((_, bv)) = b.iter().find(|(i, _)| i == k) {
                acc = acc.add(&x.mul(bv));
            }
        }
        tb[r] = acc;
    }
    let pivot_rows: Vec<usize> = ech.pivots.iter().map(|(r, _)| *r).collect();
    for r in 0..a.rows {
        if !pivot_rows.contains(&r) && !tb[r].is_zero() {
            return Solve::Inconsistent {
                left_null: ech.transform.row(r).clone(),
            };
        }
    }
    let mut x: SVec = Vec::new();
    for (r, c) in &ech.pivots {
        if !tb[*r].is_zero() {
            x.push((*c, tb[*r].clone()));
        }
    }
    Solve::Solution(svec_normalize(x))
}

/// Reduce a spanning set to a deterministic echelon basis of its span.
/// Vectors live in k^dim; the result rows are in reduced echelon form.
pub fn reduce_spanning(field: Field, dim: usize, spanning: &[SVec]) -> Vec<SVec> {
    let m = SparseMat::from_triplets(
        field,
        spanning.len(),
        dim,
        spanning
            .iter()
            .enumerate()
            .flat_map(|(r, v)| v.iter().map(move |(c, x)| (r, *c, x.clone()))),
    );
    let ech = m.echelon();
    ech.pivots
        .iter()
        .map(|(r, _)| ech.reduced.row(*r).clone())
        .collect()
}

/// Coordinates of `v` in the span of `basis` (vectors in k^dim), if any.
pub fn membership(field: Field, dim: usize, basis: &[SVec], v: &SVec) -> Option<SVec> {
    let m = SparseMat::from_columns(field, dim, basis);
    match solve(&m, v) {
        Solve::Solution(x) => Some(x),
        Solve::Inconsistent { .. } => None,
    }
}

/// Intersection of two spans inside k^dim, as an echelon basis.
pub fn intersect_spans(field: Field, dim: usize, a: &[SVec], b: &[SVec]) -> Vec<SVec> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // kernel of [A | B]: x part gives intersection vectors A x
    let mut cols: Vec<SVec> = a.to_vec();
    cols.extend(b.iter().cloned());
    let m = SparseMat::from_columns(field, dim, &cols);
    let amat = SparseMat::from_columns(field, dim, a);
    let mut out = Vec::new();
    for k in m.kernel_basis() {
        let xa: SVec = k.iter().filter(|(i, _)| *i < a.len()).cloned().collect();
        let v = amat.apply(&xa);
        if !v.is_empty() {
            out.push(v);
        }
    }
    reduce_spanning(field, dim, &out)
}

/// Data for working modulo a subspace U of k^dim: echelon basis of U and
/// the set of its pivot coordinates. Quotient representatives are supported
/// on the non-pivot coordinates.
pub struct QuotientMap {
    pub sub_basis: Vec<SVec>,
    pub pivot_coords: Vec<usize>,
    pub free_coords: Vec<usize>,
    dim: usize,
}

impl QuotientMap {
    pub fn new(field: Field, dim: usize, sub: &[SVec]) -> QuotientMap {
        let sub_basis = reduce_spanning(field, dim, sub);
        let pivot_coords: Vec<usize> = sub_basis
            .iter()
            .map(|row| row.first().expect("echelon row nonempty").0)
            .collect();
        let free_coords = (0..dim).filter(|c| !pivot_coords.contains(c)).collect();
        QuotientMap {
            sub_basis,
            pivot_coords,
            free_coords,
            dim,
        }
    }

    /// Canonical representative of v + U, supported on free coordinates.
    pub fn reduce(&self, v: &SVec) -> SVec {
        let mut acc = v.clone();
        for (row, pc) in self.sub_basis.iter().zip(&self.pivot_coords) {
            if let Some((_, x)) = acc.iter().find(|(i, _)| i == pc) {
                let f = x.neg();
                acc = svec_add(&acc, &svec_scale(row, &f));
            }
        }
        debug_assert!(acc.iter().all(|(i, _)| !self.pivot_coords.contains(i) && *i < self.dim));
        acc
    }
}
