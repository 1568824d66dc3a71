//! Graded vector spaces with finite named bases inside a truncation window,
//! and homogeneous linear maps between them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::field::{Field, Scalar};
use crate::matrix::{svec_normalize, SparseMat, SVec};

/// Truncation window: degrees `lo..=hi` and a cap on retained weight
/// (tensor length / filtration level). Every derived object is stamped with
/// the window inside which it is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeWindow {
    pub lo: i32,
    pub hi: i32,
    pub weight_cap: u32,
}

impl DegreeWindow {
    pub fn new(lo: i32, hi: i32, weight_cap: u32) -> Result<DegreeWindow, Error> {
        if lo > hi {
            return Err(Error::Window(format!("lo {lo} > hi {hi}")));
        }
        Ok(DegreeWindow { lo, hi, weight_cap })
    }

    pub fn contains(&self, degree: i32) -> bool {
        self.lo <= degree && degree <= self.hi
    }

    pub fn admits(&self, degree: i32, weight: u32) -> bool {
        self.contains(degree) && weight <= self.weight_cap
    }

    pub fn intersect(&self, other: &DegreeWindow) -> DegreeWindow {
        DegreeWindow {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
            weight_cap: self.weight_cap.min(other.weight_cap),
        }
    }

    /// Shift degrees: the window of X[n] when `self` is the window of X.
    pub fn shift(&self, n: i32) -> DegreeWindow {
        DegreeWindow {
            lo: self.lo - n,
            hi: self.hi - n,
            weight_cap: self.weight_cap,
        }
    }
}

impl fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] cap {}", self.lo, self.hi, self.weight_cap)
    }
}

/// A basis vector: a label unique within its degree, plus a weight used for
/// truncation bookkeeping (tensor length, filtration level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElem {
    pub label: String,
    pub weight: u32,
}

/// Reference to a basis vector: degree and position in that degree's basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisId {
    pub degree: i32,
    pub index: usize,
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.degree, self.index)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedVectorSpace {
    pub field: Field,
    pub window: DegreeWindow,
    basis: BTreeMap<i32, Vec<BasisElem>>,
}

pub type Space = Arc<GradedVectorSpace>;

impl GradedVectorSpace {
    pub fn new(
        field: Field,
        window: DegreeWindow,
        basis: BTreeMap<i32, Vec<BasisElem>>,
    ) -> Result<GradedVectorSpace, Error> {
        for (deg, elems) in &basis {
            if !window.contains(*deg) && !elems.is_empty() {
                return Err(Error::Window(format!(
                    "basis in degree {deg} outside window {window}"
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for e in elems {
                if !seen.insert(&e.label) {
                    return Err(Error::BasisMismatch {
                        degree: *deg,
                        detail: format!("duplicate label `{}`", e.label),
                    });
                }
            }
        }
        let basis = basis.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        Ok(GradedVectorSpace { field, window, basis })
    }

    /// Space with a single basis vector `label` in degree 0, weight 0.
    pub fn line(field: Field, window: DegreeWindow, label: &str) -> Space {
        let mut basis = BTreeMap::new();
        basis.insert(
            0,
            vec![BasisElem {
                label: label.to_string(),
                weight: 0,
            }],
        );
        Arc::new(GradedVectorSpace::new(field, window, basis).unwrap())
    }

    pub fn zero(field: Field, window: DegreeWindow) -> Space {
        Arc::new(GradedVectorSpace {
            field,
            window,
            basis: BTreeMap::new(),
        })
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.basis.keys().copied()
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.basis.get(&degree).map_or(0, |v| v.len())
    }

    pub fn total_dim(&self) -> usize {
        self.basis.values().map(|v| v.len()).sum()
    }

    pub fn elems(&self, degree: i32) -> &[BasisElem] {
        self.basis.get(&degree).map_or(&[], |v| v.as_slice())
    }

    pub fn elem(&self, id: BasisId) -> &BasisElem {
        &self.basis[&id.degree][id.index]
    }

    pub fn label(&self, id: BasisId) -> &str {
        &self.elem(id).label
    }

    pub fn weight(&self, id: BasisId) -> u32 {
        self.elem(id).weight
    }

    pub fn find(&self, degree: i32, label: &str) -> Option<BasisId> {
        self.basis.get(&degree).and_then(|v| {
            v.iter()
                .position(|e| e.label == label)
                .map(|index| BasisId { degree, index })
        })
    }

    pub fn ids(&self) -> Vec<BasisId> {
        self.basis
            .iter()
            .flat_map(|(deg, v)| (0..v.len()).map(|index| BasisId { degree: *deg, index }))
            .collect()
    }

    pub fn ids_in_degree(&self, degree: i32) -> Vec<BasisId> {
        (0..self.dim(degree)).map(|index| BasisId { degree, index }).collect()
    }

    /// True when the two spaces have the same bases on the overlap of their
    /// windows (labels compared positionally).
    pub fn compatible_with(&self, other: &GradedVectorSpace) -> Result<(), Error> {
        if self.field != other.field {
            return Err(Error::BadField(format!(
                "{} vs {}",
                self.field, other.field
            )));
        }
        let w = self.window.intersect(&other.window);
        for deg in w.lo..=w.hi {
            let a = self.elems(deg);
            let b = other.elems(deg);
            if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.label != y.label) {
                return Err(Error::BasisMismatch {
                    degree: deg,
                    detail: format!("{} vs {} basis vectors", a.len(), b.len()),
                });
            }
        }
        Ok(())
    }

    /// Cohomological shift X[n], with X[n]^i = X^{i+n}. Labels and weights
    /// are preserved.
    pub fn shifted(&self, n: i32) -> GradedVectorSpace {
        GradedVectorSpace {
            field: self.field,
            window: self.window.shift(n),
            basis: self
                .basis
                .iter()
                .map(|(deg, v)| (deg - n, v.clone()))
                .collect(),
        }
    }
}

/// An element: finite combination of basis vectors, sorted, zero-free.
pub type GElem = Vec<(BasisId, Scalar)>;

pub fn gelem_normalize(mut v: GElem) -> GElem {
    v.sort_by_key(|(id, _)| *id);
    let mut out: GElem = Vec::with_capacity(v.len());
    for (id, c) in v {
        match out.last_mut() {
            Some((j, acc)) if *j == id => *acc = acc.add(&c),
            _ => out.push((id, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

pub fn gelem_add(a: &GElem, b: &GElem) -> GElem {
    let mut v = a.clone();
    v.extend_from_slice(b);
    gelem_normalize(v)
}

pub fn gelem_sub(a: &GElem, b: &GElem) -> GElem {
    let mut v = a.clone();
    v.extend(b.iter().map(|(i, c)| (*i, c.neg())));
    gelem_normalize(v)
}

pub fn gelem_scale(a: &GElem, c: &Scalar) -> GElem {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(i, x)| (*i, x.mul(c))).collect()
}

/// The degree of a homogeneous element; `None` for 0.
pub fn gelem_degree(a: &GElem) -> Option<i32> {
    let d = a.first()?.0.degree;
    debug_assert!(a.iter().all(|(id, _)| id.degree == d));
    Some(d)
}

/// A homogeneous linear map of pure degree `degree` between graded spaces.
/// Stored column-sparsely: image of each source basis vector.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub source: Space,
    pub target: Space,
    pub degree: i32,
    /// Validity window, in source degrees/weights: where the map is exact.
    pub valid: DegreeWindow,
    cols: BTreeMap<BasisId, GElem>,
}

impl GradedMap {
    pub fn zero(source: &Space, target: &Space, degree: i32) -> GradedMap {
        // an explicitly given map is exact on its whole source window;
        // truncating constructors stamp tighter validity themselves
        let valid = source.window;
        GradedMap {
            source: Arc::clone(source),
            target: Arc::clone(target),
            degree,
            valid,
            cols: BTreeMap::new(),
        }
    }

    pub fn identity(space: &Space) -> GradedMap {
        let mut m = GradedMap::zero(space, space, 0);
        for id in space.ids() {
            m.cols.insert(id, vec![(id, space.field.one())]);
        }
        m
    }

    /// Build from a column function. Images must be homogeneous of degree
    /// `source degree + degree`.
    pub fn from_fn(
        source: &Space,
        target: &Space,
        degree: i32,
        mut f: impl FnMut(BasisId) -> GElem,
    ) -> GradedMap {
        let mut m = GradedMap::zero(source, target, degree);
        for id in source.ids() {
            let img = gelem_normalize(f(id));
            debug_assert!(
                img.iter().all(|(t, _)| t.degree == id.degree + degree),
                "inhomogeneous image of {id}"
            );
            if !img.is_empty() {
                m.cols.insert(id, img);
            }
        }
        m
    }

    pub fn set_col(&mut self, id: BasisId, img: GElem) {
        let img = gelem_normalize(img);
        debug_assert!(img.iter().all(|(t, _)| t.degree == id.degree + self.degree));
        if img.is_empty() {
            self.cols.remove(&id);
        } else {
            self.cols.insert(id, img);
        }
    }

    pub fn col(&self, id: BasisId) -> GElem {
        self.cols.get(&id).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn apply(&self, v: &GElem) -> GElem {
        let mut acc: GElem = Vec::new();
        for (id, c) in v {
            for (t, x) in self.col(*id) {
                acc.push((t, x.mul(c)));
            }
        }
        gelem_normalize(acc)
    }

    pub fn add(&self, rhs: &GradedMap) -> Result<GradedMap, Error> {
        if self.degree != rhs.degree {
            return Err(Error::Shape(format!(
                "adding maps of degrees {} and {}",
                self.degree, rhs.degree
            )));
        }
        self.source.compatible_with(&rhs.source)?;
        self.target.compatible_with(&rhs.target)?;
        let mut out = self.clone();
        out.valid = self.valid.intersect(&rhs.valid);
        for (id, col) in &rhs.cols {
            let sum = gelem_add(&out.col(*id), col);
            out.set_col(*id, sum);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> GradedMap {
        let mut out = self.clone();
        if c.is_zero() {
            out.cols.clear();
            return out;
        }
        for col in out.cols.values_mut() {
            *col = gelem_scale(col, c);
        }
        out
    }

    /// f.compose(g) = f after g (g first). Checks base compatibility on the
    /// overlap window; the result window is where both maps are exact.
    pub fn compose(&self, g: &GradedMap) -> Result<GradedMap, Error> {
        g.target.compatible_with(&self.source)?;
        let mut out = GradedMap::zero(&g.source, &self.target, self.degree + g.degree);
        out.valid = g.valid.intersect(&self.valid.shift(g.degree));
        for (id, col) in &g.cols {
            let img = self.apply(col);
            if !img.is_empty() {
                out.cols.insert(*id, img);
            }
        }
        Ok(out)
    }

    /// Matrix of the component at `src_degree`: rows = target basis at
    /// `src_degree + degree`, columns = source basis at `src_degree`.
    pub fn to_matrix(&self, src_degree: i32) -> SparseMat {
        let rows = self.target.dim(src_degree + self.degree);
        let cols = self.source.dim(src_degree);
        let mut trip = Vec::new();
        for idx in 0..cols {
            let id = BasisId { degree: src_degree, index: idx };
            for (t, x) in self.col(id) {
                trip.push((t.index, idx, x.clone()));
            }
        }
        SparseMat::from_triplets(self.source.field, rows, cols, trip)
    }

    /// Columns of the component at `src_degree` as sparse vectors over the
    /// target basis.
    pub fn matrix_columns(&self, src_degree: i32) -> Vec<SVec> {
        (0..self.source.dim(src_degree))
            .map(|index| {
                svec_normalize(
                    self.col(BasisId { degree: src_degree, index })
                        .into_iter()
                        .map(|(t, x)| (t.index, x))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn cols_iter(&self) -> impl Iterator<Item = (&BasisId, &GElem)> {
        self.cols.iter()
    }

    /// Equality as linear maps (same columns).
    pub fn equals(&self, other: &GradedMap) -> bool {
        if self.degree != other.degree {
            return false;
        }
        let keys: std::collections::BTreeSet<_> =
            self.cols.keys().chain(other.cols.keys()).collect();
        keys.into_iter().all(|k| self.col(*k) == other.col(*k))
    }
}

/// The longest run of degrees d in [window.lo - 1, window.hi] on which
/// `pred` holds: used to stamp validity intervals on differentials.
pub fn validity_interval(window: &DegreeWindow, pred: &dyn Fn(i32) -> bool) -> (i32, i32) {
    let mut best = (window.lo, window.lo - 1); // empty
    let mut run_start: Option<i32> = None;
    for d in (window.lo - 1)..=(window.hi + 1) {
        let ok = d <= window.hi && pred(d);
        match (ok, run_start) {
            (true, None) => run_start = Some(d),
            (false, Some(s)) => {
                if d - 1 - s > best.1 - best.0 {
                    best = (s, d - 1);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    best
}

/// Flat enumeration of all basis vectors of a space, for linear algebra that
/// mixes degrees (conilpotency filtrations, radicals, homotopy systems).
pub struct Flattener {
    ids: Vec<BasisId>,
    pos: HashMap<BasisId, usize>,
}

impl Flattener {
    pub fn new(space: &GradedVectorSpace) -> Flattener {
        let ids = space.ids();
        let pos = ids.iter().enumerate().map(|(k, id)| (*id, k)).collect();
        Flattener { ids, pos }
    }

    pub fn dim(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, k: usize) -> BasisId {
        self.ids[k]
    }

    pub fn pos(&self, id: BasisId) -> usize {
        self.pos[&id]
    }

    pub fn to_svec(&self, v: &GElem) -> SVec {
        svec_normalize(v.iter().map(|(id, c)| (self.pos(id.clone()), c.clone())).collect())
    }

    pub fn to_gelem(&self, v: &SVec) -> GElem {
        gelem_normalize(v.iter().map(|(k, c)| (self.id(*k), c.clone())).collect())
    }
}

/// Materialized tensor product of two graded spaces, restricted to the
/// window (degree range and weight cap). Labels are joined with `⊗`.
pub struct TensorSpace {
    pub space: Space,
    pairs: Vec<(BasisId, BasisId)>,
    lookup: HashMap<(BasisId, BasisId), BasisId>,
    /// True when some pair of basis vectors fell outside the window.
    pub truncated: bool,
    /// Degrees at which pairs were dropped by the degree window (weight
    /// drops only qualify the weight range of reports, degree drops
    /// invalidate the degree).
    pub degree_dropped: std::collections::BTreeSet<i32>,
}

impl TensorSpace {
    pub fn new(u: &Space, v: &Space, window: &DegreeWindow) -> TensorSpace {
        assert_eq!(u.field, v.field, "field mismatch in tensor product");
        let mut per_degree: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
        let mut pairs = Vec::new();
        let mut lookup = HashMap::new();
        let mut truncated = false;
        let mut degree_dropped = std::collections::BTreeSet::new();
        for a in u.ids() {
            for b in v.ids() {
                let degree = a.degree + b.degree;
                let weight = u.weight(a) + v.weight(b);
                if !window.admits(degree, weight) {
                    truncated = true;
                    if weight <= window.weight_cap {
                        degree_dropped.insert(degree);
                    }
                    continue;
                }
                let label = format!("{}⊗{}", u.label(a), v.label(b));
                let slot = per_degree.entry(degree).or_default();
                let id = BasisId { degree, index: slot.len() };
                slot.push(BasisElem { label, weight });
                pairs.push((a, b));
                lookup.insert((a, b), id);
            }
        }
        // `pairs` must be reindexable by BasisId order: rebuild in order
        let mut ordered_pairs = vec![None; pairs.len()];
        {
            let mut flat: Vec<(BasisId, (BasisId, BasisId))> =
                lookup.iter().map(|(p, id)| (*id, *p)).collect();
            flat.sort_by_key(|(id, _)| *id);
            for (k, (_, p)) in flat.into_iter().enumerate() {
                ordered_pairs[k] = Some(p);
            }
        }
        let space = Arc::new(
            GradedVectorSpace::new(u.field, *window, per_degree).expect("valid tensor basis"),
        );
        TensorSpace {
            space,
            pairs: ordered_pairs.into_iter().map(|p| p.unwrap()).collect(),
            lookup,
            truncated,
            degree_dropped,
        }
    }

    /// Validity interval for a degree +1 differential on this carrier:
    /// degrees where neither the degree itself nor its successor lost
    /// pairs to the degree window.
    pub fn differential_validity(&self) -> (i32, i32) {
        validity_interval(&self.space.window, &|d| {
            !self.degree_dropped.contains(&d) && !self.degree_dropped.contains(&(d + 1))
        })
    }

    pub fn pair_of(&self, id: BasisId) -> (BasisId, BasisId) {
        // ids enumerate pairs in (degree, index) order
        let mut k = 0;
        for deg in self.space.degrees() {
            if deg == id.degree {
                return self.pairs[k + id.index];
            }
            k += self.space.dim(deg);
        }
        panic!("basis id {id} not in tensor space");
    }

    pub fn id_of(&self, a: BasisId, b: BasisId) -> Option<BasisId> {
        self.lookup.get(&(a, b)).copied()
    }

    /// Tensor of two elements, dropping (and flagging) out-of-window parts.
    pub fn tensor_elems(&self, a: &GElem, b: &GElem) -> (GElem, bool) {
        let mut out: GElem = Vec::new();
        let mut lost = false;
        for (i, x) in a {
            for (j, y) in b {
                match self.id_of(*i, *j) {
                    Some(id) => out.push((id, x.mul(y))),
                    None => lost = true,
                }
            }
        }
        (gelem_normalize(out), lost)
    }
}

/// Tensor product of maps with the Koszul sign:
/// (f⊗g)(x⊗y) = (-1)^{|g||x|} f(x)⊗g(y).
/// The result window shrinks if images escape the materialized window.
pub fn tensor_maps(
    f: &GradedMap,
    g: &GradedMap,
    src: &TensorSpace,
    tgt: &TensorSpace,
) -> GradedMap {
    let mut out = GradedMap::zero(&src.space, &tgt.space, f.degree + g.degree);
    let mut lost_any = false;
    for id in src.space.ids() {
        let (a, b) = src.pair_of(id);
        let fa = f.col(a);
        let gb = g.col(b);
        if fa.is_empty() || gb.is_empty() {
            continue;
        }
        let sign = g.degree as i64 * a.degree as i64;
        let (img, lost) = tgt.tensor_elems(&fa, &gb);
        lost_any |= lost;
        let img = if sign.rem_euclid(2) == 1 {
            gelem_scale(&img, &src.space.field.one().neg())
        } else {
            img
        };
        out.set_col(id, img);
    }
    if lost_any {
        // shrink: images at the weight cap boundary cannot be trusted
        out.valid = DegreeWindow {
            lo: out.valid.lo,
            hi: out.valid.hi,
            weight_cap: out.valid.weight_cap.saturating_sub(1),
        };
    }
    out
}
