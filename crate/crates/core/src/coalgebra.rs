//! Graded coassociative coalgebras with counit, optional coaugmentation and
//! differential; comodules; tensor (co)algebras on word bases; conilpotency
//! and coradical filtrations.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::algebra::AlgebraSpec;
use crate::error::Error;
use crate::field::{Field, Scalar};
use crate::functional::Functional;
use crate::graded::{
    gelem_normalize, BasisElem, BasisId, DegreeWindow, Flattener, GElem, GradedMap,
    GradedVectorSpace, Space,
};
use crate::matrix::{self, QuotientMap, SparseMat, SVec};

/// An element of a tensor product X⊗Y, as (coefficient, x, y) triples.
/// The tuple order is the tensor order; signs in formulas depend on it.
pub type PairElem = Vec<(Scalar, BasisId, BasisId)>;

pub fn pair_normalize(mut v: PairElem) -> PairElem {
    v.sort_by(|a, b| (a.1, a.2).cmp(&(b.1, b.2)));
    let mut out: PairElem = Vec::with_capacity(v.len());
    for (c, x, y) in v {
        match out.last_mut() {
            Some((acc, a, b)) if *a == x && *b == y => *acc = acc.add(&c),
            _ => out.push((c, x, y)),
        }
    }
    out.retain(|(c, _, _)| !c.is_zero());
    out
}

pub fn pair_add(a: &PairElem, b: &PairElem) -> PairElem {
    let mut v = a.clone();
    v.extend_from_slice(b);
    pair_normalize(v)
}

pub fn pair_scale(a: &PairElem, s: &Scalar) -> PairElem {
    if s.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(c, x, y)| (c.mul(s), *x, *y)).collect()
}

#[derive(Clone, Debug)]
pub struct CoalgebraSpec {
    pub carrier: Space,
    comul: HashMap<BasisId, PairElem>,
    pub counit: Functional,
    /// Image gamma(1) of the coaugmentation, when one is declared.
    pub coaugmentation: Option<GElem>,
    pub differential: Option<GradedMap>,
}

impl CoalgebraSpec {
    pub fn new(carrier: Space, counit: Functional) -> CoalgebraSpec {
        CoalgebraSpec {
            carrier,
            comul: HashMap::new(),
            counit,
            coaugmentation: None,
            differential: None,
        }
    }

    pub fn field(&self) -> Field {
        self.carrier.field
    }

    pub fn set_comul(&mut self, c: BasisId, value: PairElem) {
        let v = pair_normalize(value);
        if v.is_empty() {
            self.comul.remove(&c);
        } else {
            self.comul.insert(c, v);
        }
    }

    pub fn comul_basis(&self, c: BasisId) -> PairElem {
        self.comul.get(&c).cloned().unwrap_or_default()
    }

    pub fn comul_elem(&self, v: &GElem) -> PairElem {
        let mut acc: PairElem = Vec::new();
        for (id, s) in v {
            acc.extend(pair_scale(&self.comul_basis(*id), s));
        }
        pair_normalize(acc)
    }

    /// Reduced comultiplication on C+ = C/gamma(k): both legs projected
    /// along the coaugmentation. Requires a coaugmentation.
    pub fn reduced_comul(&self, v: &GElem, reduce: &dyn Fn(&GElem) -> GElem) -> PairElem {
        let mut acc: PairElem = Vec::new();
        for (c, x, y) in self.comul_elem(v) {
            let rx = reduce(&vec![(x, self.field().one())]);
            let ry = reduce(&vec![(y, self.field().one())]);
            for (ix, cx) in &rx {
                for (iy, cy) in &ry {
                    acc.push((c.mul(cx).mul(cy), *ix, *iy));
                }
            }
        }
        pair_normalize(acc)
    }

    pub fn check_coassociativity(&self) -> Result<(), Error> {
        for c in self.carrier.ids() {
            // (mu ⊗ id) mu and (id ⊗ mu) mu as triples
            let mut left: Vec<(Scalar, BasisId, BasisId, BasisId)> = Vec::new();
            let mut right: Vec<(Scalar, BasisId, BasisId, BasisId)> = Vec::new();
            for (s, x, y) in self.comul_basis(c) {
                for (t, a, b) in self.comul_basis(x) {
                    left.push((s.mul(&t), a, b, y));
                }
                for (t, a, b) in self.comul_basis(y) {
                    right.push((s.mul(&t), x, a, b));
                }
            }
            if triple_normalize(left) != triple_normalize(right) {
                return Err(Error::axiom(
                    "coassociativity",
                    self.carrier.label(c),
                    "(mu⊗id)mu != (id⊗mu)mu",
                ));
            }
        }
        Ok(())
    }

    pub fn check_counit(&self) -> Result<(), Error> {
        for c in self.carrier.ids() {
            let mut left: GElem = Vec::new();
            let mut right: GElem = Vec::new();
            for (s, x, y) in self.comul_basis(c) {
                let ex = self.counit.eval_basis(x);
                if !ex.is_zero() {
                    left.push((y, s.mul(&ex)));
                }
                let ey = self.counit.eval_basis(y);
                if !ey.is_zero() {
                    right.push((x, s.mul(&ey)));
                }
            }
            let this = vec![(c, self.field().one())];
            if gelem_normalize(left) != this || gelem_normalize(right) != this {
                return Err(Error::axiom(
                    "counitality",
                    self.carrier.label(c),
                    "(eps⊗id)mu != id or (id⊗eps)mu != id",
                ));
            }
        }
        Ok(())
    }

    pub fn check_coaugmentation(&self) -> Result<(), Error> {
        let Some(g) = &self.coaugmentation else { return Ok(()) };
        if !self.counit.eval(g).is_one() {
            return Err(Error::axiom("coaugmentation", "gamma", "eps(gamma(1)) != 1"));
        }
        // mu(gamma(1)) = gamma(1) ⊗ gamma(1)
        let lhs = self.comul_elem(g);
        let mut rhs: PairElem = Vec::new();
        for (x, cx) in g {
            for (y, cy) in g {
                rhs.push((cx.mul(cy), *x, *y));
            }
        }
        if lhs != pair_normalize(rhs) {
            return Err(Error::axiom("coaugmentation", "gamma", "gamma not a coalgebra map"));
        }
        if let Some(d) = &self.differential {
            if !d.apply(g).is_empty() {
                return Err(Error::axiom("coaugmentation", "gamma", "d(gamma(1)) != 0"));
            }
        }
        Ok(())
    }

    /// Coderivation law: mu d = (d⊗id + id⊗d) mu with the Koszul sign, and
    /// eps d = 0.
    pub fn check_coderivation(&self, d: &GradedMap) -> Result<(), Error> {
        for c in self.carrier.ids() {
            let lhs = self.comul_elem(&d.col(c));
            let mut rhs: PairElem = Vec::new();
            for (s, x, y) in self.comul_basis(c) {
                for (dx, cx) in d.col(x) {
                    rhs.push((s.mul(&cx), dx, y));
                }
                for (dy, cy) in d.col(y) {
                    rhs.push((s.mul(&cy).signed(x.degree as i64), x, dy));
                }
            }
            if lhs != pair_normalize(rhs) {
                return Err(Error::axiom(
                    "coderivation",
                    self.carrier.label(c),
                    "mu d != (d⊗1 + 1⊗d) mu",
                ));
            }
            if !self.counit.eval(&d.col(c)).is_zero() {
                return Err(Error::axiom("coderivation", self.carrier.label(c), "eps(d(c)) != 0"));
            }
        }
        Ok(())
    }

    /// Full DG-coalgebra axiom suite (d^2 = 0 case); the curved variant is
    /// checked by the `cdg` module.
    pub fn check(&self) -> Result<(), Error> {
        self.check_coassociativity()?;
        self.check_counit()?;
        self.check_coaugmentation()?;
        if let Some(d) = &self.differential {
            if d.degree != 1 {
                return Err(Error::axiom("differential", "d", "must have degree +1"));
            }
            self.check_coderivation(d)?;
            let dd = d.compose(d)?;
            if !dd.is_zero() {
                return Err(Error::axiom("d-squared", "d", "d^2 != 0"));
            }
        }
        Ok(())
    }

    /// Quotient structure along the coaugmentation: canonical representatives
    /// of C+ = C / gamma(k) inside C.
    pub fn plus_quotient(&self) -> Result<(Flattener, QuotientMap), Error> {
        let g = self
            .coaugmentation
            .as_ref()
            .ok_or_else(|| Error::Unsupported("not coaugmented".into()))?;
        let flat = Flattener::new(&self.carrier);
        let qm = QuotientMap::new(self.field(), flat.dim(), &[flat.to_svec(g)]);
        Ok((flat, qm))
    }
}

fn triple_normalize(
    mut v: Vec<(Scalar, BasisId, BasisId, BasisId)>,
) -> Vec<(Scalar, BasisId, BasisId, BasisId)> {
    v.sort_by(|a, b| (a.1, a.2, a.3).cmp(&(b.1, b.2, b.3)));
    let mut out: Vec<(Scalar, BasisId, BasisId, BasisId)> = Vec::new();
    for (c, x, y, z) in v {
        match out.last_mut() {
            Some((acc, a, b, d)) if *a == x && *b == y && *d == z => *acc = acc.add(&c),
            _ => out.push((c, x, y, z)),
        }
    }
    out.retain(|(c, _, _, _)| !c.is_zero());
    out
}

/// Which side a comodule is on. The coaction stores (coeff, c, m) triples in
/// both cases; for right comodules the tensor order is m ⊗ c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoSide {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct ComoduleSpec {
    pub coalgebra: Arc<CoalgebraSpec>,
    pub carrier: Space,
    pub side: CoSide,
    coaction: HashMap<BasisId, PairElem>,
    pub differential: Option<GradedMap>,
}

impl ComoduleSpec {
    pub fn new(coalgebra: Arc<CoalgebraSpec>, carrier: Space, side: CoSide) -> ComoduleSpec {
        ComoduleSpec {
            coalgebra,
            carrier,
            side,
            coaction: HashMap::new(),
            differential: None,
        }
    }

    /// Set the coaction of a basis vector, as (coeff, c, m) triples.
    pub fn set_coaction(&mut self, m: BasisId, value: PairElem) {
        let v = pair_normalize(value);
        if v.is_empty() {
            self.coaction.remove(&m);
        } else {
            self.coaction.insert(m, v);
        }
    }

    pub fn coaction_basis(&self, m: BasisId) -> PairElem {
        self.coaction.get(&m).cloned().unwrap_or_default()
    }

    pub fn coaction_elem(&self, v: &GElem) -> PairElem {
        let mut acc: PairElem = Vec::new();
        for (id, s) in v {
            acc.extend(pair_scale(&self.coaction_basis(*id), s));
        }
        pair_normalize(acc)
    }

    pub fn check(&self) -> Result<(), Error> {
        let field = self.carrier.field;
        for m in self.carrier.ids() {
            // counitality
            let mut back: GElem = Vec::new();
            for (s, c, m1) in self.coaction_basis(m) {
                let e = self.coalgebra.counit.eval_basis(c);
                if !e.is_zero() {
                    back.push((m1, s.mul(&e)));
                }
            }
            if gelem_normalize(back) != vec![(m, field.one())] {
                return Err(Error::axiom(
                    "counitality",
                    self.carrier.label(m),
                    "counit law fails (must be equal to the identity map)",
                ));
            }
            // coassociativity; triples ordered (c1, c2, m) for left,
            // (m, c1, c2) for right
            let mut left: Vec<(Scalar, BasisId, BasisId, BasisId)> = Vec::new();
            let mut right: Vec<(Scalar, BasisId, BasisId, BasisId)> = Vec::new();
            for (s, c, m1) in self.coaction_basis(m) {
                match self.side {
                    CoSide::Left => {
                        // (mu⊗id)nu vs (id⊗nu)nu
                        for (t, a, b) in self.coalgebra.comul_basis(c) {
                            left.push((s.mul(&t), a, b, m1));
                        }
                        for (t, a, m2) in self.coaction_basis(m1) {
                            right.push((s.mul(&t), c, a, m2));
                        }
                    }
                    CoSide::Right => {
                        // (id⊗mu)nu vs (nu⊗id)nu; order (m, c1, c2)
                        for (t, a, b) in self.coalgebra.comul_basis(c) {
                            left.push((s.mul(&t), m1, a, b));
                        }
                        for (t, a, m2) in self.coaction_basis(m1) {
                            right.push((s.mul(&t), m2, a, c));
                        }
                    }
                }
            }
            if triple_normalize(left) != triple_normalize(right) {
                return Err(Error::axiom(
                    "coassociativity",
                    self.carrier.label(m),
                    "comodule coassociativity fails",
                ));
            }
        }
        if let Some(dm) = &self.differential {
            self.check_coaction_chain_map(dm)?;
            let dd = dm.compose(dm)?;
            if !dd.is_zero() {
                return Err(Error::axiom("d-squared", "d_M", "d^2 != 0"));
            }
        }
        Ok(())
    }

    /// The coaction intertwines d_M with the tensor differential on C⊗M
    /// (resp. M⊗C).
    pub fn check_coaction_chain_map(&self, dm: &GradedMap) -> Result<(), Error> {
        let dc = self
            .coalgebra
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.coalgebra.carrier, &self.coalgebra.carrier, 1));
        for m in self.carrier.ids() {
            let lhs = self.coaction_elem(&dm.col(m));
            let mut rhs: PairElem = Vec::new();
            for (s, c, m1) in self.coaction_basis(m) {
                match self.side {
                    CoSide::Left => {
                        for (x, cx) in dc.col(c) {
                            rhs.push((s.mul(&cx), x, m1));
                        }
                        for (y, cy) in dm.col(m1) {
                            rhs.push((s.mul(&cy).signed(c.degree as i64), c, y));
                        }
                    }
                    CoSide::Right => {
                        // d(m⊗c) = d m ⊗ c + (-1)^{|m|} m ⊗ d c
                        for (y, cy) in dm.col(m1) {
                            rhs.push((s.mul(&cy), c, y));
                        }
                        for (x, cx) in dc.col(c) {
                            rhs.push((s.mul(&cx).signed(m1.degree as i64), x, m1));
                        }
                    }
                }
            }
            if lhs != pair_normalize(rhs) {
                return Err(Error::axiom(
                    "coderivation",
                    self.carrier.label(m),
                    "coaction is not a chain map",
                ));
            }
        }
        Ok(())
    }
}

/// Word bases for tensor algebras/coalgebras. `factor_shift` is the
/// cohomological shift [s] applied to every factor, so a factor of degree d
/// contributes d - s to the word degree: 0 for T(V), +1 for the bar carrier
/// T(V[1]), -1 for the cobar carrier T(V[-1]).
pub struct WordSpace {
    pub space: Space,
    pub gens: Space,
    pub factor_shift: i32,
    words: Vec<Vec<BasisId>>,
    lookup: HashMap<Vec<BasisId>, BasisId>,
    /// Degrees >= this may miss words of the untruncated construction.
    incomplete_above: Option<i32>,
    /// Degrees <= this may miss words of the untruncated construction.
    incomplete_below: Option<i32>,
}

impl WordSpace {
    pub fn new(gens: &Space, window: &DegreeWindow, factor_shift: i32) -> WordSpace {
        let field = gens.field;
        let gen_ids = gens.ids();
        let gen_weight =
            |id: BasisId| -> u32 { gens.weight(id).max(1) };
        let gen_degree = |id: BasisId| -> i32 { id.degree - factor_shift };

        // which directions can the degree of a word move when it is
        // extended by one more factor
        let any_nonneg_gen = gen_ids.iter().any(|g| gen_degree(*g) >= 0);
        let any_nonpos_gen = gen_ids.iter().any(|g| gen_degree(*g) <= 0);
        let mut incomplete_above: Option<i32> = None;
        let mut incomplete_below: Option<i32> = None;
        let mut mark_dropped = |deg: i32| {
            if any_nonneg_gen {
                incomplete_above = Some(incomplete_above.map_or(deg, |x| x.min(deg)));
            }
            if any_nonpos_gen {
                incomplete_below = Some(incomplete_below.map_or(deg, |x| x.max(deg)));
            }
        };

        // enumerate words breadth-first by length, keeping those whose
        // every contiguous subword fits in the window (so deconcatenation
        // stays inside the space). Weight-cap drops do not invalidate
        // degrees: the report is qualified by the weight cap. Degree-window
        // drops mark degree rays as incomplete.
        enum Verdict {
            Keep,
            WeightDrop,
            DegreeDrop,
        }
        let admits = |w: &[BasisId]| -> Verdict {
            for i in 0..w.len() {
                let mut deg = 0i32;
                let mut wt = 0u32;
                for j in i..w.len() {
                    deg += gen_degree(w[j]);
                    wt += gen_weight(w[j]);
                    if i == 0 || j == w.len() - 1 {
                        if wt > window.weight_cap {
                            return Verdict::WeightDrop;
                        }
                        if !window.contains(deg) {
                            return Verdict::DegreeDrop;
                        }
                    }
                }
            }
            Verdict::Keep
        };

        let mut all_words: Vec<Vec<BasisId>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<BasisId>> = vec![Vec::new()];
        loop {
            let mut next = Vec::new();
            for w in &frontier {
                for g in &gen_ids {
                    let mut nw = w.clone();
                    nw.push(*g);
                    let wt: u32 = nw.iter().map(|x| gen_weight(*x)).sum();
                    if wt > window.weight_cap {
                        continue;
                    }
                    next.push(nw);
                }
            }
            if next.is_empty() {
                break;
            }
            all_words.extend(next.iter().cloned());
            frontier = next;
        }
        all_words.retain(|w| match admits(w) {
            Verdict::Keep => true,
            Verdict::WeightDrop => false,
            Verdict::DegreeDrop => {
                let deg: i32 = w.iter().map(|x| gen_degree(*x)).sum();
                mark_dropped(deg);
                false
            }
        });

        let mut per_degree: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
        let mut placed: Vec<(Vec<BasisId>, BasisId)> = Vec::new();
        for w in all_words {
            let degree: i32 = w.iter().map(|x| gen_degree(*x)).sum();
            let weight: u32 = w.iter().map(|x| gen_weight(*x)).sum();
            let label = if w.is_empty() {
                "1".to_string()
            } else {
                w.iter()
                    .map(|x| {
                        let l = gens.label(*x);
                        if l.contains('\u{2297}') {
                            format!("({l})")
                        } else {
                            l.to_string()
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("⊗")
            };
            let slot = per_degree.entry(degree).or_default();
            let id = BasisId { degree, index: slot.len() };
            slot.push(BasisElem { label, weight });
            placed.push((w, id));
        }
        let space = Arc::new(
            GradedVectorSpace::new(field, *window, per_degree).expect("valid word basis"),
        );
        // index words by id order
        placed.sort_by_key(|(_, id)| *id);
        let words: Vec<Vec<BasisId>> = placed.iter().map(|(w, _)| w.clone()).collect();
        let lookup = placed.into_iter().map(|(w, id)| (w, id)).collect();
        WordSpace {
            space,
            gens: Arc::clone(gens),
            factor_shift,
            words,
            lookup,
            incomplete_above,
            incomplete_below,
        }
    }

    /// True when every word of the untruncated construction with this
    /// degree is present in the space.
    pub fn degree_complete(&self, degree: i32) -> bool {
        self.incomplete_above.map_or(true, |x| degree < x)
            && self.incomplete_below.map_or(true, |x| degree > x)
    }

    /// The longest run of degrees d (within [window.lo - 1, window.hi])
    /// where the space is complete at both d and d + 1 and `extra_ok(d)`
    /// holds: the validity interval for a degree +1 differential.
    pub fn differential_validity(&self, extra_ok: &dyn Fn(i32) -> bool) -> (i32, i32) {
        crate::graded::validity_interval(&self.space.window, &|d| {
            self.degree_complete(d) && self.degree_complete(d + 1) && extra_ok(d)
        })
    }

    pub fn word(&self, id: BasisId) -> &[BasisId] {
        let mut k = 0;
        for deg in self.space.degrees() {
            if deg == id.degree {
                return &self.words[k + id.index];
            }
            k += self.space.dim(deg);
        }
        panic!("id {id} not a word");
    }

    pub fn id_of(&self, word: &[BasisId]) -> Option<BasisId> {
        self.lookup.get(word).copied()
    }

    pub fn empty_word(&self) -> BasisId {
        *self.lookup.get(&Vec::new()).expect("unit word present")
    }

    pub fn word_ids(&self) -> Vec<(BasisId, &Vec<BasisId>)> {
        let mut out = Vec::new();
        let mut k = 0;
        for deg in self.space.degrees() {
            for index in 0..self.space.dim(deg) {
                out.push((BasisId { degree: deg, index }, &self.words[k]));
                k += 1;
            }
        }
        out
    }
}

/// The tensor algebra T(V): free associative algebra on the word basis, with
/// concatenation product and the weight-0 projection as augmentation.
pub fn tensor_algebra(ws: &WordSpace) -> AlgebraSpec {
    let field = ws.space.field;
    let mut alg = AlgebraSpec::new(Arc::clone(&ws.space), "1").expect("unit word");
    for (a, wa) in ws.word_ids() {
        for (b, wb) in ws.word_ids() {
            if wa.is_empty() || wb.is_empty() {
                continue;
            }
            let mut cat = wa.clone();
            cat.extend(wb.iter());
            match ws.id_of(&cat) {
                Some(id) => alg.set_product(a, b, vec![(id, field.one())]),
                None => alg.mark_overflow(a, b),
            }
        }
    }
    let unit_id = ws.empty_word();
    let alpha = Functional::from_pairs(field, 0, [(unit_id, field.one())]);
    alg.augmentation = Some(alpha);
    alg
}

/// The tensor coalgebra on the same word basis, with deconcatenation
/// comultiplication and the weight-0 projection as counit.
pub fn tensor_coalgebra(ws: &WordSpace) -> CoalgebraSpec {
    let field = ws.space.field;
    let unit = ws.empty_word();
    let counit = Functional::from_pairs(field, 0, [(unit, field.one())]);
    let mut co = CoalgebraSpec::new(Arc::clone(&ws.space), counit);
    for (id, w) in ws.word_ids() {
        let mut val: PairElem = Vec::new();
        for cut in 0..=w.len() {
            let left = ws.id_of(&w[..cut]).expect("prefix admitted");
            let right = ws.id_of(&w[cut..]).expect("suffix admitted");
            val.push((field.one(), left, right));
        }
        co.set_comul(id, val);
    }
    co.coaugmentation = Some(vec![(unit, field.one())]);
    co
}

/// Conilpotency verdict: the canonical filtration (as graded subspace bases
/// of C, level by level) and whether it exhausts the carrier.
pub struct ConilpotencyReport {
    pub conilpotent: bool,
    /// filtration[n] is a basis of F_n C (including gamma(k) at level 0).
    pub filtration: Vec<Vec<GElem>>,
}

/// Computes F_n C as the kernel of C -> (C+)^{⊗ n+1} via the recursion
/// F_n D = preimage of F_{n-1} D ⊗ D under the reduced comultiplication.
pub fn is_conilpotent(c: &CoalgebraSpec) -> Result<ConilpotencyReport, Error> {
    let (flat, qm) = c.plus_quotient()?;
    let field = c.field();
    let dim = flat.dim();
    let gamma = c.coaugmentation.clone().unwrap();

    // mu+ : flat -> flat^2 over the C+ representatives (free coords)
    let reduce = |v: &GElem| -> GElem { flat.to_gelem(&qm.reduce(&flat.to_svec(v))) };
    let mu_plus = |v: &SVec| -> SVec {
        let ge = flat.to_gelem(v);
        let pairs = c.reduced_comul(&ge, &reduce);
        matrix::svec_normalize(
            pairs
                .into_iter()
                .map(|(s, x, y)| (flat.pos(x) * dim + flat.pos(y), s))
                .collect(),
        )
    };

    // D basis = free coordinates of the quotient
    let d_basis: Vec<SVec> = qm
        .free_coords
        .iter()
        .map(|k| vec![(*k, field.one())])
        .collect();

    let mut filtration_d: Vec<Vec<SVec>> = vec![Vec::new()]; // F_0 D = 0
    let mut level = 0usize;
    loop {
        level += 1;
        let prev = &filtration_d[level - 1];
        // subspace F_{n-1} D ⊗ D inside flat^2
        let mut sub: Vec<SVec> = Vec::new();
        for f in prev {
            for e in &d_basis {
                let mut v: SVec = Vec::new();
                for (i, ci) in f {
                    for (j, cj) in e {
                        v.push((i * dim + j, ci.mul(cj)));
                    }
                }
                sub.push(matrix::svec_normalize(v));
            }
        }
        let q2 = QuotientMap::new(field, dim * dim, &sub);
        // kernel of (reduce mod sub) ∘ mu+ on D
        let cols: Vec<SVec> = d_basis.iter().map(|e| q2.reduce(&mu_plus(e))).collect();
        let m = SparseMat::from_columns(field, dim * dim, &cols);
        let ker = m.kernel_basis();
        // kernel coords are in terms of d_basis; convert to flat vectors
        let fn_d: Vec<SVec> = ker
            .iter()
            .map(|k| {
                let mut v: SVec = Vec::new();
                for (pos, coeff) in k {
                    for (i, ci) in &d_basis[*pos] {
                        v.push((*i, ci.mul(coeff)));
                    }
                }
                matrix::svec_normalize(v)
            })
            .collect();
        let fn_d = matrix::reduce_spanning(field, dim, &fn_d);
        let stabilized = fn_d.len() == filtration_d[level - 1].len();
        filtration_d.push(fn_d);
        if stabilized || filtration_d[level].len() == d_basis.len() || level > dim {
            break;
        }
    }

    let exhausted = filtration_d.last().unwrap().len() == d_basis.len();
    // lift: F_n C = gamma(k) + F_n D (representatives already live in C)
    let filtration = filtration_d
        .iter()
        .map(|lvl| {
            let mut out = vec![gamma.clone()];
            out.extend(lvl.iter().map(|v| flat.to_gelem(v)));
            out
        })
        .collect();
    Ok(ConilpotencyReport {
        conilpotent: exhausted,
        filtration,
    })
}

/// Coradical data: the maximal cosemisimple subcoalgebra and the coradical
/// filtration built from it by the wedge operation.
pub struct CoradicalReport {
    /// Basis of C^ss inside C.
    pub cosemisimple: Vec<GElem>,
    /// filtration[n] = basis of F_n C = wedge^{n+1} C^ss.
    pub filtration: Vec<Vec<GElem>>,
}

/// Dualizes C to the finite-dimensional algebra C*, extracts the Jacobson
/// radical J as the kernel of the trace form of the regular representation,
/// and returns the annihilator of J together with the wedge filtration.
pub fn coradical_filtration(c: &CoalgebraSpec) -> Result<CoradicalReport, Error> {
    let field = c.field();
    let flat = Flattener::new(&c.carrier);
    let n = flat.dim();
    if let Field::Prime(p) = field {
        if p <= n as u64 {
            return Err(Error::Unsupported(format!(
                "coradical over F_{p} needs p > dim C = {n}"
            )));
        }
    }

    // structure constants of E = C^*: (e_i e_j)(c) = coefficient of
    // (i, j) in mu(c); plain convolution order (the radical is side-agnostic)
    let prod = |i: usize, j: usize| -> Vec<Scalar> {
        let mut out = vec![field.zero(); n];
        for k in 0..n {
            let ck = flat.id(k);
            for (s, x, y) in c.comul_basis(ck) {
                if flat.pos(x) == i && flat.pos(y) == j {
                    out[k] = out[k].add(&s);
                }
            }
        }
        out
    };
    // left-multiplication traces t_m = tr(L_{e_m})
    let mut traces = vec![field.zero(); n];
    let mut products: Vec<Vec<Vec<Scalar>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(prod(i, j));
        }
        products.push(row);
    }
    for m in 0..n {
        let mut t = field.zero();
        for j in 0..n {
            t = t.add(&products[m][j][j]);
        }
        traces[m] = t;
    }
    // Gram matrix G[i][j] = tr(L_{e_i e_j})
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut g = field.zero();
            for m in 0..n {
                if !products[i][j][m].is_zero() {
                    g = g.add(&products[i][j][m].mul(&traces[m]));
                }
            }
            if !g.is_zero() {
                trip.push((i, j, g));
            }
        }
    }
    let gram = SparseMat::from_triplets(field, n, n, trip);
    let radical = gram.kernel_basis();

    // verify nilpotency of J (sanity for the trace criterion)
    {
        let apply_mul = |a: &SVec, b: &SVec| -> SVec {
            let mut out: SVec = Vec::new();
            for (i, ci) in a {
                for (j, cj) in b {
                    for (m, v) in products[*i][*j].iter().enumerate() {
                        if !v.is_zero() {
                            out.push((m, v.mul(ci).mul(cj)));
                        }
                    }
                }
            }
            matrix::svec_normalize(out)
        };
        let mut power: Vec<SVec> = radical.clone();
        for _ in 0..n {
            if power.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for a in &power {
                for b in &radical {
                    let p = apply_mul(a, b);
                    if !p.is_empty() {
                        next.push(p);
                    }
                }
            }
            power = matrix::reduce_spanning(field, n, &next);
        }
        if !power.is_empty() {
            return Err(Error::Unsupported(
                "trace-form radical is not nilpotent; field too small".into(),
            ));
        }
    }

    // C^ss = annihilator of J: kernel of the evaluation matrix (rows = J)
    let ann = {
        let trip = radical.iter().enumerate().flat_map(|(r, j)| {
            j.iter().map(move |(i, ci)| (r, *i, ci.clone()))
        });
        let m = SparseMat::from_triplets(field, radical.len(), n, trip);
        m.kernel_basis()
    };
    let ss = matrix::reduce_spanning(field, n, &ann);

    // wedge filtration: F_0 = C^ss, F_k = ker((q_ss ⊗ q_{F_{k-1}}) mu)
    let mut filtration: Vec<Vec<SVec>> = vec![ss.clone()];
    loop {
        let prev = filtration.last().unwrap();
        if prev.len() == n {
            break;
        }
        let q_ss = QuotientMap::new(field, n, &ss);
        let q_prev = QuotientMap::new(field, n, prev);
        let cols: Vec<SVec> = (0..n)
            .map(|k| {
                let mut v: SVec = Vec::new();
                for (s, x, y) in c.comul_basis(flat.id(k)) {
                    let rx = q_ss.reduce(&vec![(flat.pos(x), field.one())]);
                    let ry = q_prev.reduce(&vec![(flat.pos(y), field.one())]);
                    for (i, ci) in &rx {
                        for (j, cj) in &ry {
                            v.push((i * n + j, s.mul(ci).mul(cj)));
                        }
                    }
                }
                matrix::svec_normalize(v)
            })
            .collect();
        let m = SparseMat::from_columns(field, n * n, &cols);
        let ker = matrix::reduce_spanning(field, n, &m.kernel_basis());
        let stabilized = ker.len() == prev.len();
        filtration.push(ker);
        if stabilized {
            break;
        }
    }

    Ok(CoradicalReport {
        cosemisimple: ss.iter().map(|v| flat.to_gelem(v)).collect(),
        filtration: filtration
            .into_iter()
            .map(|lvl| lvl.iter().map(|v| flat.to_gelem(v)).collect())
            .collect(),
    })
}

/// Cofreeness of the tensor coalgebra (conilpotent case): for a degree-0
/// map f : C -> V with f(gamma(1)) = 0 there is a unique coalgebra map
/// t : C -> T(V) whose weight-1 corestriction is f. Builds t explicitly as
/// sum over n of f^{⊗n} applied to the reduced iterated comultiplication.
pub fn cofree_extend(
    c: &CoalgebraSpec,
    f: &GradedMap,
    words: &WordSpace,
) -> Result<GradedMap, Error> {
    if f.degree != words.factor_shift {
        return Err(Error::Shape(format!(
            "corestriction degree {} must equal the factor shift {}",
            f.degree, words.factor_shift
        )));
    }
    let (flat, qm) = c.plus_quotient()?;
    let field = c.field();
    let reduce = |v: &GElem| -> GElem { flat.to_gelem(&qm.reduce(&flat.to_svec(v))) };
    let gamma = c.coaugmentation.clone().unwrap();
    if !f.apply(&gamma).is_empty() {
        return Err(Error::Unsupported("corestriction must kill the coaugmentation".into()));
    }
    let unit = words.empty_word();
    let cap = words.space.window.weight_cap as usize;

    Ok(GradedMap::from_fn(&c.carrier, &words.space, 0, |id| {
        let mut img: GElem = Vec::new();
        // weight 0 part: eps(c) * 1
        let e = c.counit.eval_basis(id);
        if !e.is_zero() {
            img.push((unit, e));
        }
        // tensors[k] = list of (coeff, [c1..ck]) from iterated reduced comul
        let mut layer: Vec<(Scalar, Vec<BasisId>)> =
            reduce(&vec![(id, field.one())])
                .into_iter()
                .map(|(x, s)| (s, vec![x]))
                .collect();
        for _len in 1..=cap {
            // apply f to every factor and record the word
            for (s, factors) in &layer {
                let mut terms: Vec<(Scalar, Vec<BasisId>)> = vec![(s.clone(), Vec::new())];
                for fid in factors {
                    let fx = f.col(*fid);
                    let mut next = Vec::new();
                    for (coef, word) in &terms {
                        for (v, cv) in &fx {
                            let mut w = word.clone();
                            w.push(*v);
                            next.push((coef.mul(cv), w));
                        }
                    }
                    terms = next;
                }
                for (coef, w) in terms {
                    if let Some(wid) = words.id_of(&w) {
                        img.push((wid, coef));
                    }
                }
            }
            // extend the layer by one more reduced comultiplication on the
            // last factor
            let mut next_layer = Vec::new();
            for (s, factors) in &layer {
                let last = *factors.last().unwrap();
                for (t, x, y) in c.reduced_comul(&vec![(last, field.one())], &reduce) {
                    let mut nf = factors[..factors.len() - 1].to_vec();
                    nf.push(x);
                    nf.push(y);
                    next_layer.push((s.mul(&t), nf));
                }
            }
            layer = next_layer;
            if layer.is_empty() {
                break;
            }
        }
        gelem_normalize(img)
    }))
}
