//! The bar and cobar constructions: augmented and nonaugmented (curved)
//! bar of algebras and DG-algebras with module coefficients, coaugmented
//! and noncoaugmented (curved) cobar of coalgebras with comodule
//! coefficients, change-of-retraction/section isomorphisms, and
//! functoriality.
//!
//! Grading: a bar word [a_1|..|a_n] sits in degree sum |a_i| - n (each
//! factor shifted by [1]); a cobar word in degree sum |c_i| + n. All signs
//! come from the Koszul rule applied to the shifted factors; the d²-law
//! tests over Q police every choice.

use std::sync::Arc;

use crate::algebra::{AlgebraSpec, ModuleSpec};
use crate::cdg::{CdgAlgebra, CdgCoalgebra, CdgCoalgebraMorphism, CdgComodule, CdgModule};
use crate::coalgebra::{CoSide, CoalgebraSpec, ComoduleSpec, PairElem, WordSpace};
use crate::error::Error;
use crate::field::Scalar;
use crate::functional::Functional;
use crate::graded::{
    gelem_normalize, gelem_scale, BasisElem, BasisId, DegreeWindow, GElem, GradedMap,
    GradedVectorSpace, Space, TensorSpace,
};

/// A retraction v : A -> k with v(1) = 1; its kernel V identifies with
/// A_+ = A / k·1. When v is the augmentation, m_k = 0 and the bar output is
/// uncurved.
#[derive(Clone, Debug)]
pub struct Retraction {
    pub v: Functional,
}

impl Retraction {
    pub fn new(alg: &AlgebraSpec, v: Functional) -> Result<Retraction, Error> {
        if !v.eval_basis(alg.unit).is_one() {
            return Err(Error::Unsupported("retraction needs v(1) = 1".into()));
        }
        if v.degree != 0 {
            return Err(Error::Unsupported("retraction must be homogeneous of degree 0".into()));
        }
        Ok(Retraction { v })
    }

    pub fn from_augmentation(alg: &AlgebraSpec) -> Result<Retraction, Error> {
        let alpha = alg
            .augmentation
            .clone()
            .ok_or_else(|| Error::Unsupported("algebra is not augmented".into()))?;
        Retraction::new(alg, alpha)
    }
}

/// The space A_+ = A / k·1, with the non-unit basis labels as its basis and
/// weights bumped to at least 1. Ids are positionally compatible with the
/// algebra carrier through `to_alg`.
pub struct PlusBasis {
    pub space: Space,
    to_alg: Vec<BasisId>,
    from_alg: std::collections::HashMap<BasisId, BasisId>,
}

pub fn plus_basis(alg: &AlgebraSpec) -> PlusBasis {
    let mut per_degree: std::collections::BTreeMap<i32, Vec<BasisElem>> =
        std::collections::BTreeMap::new();
    let mut pairs: Vec<(BasisId, BasisId)> = Vec::new();
    for id in alg.carrier.ids() {
        if id == alg.unit {
            continue;
        }
        let e = alg.carrier.elem(id);
        let slot = per_degree.entry(id.degree).or_default();
        let pid = BasisId { degree: id.degree, index: slot.len() };
        slot.push(BasisElem {
            label: e.label.clone(),
            weight: e.weight.max(1),
        });
        pairs.push((pid, id));
    }
    let space = Arc::new(
        GradedVectorSpace::new(alg.field(), alg.carrier.window, per_degree).unwrap(),
    );
    pairs.sort_by_key(|(p, _)| *p);
    let to_alg = pairs.iter().map(|(_, a)| *a).collect();
    let from_alg = pairs.into_iter().map(|(p, a)| (a, p)).collect();
    PlusBasis { space, to_alg, from_alg }
}

impl PlusBasis {
    pub fn alg_id(&self, plus: BasisId) -> BasisId {
        let mut k = 0;
        for deg in self.space.degrees() {
            if deg == plus.degree {
                return self.to_alg[k + plus.index];
            }
            k += self.space.dim(deg);
        }
        panic!("not a plus id");
    }

    pub fn plus_id(&self, alg: BasisId) -> Option<BasisId> {
        self.from_alg.get(&alg).copied()
    }

    /// Project an algebra element to A_+ coordinates (drop the unit line;
    /// the identification ker(v) = A_+ is implicit).
    pub fn project(&self, v: &GElem) -> GElem {
        gelem_normalize(
            v.iter()
                .filter_map(|(id, c)| self.plus_id(*id).map(|p| (p, c.clone())))
                .collect(),
        )
    }
}

/// The decomposition of the multiplication of A with respect to a
/// retraction v: for abar = a - v(a)1 and bbar = b - v(b)1,
/// abar·bbar = m_k(a,b)·1 + m_V(a,b) with m_V valued in A_+.
struct BarComponents<'a> {
    alg: &'a AlgebraSpec,
    plus: &'a PlusBasis,
    v: &'a Functional,
}

impl<'a> BarComponents<'a> {
    /// None when the product escapes the window.
    fn m_full(&self, a: BasisId, b: BasisId) -> Option<GElem> {
        let field = self.alg.field();
        let aa = self.plus.alg_id(a);
        let bb = self.plus.alg_id(b);
        let ab = self.alg.mul_basis(aa, bb).into_elem()?;
        // abar·bbar = ab - v(a) b - v(b) a + v(a)v(b) 1; we only need the
        // decomposition of the product of the bar representatives
        let va = self.v.eval_basis(aa);
        let vb = self.v.eval_basis(bb);
        let mut out = ab;
        out = crate::graded::gelem_sub(&out, &gelem_scale(&vec![(bb, field.one())], &va));
        out = crate::graded::gelem_sub(&out, &gelem_scale(&vec![(aa, field.one())], &vb));
        out = crate::graded::gelem_add(&out, &gelem_scale(&self.alg.unit_elem(), &va.mul(&vb)));
        Some(out)
    }

    fn m_v(&self, a: BasisId, b: BasisId) -> Option<GElem> {
        let full = self.m_full(a, b)?;
        // V-component of u is pi_+(u - v(u)1) = pi_+(u) - v(u)·0; in plus
        // coordinates, just drop the unit and subtract v(u) times nothing:
        // the identification ker(v) -> A_+ sends u - v(u)1 to pi_+(u)
        Some(self.plus.project(&full))
    }

    fn m_k(&self, a: BasisId, b: BasisId) -> Option<Scalar> {
        let full = self.m_full(a, b)?;
        Some(self.v.eval(&full))
    }

    fn d_v(&self, a: BasisId) -> GElem {
        match &self.alg.differential {
            Some(d) => self.plus.project(&d.col(self.plus.alg_id(a))),
            None => Vec::new(),
        }
    }

    fn d_k(&self, a: BasisId) -> Scalar {
        match &self.alg.differential {
            Some(d) => self.v.eval(&d.col(self.plus.alg_id(a))),
            None => self.alg.field().zero(),
        }
    }
}

/// Output of the (curved) bar construction.
pub struct Bar {
    pub words: WordSpace,
    pub plus: PlusBasis,
    pub cdg: CdgCoalgebra,
    pub algebra: Arc<AlgebraSpec>,
    pub retraction: Retraction,
}

/// The nonaugmented bar construction Br_v(A): the tensor coalgebra on
/// A_+[1] with the coderivation built from m_V (and d_V in the DG case) and
/// the curvature from -m_k (and d_k). With v = an augmentation the output
/// is an honest DG-coalgebra.
pub fn bar_curved(
    alg: &Arc<AlgebraSpec>,
    v: &Retraction,
    window: &DegreeWindow,
) -> Result<Bar, Error> {
    if alg.carrier.total_dim() == 0 {
        return Err(Error::Unsupported("bar of the zero algebra".into()));
    }
    let field = alg.field();
    let plus = plus_basis(alg);
    let words = WordSpace::new(&plus.space, window, 1);
    let comps = BarComponents { alg, plus: &plus, v: &v.v };

    let mut co = crate::coalgebra::tensor_coalgebra(&words);

    // differential: sum over merge positions and internal-differential
    // positions, with Koszul signs over the shifted prefix
    let mut cols: std::collections::BTreeMap<BasisId, GElem> = std::collections::BTreeMap::new();
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    for (wid, word) in words.word_ids() {
        let mut img: GElem = Vec::new();
        let shifted_deg = |id: BasisId| -> i64 { id.degree as i64 - 1 };
        for i in 0..word.len() {
            let prefix: i64 = word[..i].iter().map(|x| shifted_deg(*x)).sum();
            // internal differential at position i: sign -(-1)^{prefix}
            let dv = comps.d_v(word[i]);
            if !dv.is_empty() {
                for (x, s) in dv {
                    let mut nw = word.clone();
                    nw[i] = x;
                    match words.id_of(&nw) {
                        Some(nid) => img.push((nid, s.neg().signed(prefix))),
                        None => {
                            dropped.insert(wid.degree);
                        }
                    }
                }
            }
            // merge at positions (i, i+1): sign (-1)^{prefix + |a_i|}
            if i + 1 < word.len() {
                let Some(mv) = comps.m_v(word[i], word[i + 1]) else {
                    dropped.insert(wid.degree);
                    continue;
                };
                let sgn = field.one().signed(prefix + word[i].degree as i64);
                for (x, s) in mv {
                    let mut nw = word[..i].to_vec();
                    nw.push(x);
                    nw.extend_from_slice(&word[i + 2..]);
                    match words.id_of(&nw) {
                        Some(nid) => img.push((nid, s.mul(&sgn))),
                        None => {
                            dropped.insert(wid.degree);
                        }
                    }
                }
            }
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(wid, img);
        }
    }
    let mut d = GradedMap::from_fn(&words.space, &words.space, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    let (vlo, vhi) = words.differential_validity(&|deg| !dropped.contains(&deg));
    d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: window.weight_cap };
    co.differential = Some(d);

    // curvature: weight-2 component -m_k on [a|b], weight-1 component d_k
    let mut h = Functional::zero(field, 2);
    for (wid, word) in words.word_ids() {
        if wid.degree != -2 {
            continue;
        }
        let val = match word.len() {
            1 => comps.d_k(word[0]),
            2 => match comps.m_k(word[0], word[1]) {
                Some(mk) => mk.neg(),
                None => continue,
            },
            _ => continue,
        };
        if !val.is_zero() {
            h.set(wid, val);
        }
    }

    Ok(Bar {
        cdg: CdgCoalgebra {
            coalgebra: Arc::new(co),
            h,
        },
        words,
        plus,
        algebra: Arc::clone(alg),
        retraction: v.clone(),
    })
}

/// Augmented bar construction: bar_curved with v = the augmentation; the
/// curvature vanishes and the result is a conilpotent DG-coalgebra.
pub fn bar_augmented(alg: &Arc<AlgebraSpec>, window: &DegreeWindow) -> Result<Bar, Error> {
    let v = Retraction::from_augmentation(alg)?;
    let bar = bar_curved(alg, &v, window)?;
    if !bar.cdg.h.is_zero() {
        return Err(Error::axiom("bar", "h", "augmented bar must be uncurved"));
    }
    Ok(bar)
}

/// The bar construction with coefficients: the cofree comodule
/// T(A_+[1]) ⊗ M with the action term appended to the bar differential.
pub struct BarModule {
    pub comodule: CdgComodule,
    pub tensor: TensorSpace,
}

pub fn bar_module(
    bar: &Bar,
    module: &ModuleSpec,
    window: &DegreeWindow,
) -> Result<BarModule, Error> {
    let field = module.carrier.field;
    let alg = &bar.algebra;
    let comps = BarComponents {
        alg,
        plus: &bar.plus,
        v: &bar.retraction.v,
    };
    let tensor = TensorSpace::new(&bar.words.space, &module.carrier, window);
    let carrier = Arc::clone(&tensor.space);

    // act by abar = a - v(a)1: abar m = a m - v(a) m
    let act_bar = |a: BasisId, m: BasisId| -> Option<GElem> {
        let aa = bar.plus.alg_id(a);
        let am = module.act_basis(aa, m).into_elem()?;
        let va = comps.v.eval_basis(aa);
        Some(crate::graded::gelem_sub(
            &am,
            &gelem_scale(&vec![(m, field.one())], &va),
        ))
    };

    let dm = module
        .differential
        .clone()
        .unwrap_or_else(|| GradedMap::zero(&module.carrier, &module.carrier, 1));

    let mut cols: std::collections::BTreeMap<BasisId, GElem> = std::collections::BTreeMap::new();
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    for tid in carrier.ids() {
        let (wid, mid) = tensor.pair_of(tid);
        let word = bar.words.word(wid).to_vec();
        let shifted_deg = |id: BasisId| -> i64 { id.degree as i64 - 1 };
        let total_shift: i64 = word.iter().map(|x| shifted_deg(*x)).sum();
        let mut img: GElem = Vec::new();
        let mut local_drop = false;
        let push = |img: &mut GElem, drop: &mut bool, entry: Option<(BasisId, Scalar)>| {
            match entry {
                Some(e) => img.push(e),
                None => *drop = true,
            }
        };
        // bar terms on the word part
        for i in 0..word.len() {
            let prefix: i64 = word[..i].iter().map(|x| shifted_deg(*x)).sum();
            let dv = comps.d_v(word[i]);
            for (x, s) in dv {
                let mut nw = word.clone();
                nw[i] = x;
                let entry = bar
                    .words
                    .id_of(&nw)
                    .and_then(|nid| tensor.id_of(nid, mid))
                    .map(|id2| (id2, s.neg().signed(prefix)));
                push(&mut img, &mut local_drop, entry);
            }
            if i + 1 < word.len() {
                match comps.m_v(word[i], word[i + 1]) {
                    Some(mv) => {
                        let sgn = field.one().signed(prefix + word[i].degree as i64);
                        for (x, s) in mv {
                            let mut nw = word[..i].to_vec();
                            nw.push(x);
                            nw.extend_from_slice(&word[i + 2..]);
                            let entry = bar
                                .words
                                .id_of(&nw)
                                .and_then(|nid| tensor.id_of(nid, mid))
                                .map(|id2| (id2, s.mul(&sgn)));
                            push(&mut img, &mut local_drop, entry);
                        }
                    }
                    None => {
                        dropped.insert(tid.degree);
                    }
                }
            }
        }
        // action term: merge the last factor into the module
        if let Some((last, rest)) = word.split_last() {
            let prefix: i64 = rest.iter().map(|x| shifted_deg(*x)).sum();
            match act_bar(*last, mid) {
                Some(am) => {
                    let sgn = field.one().signed(prefix + last.degree as i64);
                    if let Some(nid) = bar.words.id_of(rest) {
                        for (x, s) in am {
                            let entry = tensor.id_of(nid, x).map(|id2| (id2, s.mul(&sgn)));
                            push(&mut img, &mut local_drop, entry);
                        }
                    }
                }
                None => {
                    dropped.insert(tid.degree);
                }
            }
        }
        // module differential: passes the whole shifted word
        for (x, s) in dm.col(mid) {
            let entry = tensor.id_of(wid, x).map(|id2| (id2, s.signed(total_shift)));
            push(&mut img, &mut local_drop, entry);
        }
        if local_drop {
            dropped.insert(tid.degree);
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(tid, img);
        }
    }
    let mut d = GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    // completeness of the tensor carrier at degree D needs words complete
    // at D - md for every module degree md
    let carrier_complete = |d: i32| -> bool {
        module
            .carrier
            .degrees()
            .all(|md| bar.words.degree_complete(d - md))
    };
    let (vlo, vhi) = crate::graded::validity_interval(&carrier.window, &|deg| {
        carrier_complete(deg) && carrier_complete(deg + 1) && !dropped.contains(&deg)
    });
    d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: window.weight_cap };

    // cofree comodule structure: deconcatenate the word part
    let mut comodule = ComoduleSpec::new(
        Arc::clone(&bar.cdg.coalgebra),
        Arc::clone(&carrier),
        CoSide::Left,
    );
    for tid in carrier.ids() {
        let (wid, mid) = tensor.pair_of(tid);
        let word = bar.words.word(wid).to_vec();
        let mut coact: PairElem = Vec::new();
        for cut in 0..=word.len() {
            let left = bar.words.id_of(&word[..cut]).expect("prefix admitted");
            let right = bar.words.id_of(&word[cut..]).expect("suffix admitted");
            if let Some(id2) = tensor.id_of(right, mid) {
                coact.push((field.one(), left, id2));
            }
        }
        comodule.set_coaction(tid, coact);
    }
    comodule.differential = Some(d);

    Ok(BarModule {
        comodule: CdgComodule {
            base: Arc::new(bar.cdg.clone()),
            comodule,
        },
        tensor,
    })
}

/// A homogeneous section w of the counit: the element w(1) in C^0 with
/// eps(w(1)) = 1.
#[derive(Clone, Debug)]
pub struct Section {
    pub w: GElem,
}

impl Section {
    pub fn new(co: &CoalgebraSpec, w: GElem) -> Result<Section, Error> {
        let w = gelem_normalize(w);
        if !co.counit.eval(&w).is_one() {
            return Err(Error::Unsupported("section needs eps(w(1)) = 1".into()));
        }
        if w.iter().any(|(id, _)| id.degree != 0) {
            return Err(Error::Unsupported("section must be homogeneous of degree 0".into()));
        }
        Ok(Section { w })
    }

    pub fn from_coaugmentation(co: &CoalgebraSpec) -> Result<Section, Error> {
        let g = co
            .coaugmentation
            .clone()
            .ok_or_else(|| Error::Unsupported("coalgebra is not coaugmented".into()))?;
        Section::new(co, g)
    }
}

/// The space C_+ = ker(eps) identified with coker(w); represented on the
/// non-w coordinates after a change of basis making w(1) a basis vector.
/// For simplicity we require the basis to be adapted: w(1) must be a basis
/// vector and the counit must vanish on the other basis vectors, or more
/// generally we work with cbar = c - eps(c) w(1).
pub struct CobarPlus {
    pub space: Space,
    to_co: Vec<BasisId>,
    from_co: std::collections::HashMap<BasisId, BasisId>,
}

fn cobar_plus(co: &CoalgebraSpec, w: &Section) -> Result<CobarPlus, Error> {
    // we require an adapted basis: w(1) = a single basis vector
    if w.w.len() != 1 || !w.w[0].1.is_one() {
        return Err(Error::Unsupported(
            "cobar needs a basis-adapted section (w(1) a basis vector)".into(),
        ));
    }
    let wid = w.w[0].0;
    let mut per_degree: std::collections::BTreeMap<i32, Vec<BasisElem>> =
        std::collections::BTreeMap::new();
    let mut pairs: Vec<(BasisId, BasisId)> = Vec::new();
    for id in co.carrier.ids() {
        if id == wid {
            continue;
        }
        let e = co.carrier.elem(id);
        let slot = per_degree.entry(id.degree).or_default();
        let pid = BasisId { degree: id.degree, index: slot.len() };
        slot.push(BasisElem { label: e.label.clone(), weight: e.weight.max(1) });
        pairs.push((pid, id));
    }
    let space = Arc::new(
        GradedVectorSpace::new(co.field(), co.carrier.window, per_degree).unwrap(),
    );
    pairs.sort_by_key(|(p, _)| *p);
    let to_co = pairs.iter().map(|(_, c)| *c).collect();
    let from_co = pairs.into_iter().map(|(p, c)| (c, p)).collect();
    Ok(CobarPlus { space, to_co, from_co })
}

impl CobarPlus {
    pub fn co_id(&self, plus: BasisId) -> BasisId {
        let mut k = 0;
        for deg in self.space.degrees() {
            if deg == plus.degree {
                return self.to_co[k + plus.index];
            }
            k += self.space.dim(deg);
        }
        panic!("not a cobar plus id");
    }

    pub fn plus_id(&self, co: BasisId) -> Option<BasisId> {
        self.from_co.get(&co).copied()
    }

    /// W-component of a coalgebra element: cbar = c - eps(c) w(1); in the
    /// adapted basis this is just dropping the w coordinate.
    pub fn project(&self, v: &GElem) -> GElem {
        gelem_normalize(
            v.iter()
                .filter_map(|(id, c)| self.plus_id(*id).map(|p| (p, c.clone())))
                .collect(),
        )
    }
}

pub struct Cobar {
    pub words: WordSpace,
    pub plus: CobarPlus,
    pub cdg: CdgAlgebra,
    pub base: CdgCoalgebra,
    pub section: Section,
}

/// The curved, noncoaugmented cobar construction Cb_w(C): the tensor
/// algebra on C_+[-1] with the derivation built from mu_W, d_W, and the
/// curvature function h_C, and the curvature element mu_k(1) + d_k(1).
/// With w = a coaugmentation killed by d (and by h), the output is an
/// honest DG-algebra.
pub fn cobar_curved(
    source: &CdgCoalgebra,
    w: &Section,
    window: &DegreeWindow,
) -> Result<Cobar, Error> {
    let co = &source.coalgebra;
    if co.carrier.total_dim() == 0 {
        return Err(Error::Unsupported("cobar of the zero coalgebra".into()));
    }
    let _field = co.field();
    let plus = cobar_plus(co, w)?;
    let words = WordSpace::new(&plus.space, window, -1);
    let mut alg = crate::coalgebra::tensor_algebra(&words);
    alg.augmentation = None; // only an augmentation of the graded algebra

    let wununit = w.w[0].0;

    // components of mu and d with respect to C = k w(1) ⊕ W
    let mu_w = |c: BasisId| -> PairElem {
        // (pi_W ⊗ pi_W) mu(cbar), cbar = c - eps(c) w(1); since eps(c) = 0
        // for c != w(1) in the adapted basis, cbar = c
        let mut out: PairElem = Vec::new();
        for (s, x, y) in co.comul_basis(plus.co_id(c)) {
            if let (Some(px), Some(py)) = (plus.plus_id(x), plus.plus_id(y)) {
                out.push((s, px, py));
            }
        }
        out
    };
    let d_c = source.d();
    let d_w = |c: BasisId| -> GElem { plus.project(&d_c.col(plus.co_id(c))) };
    // curvature restricted to C_+
    let h_c = |c: BasisId| -> Scalar { source.h.eval_basis(plus.co_id(c)) };
    // components at the unit: mu_k and d_k
    let mu_k: PairElem = {
        let mut out = Vec::new();
        for (s, x, y) in co.comul_basis(wununit) {
            if let (Some(px), Some(py)) = (plus.plus_id(x), plus.plus_id(y)) {
                out.push((s, px, py));
            }
        }
        out
    };
    let d_k: GElem = plus.project(&d_c.col(wununit));

    // derivation from the generator components, extended by the Leibniz
    // rule with Koszul signs over the shifted factors (degree |c| + 1)
    let gen_image = |c: BasisId| -> GElem {
        let mut img: GElem = Vec::new();
        // A) comultiplication part: sum -(-1)^{|x|} [x|y]; the sign makes
        // DG-algebra morphisms out of the cobar correspond exactly to
        // Maurer-Cartan cochains in the convolution algebra
        for (s, x, y) in mu_w(c) {
            if let Some(nid) = words.id_of(&[x, y]) {
                img.push((nid, s.neg().signed(x.degree as i64)));
            }
        }
        // B) internal differential part: -[d_W c]
        for (x, s) in d_w(c) {
            if let Some(nid) = words.id_of(&[x]) {
                img.push((nid, s.neg()));
            }
        }
        // C) curvature function part: h(c)·1
        let hc = h_c(c);
        if !hc.is_zero() {
            img.push((words.empty_word(), hc));
        }
        gelem_normalize(img)
    };

    let mut cols: std::collections::BTreeMap<BasisId, GElem> = std::collections::BTreeMap::new();
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    for (wid, word) in words.word_ids() {
        let shifted_deg = |id: BasisId| -> i64 { id.degree as i64 + 1 };
        let mut img: GElem = Vec::new();
        for i in 0..word.len() {
            let prefix: i64 = word[..i].iter().map(|x| shifted_deg(*x)).sum();
            for (gid, s) in gen_image(word[i]) {
                // replace factor i by the (possibly shorter/longer) word gid
                let mut nw = word[..i].to_vec();
                nw.extend_from_slice(words.word(gid));
                nw.extend_from_slice(&word[i + 1..]);
                match words.id_of(&nw) {
                    Some(nid) => img.push((nid, s.signed(prefix))),
                    None => {
                        dropped.insert(wid.degree);
                    }
                }
            }
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(wid, img);
        }
    }
    let mut d = GradedMap::from_fn(&words.space, &words.space, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    let (vlo, vhi) = words.differential_validity(&|deg| !dropped.contains(&deg));
    d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: window.weight_cap };
    alg.differential = Some(d);

    // curvature element: mu_k part in weight 2 and d_k part in weight 1
    let mut h: GElem = Vec::new();
    for (s, x, y) in &mu_k {
        if let Some(nid) = words.id_of(&[*x, *y]) {
            h.push((nid, s.clone().neg().signed(x.degree as i64)));
        }
    }
    for (x, s) in &d_k {
        if let Some(nid) = words.id_of(&[*x]) {
            h.push((nid, s.neg()));
        }
    }
    let h = gelem_normalize(h);

    Ok(Cobar {
        cdg: CdgAlgebra {
            algebra: Arc::new(alg),
            h,
        },
        words,
        plus,
        base: source.clone(),
        section: w.clone(),
    })
}

/// Coaugmented cobar: section = the coaugmentation; requires (gamma, 0) to
/// be a CDG-morphism (d gamma = 0), and produces a DG-algebra.
pub fn cobar_coaugmented(source: &CdgCoalgebra, window: &DegreeWindow) -> Result<Cobar, Error> {
    let w = Section::from_coaugmentation(&source.coalgebra)?;
    let cobar = cobar_curved(source, &w, window)?;
    if !cobar.cdg.h.is_empty() {
        return Err(Error::axiom("cobar", "h", "coaugmented cobar must be uncurved"));
    }
    Ok(cobar)
}

/// The cobar construction with comodule coefficients: the free module
/// T(C_+[-1]) ⊗ N with the coaction term appended; direct-sum totalization
/// (within a finite window the direct-product totalization coincides).
pub struct CobarModule {
    pub module: CdgModule,
    pub tensor: TensorSpace,
}

pub fn cobar_comodule(
    cobar: &Cobar,
    n: &ComoduleSpec,
    window: &DegreeWindow,
) -> Result<CobarModule, Error> {
    if n.side != CoSide::Left {
        return Err(Error::Unsupported("cobar coefficients must be a left comodule".into()));
    }
    let field = n.carrier.field;
    let tensor = TensorSpace::new(&cobar.words.space, &n.carrier, window);
    let carrier = Arc::clone(&tensor.space);
    let d_alg = cobar.cdg.d();
    let dn = n
        .differential
        .clone()
        .unwrap_or_else(|| GradedMap::zero(&n.carrier, &n.carrier, 1));

    // reduced coaction: nu+(m) = (pi_W ⊗ id) nu(m)
    let coact_plus = |m: BasisId| -> Vec<(Scalar, BasisId, BasisId)> {
        let mut out = Vec::new();
        for (s, c, mm) in n.coaction_basis(m) {
            if let Some(pc) = cobar.plus.plus_id(c) {
                out.push((s, pc, mm));
            }
        }
        out
    };

    let mut cols: std::collections::BTreeMap<BasisId, GElem> = std::collections::BTreeMap::new();
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    for tid in carrier.ids() {
        let (wid, mid) = tensor.pair_of(tid);
        let word = cobar.words.word(wid).to_vec();
        let shifted: i64 = word.iter().map(|x| x.degree as i64 + 1).sum();
        let mut img: GElem = Vec::new();
        // algebra differential on the word part
        for (nid, s) in d_alg.col(wid) {
            match tensor.id_of(nid, mid) {
                Some(id2) => img.push((id2, s)),
                None => {
                    dropped.insert(tid.degree);
                }
            }
        }
        // comodule differential
        for (x, s) in dn.col(mid) {
            match tensor.id_of(wid, x) {
                Some(id2) => img.push((id2, s.signed(shifted))),
                None => {
                    dropped.insert(tid.degree);
                }
            }
        }
        // coaction term: append s^{-1} c to the word
        for (s, pc, mm) in coact_plus(mid) {
            let mut nw = word.clone();
            nw.push(pc);
            match cobar.words.id_of(&nw).and_then(|nid| tensor.id_of(nid, mm)) {
                Some(id2) => img.push((id2, s.signed(shifted + pc.degree as i64))),
                None => {
                    dropped.insert(tid.degree);
                }
            }
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(tid, img);
        }
    }
    let mut d = GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    let carrier_complete = |d: i32| -> bool {
        n.carrier
            .degrees()
            .all(|md| cobar.words.degree_complete(d - md))
    };
    let (vlo, vhi) = crate::graded::validity_interval(&carrier.window, &|deg| {
        carrier_complete(deg) && carrier_complete(deg + 1) && !dropped.contains(&deg)
    });
    d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: window.weight_cap };

    // free module structure: concatenate on the left
    let mut module = ModuleSpec::new(Arc::clone(&cobar.cdg.algebra), Arc::clone(&carrier));
    for aid in cobar.cdg.algebra.carrier.ids() {
        if aid == cobar.cdg.algebra.unit {
            continue;
        }
        for tid in carrier.ids() {
            let (wid, mid) = tensor.pair_of(tid);
            let mut nw = cobar.words.word(aid).to_vec();
            nw.extend_from_slice(cobar.words.word(wid));
            let img = match cobar.words.id_of(&nw).and_then(|nid| tensor.id_of(nid, mid)) {
                Some(id2) => vec![(id2, field.one())],
                None => continue, // overflow handled by the weight rule
            };
            module.set_action(aid, tid, img);
        }
    }
    module.differential = Some(d);

    Ok(CobarModule {
        module: CdgModule {
            base: Arc::new(cobar.cdg.clone()),
            module,
        },
        tensor,
    })
}

/// Change-of-retraction isomorphism (id, l) : Br_v(A) -> Br_{v'}(A) with
/// l = (v - v') on A_+.
pub fn bar_change_of_retraction(
    bar_v: &Bar,
    bar_v2: &Bar,
) -> Result<CdgCoalgebraMorphism, Error> {
    let field = bar_v.algebra.field();
    let f = GradedMap::identity(&bar_v.words.space);
    let mut l = Functional::zero(field, 1);
    for (wid, word) in bar_v.words.word_ids() {
        if wid.degree != -1 || word.len() != 1 {
            continue;
        }
        let aid = bar_v.plus.alg_id(word[0]);
        let val = bar_v
            .retraction
            .v
            .eval_basis(aid)
            .sub(&bar_v2.retraction.v.eval_basis(aid));
        if !val.is_zero() {
            l.set(wid, val);
        }
    }
    Ok(CdgCoalgebraMorphism { f, a: l })
}

/// The morphism of bar constructions induced by an algebra map f : A -> B
/// (given on carriers), with connection component l = v_A - v_B . f.
pub fn bar_functorial(
    bar_a: &Bar,
    bar_b: &Bar,
    f: &GradedMap,
) -> Result<CdgCoalgebraMorphism, Error> {
    let field = bar_a.algebra.field();
    // induced map on A_+ -> B_+
    let f_plus = |a_plus: BasisId| -> GElem {
        bar_b.plus.project(&f.col(bar_a.plus.alg_id(a_plus)))
    };
    let g = GradedMap::from_fn(&bar_a.words.space, &bar_b.words.space, 0, |wid| {
        let word = bar_a.words.word(wid).to_vec();
        let mut terms: Vec<(Scalar, Vec<BasisId>)> = vec![(field.one(), Vec::new())];
        for a in &word {
            let fa = f_plus(*a);
            let mut next = Vec::new();
            for (s, w) in &terms {
                for (b, cb) in &fa {
                    let mut nw = w.clone();
                    nw.push(*b);
                    next.push((s.mul(cb), nw));
                }
            }
            terms = next;
        }
        gelem_normalize(
            terms
                .into_iter()
                .filter_map(|(s, w)| bar_b.words.id_of(&w).map(|id| (id, s)))
                .collect(),
        )
    });
    let mut l = Functional::zero(field, 1);
    for (wid, word) in bar_a.words.word_ids() {
        if wid.degree != -1 || word.len() != 1 {
            continue;
        }
        let aid = bar_a.plus.alg_id(word[0]);
        let va = bar_a.retraction.v.eval_basis(aid);
        let vbf = bar_b.retraction.v.eval(&f.col(aid));
        let val = va.sub(&vbf);
        if !val.is_zero() {
            l.set(wid, val);
        }
    }
    Ok(CdgCoalgebraMorphism { f: g, a: l })
}

/// The DG-algebra morphism Cb(C) -> Cb(D) induced by a coaugmented
/// CDG-coalgebra morphism (f, a): on generators c -> f_+(c) - a(c)·1.
pub fn cobar_functorial(
    cobar_c: &Cobar,
    cobar_d: &Cobar,
    phi: &CdgCoalgebraMorphism,
) -> Result<GradedMap, Error> {
    let field = cobar_c.base.coalgebra.field();
    Ok(GradedMap::from_fn(
        &cobar_c.words.space,
        &cobar_d.words.space,
        0,
        |wid| {
            let word = cobar_c.words.word(wid).to_vec();
            // image of each generator: f_+(c) - a(c)·1, as a linear
            // combination of words of length 1 and 0
            let mut terms: Vec<(Scalar, Vec<BasisId>)> = vec![(field.one(), Vec::new())];
            for c in &word {
                let cid = cobar_c.plus.co_id(*c);
                let mut gen: Vec<(Scalar, Option<BasisId>)> = Vec::new();
                for (x, s) in phi.f.col(cid) {
                    if let Some(px) = cobar_d.plus.plus_id(x) {
                        gen.push((s, Some(px)));
                    }
                }
                let ac = phi.a.eval_basis(cid);
                if !ac.is_zero() {
                    gen.push((ac.neg(), None));
                }
                let mut next = Vec::new();
                for (s, w) in &terms {
                    for (t, px) in &gen {
                        let mut nw = w.clone();
                        if let Some(px) = px {
                            nw.push(*px);
                        }
                        next.push((s.mul(t), nw));
                    }
                }
                terms = next;
            }
            gelem_normalize(
                terms
                    .into_iter()
                    .filter_map(|(s, w)| cobar_d.words.id_of(&w).map(|id| (id, s)))
                    .collect(),
            )
        },
    ))
}

/// Restriction of the canonical weight-1 projection: the twisting cochain
/// tau : Br_v(A) -> A sending [a] to abar = a - v(a)·1 and all other
/// weights to zero.
pub fn bar_twisting_cochain(bar: &Bar) -> GradedMap {
    let field = bar.algebra.field();
    GradedMap::from_fn(&bar.words.space, &bar.algebra.carrier, 1, |wid| {
        let word = bar.words.word(wid);
        if word.len() != 1 {
            return Vec::new();
        }
        let aid = bar.plus.alg_id(word[0]);
        let va = bar.retraction.v.eval_basis(aid);
        let mut out = vec![(aid, field.one())];
        if !va.is_zero() {
            out.push((bar.algebra.unit, va.neg()));
        }
        gelem_normalize(out)
    })
}

/// The twisting cochain tau : C -> Cb_w(C): project to C_+ and include as
/// the length-1 words.
pub fn cobar_twisting_cochain(cobar: &Cobar) -> GradedMap {
    GradedMap::from_fn(
        &cobar.base.coalgebra.carrier,
        &cobar.cdg.algebra.carrier,
        1,
        |cid| {
            match cobar.plus.plus_id(cid) {
                Some(p) => match cobar.words.id_of(&[p]) {
                    Some(wid) => vec![(wid, cobar.base.coalgebra.field().one())],
                    None => Vec::new(),
                },
                None => Vec::new(),
            }
        },
    )
}
