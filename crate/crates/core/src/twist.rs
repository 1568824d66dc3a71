//! The convolution (C)DG-algebra Hom(C, B), Maurer-Cartan elements and
//! twisting cochains, the bar-cobar adjunction bijections, acyclicity
//! testing, and the twisted functors ⊗^tau and Hom^tau on all module
//! species.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgebraSpec, ModuleSpec};
use crate::barcobar::{Bar, Cobar};
use crate::cdg::{CdgAlgebra, CdgCoalgebra, CdgComodule, CdgContramodule, CdgModule};
use crate::coalgebra::{is_conilpotent, CoSide, ComoduleSpec};
use crate::cocontra::free_contramodule;
use crate::error::Error;
use crate::field::Scalar;
use crate::graded::{
    gelem_normalize, gelem_scale, BasisElem, BasisId, DegreeWindow, GElem, GradedMap,
    GradedVectorSpace, Space, TensorSpace,
};
use crate::homology::{homology, HomologyReport};

/// The graded Hom space Hom_k(C, B) with the convolution product
/// (fg)(c) = sum (-1)^{|g| |c_(1)|} f(c_(1)) g(c_(2)), differential
/// d(f) = d_B f - (-1)^{|f|} f d_C, and curvature
/// h(c) = eps(c) h_B - h_C(c) 1. Materialized on the rank-one basis
/// e_{c,b}, degree |b| - |c|.
pub struct HomCdgAlgebra {
    pub cdg: CdgAlgebra,
    pairs: Vec<(BasisId, BasisId)>,
    lookup: std::collections::HashMap<(BasisId, BasisId), BasisId>,
    pub source: Arc<CdgCoalgebra>,
    pub target: Arc<CdgAlgebra>,
}

impl HomCdgAlgebra {
    pub fn id_of(&self, c: BasisId, b: BasisId) -> Option<BasisId> {
        self.lookup.get(&(c, b)).copied()
    }

    pub fn pair_of(&self, id: BasisId) -> (BasisId, BasisId) {
        let mut k = 0;
        for deg in self.cdg.algebra.carrier.degrees() {
            if deg == id.degree {
                return self.pairs[k + id.index];
            }
            k += self.cdg.algebra.carrier.dim(deg);
        }
        panic!("not a Hom basis id");
    }

    /// Express a graded map C -> B of pure degree as an element.
    pub fn elem_of_map(&self, f: &GradedMap) -> GElem {
        let mut out: GElem = Vec::new();
        for (c, col) in f.cols_iter() {
            for (b, s) in col {
                if let Some(id) = self.id_of(*c, *b) {
                    out.push((id, s.clone()));
                }
            }
        }
        gelem_normalize(out)
    }
}

pub fn hom_cdg_algebra(
    c: &Arc<CdgCoalgebra>,
    b: &Arc<CdgAlgebra>,
    window: &DegreeWindow,
) -> Result<HomCdgAlgebra, Error> {
    let field = b.algebra.field();
    let csp = &c.coalgebra.carrier;
    let bsp = &b.algebra.carrier;

    let mut per_degree: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
    let mut placed: Vec<((BasisId, BasisId), BasisId)> = Vec::new();
    for cc in csp.ids() {
        for bb in bsp.ids() {
            let degree = bb.degree - cc.degree;
            if !window.contains(degree) {
                continue;
            }
            let label = format!("[{}->{}]", csp.label(cc), bsp.label(bb));
            let slot = per_degree.entry(degree).or_default();
            let id = BasisId { degree, index: slot.len() };
            slot.push(BasisElem { label, weight: 0 });
            placed.push(((cc, bb), id));
        }
    }
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, *window, per_degree)?);
    placed.sort_by_key(|(_, id)| *id);
    let pairs: Vec<(BasisId, BasisId)> = placed.iter().map(|(p, _)| *p).collect();
    let lookup: std::collections::HashMap<(BasisId, BasisId), BasisId> =
        placed.into_iter().collect();

    let unit_label = carrier
        .ids()
        .into_iter()
        .find(|id| {
            let (cc, bb) = {
                let mut k = 0;
                let mut found = None;
                for deg in carrier.degrees() {
                    if deg == id.degree {
                        found = Some(pairs[k + id.index]);
                        break;
                    }
                    k += carrier.dim(deg);
                }
                found.unwrap()
            };
            bb == b.algebra.unit && !c.coalgebra.counit.eval_basis(cc).is_zero()
        })
        .ok_or_else(|| Error::Unsupported("Hom(C,B) has no unit in the window".into()))?;
    let _ = unit_label;

    // the unit is e . eps, generally a combination; we need a single basis
    // label for AlgebraSpec, so adjoin the unit as its own tracked element
    // only when eps is supported on one basis vector with coefficient 1
    let eps_support: Vec<(BasisId, Scalar)> = c
        .coalgebra
        .counit
        .support()
        .map(|(id, s)| (*id, s.clone()))
        .collect();
    if eps_support.len() != 1 || !eps_support[0].1.is_one() {
        return Err(Error::Unsupported(
            "Hom(C,B) needs a counit supported on a single basis vector".into(),
        ));
    }
    let unit_id = lookup[&(eps_support[0].0, b.algebra.unit)];

    let mut alg = AlgebraSpec::new(Arc::clone(&carrier), carrier.label(unit_id))?;
    debug_assert_eq!(alg.unit, unit_id);

    // convolution products
    for (k1, &(c1, b1)) in pairs.iter().enumerate() {
        for (k2, &(c2, b2)) in pairs.iter().enumerate() {
            let _ = (k1, k2);
            let id1 = lookup[&(c1, b1)];
            let id2 = lookup[&(c2, b2)];
            if id1 == unit_id || id2 == unit_id {
                continue;
            }
            // (e1 e2)(c) = sum (-1)^{|e2||c_(1)|} e1(c_(1)) e2(c_(2))
            //            = sum over c with mu(c) having (c1, c2) leg
            let g_deg = (b2.degree - c2.degree) as i64;
            let mut val: GElem = Vec::new();
            let mut overflow = false;
            for cc in csp.ids() {
                let mut coeff = field.zero();
                for (s, x, y) in c.coalgebra.comul_basis(cc) {
                    if x == c1 && y == c2 {
                        coeff = coeff.add(&s.clone().signed(g_deg * x.degree as i64));
                    }
                }
                if coeff.is_zero() {
                    continue;
                }
                match b.algebra.mul_basis(b1, b2) {
                    crate::algebra::Product::Elem(prod) => {
                        for (bb, s) in &prod {
                            match lookup.get(&(cc, *bb)) {
                                Some(idp) => val.push((*idp, s.mul(&coeff))),
                                None => overflow = true,
                            }
                        }
                    }
                    crate::algebra::Product::Overflow => overflow = true,
                }
            }
            if overflow {
                alg.mark_overflow(id1, id2);
            } else {
                alg.set_product(id1, id2, val);
            }
        }
    }

    // differential d(e)(c) = d_B(e(c)) - (-1)^{|e|} e(d_C c)
    let db = b.d();
    let dc = c.d();
    let d = GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        let (cc, bb) = {
            let mut k = 0;
            let mut found = None;
            for deg in carrier.degrees() {
                if deg == id.degree {
                    found = Some(pairs[k + id.index]);
                    break;
                }
                k += carrier.dim(deg);
            }
            found.unwrap()
        };
        let mut img: GElem = Vec::new();
        for (b2, s) in db.col(bb) {
            if let Some(idp) = lookup.get(&(cc, b2)) {
                img.push((*idp, s));
            }
        }
        // - (-1)^{|e|} e . d_C: e_{c,b} . d_C picks out c in d_C(c')
        for c2 in csp.ids() {
            let coeff: Scalar = dc
                .col(c2)
                .iter()
                .filter(|(x, _)| *x == cc)
                .fold(field.zero(), |acc, (_, s)| acc.add(s));
            if !coeff.is_zero() {
                if let Some(idp) = lookup.get(&(c2, bb)) {
                    img.push((*idp, coeff.neg().signed(id.degree as i64)));
                }
            }
        }
        gelem_normalize(img)
    });
    let mut alg = alg;
    alg.differential = Some(d);

    // curvature element h(c) = eps(c) h_B - h_C(c) 1
    let mut h: GElem = Vec::new();
    for cc in csp.ids() {
        let e = c.coalgebra.counit.eval_basis(cc);
        if !e.is_zero() {
            for (bb, s) in &b.h {
                if let Some(idp) = lookup.get(&(cc, *bb)) {
                    h.push((*idp, s.mul(&e)));
                }
            }
        }
        let hc = c.h.eval_basis(cc);
        if !hc.is_zero() {
            if let Some(idp) = lookup.get(&(cc, b.algebra.unit)) {
                h.push((*idp, hc.neg()));
            }
        }
    }

    Ok(HomCdgAlgebra {
        cdg: CdgAlgebra {
            algebra: Arc::new(alg),
            h: gelem_normalize(h),
        },
        pairs,
        lookup,
        source: Arc::clone(c),
        target: Arc::clone(b),
    })
}

/// Maurer-Cartan verdict for a degree-1 map tau : C -> B, evaluated on
/// every basis element of C within the window:
/// (tau tau)(c) + d(tau)(c) + h(c) = 0.
pub struct McReport {
    pub passed: bool,
    pub first_failure: Option<(BasisId, GElem)>,
    /// basis elements whose verification needed out-of-window products
    pub unverified: Vec<BasisId>,
}

pub fn mc_check(tau: &GradedMap, c: &CdgCoalgebra, b: &CdgAlgebra) -> Result<McReport, Error> {
    if tau.degree != 1 {
        return Err(Error::Shape("twisting cochain must have degree +1".into()));
    }
    let db = b.d();
    let dc = c.d();
    let mut unverified = Vec::new();
    for cc in c.coalgebra.carrier.ids() {
        // convolution square with the Koszul sign (-1)^{|tau||c_(1)|}
        let mut acc: GElem = Vec::new();
        let mut ok = true;
        for (s, x, y) in c.coalgebra.comul_basis(cc) {
            let tx = tau.col(x);
            let ty = tau.col(y);
            if tx.is_empty() || ty.is_empty() {
                continue;
            }
            match b.algebra.mul_elems(&tx, &ty) {
                Some(prod) => {
                    acc.extend(gelem_scale(&prod, &s.clone().signed(x.degree as i64)))
                }
                None => ok = false,
            }
        }
        if !ok {
            unverified.push(cc);
            continue;
        }
        // d(tau) = d_B tau + tau d_C (degree |tau| = 1)
        acc.extend(db.apply(&tau.col(cc)));
        acc.extend(tau.apply(&dc.col(cc)));
        // h(c) = eps(c) h_B - h_C(c) 1
        let e = c.coalgebra.counit.eval_basis(cc);
        if !e.is_zero() {
            acc.extend(gelem_scale(&b.h, &e));
        }
        let hc = c.h.eval_basis(cc);
        if !hc.is_zero() {
            acc.push((b.algebra.unit, hc.neg()));
        }
        let total = gelem_normalize(acc);
        if !total.is_empty() {
            return Ok(McReport {
                passed: false,
                first_failure: Some((cc, total)),
                unverified,
            });
        }
    }
    Ok(McReport {
        passed: true,
        first_failure: None,
        unverified,
    })
}

/// The DG-algebra morphism Cb_gamma(C) -> A corresponding to tau: a cobar
/// word [c_1|..|c_n] goes to the product tau(c_1) ... tau(c_n).
pub fn tau_to_algebra_morphism(
    tau: &GradedMap,
    cobar: &Cobar,
    target: &AlgebraSpec,
) -> Result<GradedMap, Error> {
    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    let mut dropped: std::collections::BTreeSet<i32> = std::collections::BTreeSet::new();
    for (wid, word) in cobar.words.word_ids() {
        let mut acc: GElem = target.unit_elem();
        let mut ok = true;
        for cfac in word {
            let cid = cobar.plus.co_id(*cfac);
            let t = tau.col(cid);
            match target.mul_elems(&acc, &t) {
                Some(v) => acc = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            dropped.insert(wid.degree);
            continue;
        }
        let acc = gelem_normalize(acc);
        if !acc.is_empty() {
            cols.insert(wid, acc);
        }
    }
    let mut g = GradedMap::from_fn(&cobar.words.space, &target.carrier, 0, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    let (vlo, vhi) =
        crate::graded::validity_interval(&g.valid, &|deg| !dropped.contains(&deg));
    g.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: g.valid.weight_cap };
    Ok(g)
}

/// The coalgebra morphism C -> Br_v(A) for tau : C -> A, with the source
/// coalgebra passed explicitly.
pub fn tau_to_coalgebra_morphism(
    tau: &GradedMap,
    source: &crate::coalgebra::CoalgebraSpec,
    bar: &Bar,
) -> Result<GradedMap, Error> {
    let conil = is_conilpotent(source)?;
    if !conil.conilpotent {
        return Err(Error::Unsupported(
            "the coalgebra-morphism direction needs a conilpotent source".into(),
        ));
    }
    // the corestriction into the shifted letters: as a map into the plus
    // space it has degree +1 = the bar factor shift
    let f = GradedMap::from_fn(&source.carrier, &bar.plus.space, 1, |cid| {
        bar.plus.project(&tau.col(cid))
    });
    crate::coalgebra::cofree_extend(source, &f, &bar.words)
}

/// C ⊗^tau M for a left CDG-module M over B: the twisted differential
/// d(c⊗x) = d_C c ⊗ x + (-1)^{|c|} c ⊗ d_M x + sum (-1)^{|c_(1)|}
/// c_(1) ⊗ tau(c_(2)) x, a left CDG-comodule over C.
pub struct TwistedTensorComodule {
    pub comodule: CdgComodule,
    pub tensor: TensorSpace,
}

pub fn twisted_tensor_comodule(
    tau: &GradedMap,
    c: &Arc<CdgCoalgebra>,
    m: &CdgModule,
    window: &DegreeWindow,
) -> Result<TwistedTensorComodule, Error> {
    let field = m.module.carrier.field;
    let tensor = TensorSpace::new(&c.coalgebra.carrier, &m.module.carrier, window);
    let carrier = Arc::clone(&tensor.space);
    let dc = c.d();
    let dm = m.d();

    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    for tid in carrier.ids() {
        let (cid, mid) = tensor.pair_of(tid);
        let mut img: GElem = Vec::new();
        for (x, s) in dc.col(cid) {
            if let Some(id2) = tensor.id_of(x, mid) {
                img.push((id2, s));
            }
        }
        for (x, s) in dm.col(mid) {
            if let Some(id2) = tensor.id_of(cid, x) {
                img.push((id2, s.signed(cid.degree as i64)));
            }
        }
        // tau term
        for (s, c1, c2) in c.coalgebra.comul_basis(cid) {
            let t = tau.col(c2);
            if t.is_empty() {
                continue;
            }
            let tx = m
                .module
                .act(&t, &vec![(mid, field.one())])
                .ok_or_else(|| Error::Unsupported("tau action overflows".into()))?;
            for (x, cx) in tx {
                if let Some(id2) = tensor.id_of(c1, x) {
                    img.push((id2, cx.mul(&s).signed(c1.degree as i64)));
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
    {
        let (vlo, vhi) = tensor.differential_validity();
        d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: carrier.window.weight_cap };
    }

    let mut comodule = ComoduleSpec::new(
        Arc::clone(&c.coalgebra),
        Arc::clone(&carrier),
        CoSide::Left,
    );
    for tid in carrier.ids() {
        let (cid, mid) = tensor.pair_of(tid);
        let mut coact = Vec::new();
        for (s, c1, c2) in c.coalgebra.comul_basis(cid) {
            if let Some(id2) = tensor.id_of(c2, mid) {
                coact.push((s, c1, id2));
            }
        }
        comodule.set_coaction(tid, coact);
    }
    comodule.differential = Some(d);

    Ok(TwistedTensorComodule {
        comodule: CdgComodule {
            base: Arc::clone(c),
            comodule,
        },
        tensor,
    })
}

/// B ⊗^tau N for a left CDG-comodule N over C: the twisted differential
/// d(b⊗y) = d_B b ⊗ y + (-1)^{|b|} b ⊗ d_N y + (-1)^{|b|} sum
/// b tau(c) ⊗ y', a left CDG-module over B.
pub struct TwistedTensorModule {
    pub module: CdgModule,
    pub tensor: TensorSpace,
}

pub fn twisted_tensor_module(
    tau: &GradedMap,
    b: &Arc<CdgAlgebra>,
    n: &CdgComodule,
    window: &DegreeWindow,
) -> Result<TwistedTensorModule, Error> {
    if n.comodule.side != CoSide::Left {
        return Err(Error::Unsupported("B ⊗^tau N needs a left comodule".into()));
    }
    let field = b.algebra.field();
    let tensor = TensorSpace::new(&b.algebra.carrier, &n.comodule.carrier, window);
    let carrier = Arc::clone(&tensor.space);
    let db = b.d();
    let dn = n.d();

    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    for tid in carrier.ids() {
        let (bid, nid) = tensor.pair_of(tid);
        let mut img: GElem = Vec::new();
        for (x, s) in db.col(bid) {
            if let Some(id2) = tensor.id_of(x, nid) {
                img.push((id2, s));
            }
        }
        for (x, s) in dn.col(nid) {
            if let Some(id2) = tensor.id_of(bid, x) {
                img.push((id2, s.signed(bid.degree as i64)));
            }
        }
        // tau term: (-1)^{|b|} b tau(c) ⊗ y'
        for (s, cc, yy) in n.comodule.coaction_basis(nid) {
            let t = tau.col(cc);
            if t.is_empty() {
                continue;
            }
            let bt = b
                .algebra
                .mul_elems(&vec![(bid, field.one())], &t)
                .ok_or_else(|| Error::Unsupported("b tau(c) overflows".into()))?;
            for (x, cx) in bt {
                if let Some(id2) = tensor.id_of(x, yy) {
                    img.push((id2, cx.mul(&s).signed(bid.degree as i64)));
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
    {
        let (vlo, vhi) = tensor.differential_validity();
        d.valid = DegreeWindow { lo: vlo, hi: vhi, weight_cap: carrier.window.weight_cap };
    }

    let mut module = ModuleSpec::new(Arc::clone(&b.algebra), Arc::clone(&carrier));
    for aid in b.algebra.carrier.ids() {
        if aid == b.algebra.unit {
            continue;
        }
        for tid in carrier.ids() {
            let (bid, nid) = tensor.pair_of(tid);
            match b.algebra.mul_basis(aid, bid) {
                crate::algebra::Product::Elem(prod) => {
                    let mut img: GElem = Vec::new();
                    let mut ok = true;
                    for (x, s) in prod {
                        match tensor.id_of(x, nid) {
                            Some(id2) => img.push((id2, s)),
                            None => ok = false,
                        }
                    }
                    if ok {
                        module.set_action(aid, tid, img);
                    }
                }
                crate::algebra::Product::Overflow => {}
            }
        }
    }
    module.differential = Some(d);

    Ok(TwistedTensorModule {
        module: CdgModule {
            base: Arc::clone(b),
            module,
        },
        tensor,
    })
}

/// Hom^tau(C, P) for a left CDG-module P over B: the free graded
/// contramodule Hom_k(C, P) with the twisted differential
/// d(f) = d_P f - (-1)^{|f|} f d_C + d^tau(f),
/// d^tau(f)(c) = -(-1)^{|f|} sum (-1)^{|f||c_(1)|} tau(c_(1)) f(c_(2)),
/// a left CDG-contramodule over C.
pub struct TwistedHomContramodule {
    pub contramodule: CdgContramodule,
    pub free: crate::cocontra::FreeContramodule,
}

pub fn twisted_hom_contramodule(
    tau: &GradedMap,
    c: &Arc<CdgCoalgebra>,
    p: &CdgModule,
) -> Result<TwistedHomContramodule, Error> {
    let field = p.module.carrier.field;
    let free = free_contramodule(&c.coalgebra, &p.module.carrier);
    let carrier = Arc::clone(&free.contra.carrier);
    let dc = c.d();
    let dp = p.d();

    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    for fid in carrier.ids() {
        let (cc, pp) = free.pair_of(fid);
        let fdeg = fid.degree as i64;
        let mut img: GElem = Vec::new();
        // d_P . f
        for (x, s) in dp.col(pp) {
            if let Some(id2) = free.id_of(cc, x) {
                img.push((id2, s));
            }
        }
        // -(-1)^{|f|} f . d_C: e_{c,p} . d_C = sum_{c'} <d c', c> e_{c',p}
        for c2 in c.coalgebra.carrier.ids() {
            let coeff: Scalar = dc
                .col(c2)
                .iter()
                .filter(|(x, _)| *x == cc)
                .fold(field.zero(), |acc, (_, s)| acc.add(s));
            if !coeff.is_zero() {
                if let Some(id2) = free.id_of(c2, pp) {
                    img.push((id2, coeff.neg().signed(fdeg)));
                }
            }
        }
        // d^tau(f)(c) = -(-1)^{|f|} sum (-1)^{|f||c_(1)|} tau(c_(1)) f(c_(2)):
        // on f = e_{cc,pp}: pick splittings with c_(2) = cc
        for c2 in c.coalgebra.carrier.ids() {
            for (s, x, y) in c.coalgebra.comul_basis(c2) {
                if y != cc {
                    continue;
                }
                let t = tau.col(x);
                if t.is_empty() {
                    continue;
                }
                let tp = p
                    .module
                    .act(&t, &vec![(pp, field.one())])
                    .ok_or_else(|| Error::Unsupported("tau action overflows".into()))?;
                let sgn = field
                    .one()
                    .signed(fdeg * x.degree as i64)
                    .signed(fdeg)
                    .neg();
                for (xx, cx) in tp {
                    if let Some(id2) = free.id_of(c2, xx) {
                        img.push((id2, cx.mul(&s).mul(&sgn)));
                    }
                }
            }
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(fid, img);
        }
    }
    let d = GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });
    let mut contramodule = free.contra.clone();
    contramodule.differential = Some(d);

    Ok(TwistedHomContramodule {
        contramodule: CdgContramodule {
            base: Arc::clone(c),
            contramodule,
        },
        free,
    })
}

/// Hom^tau(B, Q) for a left CDG-contramodule Q over C: the graded Hom
/// space Hom_k(B, Q) with right-translation module structure
/// (b f)(x) = (-1)^{|b||f|} f(x b) and twisted differential
/// d(f)(x) = d_Q(f(x)) - (-1)^{|f|} f(d_B x) + d^tau(f)(x),
/// d^tau(f)(x) = -(-1)^{|f|} pi(c -> f(tau(c) x)), a left CDG-module
/// over B.
pub struct TwistedHomModule {
    pub module: CdgModule,
    pairs: Vec<(BasisId, BasisId)>,
    lookup: std::collections::HashMap<(BasisId, BasisId), BasisId>,
}

impl TwistedHomModule {
    pub fn id_of(&self, b: BasisId, q: BasisId) -> Option<BasisId> {
        self.lookup.get(&(b, q)).copied()
    }

    pub fn pair_of(&self, id: BasisId) -> (BasisId, BasisId) {
        let mut k = 0;
        for deg in self.module.module.carrier.degrees() {
            if deg == id.degree {
                return self.pairs[k + id.index];
            }
            k += self.module.module.carrier.dim(deg);
        }
        panic!("not a Hom basis id");
    }
}

pub fn twisted_hom_module(
    tau: &GradedMap,
    b: &Arc<CdgAlgebra>,
    q: &CdgContramodule,
    window: &DegreeWindow,
) -> Result<TwistedHomModule, Error> {
    let field = b.algebra.field();
    let bsp = &b.algebra.carrier;
    let qsp = &q.contramodule.carrier;

    let mut per_degree: BTreeMap<i32, Vec<BasisElem>> = BTreeMap::new();
    let mut placed: Vec<((BasisId, BasisId), BasisId)> = Vec::new();
    for bb in bsp.ids() {
        for qq in qsp.ids() {
            let degree = qq.degree - bb.degree;
            if !window.contains(degree) {
                continue;
            }
            let label = format!("[{}->{}]", bsp.label(bb), qsp.label(qq));
            let slot = per_degree.entry(degree).or_default();
            let id = BasisId { degree, index: slot.len() };
            slot.push(BasisElem { label, weight: 0 });
            placed.push(((bb, qq), id));
        }
    }
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, *window, per_degree)?);
    placed.sort_by_key(|(_, id)| *id);
    let pairs: Vec<(BasisId, BasisId)> = placed.iter().map(|(p, _)| *p).collect();
    let lookup: std::collections::HashMap<(BasisId, BasisId), BasisId> =
        placed.into_iter().collect();

    let dq = q.d();
    let db = b.d();

    // differential
    let mut cols: BTreeMap<BasisId, GElem> = BTreeMap::new();
    for fid in carrier.ids() {
        let (bb, qq) = {
            let mut k = 0;
            let mut found = None;
            for deg in carrier.degrees() {
                if deg == fid.degree {
                    found = Some(pairs[k + fid.index]);
                    break;
                }
                k += carrier.dim(deg);
            }
            found.unwrap()
        };
        let fdeg = fid.degree as i64;
        let mut img: GElem = Vec::new();
        // d_Q . f
        for (x, s) in dq.col(qq) {
            if let Some(id2) = lookup.get(&(bb, x)) {
                img.push((*id2, s));
            }
        }
        // -(-1)^{|f|} f . d_B
        for b2 in bsp.ids() {
            let coeff: Scalar = db
                .col(b2)
                .iter()
                .filter(|(x, _)| *x == bb)
                .fold(field.zero(), |acc, (_, s)| acc.add(s));
            if !coeff.is_zero() {
                if let Some(id2) = lookup.get(&(b2, qq)) {
                    img.push((*id2, coeff.neg().signed(fdeg)));
                }
            }
        }
        // d^tau(f)(x) = -(-1)^{|f|} pi(c -> f(tau(c) x)) on f = e_{bb,qq}:
        // for every x in B and c with tau(c) x hitting bb, collect
        // pi(e_{c, qq}) placed at e_{x, -}
        for x in bsp.ids() {
            for cc in q.contramodule.coalgebra.carrier.ids() {
                let t = tau.col(cc);
                if t.is_empty() {
                    continue;
                }
                let tx = match b.algebra.mul_elems(&t, &vec![(x, field.one())]) {
                    Some(v) => v,
                    None => continue,
                };
                let coeff: Scalar = tx
                    .iter()
                    .filter(|(y, _)| *y == bb)
                    .fold(field.zero(), |acc, (_, s)| acc.add(s));
                if coeff.is_zero() {
                    continue;
                }
                let pi = q.contramodule.contra_basis(cc, qq);
                let sgn = coeff.neg().signed(fdeg);
                for (pq, cs) in pi {
                    if let Some(id2) = lookup.get(&(x, pq)) {
                        img.push((*id2, cs.mul(&sgn)));
                    }
                }
            }
        }
        let img = gelem_normalize(img);
        if !img.is_empty() {
            cols.insert(fid, img);
        }
    }
    let d = GradedMap::from_fn(&carrier, &carrier, 1, |id| {
        cols.get(&id).cloned().unwrap_or_default()
    });

    // left module structure: (b f)(x) = (-1)^{|b||f|} f(x b)
    let mut module = ModuleSpec::new(Arc::clone(&b.algebra), Arc::clone(&carrier));
    for aid in bsp.ids() {
        if aid == b.algebra.unit {
            continue;
        }
        for fid in carrier.ids() {
            let (bb, qq) = {
                let mut k = 0;
                let mut found = None;
                for deg in carrier.degrees() {
                    if deg == fid.degree {
                        found = Some(pairs[k + fid.index]);
                        break;
                    }
                    k += carrier.dim(deg);
                }
                found.unwrap()
            };
            // (a e_{bb,qq})(x) = ±e(x a): supported on x with x a = bb
            let mut img: GElem = Vec::new();
            let mut ok = true;
            for x in bsp.ids() {
                match b.algebra.mul_basis(x, aid) {
                    crate::algebra::Product::Elem(prod) => {
                        let coeff: Scalar = prod
                            .iter()
                            .filter(|(y, _)| *y == bb)
                            .fold(field.zero(), |acc, (_, s)| acc.add(s));
                        if !coeff.is_zero() {
                            if let Some(id2) = lookup.get(&(x, qq)) {
                                let sgn =
                                    coeff.signed(aid.degree as i64 * fid.degree as i64);
                                img.push((*id2, sgn));
                            } else {
                                ok = false;
                            }
                        }
                    }
                    crate::algebra::Product::Overflow => {}
                }
            }
            if ok {
                module.set_action(aid, fid, gelem_normalize(img));
            }
        }
    }
    module.differential = Some(d);

    Ok(TwistedHomModule {
        module: CdgModule {
            base: Arc::clone(b),
            module,
        },
        pairs,
        lookup,
    })
}

/// Acyclicity of a twisting cochain: homology of the mapping cone of the
/// induced DG-algebra morphism Cb_gamma(C) -> A on the validity window.
pub struct AcyclicityReport {
    pub cone_homology: HomologyReport,
    pub acyclic: bool,
}

pub fn acyclicity_check(
    tau: &GradedMap,
    cobar: &Cobar,
    target: &Arc<AlgebraSpec>,
) -> Result<AcyclicityReport, Error> {
    let g = tau_to_algebra_morphism(tau, cobar, target)?;
    let d_src = cobar.cdg.d();
    let d_tgt = target
        .differential
        .clone()
        .unwrap_or_else(|| GradedMap::zero(&target.carrier, &target.carrier, 1));
    let (_, cone_d) = crate::homology::mapping_cone(&g, &d_src, &d_tgt)?;
    let cone_homology = homology(&cone_d, &cone_d)?;
    let acyclic = cone_homology
        .dims
        .iter()
        .all(|(deg, dim)| *dim == 0 || *deg < cone_homology.valid_lo || *deg > cone_homology.valid_hi);
    Ok(AcyclicityReport {
        acyclic,
        cone_homology,
    })
}

/// The twisted complex C ⊗^tau M as a plain complex (no comodule data):
/// convenience for homology comparisons.
pub fn twisted_tensor_homology(
    tau: &GradedMap,
    c: &Arc<CdgCoalgebra>,
    m: &CdgModule,
    window: &DegreeWindow,
) -> Result<HomologyReport, Error> {
    let tt = twisted_tensor_comodule(tau, c, m, window)?;
    let d = tt.comodule.d();
    homology(&d, &d)
}
