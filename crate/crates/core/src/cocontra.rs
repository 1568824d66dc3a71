//! Contramodules over finite-dimensional-per-degree graded coalgebras,
//! free/cofree objects, the contratensor product, and the underived
//! comodule-contramodule correspondence.
//!
//! Within a finite window the graded Hom space Hom_k(C, P) is an ordinary
//! finite graded space with basis the rank-one maps e_{c,p}, so the
//! contraaction is an honest structure-constant table.

use std::collections::HashMap;
use std::sync::Arc;

use crate::coalgebra::{CoSide, CoalgebraSpec, ComoduleSpec};
use crate::error::Error;
use crate::field::Scalar;
use crate::graded::{
    gelem_normalize, gelem_scale, BasisId, Flattener, GElem, GradedMap, GradedVectorSpace, Space,
};
use crate::matrix::{self, QuotientMap, SVec};

/// A left contramodule: carrier P with contraaction pi : Hom_k(C, P) -> P,
/// stored by its values on the rank-one maps e_{c,p} (c in C, p in P).
#[derive(Clone, Debug)]
pub struct ContramoduleSpec {
    pub coalgebra: Arc<CoalgebraSpec>,
    pub carrier: Space,
    contra: HashMap<(BasisId, BasisId), GElem>,
    pub differential: Option<GradedMap>,
}

impl ContramoduleSpec {
    pub fn new(coalgebra: Arc<CoalgebraSpec>, carrier: Space) -> ContramoduleSpec {
        ContramoduleSpec {
            coalgebra,
            carrier,
            contra: HashMap::new(),
            differential: None,
        }
    }

    /// pi(e_{c,p}): the image of the rank-one map sending c to p.
    pub fn set_contra(&mut self, c: BasisId, p: BasisId, value: GElem) {
        let v = gelem_normalize(value);
        if v.is_empty() {
            self.contra.remove(&(c, p));
        } else {
            self.contra.insert((c, p), v);
        }
    }

    pub fn contra_basis(&self, c: BasisId, p: BasisId) -> GElem {
        self.contra.get(&(c, p)).cloned().unwrap_or_default()
    }

    /// pi applied to an arbitrary map g : C -> P given by columns.
    pub fn contra_apply(&self, g: &dyn Fn(BasisId) -> GElem) -> GElem {
        let mut acc: GElem = Vec::new();
        for c in self.coalgebra.carrier.ids() {
            for (p, s) in g(c) {
                acc.extend(gelem_scale(&self.contra_basis(c, p), &s));
            }
        }
        gelem_normalize(acc)
    }

    /// Contraassociativity and contraunitality, checked on the rank-one
    /// basis of Hom(C, Hom(C, P)) via the adjunction
    /// Hom(C, Hom(C, P)) = Hom(C⊗C, P) with g(u)(v) = ghat(v⊗u).
    pub fn check(&self) -> Result<(), Error> {
        let field = self.carrier.field;
        // contraunitality: sum_c eps(c) pi(e_{c,p}) = p
        for p in self.carrier.ids() {
            let mut acc: GElem = Vec::new();
            for c in self.coalgebra.carrier.ids() {
                let e = self.coalgebra.counit.eval_basis(c);
                if !e.is_zero() {
                    acc.extend(gelem_scale(&self.contra_basis(c, p), &e));
                }
            }
            if gelem_normalize(acc) != vec![(p, field.one())] {
                return Err(Error::axiom(
                    "contraunitality",
                    self.carrier.label(p),
                    "pi . Hom(eps, P) != id",
                ));
            }
        }
        // contraassociativity on rank-one g = e_{c1, e_{c2, p}}, with the
        // Koszul sign of the graded adjunction Hom(C, Hom(C, P)) =
        // Hom(C ⊗ C, P):
        //   pi(e_{c1, pi(e_{c2,p})})
        //     = (-1)^{|c1||c2|} sum_c <mu(c), c2 ⊗ c1> pi(e_{c,p})
        for c1 in self.coalgebra.carrier.ids() {
            for c2 in self.coalgebra.carrier.ids() {
                for p in self.carrier.ids() {
                    let inner = self.contra_basis(c2, p);
                    let mut lhs: GElem = Vec::new();
                    for (q, s) in inner {
                        lhs.extend(gelem_scale(&self.contra_basis(c1, q), &s));
                    }
                    let mut rhs: GElem = Vec::new();
                    let sgn = (c1.degree as i64) * (c2.degree as i64);
                    for c in self.coalgebra.carrier.ids() {
                        let mut coeff = field.zero();
                        for (s, x, y) in self.coalgebra.comul_basis(c) {
                            if x == c2 && y == c1 {
                                coeff = coeff.add(&s);
                            }
                        }
                        coeff = coeff.signed(sgn);
                        if !coeff.is_zero() {
                            rhs.extend(gelem_scale(&self.contra_basis(c, p), &coeff));
                        }
                    }
                    if gelem_normalize(lhs) != gelem_normalize(rhs) {
                        return Err(Error::axiom(
                            "contraassociativity",
                            format!(
                                "(c1={}, c2={}, p={})",
                                self.coalgebra.carrier.label(c1),
                                self.coalgebra.carrier.label(c2),
                                self.carrier.label(p)
                            ),
                            "pi . Hom(C, pi) != pi . Hom(mu, P)",
                        ));
                    }
                }
            }
        }
        if let Some(dp) = &self.differential {
            self.check_contraderivation(dp)?;
            let dd = dp.compose(dp)?;
            if !dd.is_zero() {
                return Err(Error::axiom("d-squared", "d_P", "d^2 != 0"));
            }
        }
        Ok(())
    }

    /// The contraaction is a morphism of precomplexes: for every rank-one
    /// g = e_{c,p}, pi(d_Hom(g)) = d_P(pi(g)), where
    /// d_Hom(g) = d_P . g - (-1)^{|g|} g . d_C.
    pub fn check_contraderivation(&self, dp: &GradedMap) -> Result<(), Error> {
        let dc = self
            .coalgebra
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&self.coalgebra.carrier, &self.coalgebra.carrier, 1));
        let field = self.carrier.field;
        for c in self.coalgebra.carrier.ids() {
            for p in self.carrier.ids() {
                let gdeg = (p.degree - c.degree) as i64;
                // d_P . g = e_{c, dp(p)}
                let mut lhs: GElem = Vec::new();
                for (q, s) in dp.col(p) {
                    lhs.extend(gelem_scale(&self.contra_basis(c, q), &s));
                }
                // g . d_C = sum over c' with <d c', c> != 0 of e_{c', p}
                for c_prime in self.coalgebra.carrier.ids() {
                    let coeff: Scalar = dc
                        .col(c_prime)
                        .iter()
                        .filter(|(x, _)| *x == c)
                        .fold(field.zero(), |acc, (_, s)| acc.add(s));
                    if !coeff.is_zero() {
                        let s = coeff.neg().signed(gdeg);
                        lhs.extend(gelem_scale(&self.contra_basis(c_prime, p), &s));
                    }
                }
                let rhs = dp.apply(&self.contra_basis(c, p));
                if gelem_normalize(lhs) != rhs {
                    return Err(Error::axiom(
                        "contraderivation",
                        format!("e_{{{},{}}}", self.coalgebra.carrier.label(c), self.carrier.label(p)),
                        "pi is not a chain map",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The free contramodule Hom_k(C, V): carrier has basis e_{c,v} in degree
/// |v| - |c|; pi is precomposition with the comultiplication through the
/// adjunction convention g(u)(v) = ghat(v⊗u).
pub struct FreeContramodule {
    pub contra: ContramoduleSpec,
    /// pairs (c, v) indexed like the carrier basis ids
    pairs: Vec<(BasisId, BasisId)>,
    lookup: HashMap<(BasisId, BasisId), BasisId>,
    pub generators: Space,
}

pub fn free_contramodule(coalgebra: &Arc<CoalgebraSpec>, v: &Space) -> FreeContramodule {
    let field = v.field;
    // Hom degrees range over [v.lo - C.hi, v.hi - C.lo]
    let window = crate::graded::DegreeWindow {
        lo: v.window.lo - coalgebra.carrier.window.hi,
        hi: v.window.hi - coalgebra.carrier.window.lo,
        weight_cap: v.window.weight_cap,
    };
    let mut per_degree: std::collections::BTreeMap<i32, Vec<crate::graded::BasisElem>> =
        std::collections::BTreeMap::new();
    let mut placed: Vec<((BasisId, BasisId), BasisId)> = Vec::new();
    for c in coalgebra.carrier.ids() {
        for vv in v.ids() {
            let degree = vv.degree - c.degree;
            if !window.contains(degree) {
                continue;
            }
            let label = format!("[{}->{}]", coalgebra.carrier.label(c), v.label(vv));
            let slot = per_degree.entry(degree).or_default();
            let id = BasisId { degree, index: slot.len() };
            slot.push(crate::graded::BasisElem { label, weight: v.weight(vv) });
            placed.push(((c, vv), id));
        }
    }
    let carrier = Arc::new(GradedVectorSpace::new(field, window, per_degree).unwrap());
    placed.sort_by_key(|(_, id)| *id);
    let pairs: Vec<(BasisId, BasisId)> = placed.iter().map(|(p, _)| *p).collect();
    let lookup: HashMap<(BasisId, BasisId), BasisId> = placed.into_iter().collect();

    let mut contra = ContramoduleSpec::new(Arc::clone(coalgebra), carrier);
    // pi(e_{c1, e_{c2,v}}) corresponds to precomposition with mu through
    // the graded adjunction:
    // pi(g)(c) = (-1)^{|c1||c2|} <mu(c), c2 ⊗ c1> v.
    for c1 in coalgebra.carrier.ids() {
        for (&(c2, vv), &pid) in &lookup {
            let sgn = (c1.degree as i64) * (c2.degree as i64);
            let mut img: GElem = Vec::new();
            for c in coalgebra.carrier.ids() {
                let mut coeff = field.zero();
                for (s, x, y) in coalgebra.comul_basis(c) {
                    if x == c2 && y == c1 {
                        coeff = coeff.add(&s);
                    }
                }
                coeff = coeff.signed(sgn);
                if !coeff.is_zero() {
                    if let Some(id) = lookup.get(&(c, vv)) {
                        img.push((*id, coeff));
                    }
                }
            }
            contra.set_contra(c1, pid, img);
        }
    }
    FreeContramodule {
        contra,
        pairs,
        lookup,
        generators: Arc::clone(v),
    }
}

impl FreeContramodule {
    pub fn pair_of(&self, id: BasisId) -> (BasisId, BasisId) {
        let mut k = 0;
        for deg in self.contra.carrier.degrees() {
            if deg == id.degree {
                return self.pairs[k + id.index];
            }
            k += self.contra.carrier.dim(deg);
        }
        panic!("id {id} not in free contramodule");
    }

    pub fn id_of(&self, c: BasisId, v: BasisId) -> Option<BasisId> {
        self.lookup.get(&(c, v)).copied()
    }
}

/// The cofree comodule C ⊗ V with coaction mu ⊗ id.
pub struct CofreeComodule {
    pub comodule: ComoduleSpec,
    pairs: Vec<(BasisId, BasisId)>,
    lookup: HashMap<(BasisId, BasisId), BasisId>,
    pub generators: Space,
}

pub fn cofree_comodule(coalgebra: &Arc<CoalgebraSpec>, v: &Space) -> CofreeComodule {
    let field = v.field;
    let window = v.window;
    let mut per_degree: std::collections::BTreeMap<i32, Vec<crate::graded::BasisElem>> =
        std::collections::BTreeMap::new();
    let mut placed: Vec<((BasisId, BasisId), BasisId)> = Vec::new();
    for c in coalgebra.carrier.ids() {
        for vv in v.ids() {
            let degree = c.degree + vv.degree;
            if !window.contains(degree) {
                continue;
            }
            let label = format!("{}⊗{}", coalgebra.carrier.label(c), v.label(vv));
            let slot = per_degree.entry(degree).or_default();
            let id = BasisId { degree, index: slot.len() };
            slot.push(crate::graded::BasisElem {
                label,
                weight: coalgebra.carrier.weight(c) + v.weight(vv),
            });
            placed.push(((c, vv), id));
        }
    }
    let carrier = Arc::new(GradedVectorSpace::new(field, window, per_degree).unwrap());
    placed.sort_by_key(|(_, id)| *id);
    let pairs: Vec<(BasisId, BasisId)> = placed.iter().map(|(p, _)| *p).collect();
    let lookup: HashMap<(BasisId, BasisId), BasisId> = placed.into_iter().collect();

    let mut comodule = ComoduleSpec::new(Arc::clone(coalgebra), carrier, CoSide::Left);
    for (&(c, vv), &mid) in &lookup {
        let mut coact = Vec::new();
        for (s, x, y) in coalgebra.comul_basis(c) {
            if let Some(ym) = lookup.get(&(y, vv)) {
                coact.push((s, x, *ym));
            }
        }
        comodule.set_coaction(mid, coact);
    }
    CofreeComodule {
        comodule,
        pairs,
        lookup,
        generators: Arc::clone(v),
    }
}

impl CofreeComodule {
    pub fn pair_of(&self, id: BasisId) -> (BasisId, BasisId) {
        let mut k = 0;
        for deg in self.comodule.carrier.degrees() {
            if deg == id.degree {
                return self.pairs[k + id.index];
            }
            k += self.comodule.carrier.dim(deg);
        }
        panic!("id {id} not in cofree comodule");
    }

    pub fn id_of(&self, c: BasisId, v: BasisId) -> Option<BasisId> {
        self.lookup.get(&(c, v)).copied()
    }
}

/// The contratensor product N ⊙_C P of a right comodule and a left
/// contramodule: cokernel of the difference of the two natural maps
/// N ⊗ Hom_k(C, P) ⇉ N ⊗ P. Returns a basis of the cokernel (as canonical
/// representatives in the flattened N ⊗ P coordinates) together with the
/// data needed to map N ⊗ P onto it.
pub struct Contratensor {
    pub field: crate::field::Field,
    pub n_flat: Flattener,
    pub p_flat: Flattener,
    pub quotient: QuotientMap,
    pub dim_p: usize,
}

pub fn contratensor(n: &ComoduleSpec, p: &ContramoduleSpec) -> Result<Contratensor, Error> {
    if n.side != CoSide::Right {
        return Err(Error::Unsupported(
            "contratensor expects a right comodule on the left".into(),
        ));
    }
    let field = n.carrier.field;
    let n_flat = Flattener::new(&n.carrier);
    let p_flat = Flattener::new(&p.carrier);
    let c_ids = p.coalgebra.carrier.ids();
    let dim_p = p_flat.dim();

    // images of the difference map on the basis n ⊗ e_{c,q} of
    // N ⊗ Hom(C,P): (id ⊗ pi)(n ⊗ e) - (n_(0) ⊗ e(n_(1)))
    let mut relations: Vec<SVec> = Vec::new();
    for nid in n.carrier.ids() {
        for &c in &c_ids {
            for q in p.carrier.ids() {
                let mut rel: SVec = Vec::new();
                // first map: n ⊗ pi(e_{c,q})
                for (pp, s) in p.contra_basis(c, q) {
                    rel.push((n_flat.pos(nid) * dim_p + p_flat.pos(pp), s));
                }
                // second map: nu(n) = sum n' ⊗ c'; evaluation picks c' = c
                for (s, cc, nn) in n.coaction_basis(nid) {
                    if cc == c {
                        rel.push((
                            n_flat.pos(nn) * dim_p + p_flat.pos(q),
                            s.neg(),
                        ));
                    }
                }
                let rel = matrix::svec_normalize(rel);
                if !rel.is_empty() {
                    relations.push(rel);
                }
            }
        }
    }
    let quotient = QuotientMap::new(field, n_flat.dim() * dim_p, &relations);
    Ok(Contratensor {
        field,
        n_flat,
        p_flat,
        quotient,
        dim_p,
    })
}

impl Contratensor {
    /// Class of n ⊗ p in the contratensor product (canonical coordinates).
    pub fn class_of(&self, n: BasisId, p: BasisId) -> SVec {
        self.class_of_scaled(n, p, &self.field.one())
    }

    pub fn class_of_scaled(&self, n: BasisId, p: BasisId, s: &Scalar) -> SVec {
        self.quotient
            .reduce(&vec![(self.n_flat.pos(n) * self.dim_p + self.p_flat.pos(p), s.clone())])
    }

    /// Dimension of the contratensor product.
    pub fn dim(&self) -> usize {
        self.quotient.free_coords.len()
    }
}

// ---------------------------------------------------------------------------
// hom bases and the co-contra correspondence

/// Basis of the homogeneous colinear maps L -> M of degree n between left
/// comodules: nu_M . F = (id ⊗ F) . nu_L with the Koszul sign
/// (id ⊗ F)(c ⊗ m) = (-1)^{n|c|} c ⊗ F(m).
pub fn comodule_hom_basis(l: &ComoduleSpec, m: &ComoduleSpec, n: i32) -> Vec<GradedMap> {
    let field = l.carrier.field;
    let lsp = &l.carrier;
    let msp = &m.carrier;
    let mut unknowns: Vec<(BasisId, BasisId)> = Vec::new();
    for x in lsp.ids() {
        for y in msp.ids_in_degree(x.degree + n) {
            unknowns.push((x, y));
        }
    }
    let upos: std::collections::HashMap<(BasisId, BasisId), usize> =
        unknowns.iter().enumerate().map(|(k, u)| (*u, k)).collect();
    let cflat = Flattener::new(&l.coalgebra.carrier);
    let mflat = Flattener::new(msp);
    let dim_cm = cflat.dim() * mflat.dim();
    let mut rows: Vec<SVec> = Vec::new();
    for x in lsp.ids() {
        // nu_M(F(x)) - (id ⊗ F)(nu_L(x)) = 0 in C ⊗ M
        let mut row_per_cm: std::collections::HashMap<usize, SVec> =
            std::collections::HashMap::new();
        for y in msp.ids_in_degree(x.degree + n) {
            let k = upos[&(x, y)];
            for (s, c, mm) in m.coaction_basis(y) {
                let slot = cflat.pos(c) * mflat.dim() + mflat.pos(mm);
                row_per_cm.entry(slot).or_default().push((k, s.clone()));
            }
        }
        for (s, c, ll) in l.coaction_basis(x) {
            let sgn = field.one().signed(n as i64 * c.degree as i64).neg();
            for y in msp.ids_in_degree(ll.degree + n) {
                if let Some(k) = upos.get(&(ll, y)) {
                    let slot = cflat.pos(c) * mflat.dim() + mflat.pos(y);
                    row_per_cm
                        .entry(slot)
                        .or_default()
                        .push((*k, s.mul(&sgn)));
                }
            }
        }
        for (_, r) in row_per_cm {
            let r = matrix::svec_normalize(r);
            if !r.is_empty() {
                rows.push(r);
            }
        }
    }
    let _ = dim_cm;
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
            let mut cols: std::collections::BTreeMap<BasisId, GElem> = Default::default();
            for (pos, s) in k {
                let (x, y) = unknowns[pos];
                cols.entry(x).or_default().push((y, s));
            }
            GradedMap::from_fn(lsp, msp, n, |x| cols.get(&x).cloned().unwrap_or_default())
        })
        .collect()
}

/// Basis of the homogeneous contralinear maps P -> Q of degree n:
/// F(pi_P(e_{c,p})) = (-1)^{n|c|} pi_Q(e_{c,F(p)}).
pub fn contramodule_hom_basis(
    p: &ContramoduleSpec,
    qm: &ContramoduleSpec,
    n: i32,
) -> Vec<GradedMap> {
    let field = p.carrier.field;
    let psp = &p.carrier;
    let qsp = &qm.carrier;
    let mut unknowns: Vec<(BasisId, BasisId)> = Vec::new();
    for x in psp.ids() {
        for y in qsp.ids_in_degree(x.degree + n) {
            unknowns.push((x, y));
        }
    }
    let upos: std::collections::HashMap<(BasisId, BasisId), usize> =
        unknowns.iter().enumerate().map(|(k, u)| (*u, k)).collect();
    let qflat = Flattener::new(qsp);
    let mut rows: Vec<SVec> = Vec::new();
    for c in p.coalgebra.carrier.ids() {
        for x in psp.ids() {
            // F(pi_P(e_{c,x})) - (-1)^{n|c|} pi_Q(e_{c,F(x)}) = 0 in Q
            let mut row_per_q: std::collections::HashMap<usize, SVec> =
                std::collections::HashMap::new();
            for (pp, s) in p.contra_basis(c, x) {
                for y in qsp.ids_in_degree(pp.degree + n) {
                    if let Some(k) = upos.get(&(pp, y)) {
                        row_per_q
                            .entry(qflat.pos(y))
                            .or_default()
                            .push((*k, s.clone()));
                    }
                }
            }
            let sgn = field.one().signed(n as i64 * c.degree as i64).neg();
            for y in qsp.ids_in_degree(x.degree + n) {
                if let Some(k) = upos.get(&(x, y)) {
                    for (qq, s) in qm.contra_basis(c, y) {
                        row_per_q
                            .entry(qflat.pos(qq))
                            .or_default()
                            .push((*k, s.mul(&sgn)));
                    }
                }
            }
            for (_, r) in row_per_q {
                let r = matrix::svec_normalize(r);
                if !r.is_empty() {
                    rows.push(r);
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
            let mut cols: std::collections::BTreeMap<BasisId, GElem> = Default::default();
            for (pos, s) in k {
                let (x, y) = unknowns[pos];
                cols.entry(x).or_default().push((y, s));
            }
            GradedMap::from_fn(psp, qsp, n, |x| cols.get(&x).cloned().unwrap_or_default())
        })
        .collect()
}

/// Psi(M) = Hom_C(C, M): colinear maps from the left-regular comodule,
/// made a left contramodule through the right comodule structure of C:
/// pi(e_{c,F})(c') = sum <mu(c'), (-) ⊗ c> F((-)).
pub struct Psi {
    pub contramodule: ContramoduleSpec,
    /// the colinear map underlying each basis vector
    pub vectors: Vec<(BasisId, GradedMap)>,
}

pub fn psi_comodule(m: &ComoduleSpec) -> Result<Psi, Error> {
    if m.side != CoSide::Left {
        return Err(Error::Unsupported("Psi expects a left comodule".into()));
    }
    let co = &m.coalgebra;
    let field = m.carrier.field;
    // the left-regular comodule C
    let mut creg = ComoduleSpec::new(Arc::clone(co), Arc::clone(&co.carrier), CoSide::Left);
    for c in co.carrier.ids() {
        creg.set_coaction(c, co.comul_basis(c));
    }
    // Hom degrees range over [m.lo - C.hi, m.hi - C.lo]
    let window = crate::graded::DegreeWindow {
        lo: m.carrier.window.lo - co.carrier.window.hi,
        hi: m.carrier.window.hi - co.carrier.window.lo,
        weight_cap: m.carrier.window.weight_cap,
    };
    let mut per_degree: std::collections::BTreeMap<i32, Vec<crate::graded::BasisElem>> =
        Default::default();
    let mut vectors: Vec<(BasisId, GradedMap)> = Vec::new();
    for n in window.lo..=window.hi {
        let basis = comodule_hom_basis(&creg, m, n);
        if basis.is_empty() {
            continue;
        }
        let slot = per_degree.entry(n).or_default();
        for (i, f) in basis.into_iter().enumerate() {
            let id = BasisId { degree: n, index: slot.len() };
            slot.push(crate::graded::BasisElem {
                label: format!("F{n}_{i}"),
                weight: 0,
            });
            vectors.push((id, f));
        }
    }
    let carrier: Space = Arc::new(GradedVectorSpace::new(field, window, per_degree)?);
    let mut contra = ContramoduleSpec::new(Arc::clone(co), Arc::clone(&carrier));

    // express a colinear map in the chosen basis
    let mflat = Flattener::new(&m.carrier);
    let cflat = Flattener::new(&co.carrier);
    let flatten = |g: &GradedMap| -> SVec {
        let mut v = Vec::new();
        for (x, col) in g.cols_iter() {
            for (y, s) in col {
                v.push((cflat.pos(*x) * mflat.dim() + mflat.pos(*y), s.clone()));
            }
        }
        matrix::svec_normalize(v)
    };
    let express = |g: &GradedMap, n: i32| -> Option<GElem> {
        let basis_n: Vec<&(BasisId, GradedMap)> =
            vectors.iter().filter(|(id, _)| id.degree == n).collect();
        let cols: Vec<SVec> = basis_n.iter().map(|(_, f)| flatten(f)).collect();
        let target = flatten(g);
        if target.is_empty() {
            return Some(Vec::new());
        }
        let coords =
            matrix::membership(field, cflat.dim() * mflat.dim(), &cols, &target)?;
        Some(gelem_normalize(
            coords.into_iter().map(|(k, s)| (basis_n[k].0, s)).collect(),
        ))
    };

    for c in co.carrier.ids() {
        for (fid, f) in &vectors {
            // pi(e_{c,F}) : c' -> sum_{mu(c') = a ⊗ c} (-1)^{|c||a|} coeff
            // F(a); the Koszul sign makes the result colinear again
            let g = GradedMap::from_fn(&co.carrier, &m.carrier, fid.degree - c.degree, |cp| {
                let mut img: GElem = Vec::new();
                for (s, a, b) in co.comul_basis(cp) {
                    if b == c {
                        let sgn = s.signed(c.degree as i64 * a.degree as i64);
                        img.extend(crate::graded::gelem_scale(&f.col(a), &sgn));
                    }
                }
                gelem_normalize(img)
            });
            let val = express(&g, fid.degree - c.degree).ok_or_else(|| {
                Error::axiom(
                    "psi",
                    format!("e_{{{},{}}}", co.carrier.label(c), carrier.label(*fid)),
                    "contraaction leaves the colinear maps",
                )
            })?;
            contra.set_contra(c, *fid, val);
        }
    }
    // transport the differential: d(F) = d_M . F - (-1)^{|F|} F . d_C
    if m.differential.is_some() || co.differential.is_some() {
        let dm = m
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&m.carrier, &m.carrier, 1));
        let dc = co
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&co.carrier, &co.carrier, 1));
        let mut cols: std::collections::BTreeMap<BasisId, GElem> = Default::default();
        for (fid, f) in &vectors {
            let df = dm
                .compose(f)?
                .add(&f.compose(&dc)?.scale(&field.one().signed(fid.degree as i64).neg()))?;
            let val = express(&df, fid.degree + 1).ok_or_else(|| {
                Error::axiom("psi", carrier.label(*fid), "d(F) is not colinear")
            })?;
            if !val.is_empty() {
                cols.insert(*fid, val);
            }
        }
        contra.differential = Some(GradedMap::from_fn(&carrier, &carrier, 1, |id| {
            cols.get(&id).cloned().unwrap_or_default()
        }));
    }
    Ok(Psi {
        contramodule: contra,
        vectors,
    })
}

/// Phi(P) = C ⊙_C P: the contratensor product of the right-regular
/// comodule with P, a left comodule through the left factor.
pub struct Phi {
    pub comodule: ComoduleSpec,
    pub ct: Contratensor,
    /// class representatives: the basis of the comodule corresponds to the
    /// free coordinates of the contratensor quotient
    pub reps: Vec<(BasisId, BasisId)>,
}

pub fn phi_contramodule(p: &ContramoduleSpec) -> Result<Phi, Error> {
    let co = &p.coalgebra;
    let field = p.carrier.field;
    // the right-regular comodule: nu = mu with legs swapped into (m, c) order
    let mut creg = ComoduleSpec::new(Arc::clone(co), Arc::clone(&co.carrier), CoSide::Right);
    for c in co.carrier.ids() {
        let coact = co
            .comul_basis(c)
            .into_iter()
            .map(|(s, x, y)| (s, y, x))
            .collect();
        creg.set_coaction(c, coact);
    }
    let ct = contratensor(&creg, p)?;
    // carrier: one basis vector per free coordinate; degree of (c, q) class
    let dim_p = ct.dim_p;
    let reps: Vec<(BasisId, BasisId)> = ct
        .quotient
        .free_coords
        .iter()
        .map(|flat| {
            let c = ct.n_flat.id(flat / dim_p);
            let q = ct.p_flat.id(flat % dim_p);
            (c, q)
        })
        .collect();
    let mut per_degree: std::collections::BTreeMap<i32, Vec<crate::graded::BasisElem>> =
        Default::default();
    let mut ids: Vec<BasisId> = Vec::new();
    for (c, q) in &reps {
        let degree = c.degree + q.degree;
        let slot = per_degree.entry(degree).or_default();
        let id = BasisId { degree, index: slot.len() };
        slot.push(crate::graded::BasisElem {
            label: format!("{}⊙{}", co.carrier.label(*c), p.carrier.label(*q)),
            weight: 0,
        });
        ids.push(id);
    }
    let carrier: Space = Arc::new(GradedVectorSpace::new(
        field,
        p.carrier.window,
        per_degree,
    )?);
    // map a flat class vector to the carrier basis
    let class_to_elem = |v: &SVec| -> GElem {
        gelem_normalize(
            v.iter()
                .map(|(flat, s)| {
                    let k = ct
                        .quotient
                        .free_coords
                        .iter()
                        .position(|f| f == flat)
                        .expect("reduced vector over free coords");
                    (ids[k], s.clone())
                })
                .collect(),
        )
    };

    let mut comodule = ComoduleSpec::new(Arc::clone(co), Arc::clone(&carrier), CoSide::Left);
    for (k, (c, q)) in reps.iter().enumerate() {
        let mut coact = Vec::new();
        for (s, c1, c2) in co.comul_basis(*c) {
            // class of (c2 ⊗ q) with outer leg c1
            let cls = ct.class_of_scaled(c2, *q, &s);
            for (id2, s2) in class_to_elem(&cls) {
                coact.push((s2, c1, id2));
            }
        }
        comodule.set_coaction(ids[k], coact);
    }
    // transport the differential: d(c ⊗ p) = d_C c ⊗ p + (-1)^{|c|} c ⊗ d_P p
    if p.differential.is_some() || co.differential.is_some() {
        let dp = p
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&p.carrier, &p.carrier, 1));
        let dc = co
            .differential
            .clone()
            .unwrap_or_else(|| GradedMap::zero(&co.carrier, &co.carrier, 1));
        let mut cols: std::collections::BTreeMap<BasisId, GElem> = Default::default();
        for (k, (c, q)) in reps.iter().enumerate() {
            let mut acc: SVec = Vec::new();
            for (t, s) in dc.col(*c) {
                for (flat, s2) in ct.class_of_scaled(t, *q, &s) {
                    acc.push((flat, s2));
                }
            }
            for (t, s) in dp.col(*q) {
                let sgn = s.signed(c.degree as i64);
                for (flat, s2) in ct.class_of_scaled(*c, t, &sgn) {
                    acc.push((flat, s2));
                }
            }
            let img = class_to_elem(&matrix::svec_normalize(acc));
            if !img.is_empty() {
                cols.insert(ids[k], img);
            }
        }
        comodule.differential = Some(GradedMap::from_fn(&carrier, &carrier, 1, |id| {
            cols.get(&id).cloned().unwrap_or_default()
        }));
    }
    Ok(Phi {
        comodule,
        ct,
        reps,
    })
}

/// Injectivity detection: a comodule is injective iff its coaction splits
/// colinearly off the cofree comodule on its underlying space. Returns the
/// splitting s with s . nu = id when one exists.
pub fn comodule_injective_splitting(m: &ComoduleSpec) -> Result<Option<GradedMap>, Error> {
    let field = m.carrier.field;
    let cofree = cofree_comodule(&m.coalgebra, &m.carrier);
    // nu : M -> C ⊗ M as a map into the cofree carrier
    let nu = GradedMap::from_fn(&m.carrier, &cofree.comodule.carrier, 0, |x| {
        crate::graded::gelem_normalize(
            m.coaction_basis(x)
                .into_iter()
                .filter_map(|(s, c, mm)| cofree.id_of(c, mm).map(|id| (id, s)))
                .collect(),
        )
    });
    // solve for s = sum x_k F_k (colinear basis) with s . nu = id
    let basis = comodule_hom_basis(&cofree.comodule, m, 0);
    if basis.is_empty() {
        return Ok(None);
    }
    let mflat = Flattener::new(&m.carrier);
    let dim = mflat.dim() * mflat.dim();
    let flatten = |g: &GradedMap| -> SVec {
        let mut v = Vec::new();
        for (x, col) in g.cols_iter() {
            for (y, s) in col {
                v.push((mflat.pos(*x) * mflat.dim() + mflat.pos(*y), s.clone()));
            }
        }
        matrix::svec_normalize(v)
    };
    let cols: Vec<SVec> = basis
        .iter()
        .map(|f| flatten(&f.compose(&nu).expect("composable")))
        .collect();
    let id_flat = flatten(&GradedMap::identity(&m.carrier));
    match matrix::membership(field, dim, &cols, &id_flat) {
        Some(coords) => {
            let mut s = GradedMap::zero(&cofree.comodule.carrier, &m.carrier, 0);
            for (k, c) in coords {
                s = s.add(&basis[k].scale(&c))?;
            }
            Ok(Some(s))
        }
        None => Ok(None),
    }
}

/// Projectivity detection: a contramodule is projective iff the
/// contraaction splits contralinearly off the free contramodule on its
/// underlying space. Returns the section sigma with pi . sigma = id.
pub fn contramodule_projective_splitting(
    p: &ContramoduleSpec,
) -> Result<Option<GradedMap>, Error> {
    let field = p.carrier.field;
    let free = free_contramodule(&p.coalgebra, &p.carrier);
    // pi : Hom(C, P) -> P on the free carrier
    let pi = GradedMap::from_fn(&free.contra.carrier, &p.carrier, 0, |fid| {
        let (c, q) = free.pair_of(fid);
        p.contra_basis(c, q)
    });
    let basis = contramodule_hom_basis(p, &free.contra, 0);
    if basis.is_empty() {
        return Ok(None);
    }
    let pflat = Flattener::new(&p.carrier);
    let dim = pflat.dim() * pflat.dim();
    let flatten = |g: &GradedMap| -> SVec {
        let mut v = Vec::new();
        for (x, col) in g.cols_iter() {
            for (y, s) in col {
                v.push((pflat.pos(*x) * pflat.dim() + pflat.pos(*y), s.clone()));
            }
        }
        matrix::svec_normalize(v)
    };
    let cols: Vec<SVec> = basis
        .iter()
        .map(|f| flatten(&pi.compose(f).expect("composable")))
        .collect();
    let id_flat = flatten(&GradedMap::identity(&p.carrier));
    match matrix::membership(field, dim, &cols, &id_flat) {
        Some(coords) => {
            let mut s = GradedMap::zero(&p.carrier, &free.contra.carrier, 0);
            for (k, c) in coords {
                s = s.add(&basis[k].scale(&c))?;
            }
            Ok(Some(s))
        }
        None => Ok(None),
    }
}

/// The counit Phi(Psi(M)) -> M of the co-contra adjunction:
/// class(c ⊗ F) -> F(c).
pub fn phi_psi_counit(psi: &Psi, phi: &Phi, m: &ComoduleSpec) -> GradedMap {
    GradedMap::from_fn(&phi.comodule.carrier, &m.carrier, 0, |id| {
        // the basis of Phi corresponds to class representatives (c, F)
        let mut k = 0;
        for deg in phi.comodule.carrier.degrees() {
            if deg == id.degree {
                let (c, fid) = phi.reps[k + id.index];
                let f = &psi
                    .vectors
                    .iter()
                    .find(|(vid, _)| *vid == fid)
                    .expect("Psi basis vector")
                    .1;
                return f.col(c);
            }
            k += phi.comodule.carrier.dim(deg);
        }
        Vec::new()
    })
}

/// The unit P -> Psi(Phi(P)) of the co-contra adjunction:
/// p -> (c -> class(c ⊗ p)), expressed in the chosen basis of Psi(Phi(P)).
pub fn psi_phi_unit(
    p: &ContramoduleSpec,
    phi: &Phi,
    psi_of_phi: &Psi,
) -> Result<GradedMap, Error> {
    let field = p.carrier.field;
    let co = &p.coalgebra;
    let phisp = &phi.comodule.carrier;
    let cflat = Flattener::new(&co.carrier);
    let phiflat = Flattener::new(phisp);
    // flat index of the class of (c ⊗ q) inside the Phi carrier
    let ids: Vec<BasisId> = phisp.ids();
    let class_elem = |c: BasisId, q: BasisId| -> GElem {
        let cls = phi.ct.class_of(c, q);
        crate::graded::gelem_normalize(
            cls.iter()
                .map(|(flat, s)| {
                    let k = phi
                        .ct
                        .quotient
                        .free_coords
                        .iter()
                        .position(|f| f == flat)
                        .expect("reduced class");
                    (ids[k], s.clone())
                })
                .collect(),
        )
    };
    let flatten = |g: &GradedMap| -> SVec {
        let mut v = Vec::new();
        for (x, col) in g.cols_iter() {
            for (y, s) in col {
                v.push((cflat.pos(*x) * phiflat.dim() + phiflat.pos(*y), s.clone()));
            }
        }
        matrix::svec_normalize(v)
    };
    let mut cols: std::collections::BTreeMap<BasisId, GElem> = Default::default();
    for q in p.carrier.ids() {
        // the colinear map c -> class(c ⊗ q)
        let g = GradedMap::from_fn(&co.carrier, phisp, q.degree, |c| class_elem(c, q));
        let basis_n: Vec<&(BasisId, GradedMap)> = psi_of_phi
            .vectors
            .iter()
            .filter(|(id, _)| id.degree == q.degree)
            .collect();
        let bcols: Vec<SVec> = basis_n.iter().map(|(_, f)| flatten(f)).collect();
        let target = flatten(&g);
        if target.is_empty() {
            continue;
        }
        let coords = matrix::membership(field, cflat.dim() * phiflat.dim(), &bcols, &target)
            .ok_or_else(|| {
                Error::axiom("psi-phi-unit", p.carrier.label(q), "unit image is not colinear")
            })?;
        cols.insert(
            q,
            crate::graded::gelem_normalize(
                coords.into_iter().map(|(k, s)| (basis_n[k].0, s)).collect(),
            ),
        );
    }
    Ok(GradedMap::from_fn(
        &p.carrier,
        &psi_of_phi.contramodule.carrier,
        0,
        |q| cols.get(&q).cloned().unwrap_or_default(),
    ))
}
