//! Twisting cochains: Maurer-Cartan verdicts for the canonical cochains,
//! the bar-cobar adjunction bijections, the twisted functors and their
//! d²-laws, and acyclicity checks.

use std::sync::Arc;

use kdual_core::barcobar::{
    bar_augmented, bar_curved, bar_module, bar_twisting_cochain, cobar_coaugmented,
    cobar_twisting_cochain, Retraction,
};
use kdual_core::cdg::{CdgAlgebra, CdgCoalgebra, CdgModule};
use kdual_core::coalgebra::CoSide;
use kdual_core::field::Field;
use kdual_core::fixtures;
use kdual_core::functional::Functional;
use kdual_core::graded::{BasisId, DegreeWindow, GradedMap};
use kdual_core::homology::homology_of;
use kdual_core::quad::{nonhomogeneous_dual, FilteredAlgebra};
use kdual_core::twist::{
    acyclicity_check, hom_cdg_algebra, mc_check, tau_to_algebra_morphism,
    tau_to_coalgebra_morphism, twisted_hom_contramodule, twisted_hom_module,
    twisted_tensor_comodule, twisted_tensor_module,
};

fn q() -> Field {
    Field::Rationals
}

fn bar_of_kx(cap: u32) -> (Arc<kdual_core::algebra::AlgebraSpec>, kdual_core::barcobar::Bar) {
    let w = DegreeWindow::new(-(cap as i32), 0, cap).unwrap();
    let alg = fixtures::poly_one_var(q(), w);
    let bar = bar_augmented(&alg, &w).unwrap();
    (alg, bar)
}

#[test]
fn hom_cdg_algebra_passes_axioms() {
    // Hom(C, B) for the dual-numbers dual and the dual numbers: a small
    // genuinely nontrivial convolution algebra
    let w = DegreeWindow::new(-4, 4, 4).unwrap();
    let co = fixtures::dual_numbers_dual(q(), w);
    let cdgc = Arc::new(CdgCoalgebra::uncurved(co));
    let alg = fixtures::dual_numbers(q(), w);
    let cdga = Arc::new(CdgAlgebra::uncurved(alg));
    let hom = hom_cdg_algebra(&cdgc, &cdga, &w).unwrap();
    hom.cdg.check().unwrap();
}

#[test]
fn hom_cdg_algebra_with_curvature_passes_axioms() {
    // curved coalgebra source: the terminal CDG-coalgebra
    let w = DegreeWindow::new(-8, 8, 6).unwrap();
    let co = fixtures::terminal_cdg_coalgebra_carrier(q(), w);
    let c = co.carrier.find(-2, "c").unwrap();
    let h = Functional::from_pairs(q(), 2, [(c, q().one())]);
    let cdgc = Arc::new(CdgCoalgebra { coalgebra: co, h });
    let alg = fixtures::dual_numbers(q(), w);
    let cdga = Arc::new(CdgAlgebra::uncurved(alg));
    let hom = hom_cdg_algebra(&cdgc, &cdga, &w).unwrap();
    hom.cdg.check().unwrap();
}

#[test]
fn zero_cochain_passes_mc_when_flat() {
    let w = DegreeWindow::new(-4, 4, 4).unwrap();
    let co = fixtures::dual_numbers_dual(q(), w);
    let cdgc = CdgCoalgebra::uncurved(co);
    let alg = fixtures::dual_numbers(q(), w);
    let cdga = CdgAlgebra::uncurved(Arc::clone(&alg));
    let tau = GradedMap::zero(&cdgc.coalgebra.carrier, &alg.carrier, 1);
    let rep = mc_check(&tau, &cdgc, &cdga).unwrap();
    assert!(rep.passed);
}

#[test]
fn canonical_bar_cochain_is_maurer_cartan() {
    let (alg, bar) = bar_of_kx(6);
    let tau = bar_twisting_cochain(&bar);
    let cdga = CdgAlgebra::uncurved(Arc::clone(&alg));
    let rep = mc_check(&tau, &bar.cdg, &cdga).unwrap();
    assert!(rep.passed, "failure at {:?}", rep.first_failure);
}

#[test]
fn canonical_curved_bar_cochain_is_maurer_cartan() {
    // curved case: the involution algebra with v(x) = 0
    let w = DegreeWindow::new(-6, 0, 6).unwrap();
    let alg = fixtures::involution_algebra(q(), w);
    let unit = alg.carrier.find(0, "1").unwrap();
    let v = Retraction::new(&alg, Functional::from_pairs(q(), 0, [(unit, q().one())])).unwrap();
    let bar = bar_curved(&alg, &v, &w).unwrap();
    let tau = bar_twisting_cochain(&bar);
    let cdga = CdgAlgebra::uncurved(Arc::clone(&alg));
    let rep = mc_check(&tau, &bar.cdg, &cdga).unwrap();
    assert!(rep.passed, "failure at {:?}", rep.first_failure);
}

#[test]
fn canonical_cobar_cochain_is_maurer_cartan() {
    let w = DegreeWindow::new(0, 6, 6).unwrap();
    let co = fixtures::dual_numbers_dual(q(), w);
    let cdgc = CdgCoalgebra::uncurved(co);
    let cobar = cobar_coaugmented(&cdgc, &w).unwrap();
    let tau = cobar_twisting_cochain(&cobar);
    let rep = mc_check(&tau, &cdgc, &cobar.cdg).unwrap();
    assert!(rep.passed, "failure at {:?}", rep.first_failure);
}

#[test]
fn canonical_curved_cobar_cochain_is_maurer_cartan() {
    let w = DegreeWindow::new(-8, 0, 6).unwrap();
    let co = fixtures::terminal_cdg_coalgebra_carrier(q(), w);
    let c = co.carrier.find(-2, "c").unwrap();
    let h = Functional::from_pairs(q(), 2, [(c, q().one())]);
    let cdgc = CdgCoalgebra { coalgebra: co, h };
    let cobar = cobar_coaugmented(&cdgc, &w).unwrap();
    let tau = cobar_twisting_cochain(&cobar);
    let rep = mc_check(&tau, &cdgc, &cobar.cdg).unwrap();
    assert!(rep.passed, "failure at {:?}", rep.first_failure);
}

#[test]
fn nonhomogeneous_koszul_cochain_is_maurer_cartan() {
    let w = DegreeWindow::new(-5, 0, 4).unwrap();
    let alg = fixtures::enveloping_two_dim(q(), w, 1);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let cdga = CdgAlgebra::uncurved(Arc::clone(&alg));
    let rep = mc_check(&dual.tau, &dual.cdg, &cdga).unwrap();
    assert!(rep.passed, "failure at {:?}", rep.first_failure);
}

#[test]
fn adjunction_round_trips_are_identities() {
    // canonical cobar tau corresponds to the identity algebra morphism
    let w = DegreeWindow::new(0, 5, 5).unwrap();
    let co = fixtures::dual_numbers_dual(q(), w);
    let cdgc = CdgCoalgebra::uncurved(Arc::clone(&co));
    let cobar = cobar_coaugmented(&cdgc, &w).unwrap();
    let tau = cobar_twisting_cochain(&cobar);
    let g = tau_to_algebra_morphism(&tau, &cobar, &cobar.cdg.algebra).unwrap();
    let id = GradedMap::identity(&cobar.cdg.algebra.carrier);
    assert!(g.equals(&id), "Cb(C) -> Cb(C) from the canonical tau is the identity");

    // canonical bar tau corresponds to the identity coalgebra morphism
    let (_alg, bar) = bar_of_kx(4);
    let tau2 = bar_twisting_cochain(&bar);
    let t = tau_to_coalgebra_morphism(&tau2, &bar.cdg.coalgebra, &bar).unwrap();
    let id2 = GradedMap::identity(&bar.words.space);
    assert!(t.equals(&id2), "Br(A) -> Br(A) from the canonical tau is the identity");
}

#[test]
fn adjunction_algebra_morphism_is_a_chain_map() {
    // for the nonhomogeneous Koszul tau of U(g): Cb(C) -> U(g) commutes
    // with differentials
    let w = DegreeWindow::new(-5, 0, 4).unwrap();
    let alg = fixtures::enveloping_two_dim(q(), w, 1);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let cobar_window = DegreeWindow::new(-4, 4, 4).unwrap();
    let cobar = cobar_coaugmented(&dual.cdg, &cobar_window).unwrap();
    let g = tau_to_algebra_morphism(&dual.tau, &cobar, &alg).unwrap();
    // chain map: g . d_Cb = d_A . g = 0 . g
    let composed = g.compose(&cobar.cdg.d()).unwrap();
    for id in cobar.words.space.ids() {
        if id.degree >= -3 {
            assert!(
                composed.col(id).is_empty(),
                "g d != 0 at {}",
                cobar.words.space.label(id)
            );
        }
    }
}

#[test]
fn refuses_coalgebra_direction_for_nonconilpotent_source() {
    let w = DegreeWindow::new(-4, 0, 4).unwrap();
    let co = fixtures::two_group_likes(q(), w);
    let (alg, bar) = bar_of_kx(4);
    let tau = GradedMap::zero(&co.carrier, &alg.carrier, 1);
    assert!(tau_to_coalgebra_morphism(&tau, &co, &bar).is_err());
}

#[test]
fn twisted_tensor_reproduces_bar_module_bit_exactly() {
    // C ⊗^tau M for C = Br(A) and the canonical tau must equal the
    // bar-with-coefficients differential on the nose
    let (alg, bar) = bar_of_kx(5);
    let w = DegreeWindow::new(-5, 0, 5).unwrap();
    let m = fixtures::poly_character_module(&alg, q().from_i64(2));
    let tau = bar_twisting_cochain(&bar);
    let base = Arc::new(bar.cdg.clone());
    let mut mod_with_d = m.clone();
    mod_with_d.differential = None;
    let cdgm = CdgModule {
        base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg))),
        module: mod_with_d,
    };
    let tt = twisted_tensor_comodule(&tau, &base, &cdgm, &w).unwrap();
    let bm = bar_module(&bar, &m, &w).unwrap();
    assert!(
        tt.comodule.d().equals(&bm.comodule.d()),
        "Br_v(A, M) = Br_v(A) ⊗^tau M bit-exactly"
    );
    tt.comodule.check().unwrap();
}

#[test]
fn twisted_tensor_two_term_complex_detects_character() {
    // A = k[x], C = k ⊕ kx dual, canonical tau through the inclusion
    // C -> Br(A); C ⊗^tau k_a is the two-term complex with differential a
    let w = DegreeWindow::new(-2, 0, 3).unwrap();
    let alg = fixtures::poly_one_var(q(), DegreeWindow::new(-2, 0, 3).unwrap());
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    for a in [0i64, 2] {
        let m = fixtures::poly_character_module(&alg, q().from_i64(a));
        let cdgm = CdgModule {
            base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg))),
            module: m,
        };
        let base = Arc::new(dual.cdg.clone());
        let tt = twisted_tensor_comodule(&dual.tau, &base, &cdgm, &w).unwrap();
        tt.comodule.check().unwrap();
        let h = homology_of(&tt.comodule.d()).unwrap();
        if a == 0 {
            assert_eq!(h.dim(0), Some(1));
            assert_eq!(h.dim(-1), Some(1));
        } else {
            assert_eq!(h.dim(0), Some(0), "acyclic for a != 0");
            assert_eq!(h.dim(-1), Some(0));
        }
    }
}

#[test]
fn lie_homology_from_twisted_tensor() {
    // C ⊗^tau k for the Chevalley-Eilenberg dual of U(g), [x,y] = y:
    // dims (1, 1, 0) in degrees 0, -1, -2
    let w = DegreeWindow::new(-5, 0, 4).unwrap();
    let alg = fixtures::enveloping_two_dim(q(), w, 1);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let k_mod = kdual_core::algebra::character_module(
        &alg,
        alg.augmentation.as_ref().unwrap(),
        "k",
    );
    let cdgm = CdgModule {
        base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg))),
        module: k_mod,
    };
    let base = Arc::new(dual.cdg.clone());
    let tt = twisted_tensor_comodule(&dual.tau, &base, &cdgm, &w).unwrap();
    tt.comodule.check().unwrap();
    let h = homology_of(&tt.comodule.d()).unwrap();
    assert_eq!(h.dim(0), Some(1));
    assert_eq!(h.dim(-1), Some(1));
    assert_eq!(h.dim(-2), Some(0));

    // abelian case: dims (1, 2, 1)
    let alg0 = fixtures::enveloping_two_dim(q(), w, 0);
    let fa0 = FilteredAlgebra::new(Arc::clone(&alg0)).unwrap();
    let v0 = Retraction::from_augmentation(&alg0).unwrap();
    let dual0 = nonhomogeneous_dual(&fa0, &v0).unwrap();
    let k0 = kdual_core::algebra::character_module(
        &alg0,
        alg0.augmentation.as_ref().unwrap(),
        "k",
    );
    let cdgm0 = CdgModule {
        base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg0))),
        module: k0,
    };
    let base0 = Arc::new(dual0.cdg.clone());
    let tt0 = twisted_tensor_comodule(&dual0.tau, &base0, &cdgm0, &w).unwrap();
    let h0 = homology_of(&tt0.comodule.d()).unwrap();
    assert_eq!(h0.dim(0), Some(1));
    assert_eq!(h0.dim(-1), Some(2));
    assert_eq!(h0.dim(-2), Some(1));
}

#[test]
fn twisted_tensor_module_side_passes_cdg_axioms() {
    // B ⊗^tau N for B = k[x]: with N = k the twist term dies and the
    // result is the free module B; with N = C it is the Koszul complex
    // with homology k in degree 0
    let w = DegreeWindow::new(-3, 0, 3).unwrap();
    let alg = fixtures::poly_one_var(q(), w);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let base_c = Arc::new(dual.cdg.clone());
    let base_b = Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg)));

    let n = fixtures::trivial_comodule(&base_c.coalgebra, CoSide::Left);
    let cdgn = kdual_core::cdg::CdgComodule {
        base: Arc::clone(&base_c),
        comodule: n,
    };
    let tt = twisted_tensor_module(&dual.tau, &base_b, &cdgn, &w).unwrap();
    tt.module.check().unwrap();
    assert!(tt.module.d().is_zero(), "B ⊗^tau k is the free module B");

    let c_self = base_c.self_left_comodule();
    let cdgc_self = kdual_core::cdg::CdgComodule {
        base: Arc::clone(&base_c),
        comodule: c_self,
    };
    let koszul = twisted_tensor_module(&dual.tau, &base_b, &cdgc_self, &w).unwrap();
    koszul.module.check().unwrap();
    let h = homology_of(&koszul.module.d()).unwrap();
    assert_eq!(h.dim(0), Some(1));
    assert_eq!(h.dim(-1), Some(0));
}

#[test]
fn twisted_hom_contramodule_passes_cdg_axioms() {
    // Hom^tau(C, P) for the dual-numbers pair: two-term complex with
    // differential a, acyclic iff a != 0
    let w = DegreeWindow::new(-2, 2, 3).unwrap();
    let alg = fixtures::poly_one_var(q(), DegreeWindow::new(-2, 2, 3).unwrap());
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let base = Arc::new(dual.cdg.clone());
    for a in [0i64, 3] {
        let m = fixtures::poly_character_module(&alg, q().from_i64(a));
        let cdgm = CdgModule {
            base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg))),
            module: m,
        };
        let th = twisted_hom_contramodule(&dual.tau, &base, &cdgm).unwrap();
        th.contramodule.check().unwrap();
        let h = homology_of(&th.contramodule.d()).unwrap();
        if a == 0 {
            assert_eq!(h.dim(0), Some(1));
            assert_eq!(h.dim(1), Some(1));
        } else {
            assert!(h.is_zero_on(0, 1), "Hom^tau acyclic for a != 0");
        }
    }
}

#[test]
fn trivial_coalgebra_twisted_hom_is_identity() {
    // C = k: Hom^tau(C, P) = P
    let w = DegreeWindow::new(-2, 2, 3).unwrap();
    let mut basis = std::collections::BTreeMap::new();
    basis.insert(0, vec![kdual_core::graded::BasisElem { label: "1".into(), weight: 0 }]);
    let carrier = Arc::new(kdual_core::graded::GradedVectorSpace::new(q(), w, basis).unwrap());
    let one = BasisId { degree: 0, index: 0 };
    let counit = Functional::from_pairs(q(), 0, [(one, q().one())]);
    let mut co = kdual_core::coalgebra::CoalgebraSpec::new(carrier, counit);
    co.set_comul(one, vec![(q().one(), one, one)]);
    co.coaugmentation = Some(vec![(one, q().one())]);
    let base = Arc::new(CdgCoalgebra::uncurved(Arc::new(co)));

    let alg = fixtures::poly_one_var(q(), w);
    let m = fixtures::poly_character_module(&alg, q().from_i64(5));
    let cdgm = CdgModule {
        base: Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg))),
        module: m,
    };
    let tau = GradedMap::zero(&base.coalgebra.carrier, &alg.carrier, 1);
    let th = twisted_hom_contramodule(&tau, &base, &cdgm).unwrap();
    assert_eq!(th.contramodule.contramodule.carrier.total_dim(), 1);
    assert!(th.contramodule.d().is_zero());
}

#[test]
fn twisted_hom_module_side_passes_cdg_axioms() {
    // Hom^tau(B, Q) for B = k[x] and Q = the free contramodule on k over
    // the dual coalgebra
    let w = DegreeWindow::new(-3, 3, 3).unwrap();
    let alg = fixtures::poly_one_var(q(), w);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let base_c = Arc::new(dual.cdg.clone());
    let kline = kdual_core::graded::GradedVectorSpace::line(q(), w, "k");
    let free = kdual_core::cocontra::free_contramodule(&base_c.coalgebra, &kline);
    let q_contra = kdual_core::cdg::CdgContramodule {
        base: Arc::clone(&base_c),
        contramodule: free.contra,
    };
    let base_b = Arc::new(CdgAlgebra::uncurved(Arc::clone(&alg)));
    let th = twisted_hom_module(&dual.tau, &base_b, &q_contra, &w).unwrap();
    th.module.check().unwrap();
}

#[test]
fn canonical_cochains_are_acyclic() {
    // tau : C -> Cb(C): cone of the identity, trivially acyclic
    let w = DegreeWindow::new(0, 5, 5).unwrap();
    let co = fixtures::dual_numbers_dual(q(), w);
    let cdgc = CdgCoalgebra::uncurved(Arc::clone(&co));
    let cobar = cobar_coaugmented(&cdgc, &w).unwrap();
    let tau = cobar_twisting_cochain(&cobar);
    let rep = acyclicity_check(&tau, &cobar, &cobar.cdg.algebra).unwrap();
    assert!(rep.acyclic, "cone homology {:?}", rep.cone_homology);

    // canonical bar tau for A = k[x]: acyclic on the window
    let bw = DegreeWindow::new(-4, 0, 4).unwrap();
    let alg = fixtures::poly_one_var(q(), bw);
    let bar = bar_augmented(&alg, &bw).unwrap();
    let tau2 = bar_twisting_cochain(&bar);
    let cw = DegreeWindow::new(-4, 4, 4).unwrap();
    let cobar2 = cobar_coaugmented(&bar.cdg, &cw).unwrap();
    let rep2 = acyclicity_check(&tau2, &cobar2, &alg).unwrap();
    assert!(rep2.acyclic, "cone homology {:?}", rep2.cone_homology);
}

#[test]
fn nonhomogeneous_koszul_cochain_is_acyclic() {
    let w = DegreeWindow::new(-4, 0, 4).unwrap();
    let alg = fixtures::enveloping_two_dim(q(), w, 1);
    let fa = FilteredAlgebra::new(Arc::clone(&alg)).unwrap();
    let v = Retraction::from_augmentation(&alg).unwrap();
    let dual = nonhomogeneous_dual(&fa, &v).unwrap();
    let cw = DegreeWindow::new(-4, 4, 4).unwrap();
    let cobar = cobar_coaugmented(&dual.cdg, &cw).unwrap();
    let rep = acyclicity_check(&dual.tau, &cobar, &alg).unwrap();
    assert!(rep.acyclic, "cone homology {:?}", rep.cone_homology);
}
