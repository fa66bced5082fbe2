use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srl_core::experiments::{
    check_grisvard, check_localized, check_uniform_resolvent, convergence_study, representative_solenoidal,
    sweep_pressure_decay, validate_h2_mu, ExperimentConfig, FitWindow, LocalizedId, LocalizedReport,
    ManufacturedCase, SweepOptions,
};
use srl_core::fem::BoundaryCondition;
use srl_core::fields::{Polynomial, PolynomialField};
use srl_core::geometry::{triangulate_level, ConvexPolygon, CubePatch, Point};
use srl_core::helmholtz::SolenoidalFlavor;
use srl_core::solver::{SectorSample, StokesSystem};
use srl_core::C64;

const THETA: f64 = 2.0 * std::f64::consts::FRAC_PI_3;

fn poly(terms: &[(u32, u32, f64)]) -> Polynomial {
    Polynomial::new(terms.iter().map(|&(a, b, c)| (a, b, C64::new(c, 0.0))).collect())
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<SectorSample> {
    (0..n)
        .map(|k| SectorSample::new(10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64), 0.0, THETA).unwrap())
        .collect()
}

#[test]
fn config_defaults_validate_and_hash_stably() {
    let a = ExperimentConfig::default();
    a.validate().unwrap();
    let b = ExperimentConfig::from_json("{}").unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    let c = ExperimentConfig::from_json(r#"{"mu": 0.25}"#).unwrap();
    assert_ne!(a.hash(), c.hash());
    assert!(a.header().starts_with("# config_hash="));
}

#[test]
fn config_rejects_bad_values() {
    for bad in [
        r#"{"mu": 1.5}"#,
        r#"{"mu": -1.0}"#,
        r#"{"theta": 3.5}"#,
        r#"{"lambda": {"args": [2.2]}}"#,
        r#"{"lambda": {"log10_min": 3, "log10_max": 1}}"#,
        r#"{"p_list": [0.5]}"#,
        r#"{"domain": "ngon:2:1"}"#,
        r#"{"patch": [0, 0, -1]}"#,
        r#"{"unknown": true}"#,
    ] {
        assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
    }
    let few = ExperimentConfig::from_json(r#"{"lambda": {"count": 4}}"#).unwrap();
    assert!(few.validate_for_fit().is_err());
    let ok = ExperimentConfig::from_json(r#"{"lambda": {"count": 5}}"#).unwrap();
    assert!(ok.validate_for_fit().is_ok());
}

#[test]
fn fit_window_keeps_upper_decades() {
    let s: Vec<(f64, f64)> = (0..5).map(|k| (10f64.powi(k), 1.0)).collect();
    assert_eq!(FitWindow::UpperDecades(2.0).select(&s).len(), 3);
    assert_eq!(FitWindow::Resolved.select(&s).len(), 5);
}

#[test]
fn grisvard_hand_examples() {
    let sq = ConvexPolygon::unit_square();
    let radial = PolynomialField::new(poly(&[(1, 0, 2.0)]), poly(&[(0, 1, 2.0)]));
    let r = check_grisvard(&sq, &radial, 8, "radial").unwrap();
    assert!((r.lhs - 8.0).abs() < 1e-12 && (r.rhs - 8.0).abs() < 1e-12);
    let shear = PolynomialField::new(poly(&[(0, 1, 1.0)]), poly(&[]));
    let r = check_grisvard(&sq, &shear, 8, "shear").unwrap();
    assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
    assert!(check_grisvard(&sq, &shear, 1, "low").is_err());
}

#[test]
fn localized_report_with_zero_sides() {
    let q = CubePatch::new(Point::new(0.5, 0.5), 0.1).unwrap();
    let r = LocalizedReport::new(q, LocalizedId::Caccioppoli, 10.0, 0.0, 0.0, 1.0);
    assert_eq!(r.ratio, 0.0);
    let r = LocalizedReport::new(q, LocalizedId::Caccioppoli, 10.0, 1.0, 0.0, 1.0);
    assert!(r.ratio.is_infinite());
}

#[test]
fn localized_checks_reject_bad_setups() {
    let mesh = triangulate_level(&ConvexPolygon::unit_square(), 4);
    let dir = StokesSystem::new(mesh.clone(), BoundaryCondition::Dirichlet).unwrap();
    let neu = StokesSystem::new(mesh, BoundaryCondition::Neumann { mu: 0.0 }).unwrap();
    let q = CubePatch::new(Point::new(1.0, 1.0), 0.25).unwrap();
    let zero = PolynomialField::new(poly(&[]), poly(&[]));
    let s = grid(1.0, 2.0, 2);
    assert!(check_localized(&dir, &s, &q, &zero).is_err());
    // zero force: every ratio is zero
    let rows = check_localized(&neu, &s, &q, &zero).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ratio == 0.0));
    // a force everywhere meets the dilated patch
    let one = PolynomialField::new(poly(&[(0, 0, 1.0)]), poly(&[]));
    assert!(check_localized(&neu, &s, &q, &one).is_err());
}

#[test]
fn uniform_report_with_zero_data_is_empty() {
    let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Neumann { mu: 0.0 })
        .unwrap();
    let zero = vec![C64::new(0.0, 0.0); sys.n_vel()];
    let rep = check_uniform_resolvent(&sys, "unit_square", &grid(0.0, 1.0, 2), &[2.0], &zero, None, &SweepOptions::default())
        .unwrap();
    assert!(rep.volume.is_empty() && rep.divergence.is_empty());
}

#[test]
fn h2_mu_bound() {
    assert!(validate_h2_mu(0.41).is_ok());
    assert!(validate_h2_mu(0.42).is_err());
    assert!(validate_h2_mu(-0.99).is_ok());
    assert!(validate_h2_mu(-1.0).is_err());
}

#[test]
fn manufactured_orders() {
    let lambda = C64::new(1.0, 1.0);
    for case in [ManufacturedCase::DirichletBubble, ManufacturedCase::NeumannTrig { mu: 0.3 }] {
        let study = convergence_study(case, lambda, &[2, 3, 4]).unwrap();
        let (vo, po) = study.min_orders();
        assert!(vo > 2.7, "{case:?} velocity {vo}");
        assert!(po > 1.7, "{case:?} pressure {po}");
    }
}

#[test]
fn sweep_is_reproducible_across_thread_counts() {
    let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 4), BoundaryCondition::Neumann { mu: 0.0 })
        .unwrap();
    let opts = SweepOptions { threads: 1, ..SweepOptions::default() };
    let wide = grid(0.0, 2.0, 5);
    let x = sweep_pressure_decay(&sys, "unit_square", &wide, SolenoidalFlavor::CalL2Sigma, &opts).unwrap();
    let y = sweep_pressure_decay(&sys, "unit_square", &wide, SolenoidalFlavor::CalL2Sigma, &SweepOptions { threads: 0, ..opts })
        .unwrap();
    assert_eq!(x.record.to_csv(""), y.record.to_csv(""));
    assert_eq!(x.fit, y.fit);
}

#[test]
fn representative_field_is_solenoidal() {
    let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Dirichlet).unwrap();
    let f = representative_solenoidal(&sys).unwrap();
    let div = sys.operators().div.matvec_c(&f);
    let scale = sys.operators().mass.quad_form(&f).sqrt();
    assert!(scale > 0.0);
    assert!(div.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-10 * scale);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn grisvard_holds_for_random_cubics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PolynomialField::random(&mut rng, 3);
        let r = check_grisvard(&ConvexPolygon::unit_square(), &v, 8, "cubic").unwrap();
        prop_assert!(r.relative_residual <= 1e-9, "{:?}", r);
    }

    #[test]
    fn grisvard_holds_on_pentagons(seed in any::<u64>(), radius in 0.3..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PolynomialField::random(&mut rng, 3);
        let r = check_grisvard(&ConvexPolygon::regular_ngon(5, radius).unwrap(), &v, 8, "cubic").unwrap();
        prop_assert!(r.relative_residual <= 1e-9, "{:?}", r);
    }

    #[test]
    fn config_hash_is_deterministic(mu in -0.9..0.9f64, level in 0usize..6, seed in any::<u64>()) {
        let text = format!(r#"{{"mu": {mu}, "level": {level}, "seed": {seed}}}"#);
        let a = ExperimentConfig::from_json(&text).unwrap();
        let b = ExperimentConfig::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(a.hash(), b.hash());
    }
}
