use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srl_core::fem::{assemble, BoundaryCondition, Operators, TaylorHood};
use srl_core::geometry::{triangulate_level, ConvexPolygon};
use srl_core::helmholtz::{ConstraintProjector, HelmholtzProjector, Projection, SolenoidalBasis, SolenoidalFlavor};
use srl_core::norms::{
    fit_decay_exponent, lp_norm, lp_norm_gradient, operator_norm, DualKind, DualNorm, InputNorm, Method, OperatorSpec,
    OutputFunctional, Subspace,
};
use srl_core::solver::StokesSystem;
use srl_core::C64;
use std::sync::OnceLock;

fn square(level: usize) -> (TaylorHood, Operators) {
    let s = TaylorHood::new(triangulate_level(&ConvexPolygon::unit_square(), level));
    let ops = assemble(&s);
    (s, ops)
}

fn shared() -> &'static (TaylorHood, Operators) {
    static CELL: OnceLock<(TaylorHood, Operators)> = OnceLock::new();
    CELL.get_or_init(|| square(2))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn power_law(alpha: f64, c: f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let l = 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64);
            (l, c * l.powf(-alpha))
        })
        .collect()
}

#[test]
fn fit_recovers_exact_power_laws() {
    for alpha in [0.0, 0.25, 0.5, 0.75, -0.25] {
        let f = fit_decay_exponent(&power_law(alpha, 3.0, 0.0, 4.0, 17)).unwrap();
        assert!((f.alpha_hat - alpha).abs() < 1e-12, "{alpha}");
        assert!(f.r2 > 1.0 - 1e-12);
        assert_eq!(f.n_samples, 17);
    }
}

#[test]
fn fit_rejects_thin_data() {
    assert!(fit_decay_exponent(&[(10.0, 1.0)]).is_err());
    assert!(fit_decay_exponent(&power_law(0.5, 1.0, 0.0, 4.0, 4)).is_err());
    assert!(fit_decay_exponent(&power_law(0.5, 1.0, 0.0, 1.5, 9)).is_err());
    // non-positive samples are ignored before counting
    let mut s = power_law(0.5, 1.0, 0.0, 4.0, 5);
    s[2].1 = 0.0;
    assert!(fit_decay_exponent(&s).is_err());
}

#[test]
fn lp_norms_of_constants() {
    let (s, _) = shared();
    let u = s.interpolate(|_| [C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
    for p in [1.0, 2.0, 3.0, 4.0] {
        assert!((lp_norm(s, &u, p, None) - 5.0).abs() < 1e-12, "p = {p}");
        assert!(lp_norm_gradient(s, &u, p, None) < 1e-12);
    }
    let lin = s.interpolate(|q| [C64::new(q.x, 0.0), C64::new(0.0, 0.0)]);
    assert!((lp_norm(s, &lin, 2.0, None) - (1.0f64 / 3.0).sqrt()).abs() < 1e-13);
}

#[test]
fn dual_norms_are_ordered() {
    let (s, ops) = shared();
    let zero = DualNorm::new(s, ops, DualKind::H1ZeroDual).unwrap();
    let full = DualNorm::new(s, ops, DualKind::H1FullDual).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let u = random_vec(&mut rng, s.n_vel());
        let l = ops.mass.matvec_c(&u);
        let l2 = ops.mass.quad_form(&u).sqrt();
        // more test fields, larger sup; H^1 norm dominates L^2
        let (nz, nf) = (zero.norm(&l), full.norm(&l));
        assert!(nz <= nf * (1.0 + 1e-12));
        assert!(nf <= l2 * (1.0 + 1e-12));
        // Riesz round trip
        let w = full.riesz(&l);
        assert!((full.gram().quad_form(&w).sqrt() - nf).abs() < 1e-10 * nf);
    }
}

#[test]
fn dual_norm_of_gram_image_is_gram_norm() {
    let (s, ops) = shared();
    let full = DualNorm::new(s, ops, DualKind::H1FullDual).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = random_vec(&mut rng, s.n_vel());
    let l = full.gram().matvec_c(&w);
    assert!((full.norm(&l) - full.gram().quad_form(&w).sqrt()).abs() < 1e-10 * full.norm(&l));
}

#[test]
fn helmholtz_decomposition_reassembles() {
    let (s, ops) = shared();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in [Projection::P, Projection::Q] {
        let hp = HelmholtzProjector::new(s, ops, kind).unwrap();
        let f = random_vec(&mut rng, s.n_vel());
        let (pf, chi) = hp.decompose(&f);
        let back: Vec<C64> = pf.iter().zip(hp.gradient(&chi)).map(|(a, b)| a + b).collect();
        assert!(dist(&back, &f) < 1e-10 * dist(&f, &vec![C64::new(0.0, 0.0); f.len()]), "{kind:?}");
        let div = hp.divergence(&pf);
        assert!(div.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-11, "{kind:?}");
        // orthogonality of the two parts in L^2
        let g = hp.gradient(&chi);
        assert!(ops.mass.bilinear(&pf, &g).norm() < 1e-10);
    }
}

#[test]
fn explicit_and_implicit_projectors_agree() {
    let (s, ops) = shared();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for flavor in [SolenoidalFlavor::L2Sigma, SolenoidalFlavor::CalL2Sigma] {
        let basis = SolenoidalBasis::new(s, ops, flavor).unwrap();
        let proj = ConstraintProjector::solenoidal(s, ops, flavor).unwrap();
        let f = random_vec(&mut rng, s.n_vel());
        let a = basis.project(&ops.mass, &f);
        let b = proj.project(&f);
        assert!(dist(&a, &b) < 1e-9 * dist(&a, &vec![C64::new(0.0, 0.0); a.len()]), "{flavor:?}");
    }
}

fn small_system() -> &'static (StokesSystem, SolenoidalBasis) {
    static CELL: OnceLock<(StokesSystem, SolenoidalBasis)> = OnceLock::new();
    CELL.get_or_init(|| {
        let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 1), BoundaryCondition::Neumann { mu: 0.0 })
            .unwrap();
        let basis = SolenoidalBasis::new(sys.space(), sys.operators(), SolenoidalFlavor::CalL2Sigma).unwrap();
        (sys, basis)
    })
}

#[test]
fn operator_norm_methods_agree() {
    let (sys, basis) = small_system();
    let res = sys.factor(C64::new(10.0, 5.0)).unwrap();
    for output in [OutputFunctional::ScaledVelocity, OutputFunctional::ScaledGradient, OutputFunctional::Pressure] {
        let spec = OperatorSpec { input: InputNorm::L2, subspace: Subspace::Explicit(basis), output };
        let dense = operator_norm(&spec, &res, None, Method::DenseEig).unwrap().value;
        let lanczos = operator_norm(&spec, &res, None, Method::Lanczos).unwrap().value;
        let power = operator_norm(&spec, &res, None, Method::PowerIteration).unwrap().value;
        assert!((lanczos - dense).abs() <= 1e-8 * dense, "{output:?}: {lanczos} vs {dense}");
        assert!((power - dense).abs() <= 1e-7 * dense, "{output:?}: {power} vs {dense}");
    }
}

#[test]
fn identity_output_has_norm_one() {
    let (sys, basis) = small_system();
    let res = sys.factor(C64::new(1.0, 0.0)).unwrap();
    let spec = OperatorSpec { input: InputNorm::L2, subspace: Subspace::Explicit(basis), output: OutputFunctional::Identity };
    let v = operator_norm(&spec, &res, None, Method::DenseEig).unwrap().value;
    assert!((v - 1.0).abs() < 1e-10);
}

fn random_orthogonal(n: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Mat::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    a.qr().compute_Q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_tolerates_small_noise(alpha in -0.5..1.0f64, c in 0.01..100.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<(f64, f64)> = power_law(alpha, c, 0.0, 4.0, 17)
            .into_iter()
            .map(|(l, n)| (l, n * (1.0 + 0.01 * (rng.random::<f64>() - 0.5))))
            .collect();
        let f = fit_decay_exponent(&s).unwrap();
        prop_assert!((f.alpha_hat - alpha).abs() <= 0.01);
    }

    #[test]
    fn lp_norm_is_a_norm(p in 1.0..6.0f64, a in -4.0..4.0f64, b in -4.0..4.0f64, seed in any::<u64>()) {
        let (s, _) = shared();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vec(&mut rng, s.n_vel());
        let v = random_vec(&mut rng, s.n_vel());
        let z = C64::new(a, b);
        let zu: Vec<C64> = u.iter().map(|x| x * z).collect();
        let nu = lp_norm(s, &u, p, None);
        prop_assert!((lp_norm(s, &zu, p, None) - z.norm() * nu).abs() <= 1e-10 * (1.0 + z.norm() * nu));
        let w: Vec<C64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
        prop_assert!(lp_norm(s, &w, p, None) <= nu + lp_norm(s, &v, p, None) + 1e-12);
        let gw = lp_norm_gradient(s, &w, p, None);
        prop_assert!(gw <= lp_norm_gradient(s, &u, p, None) + lp_norm_gradient(s, &v, p, None) + 1e-10);
    }

    #[test]
    fn operator_norm_ignores_basis_rotation(seed in any::<u64>(), re in 1.0..100.0f64, im in -50.0..50.0f64) {
        let (sys, basis) = small_system();
        let rotated = basis.rotated(&random_orthogonal(basis.dim(), seed));
        let res = sys.factor(C64::new(re, im)).unwrap();
        let norm = |b: &SolenoidalBasis| {
            let spec = OperatorSpec { input: InputNorm::L2, subspace: Subspace::Explicit(b), output: OutputFunctional::ScaledVelocity };
            operator_norm(&spec, &res, None, Method::DenseEig).unwrap().value
        };
        let (a, b) = (norm(basis), norm(&rotated));
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn projections_are_idempotent(seed in any::<u64>()) {
        let (s, ops) = shared();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vec(&mut rng, s.n_vel());
        for kind in [Projection::P, Projection::Q] {
            let hp = HelmholtzProjector::new(s, ops, kind).unwrap();
            let pf = hp.project(&f);
            let ppf = hp.project(&pf);
            prop_assert!(dist(&pf, &ppf) <= 1e-10 * (1.0 + ops.mass.quad_form(&pf).sqrt()));
        }
    }
}
