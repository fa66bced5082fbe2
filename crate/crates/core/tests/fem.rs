use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srl_core::fem::{assemble, load_vector, BoundaryCondition, Load, TaylorHood};
use srl_core::geometry::{triangulate_level, ConvexPolygon, Point};
use srl_core::quadrature::{reference_monomial, TriangleRule};
use srl_core::solver::{SectorSample, StokesSystem};
use srl_core::sparse::norm_c;
use srl_core::C64;

fn space(level: usize) -> TaylorHood {
    TaylorHood::new(triangulate_level(&ConvexPolygon::unit_square(), level))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|c| c.conj()).collect()
}

fn diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn rules_integrate_monomials() {
    for rule in [TriangleRule::dunavant4(), TriangleRule::collapsed_gauss(5)] {
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for a in 0..=rule.degree as u32 {
            for b in 0..=rule.degree as u32 - a {
                // reference triangle area 1/2
                let q: f64 = rule.bary.iter().zip(&rule.weights).map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32)).sum();
                assert!((0.5 * q - reference_monomial(a, b)).abs() < 1e-14, "x^{a} y^{b}");
            }
        }
    }
}

#[test]
fn dof_counts() {
    let s = space(2);
    let m = s.mesh();
    assert_eq!(s.n_scalar(), m.n_nodes() + m.edges().len());
    assert_eq!(s.n_vel(), 2 * s.n_scalar());
    assert_eq!(s.n_pres(), m.n_nodes());
    assert_eq!(s.vel_dof(1, 3), s.n_scalar() + 3);
}

#[test]
fn mass_integrates_constants() {
    let s = space(2);
    let ops = assemble(&s);
    let e1 = s.interpolate(|_| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert!((ops.mass.quad_form(&e1) - 1.0).abs() < 1e-13);
    let one = vec![C64::new(1.0, 0.0); s.n_pres()];
    assert!((ops.mass_pres.quad_form(&one) - 1.0).abs() < 1e-13);
    assert!(ops.pressure_mean().iter().sum::<f64>() - 1.0 < 1e-13);
}

#[test]
fn divergence_of_linear_field() {
    // div (x, y) = 2, so (1, div v) = 2 |Omega|
    let s = space(2);
    let ops = assemble(&s);
    let v = s.interpolate(|p| [C64::new(p.x, 0.0), C64::new(p.y, 0.0)]);
    let bv = ops.div.matvec_c(&v);
    let total: C64 = bv.iter().sum();
    assert!((total.re - 2.0).abs() < 1e-13);
    // Dirichlet energy of (x, y) is 2 |Omega|, transposed form the same
    assert!((ops.laplace.quad_form(&v) - 2.0).abs() < 1e-13);
    assert!((ops.cross.quad_form(&v) - 2.0).abs() < 1e-13);
}

#[test]
fn viscous_form_is_affine_in_mu() {
    let s = space(2);
    let ops = assemble(&s);
    let avg = ops.viscous(-0.5).add_scaled(&ops.viscous(0.5), 1.0).scale(0.5);
    assert!(avg.max_abs_diff(&ops.laplace) < 1e-13);
    let d = ops.viscous(1.0).add_scaled(&ops.laplace, -1.0);
    assert!(d.max_abs_diff(&ops.cross) < 1e-13);
}

#[test]
fn traction_load_of_constant_tangent() {
    // g = (1, 0) on all faces: int_boundary g . e_1 = perimeter
    let s = space(2);
    let bc = BoundaryCondition::Neumann { mu: 0.0 };
    let g = |_: Point, _: Point| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let l = load_vector(&s, Load::Boundary(&g), &bc).unwrap();
    let e1 = s.interpolate(|_| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let total: C64 = l.iter().zip(&e1).map(|(a, b)| a * b).sum();
    assert!((total.re - 4.0).abs() < 1e-13);
}

#[test]
fn parameters_are_validated() {
    assert!(BoundaryCondition::Neumann { mu: -1.0 }.validate().is_err());
    assert!(BoundaryCondition::Neumann { mu: 1.5 }.validate().is_err());
    assert!(BoundaryCondition::Neumann { mu: 1.0 }.validate().is_ok());
    assert!(SectorSample::new(1.0, 3.0, 2.0).is_err());
    assert!(SectorSample::new(0.0, 0.0, 2.0).is_err());
    // open sector |arg| < theta
    let theta = 2.0 * std::f64::consts::FRAC_PI_3;
    assert!(SectorSample::new(1.0, 2.0, theta).is_ok());
    assert!(SectorSample::new(1.0, -2.0, theta).is_ok());
    assert!(SectorSample::new(1.0, theta, theta).is_err());
    assert!(SectorSample::new(1.0, 0.0, 0.0).is_ok());
    assert!(SectorSample::new(1.0, 0.1, 0.0).is_err());
}

#[test]
fn direct_solves_have_small_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann { mu: 0.3 }] {
        let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 3), bc).unwrap();
        let load = random_vec(&mut rng, sys.n_vel());
        let sample = SectorSample::new(50.0, 1.5, 2.0 * std::f64::consts::FRAC_PI_3).unwrap();
        let sol = sys.solve(&sample, &load).unwrap();
        assert!(sol.diagnostics.momentum_residual < 1e-10, "{bc:?}");
        assert!(sol.diagnostics.divergence_residual < 1e-10 * norm_c(&sol.u).max(1.0), "{bc:?}");
        if bc.is_dirichlet() {
            let mean: C64 = sol.p.iter().zip(sys.operators().pressure_mean()).map(|(p, w)| p * w).sum();
            assert!(mean.norm() < 1e-11);
        }
    }
}

#[test]
fn zero_load_gives_zero_solution() {
    let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Dirichlet).unwrap();
    let sol = sys.factor(C64::new(3.0, 1.0)).unwrap().solve(&vec![C64::new(0.0, 0.0); sys.n_vel()]).unwrap();
    assert!(sol.u.iter().chain(&sol.p).all(|v| v.norm() == 0.0));
}

#[test]
fn factored_matrix_apply_matches_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sys = StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Dirichlet).unwrap();
    let res = sys.factor(C64::new(10.0, -4.0)).unwrap();
    let b = random_vec(&mut rng, sys.n_total());
    let x = res.solve_raw(&b);
    let back = res.apply(&x);
    assert!(diff(&back, &b) < 1e-10 * norm_c(&b));
}

fn coercivity_space() -> &'static (TaylorHood, srl_core::fem::Operators) {
    static CELL: std::sync::OnceLock<(TaylorHood, srl_core::fem::Operators)> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let s = space(2);
        let ops = assemble(&s);
        (s, ops)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traction_form_is_coercive(mu in -0.95..0.95f64, seed in any::<u64>()) {
        let (s, ops) = coercivity_space();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vec(&mut rng, s.n_vel());
        let a = ops.viscous(mu).quad_form(&u);
        let g = ops.laplace.quad_form(&u);
        prop_assert!(a >= (1.0 - mu.abs()) * g - 1e-10 * g);
    }

    #[test]
    fn solves_commute_with_conjugation(re in 0.5..200.0f64, im in -150.0..150.0f64, seed in any::<u64>()) {
        static SYS: std::sync::OnceLock<StokesSystem> = std::sync::OnceLock::new();
        let sys = SYS.get_or_init(|| {
            StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Neumann { mu: 0.2 }).unwrap()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vec(&mut rng, sys.n_vel());
        let lambda = C64::new(re, im);
        let (u, p) = sys.factor(lambda).unwrap().solve_fields(&f);
        let (uc, pc) = sys.factor(lambda.conj()).unwrap().solve_fields(&conj(&f));
        prop_assert!(diff(&uc, &conj(&u)) <= 1e-10 * norm_c(&u));
        prop_assert!(diff(&pc, &conj(&p)) <= 1e-10 * norm_c(&p).max(1e-300));
    }

    #[test]
    fn solves_are_linear(a in -3.0..3.0f64, seed in any::<u64>()) {
        static SYS: std::sync::OnceLock<StokesSystem> = std::sync::OnceLock::new();
        let sys = SYS.get_or_init(|| {
            StokesSystem::new(triangulate_level(&ConvexPolygon::unit_square(), 2), BoundaryCondition::Dirichlet).unwrap()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vec(&mut rng, sys.n_vel());
        let g = random_vec(&mut rng, sys.n_vel());
        let res = sys.factor(C64::new(5.0, 2.0)).unwrap();
        let (uf, _) = res.solve_fields(&f);
        let (ug, _) = res.solve_fields(&g);
        let h: Vec<C64> = f.iter().zip(&g).map(|(x, y)| x * a + y).collect();
        let (uh, _) = res.solve_fields(&h);
        let expect: Vec<C64> = uf.iter().zip(&ug).map(|(x, y)| x * a + y).collect();
        prop_assert!(diff(&uh, &expect) <= 1e-10 * norm_c(&expect).max(1.0));
    }
}
