//! Pressure-decay sweep on a small mesh, one thread against the rayon pool.
//!
//! `cargo bench -p srl-core` times both; with `--no-default-features` only the
//! sequential path exists.

use criterion::{criterion_group, criterion_main, Criterion};
use srl_core::experiments::{sweep_pressure_decay, FitWindow, SweepOptions};
use srl_core::fem::BoundaryCondition;
use srl_core::geometry::{triangulate_level, ConvexPolygon};
use srl_core::helmholtz::SolenoidalFlavor;
use srl_core::solver::{SectorSample, StokesSystem};
use std::hint::black_box;

fn bench_sweep(c: &mut Criterion) {
    let sys = StokesSystem::new(
        triangulate_level(&ConvexPolygon::unit_square(), 4),
        BoundaryCondition::Neumann { mu: 0.0 },
    )
    .unwrap();
    let theta = 2.0 * std::f64::consts::FRAC_PI_3;
    let samples: Vec<SectorSample> =
        (0..9).map(|k| SectorSample::new(10f64.powf(0.25 * k as f64), 0.0, theta).unwrap()).collect();
    let run = |threads| {
        let opts = SweepOptions { threads, window: FitWindow::Resolved, ..SweepOptions::default() };
        sweep_pressure_decay(&sys, "unit_square", &samples, SolenoidalFlavor::CalL2Sigma, &opts).unwrap()
    };

    let mut g = c.benchmark_group("pressure_sweep");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(run(1))));
    if srl_core::par::parallel_enabled() {
        g.bench_function("parallel", |b| b.iter(|| black_box(run(0))));
    }
    g.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
