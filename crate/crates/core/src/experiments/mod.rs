//! Experiments: lambda sweeps with exponent fits, uniform
//! resolvent checks, identity and estimate checkers, convergence studies.

mod config;
mod grisvard;
mod h2;
mod local;
mod mms;
mod records;
mod sweep;

pub use config::{BcKind, Domain, ExperimentConfig, FitWindow, ForceSpec, LambdaGrid};
pub use grisvard::check_grisvard;
pub use h2::{check_h2_estimate, curl_force, force_frequencies, validate_h2_mu, H2Report, H2Row, H2_MU_MAX};
pub use local::{check_localized, load_support};
pub use mms::{convergence_study, ConvergenceRow, ConvergenceStudy, ManufacturedCase};
pub use records::{
    bounded_by_median, identity_csv, localized_csv, max_and_median, IdentityReport, LocalizedId,
    LocalizedReport, SweepRecord, SweepSample,
};
pub use sweep::{
    check_lemma_equivalence, check_uniform_resolvent, equivalence_gap, fit_growth_exponent, fit_samples,
    representative_matrix_field, representative_solenoidal, run_samples, sweep_pressure_decay,
    sweep_pressure_dual, DivergenceSample, DualFlavor, DualInput, EquivalenceReport, InputSpace,
    SweepOptions, SweepResult, UniformReport, UniformSample,
};
