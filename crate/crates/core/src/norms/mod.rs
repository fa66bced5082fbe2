//! Integral norms, discrete dual norms, operator norms and decay fits.

mod dual;
mod fit;
mod lp;
mod opnorm;

pub use dual::{DualKind, DualNorm};
pub use fit::{fit_decay_exponent, DecayFit, MIN_DECADES, MIN_SAMPLES};
pub use lp::{
    broken_h2_seminorm, integrate, lp_norm, lp_norm_callable, lp_norm_gradient, lp_norm_pressure,
    pressure_gradient_norm, Region,
};
pub use opnorm::{
    operator_norm, InputNorm, Method, NormalOperator, OperatorNorm, OperatorSpec, OutputFunctional,
    Subspace, POWER_MAX_ITER, POWER_TOL, SEED,
};
