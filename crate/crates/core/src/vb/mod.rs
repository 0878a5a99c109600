//! Mean-field spike-and-slab variational Bayes for sparse linear
//! regression `Y = Xθ + ε`, `ε ~ N(0, I)`.

pub mod cavi;
pub mod design;
pub mod oracle;
pub mod prior;
pub mod state;

pub use cavi::{cavi_fit, optimize_slab, ridge, screening_init, InitPolicy};
pub use design::{generate_design, Design, RegressionInstance};
pub use oracle::{enumeration_oracle, OracleOptions, OracleResult};
pub use prior::RegressionPrior;
pub use state::{
    elbo, elbo_parts, gaussian_abs_mean, kl_upper_bound, poisson_binomial_pmf, ElboParts,
    MeanFieldState,
};
