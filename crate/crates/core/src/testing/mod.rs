//! Multiple testing and classification in the sparse sequence model.

pub mod boundary;
pub mod decisions;
pub mod lower_bound;
pub mod procedures;
pub mod risk;
pub mod signal;

pub use boundary::{kappa_tau, lambda_boundary};
pub use decisions::{losses, DecisionVector, LossReport};
pub use lower_bound::{
    bayes_lower_bound_mrho, block_prior_sample, block_weights, rho_upper_limit, BlockSample,
    LowerBoundReport,
};
pub use procedures::{
    bh_from_p_values, bh_procedure, l_values, lvalue_procedure, oracle_procedure, p_values,
    q_value, PriorSource, Procedure,
};
pub use risk::{bayes_fdr_mc, risk_mc, RiskEstimate, RiskReport};
pub use signal::{PositionPolicy, SignPolicy, SignalConfig};
