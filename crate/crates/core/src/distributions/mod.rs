//! Noise and slab densities, the Gaussian–slab convolution, quadrature and
//! divergence utilities.

pub mod divergence;
pub mod marginal;
pub mod noise;
pub mod quadrature;
pub mod slab;

pub use divergence::{l1_distance_numeric, renyi_gaussian, renyi_numeric, GridDensity};
pub use marginal::{marginal_g, ConvolvedMarginal};
pub use noise::{oracle_threshold, NoiseModel};
pub use slab::SlabSpec;
