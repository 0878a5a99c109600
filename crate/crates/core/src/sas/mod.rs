//! Spike-and-slab posteriors in the Gaussian sequence model.

pub mod posterior;
pub mod subset;

pub use posterior::{
    coordinate_moments, l_value, median_threshold, posterior_median, posterior_weight,
    sample_coordinate, CoordinatePosterior, SasPrior, SlabPosterior,
};
pub use subset::{log_esp, subset_selection_l_values, SubsetSelectionPrior};
