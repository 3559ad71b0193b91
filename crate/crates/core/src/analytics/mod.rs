//! Line-network analytics: closed forms, waiting-time recursions, the
//! windowed norm family and Monte-Carlo rate curves.

mod closed_form;
mod norm;
mod rate;
mod waiting;

pub use closed_form::{
    expected_generation_time, expected_swap_position, inclusion_exclusion, tail_sum, CROSS_CHECK_TOLERANCE,
};
pub use norm::{matrix_norm, theta};
pub use rate::{estimate_rates, run_trial, sample_delivery_trajectory, RateCurves, Trial};
pub use waiting::{
    sample_generation_matrix, spectrum, waiting_time_k_opportunistic, waiting_time_lower_bound,
    waiting_time_nonopportunistic, waiting_time_opportunistic, waiting_time_search_depth, GenerationMatrix, Spectrum,
};
