//! Monte Carlo estimators for the quantities that control the error of the
//! schemes near the discontinuity, and a sampled assumption checker.

mod assumptions;
mod fit;
mod lambda;
mod moments;
mod occupation;

pub use assumptions::{check_assumptions, AssumptionItem, AssumptionReport};
pub use fit::{least_squares_slope, mean_and_std_error};
pub use lambda::{lambda_d1, lambda_d2, lambda_map};
pub use moments::{excursion_prob, excursion_profile, one_step_moment, ExcursionStats, MomentEstimate, SUBSTEPS};
pub use occupation::{brownian_occupation_expectation, local_time_estimate, occupation_time, OccupationStats};
