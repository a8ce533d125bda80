//! Reflection-probability series, deformed-sigmoid fits, the time delay and
//! the closeness metrics used to compare mitigation methods.

pub mod fit;
pub mod series;

pub use fit::{chi2, chi2_gradient, fit_sigmoid, fit_sigmoid_data, sigmoid, t_star, time_delay, SigmoidFit, TimeDelayResult};
pub use series::{
    closeness_metrics, delta_r_series, inverse_prob_series, momentum_probs, normalize_r, normalize_r_err, Closeness,
    DeltaPoint, InverseProbPoint, ReflectionPoint, ReflectionSeries, MINUS_STATE, PLUS_STATE,
};
