//! Cycle-level Pauli noise simulation with randomized compiling (RC),
//! readout calibration (RCAL) and noise-amplified extrapolation (NOX), plus
//! the Trotterized Ising scattering analysis built on top of them.

pub mod analysis;
pub mod builders;
pub mod channel;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod mitigation;
pub mod noise;
pub mod outcome;
pub mod pauli;
pub mod pipeline;
pub mod readout;
pub mod rng;
pub mod sim;

pub use analysis::{
    closeness_metrics, fit_sigmoid, momentum_probs, normalize_r, t_star, time_delay, ReflectionSeries, SigmoidFit,
    TimeDelayResult,
};
pub use channel::{ChannelSampler, PauliChannel, PauliFidelities};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
pub use builders::{
    build_qftr_measurement, build_scattering_circuit, build_state_prep, build_trotter_step, u_gate, PrepSpec,
    ScatteringParams,
};
pub use circuit::{Angle, Axis, Circuit, Cycle, CycleKind, Gate};
pub use noise::{AmplifiedSpan, NoiseConfig, NoiseContext, NoiseModel};
pub use outcome::OutcomeDistribution;
pub use readout::{apply_readout_noise, ConfusionMatrix};
pub use sim::{ideal_distribution, simulate_exact, simulate_exact_with, simulate_trajectories, DensityMatrix, StateVector};
pub use mitigation::{
    estimate_observable, gamma_diagnostic, nox_combine, nox_family, rc_compile, rcal_circuits, rcal_estimate,
    rcal_invert, systematic_bound, Estimate, MitigatedEstimate, Method, NoxFamily, Observable, RcEnsemble,
};
