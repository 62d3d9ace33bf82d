//! Completion-time moments for a preempt-repeat job on a machine whose
//! uptimes and downtimes alternate as i.i.d. sequences.
//!
//! A job needs `p` uninterrupted time units. If the machine breaks down
//! first, all work is lost and the job restarts, with a fresh requirement,
//! once the machine is repaired. [`engine`] gives the exact mean and second
//! moment of the completion time; [`simulator`] checks them by running the
//! process directly.

pub mod conditional;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod quadrature;
pub mod scenario;
pub mod simulator;

pub use conditional::{
    conditional_stats, conditional_stats_with, success_probability, ConditionalMoments,
    ConditionalOptions, Method,
};
pub use distributions::{DistributionSpec, Family};
pub use engine::{
    analyze, analyze_with, completion_variance, expected_completion,
    exponential_uptime_closed_form, instantaneous_approximation, mean_completion, second_moment,
    DowntimeMoments, EnvironmentScenario, MomentReport, Warning,
};
pub use error::{Error, Result};
pub use scenario::{parse_scenario, to_json, ScenarioError, ScenarioFile, SimulationBlock};
pub use simulator::{
    estimate_moments, event_driven_replay, path_rng, simulate_completion, Completion,
    SimulationEstimate,
};
