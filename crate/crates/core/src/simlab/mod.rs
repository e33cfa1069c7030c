//! Simulated data: covariate processes, the nine scenarios of the simulation
//! study and the Monte Carlo harness that estimates sizes and powers.

pub mod process;
pub mod scenario;
pub mod study;

pub use process::{brownian_path, gen_process, ou_path, ProcessKind, HHN_TERMS};
pub use scenario::{
    deviation, gen_response, gen_response_with_noise, noise_variance, rho_curve, scenario,
    scenario_on_grid, signal_variance, Deviation, DeviationTerm, ScenarioSpec,
};
pub use study::{
    fdr_discretization_experiment, parse_scenario, run_study, FdrRow, MonteCarloResult,
    StudyConfig, trial_data, trial_test_seed, ALPHAS,
};
