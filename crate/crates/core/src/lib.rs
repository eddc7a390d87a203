//! Dengue human–mosquito transmission with adult-mosquito insecticide control.
//!
//! * [`model`]: compartments, right-hand side, disease-free equilibrium, R0.
//! * [`schedule`]: piecewise-constant insecticide policies and their cost.
//! * [`integrator`]: event-aligned fixed-step RK4.
//! * [`experiments`]: strategy metrics, dominance, period sweeps.
//! * [`config`] and [`output`]: scenario files and CSV emission.

pub mod config;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod model;
pub mod output;
pub mod schedule;

pub use config::{load_config, ConfigError, ScenarioConfig};
pub use error::{ExperimentError, ModelError, ScheduleError, SimulationError};
pub use experiments::{dominates, metrics, Experiment, StrategyReport, SweepResult, REFERENCE_LEVEL};
pub use integrator::{rk4_step, simulate, simulate_with_breaks, Trajectory, DEFAULT_STEP};
pub use model::{
    compute_r0, derivative, dfe, human_total, r0_threshold, Compartment, DfeState, ModelParameters, StateVector,
};
pub use schedule::ControlSchedule;
