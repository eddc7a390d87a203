use thiserror::Error;

use crate::experiments::StrategyReport;
use crate::model::Compartment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("state component {compartment} is not finite")]
    NonFiniteState { compartment: Compartment },
    #[error("state component {compartment} = {value} is negative")]
    NegativeState { compartment: Compartment, value: f64 },
    #[error("control level {0} outside [0, 1]")]
    ControlOutOfRange(f64),
    #[error("control level {0} must be finite and non-negative")]
    NegativeControl(f64),
    #[error("transition matrix is singular")]
    SingularTransition,
    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("bisection tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error("R0 = 1 is not bracketed on [{lo}, {hi}]: R0({lo}) = {r0_lo}, R0({hi}) = {r0_hi}")]
    Unbracketed { lo: f64, hi: f64, r0_lo: f64, r0_hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("time {0} is negative")]
    NegativeTime(f64),
    #[error("control level {0} outside [0, 1]")]
    InvalidLevel(f64),
    #[error("pulse period {0} must be positive")]
    InvalidPeriod(f64),
    #[error("pulse length {length} must lie in (0, {period}]")]
    InvalidPulseLength { length: f64, period: f64 },
    #[error("pulse start {0} must be non-negative")]
    InvalidStart(f64),
    #[error("piecewise schedule: {0}")]
    InvalidPiecewise(&'static str),
    #[error("horizon {0} must be positive")]
    InvalidHorizon(f64),
    #[error("cannot parse schedule descriptor `{descriptor}`: {reason}")]
    Parse { descriptor: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("horizon {0} must be positive and finite")]
    InvalidHorizon(f64),
    #[error("step {step} must lie in (0, {horizon}]")]
    InvalidStep { step: f64, horizon: f64 },
    #[error("invalid model input: {0}")]
    Model(#[from] ModelError),
    #[error("invalid schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("{compartment} fell to {value} at t = {time}")]
    Negative {
        compartment: Compartment,
        time: f64,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("trajectory grids differ; re-simulate both schedules on the merged switch-time set")]
    GridMismatch,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("no periods given")]
    NoPeriods,
    #[error("period {0} must be positive")]
    InvalidPeriod(f64),
    #[error("invalid period range [{lo}, {hi}]")]
    InvalidRange { lo: u32, hi: u32 },
    #[error("simulation of `{schedule}` failed: {source}")]
    Simulation {
        schedule: String,
        #[source]
        source: SimulationError,
    },
    #[error("no period in [{lo}, {hi}] keeps infected humans below the reference")]
    NoFeasiblePeriod {
        lo: u32,
        hi: u32,
        reports: Vec<StrategyReport>,
    },
}
