//! Strategy metrics, dominance against the constant-control reference, and
//! pulse-period sweeps.

use rayon::prelude::*;

use crate::error::ExperimentError;
use crate::integrator::{simulate, simulate_with_breaks, Trajectory};
use crate::model::{Compartment, ModelParameters, StateVector};
use crate::schedule::ControlSchedule;

/// Lowest constant insecticide level known to keep R0 below one at the
/// outbreak parameters; the feasibility reference for pulsed strategies.
pub const REFERENCE_LEVEL: f64 = 0.084;

/// Summary of one simulated strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyReport {
    /// Schedule descriptor, e.g. `pulsed:7:1:1`.
    pub schedule: String,
    pub peak_infected_humans: f64,
    pub peak_infected_humans_time: f64,
    pub peak_infected_mosquitoes: f64,
    pub peak_infected_mosquitoes_time: f64,
    /// `∫ nu_h E_h dt` over the horizon.
    pub cumulative_human_infections: f64,
    pub insecticide_amount: f64,
    /// Set by comparisons against a reference; `None` from [`metrics`] alone.
    pub feasible_vs_reference: Option<bool>,
}

/// Grid maximum of one compartment; the earliest time wins ties.
fn peak(trajectory: &Trajectory, compartment: Compartment) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (state, &t) in trajectory.states().iter().zip(trajectory.times()) {
        let value = state.clamped().get(compartment);
        if value > best.0 {
            best = (value, t);
        }
    }
    best
}

pub fn metrics(trajectory: &Trajectory) -> Result<StrategyReport, ExperimentError> {
    if trajectory.is_empty() {
        return Err(ExperimentError::EmptyTrajectory);
    }
    let (peak_ih, t_ih) = peak(trajectory, Compartment::InfectedHumans);
    let (peak_im, t_im) = peak(trajectory, Compartment::InfectedMosquitoes);

    let incubation = trajectory.params().human_incubation;
    let incidence = |s: &StateVector| incubation * s.clamped().exposed_humans;
    let cumulative = trajectory
        .times()
        .windows(2)
        .zip(trajectory.states().windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (incidence(&s[0]) + incidence(&s[1])))
        .sum();

    let schedule = trajectory.schedule();
    let amount = schedule
        .total_amount(trajectory.horizon())
        .expect("schedule was validated by the simulation");

    Ok(StrategyReport {
        schedule: schedule.to_string(),
        peak_infected_humans: peak_ih,
        peak_infected_humans_time: t_ih,
        peak_infected_mosquitoes: peak_im,
        peak_infected_mosquitoes_time: t_im,
        cumulative_human_infections: cumulative,
        insecticide_amount: amount,
        feasible_vs_reference: None,
    })
}

/// True when `candidate` never exceeds `reference` in `component` at any
/// grid point. Both trajectories must share one time grid.
pub fn dominates(
    candidate: &Trajectory,
    reference: &Trajectory,
    component: Compartment,
) -> Result<bool, ExperimentError> {
    if candidate.times() != reference.times() {
        return Err(ExperimentError::GridMismatch);
    }
    Ok(candidate
        .states()
        .iter()
        .zip(reference.states())
        .all(|(c, r)| c.get(component) <= r.get(component)))
}

/// Result of a period sweep, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub entries: Vec<(f64, StrategyReport)>,
    pub reference: StrategyReport,
}

/// A fixed scenario against which strategies are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub params: ModelParameters,
    pub initial: StateVector,
    pub horizon: f64,
    pub step: f64,
    pub reference: ControlSchedule,
}

impl Experiment {
    /// Experiment with the constant [`REFERENCE_LEVEL`] reference.
    pub fn new(params: ModelParameters, initial: StateVector, horizon: f64, step: f64) -> Self {
        Self {
            params,
            initial,
            horizon,
            step,
            reference: ControlSchedule::Constant { level: REFERENCE_LEVEL },
        }
    }

    pub fn with_reference(mut self, reference: ControlSchedule) -> Self {
        self.reference = reference;
        self
    }

    fn run(&self, schedule: &ControlSchedule, breaks: &[f64]) -> Result<Trajectory, ExperimentError> {
        simulate_with_breaks(&self.params, &self.initial, schedule, self.horizon, self.step, breaks).map_err(|source| {
            ExperimentError::Simulation {
                schedule: schedule.to_string(),
                source,
            }
        })
    }

    pub fn simulate(&self, schedule: &ControlSchedule) -> Result<Trajectory, ExperimentError> {
        simulate(&self.params, &self.initial, schedule, self.horizon, self.step).map_err(|source| {
            ExperimentError::Simulation {
                schedule: schedule.to_string(),
                source,
            }
        })
    }

    /// Simulates `candidate` and the reference on the union of their switch
    /// times so the two grids coincide.
    pub fn simulate_pair(&self, candidate: &ControlSchedule) -> Result<(Trajectory, Trajectory), ExperimentError> {
        let switches = |s: &ControlSchedule| {
            s.switch_times(self.horizon).map_err(|e| ExperimentError::Simulation {
                schedule: s.to_string(),
                source: e.into(),
            })
        };
        let candidate_switches = switches(candidate)?;
        let reference_switches = switches(&self.reference)?;
        let (a, b) = rayon::join(
            || self.run(candidate, &reference_switches),
            || self.run(&self.reference, &candidate_switches),
        );
        Ok((a?, b?))
    }

    /// Report for `candidate` with its feasibility against the reference on
    /// infected humans.
    pub fn compare(&self, candidate: &ControlSchedule) -> Result<StrategyReport, ExperimentError> {
        let (cand, reference) = self.simulate_pair(candidate)?;
        let mut report = metrics(&cand)?;
        report.feasible_vs_reference = Some(dominates(&cand, &reference, Compartment::InfectedHumans)?);
        Ok(report)
    }

    pub fn reference_report(&self) -> Result<StrategyReport, ExperimentError> {
        let traj = self.simulate(&self.reference)?;
        let mut report = metrics(&traj)?;
        report.feasible_vs_reference = Some(true);
        Ok(report)
    }

    /// One-day full-capacity pulses every `period` days, for each period.
    pub fn sweep_periods(&self, periods: &[f64]) -> Result<SweepResult, ExperimentError> {
        if periods.is_empty() {
            return Err(ExperimentError::NoPeriods);
        }
        if let Some(&bad) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(ExperimentError::InvalidPeriod(bad));
        }
        let entries = periods
            .par_iter()
            .map(|&period| {
                let schedule = ControlSchedule::daily_pulse(period).map_err(|e| ExperimentError::Simulation {
                    schedule: format!("pulsed:{period}"),
                    source: e.into(),
                })?;
                Ok((period, self.compare(&schedule)?))
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        Ok(SweepResult {
            entries,
            reference: self.reference_report()?,
        })
    }

    /// Largest integer period in `[lo, hi]` whose pulses keep infected
    /// humans at or below the reference curve; larger periods use less
    /// insecticide.
    pub fn find_best_period(&self, lo: u32, hi: u32) -> Result<(u32, StrategyReport), ExperimentError> {
        if lo < 1 || lo > hi {
            return Err(ExperimentError::InvalidRange { lo, hi });
        }
        let periods: Vec<f64> = (lo..=hi).map(f64::from).collect();
        let sweep = self.sweep_periods(&periods)?;
        let best = sweep
            .entries
            .iter()
            .rev()
            .find(|(_, r)| r.feasible_vs_reference == Some(true))
            .map(|(p, r)| (*p as u32, r.clone()));
        best.ok_or_else(|| ExperimentError::NoFeasiblePeriod {
            lo,
            hi,
            reports: sweep.entries.into_iter().map(|(_, r)| r).collect(),
        })
    }
}
