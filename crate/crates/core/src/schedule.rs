//! Piecewise-constant insecticide policies `t -> c(t)`.
//!
//! Every schedule is left-closed, right-open on each of its segments, so the
//! level at a switch instant is the level of the segment that begins there.

use std::fmt;
use std::str::FromStr;

use crate::error::ScheduleError;

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSchedule {
    /// No insecticide.
    Zero,
    /// The same level all day, every day.
    Constant { level: f64 },
    /// `level` during `[start + n*period, start + n*period + pulse_length)`,
    /// zero otherwise.
    Pulsed {
        period: f64,
        pulse_length: f64,
        level: f64,
        start: f64,
    },
    /// `(switch_time, level)` pairs with strictly increasing times starting at 0.
    Piecewise(Vec<(f64, f64)>),
}

/// Interval `[start, end)` over which the control is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub level: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

fn check_level(level: f64) -> Result<(), ScheduleError> {
    if (0.0..=1.0).contains(&level) {
        Ok(())
    } else {
        Err(ScheduleError::InvalidLevel(level))
    }
}

fn check_horizon(horizon: f64) -> Result<(), ScheduleError> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(ScheduleError::InvalidHorizon(horizon))
    }
}

/// Two candidate instants closer than this (relative) are the same instant.
const SAME_INSTANT: f64 = 1e-12;

impl ControlSchedule {
    pub fn constant(level: f64) -> Result<Self, ScheduleError> {
        let s = ControlSchedule::Constant { level };
        s.validate()?;
        Ok(s)
    }

    pub fn pulsed(period: f64, pulse_length: f64, level: f64, start: f64) -> Result<Self, ScheduleError> {
        let s = ControlSchedule::Pulsed {
            period,
            pulse_length,
            level,
            start,
        };
        s.validate()?;
        Ok(s)
    }

    /// Full-capacity application during one whole day every `period` days,
    /// beginning on day 0.
    pub fn daily_pulse(period: f64) -> Result<Self, ScheduleError> {
        Self::pulsed(period, 1.0, 1.0, 0.0)
    }

    pub fn piecewise(switches: Vec<(f64, f64)>) -> Result<Self, ScheduleError> {
        let s = ControlSchedule::Piecewise(switches);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        match self {
            ControlSchedule::Zero => Ok(()),
            ControlSchedule::Constant { level } => check_level(*level),
            ControlSchedule::Pulsed {
                period,
                pulse_length,
                level,
                start,
            } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(ScheduleError::InvalidPeriod(*period));
                }
                if !(pulse_length.is_finite() && *pulse_length > 0.0 && pulse_length <= period) {
                    return Err(ScheduleError::InvalidPulseLength {
                        length: *pulse_length,
                        period: *period,
                    });
                }
                if !(start.is_finite() && *start >= 0.0) {
                    return Err(ScheduleError::InvalidStart(*start));
                }
                check_level(*level)
            }
            ControlSchedule::Piecewise(switches) => {
                let Some(&(first, _)) = switches.first() else {
                    return Err(ScheduleError::InvalidPiecewise("no switches"));
                };
                if first != 0.0 {
                    return Err(ScheduleError::InvalidPiecewise("first switch time must be 0"));
                }
                if switches.iter().any(|(t, _)| !t.is_finite()) {
                    return Err(ScheduleError::InvalidPiecewise("switch times must be finite"));
                }
                if switches.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(ScheduleError::InvalidPiecewise(
                        "switch times must be strictly increasing",
                    ));
                }
                switches.iter().try_for_each(|&(_, level)| check_level(level))
            }
        }
    }

    fn level_unchecked(&self, t: f64) -> f64 {
        match self {
            ControlSchedule::Zero => 0.0,
            ControlSchedule::Constant { level } => *level,
            ControlSchedule::Pulsed {
                period,
                pulse_length,
                level,
                start,
            } => {
                if t < *start {
                    0.0
                } else if (t - start).rem_euclid(*period) < *pulse_length {
                    *level
                } else {
                    0.0
                }
            }
            ControlSchedule::Piecewise(switches) => {
                let idx = switches.partition_point(|&(s, _)| s <= t);
                switches[idx.saturating_sub(1)].1
            }
        }
    }

    /// Control level at time `t`.
    pub fn level_at(&self, t: f64) -> Result<f64, ScheduleError> {
        if t < 0.0 || t.is_nan() {
            return Err(ScheduleError::NegativeTime(t));
        }
        self.validate()?;
        Ok(self.level_unchecked(t))
    }

    fn candidate_instants(&self, horizon: f64) -> Vec<f64> {
        match self {
            ControlSchedule::Zero | ControlSchedule::Constant { .. } => Vec::new(),
            ControlSchedule::Pulsed {
                period,
                pulse_length,
                start,
                ..
            } => {
                let mut out = Vec::new();
                for n in 0u64.. {
                    let on = start + n as f64 * period;
                    if on >= horizon {
                        break;
                    }
                    out.push(on);
                    out.push(on + pulse_length);
                }
                out
            }
            ControlSchedule::Piecewise(switches) => switches.iter().map(|&(t, _)| t).collect(),
        }
    }

    /// Instants in `(0, horizon)` where the level actually changes, strictly
    /// increasing.
    pub fn switch_times(&self, horizon: f64) -> Result<Vec<f64>, ScheduleError> {
        check_horizon(horizon)?;
        self.validate()?;
        let candidates = merge_instants(&self.candidate_instants(horizon), &[], horizon);

        let mut bounds = Vec::with_capacity(candidates.len() + 2);
        bounds.push(0.0);
        bounds.extend_from_slice(&candidates);
        bounds.push(horizon);
        let levels: Vec<f64> = bounds
            .windows(2)
            .map(|w| self.level_unchecked(0.5 * (w[0] + w[1])))
            .collect();
        Ok(candidates
            .iter()
            .enumerate()
            .filter(|&(i, _)| levels[i] != levels[i + 1])
            .map(|(_, &t)| t)
            .collect())
    }

    /// Constant-control segments covering `[0, horizon]`, split at every
    /// switch time and additionally at each instant in `extra_breaks`.
    pub fn segments(&self, horizon: f64, extra_breaks: &[f64]) -> Result<Vec<Segment>, ScheduleError> {
        let switches = self.switch_times(horizon)?;
        let inner = merge_instants(&switches, extra_breaks, horizon);
        let mut bounds = Vec::with_capacity(inner.len() + 2);
        bounds.push(0.0);
        bounds.extend(inner);
        bounds.push(horizon);
        // Midpoint evaluation equals the left-closed value and is immune to
        // round-off in the modulo at the boundary itself.
        Ok(bounds
            .windows(2)
            .map(|w| Segment {
                start: w[0],
                end: w[1],
                level: self.level_unchecked(0.5 * (w[0] + w[1])),
            })
            .collect())
    }

    /// `∫_0^horizon c(t) dt`, summed exactly over the constant segments.
    pub fn total_amount(&self, horizon: f64) -> Result<f64, ScheduleError> {
        Ok(self
            .segments(horizon, &[])?
            .iter()
            .map(|s| s.level * s.duration())
            .sum())
    }
}

/// Sorted, de-duplicated union of two instant lists restricted to `(0, horizon)`.
pub fn merge_instants(a: &[f64], b: &[f64], horizon: f64) -> Vec<f64> {
    let mut all: Vec<f64> = a
        .iter()
        .chain(b)
        .copied()
        .filter(|&t| t > 0.0 && t < horizon && !same_instant(t, horizon))
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|later, earlier| same_instant(*later, *earlier));
    all
}

fn same_instant(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_INSTANT * a.abs().max(b.abs()).max(1.0)
}

impl fmt::Display for ControlSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlSchedule::Zero => f.write_str("zero"),
            ControlSchedule::Constant { level } => write!(f, "constant:{level}"),
            ControlSchedule::Pulsed {
                period,
                pulse_length,
                level,
                start,
            } => {
                write!(f, "pulsed:{period}:{pulse_length}:{level}")?;
                if *start != 0.0 {
                    write!(f, ":{start}")?;
                }
                Ok(())
            }
            ControlSchedule::Piecewise(switches) => {
                f.write_str("piecewise:")?;
                for (i, (t, level)) in switches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}={level}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ControlSchedule {
    type Err = ScheduleError;

    /// Accepts `zero`, `constant:<level>`,
    /// `pulsed:<period>[:<pulse_length>[:<level>[:<start>]]]` and
    /// `piecewise:<t0=v0,t1=v1,...>`, case-insensitively. Omitted pulse fields
    /// default to a one-day pulse at full level starting on day 0.
    fn from_str(descriptor: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| ScheduleError::Parse {
            descriptor: descriptor.to_string(),
            reason: reason.to_string(),
        };
        let number = |s: &str| -> Result<f64, ScheduleError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| fail(&format!("`{}` is not a number", s.trim())))
        };

        let lower = descriptor.trim().to_ascii_lowercase();
        let (kind, rest) = match lower.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r)),
            None => (lower.as_str(), None),
        };
        match (kind, rest) {
            ("zero", None) => Ok(ControlSchedule::Zero),
            ("constant", Some(level)) => ControlSchedule::constant(number(level)?),
            ("pulsed", Some(fields)) => {
                let fields: Vec<&str> = fields.split(':').collect();
                if fields.len() > 4 {
                    return Err(fail("pulsed takes at most period:pulse_length:level:start"));
                }
                let get = |i: usize, default: f64| fields.get(i).map_or(Ok(default), |s| number(s));
                ControlSchedule::pulsed(get(0, f64::NAN)?, get(1, 1.0)?, get(2, 1.0)?, get(3, 0.0)?)
            }
            ("piecewise", Some(pairs)) => {
                let switches = pairs
                    .split(',')
                    .map(|pair| {
                        let (t, v) = pair
                            .split_once('=')
                            .ok_or_else(|| fail("expected <time>=<level> pairs"))?;
                        Ok((number(t)?, number(v)?))
                    })
                    .collect::<Result<Vec<_>, ScheduleError>>()?;
                ControlSchedule::piecewise(switches)
            }
            _ => Err(fail(
                "expected zero, constant:<level>, pulsed:<period>:<pulse_length>:<level> or piecewise:<t=v,...>",
            )),
        }
    }
}
