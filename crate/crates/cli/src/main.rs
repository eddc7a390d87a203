//! `dengue`: simulate insecticide strategies, sweep pulse periods, query R0.
//!
//! Exit status: 0 on success, 1 on numerical failure, 2 on usage or
//! configuration errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dengue_core::config::{load_config, parse_assignment, ScenarioConfig};
use dengue_core::experiments::{metrics, Experiment};
use dengue_core::output::{
    default_stride, plot_script, reference_label, summary_line, write_r0_csv, write_sweep_csv, write_trajectory_csv,
    PlotKind,
};
use dengue_core::{compute_r0, r0_threshold, simulate, ControlSchedule, ExperimentError, REFERENCE_LEVEL};

#[derive(Debug, Parser)]
#[command(name = "dengue", version, about = "Dengue transmission under insecticide control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one scenario key; repeatable, applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Control schedule descriptor, e.g. `pulsed:7:1:1` or `constant:0.084`.
    #[arg(long)]
    schedule: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step in days.
    #[arg(long)]
    step: Option<String>,
    /// Simulated horizon in days.
    #[arg(long)]
    horizon: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one schedule and write the trajectory as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Emit every n-th integration step (default: one row per 0.1 day).
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Compare one-day pulses at several periods against the constant reference.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated periods in days.
        #[arg(long, value_parser = parse_periods, default_value = "7,11,12,15,30")]
        periods: NumberList,
        /// Constant reference level.
        #[arg(long, default_value_t = REFERENCE_LEVEL)]
        reference: f64,
    },
    /// Largest integer period whose pulses stay below the constant reference.
    FindPeriod {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        lo: u32,
        #[arg(long, default_value_t = 30)]
        hi: u32,
        #[arg(long, default_value_t = REFERENCE_LEVEL)]
        reference: f64,
    },
    /// Basic reproduction number at constant control levels.
    R0 {
        #[command(flatten)]
        common: Common,
        /// Comma-separated control levels.
        #[arg(long = "c", value_parser = parse_levels)]
        levels: Option<NumberList>,
        /// Also locate the level where R0 = 1 on [0, 1].
        #[arg(long)]
        threshold: bool,
        /// Bracket width at which the threshold search stops.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Print a gnuplot script for a CSV written by `simulate` or `sweep`.
    PlotScript {
        #[command(flatten)]
        common: Common,
        /// CSV file the script plots.
        #[arg(long, default_value = "trajectory.csv")]
        csv: String,
        #[arg(long, value_enum, default_value_t = Kind::Trajectory)]
        kind: Kind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Trajectory,
    Sweep,
}

#[derive(Debug, Clone)]
struct NumberList(Vec<f64>);

fn parse_list(text: &str, allow_zero: bool) -> Result<NumberList, String> {
    text.split(',')
        .map(|tok| {
            let v: f64 = tok.trim().parse().map_err(|_| format!("`{tok}` is not a number"))?;
            if !v.is_finite() || v < 0.0 || (!allow_zero && v == 0.0) {
                return Err(format!("`{tok}` is out of range"));
            }
            Ok(v)
        })
        .collect::<Result<_, _>>()
        .map(NumberList)
}

fn parse_periods(text: &str) -> Result<NumberList, String> {
    parse_list(text, false)
}

fn parse_levels(text: &str) -> Result<NumberList, String> {
    parse_list(text, true)
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig, Failure> {
        let mut overrides = self
            .set
            .iter()
            .map(|s| parse_assignment(s).map_err(usage))
            .collect::<Result<Vec<_>, _>>()?;
        for (key, value) in [
            ("schedule", &self.schedule),
            ("step", &self.step),
            ("horizon", &self.horizon),
        ] {
            if let Some(v) = value {
                overrides.push((key.to_string(), v.clone()));
            }
        }
        load_config(self.config.as_deref(), &overrides).map_err(usage)
    }

    fn writer(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn experiment(cfg: &ScenarioConfig, reference: f64) -> Result<Experiment, Failure> {
    let reference = ControlSchedule::constant(reference).map_err(usage)?;
    Ok(Experiment::new(cfg.params, cfg.initial, cfg.horizon, cfg.step).with_reference(reference))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, stride } => {
            let cfg = common.scenario()?;
            let traj = simulate(&cfg.params, &cfg.initial, &cfg.schedule, cfg.horizon, cfg.step).map_err(numerical)?;
            let mut out = common.writer()?;
            write_trajectory_csv(&mut out, &traj, stride.unwrap_or_else(|| default_stride(cfg.step)))?;
            out.flush()?;
            let report = metrics(&traj).map_err(numerical)?;
            eprintln!("{}", summary_line(&report));
        }
        Command::Sweep {
            common,
            periods,
            reference,
        } => {
            let cfg = common.scenario()?;
            let exp = experiment(&cfg, reference)?;
            let sweep = exp.sweep_periods(&periods.0).map_err(numerical)?;
            let mut out = common.writer()?;
            write_sweep_csv(&mut out, &sweep, &exp.reference)?;
            out.flush()?;
        }
        Command::FindPeriod {
            common,
            lo,
            hi,
            reference,
        } => {
            let cfg = common.scenario()?;
            let exp = experiment(&cfg, reference)?;
            match exp.find_best_period(lo, hi) {
                Ok((period, report)) => {
                    let mut out = common.writer()?;
                    writeln!(
                        out,
                        "best_period,insecticide_amount,peak_I_h,t_peak_I_h,peak_I_m,cumulative_infections"
                    )?;
                    writeln!(
                        out,
                        "{period},{},{},{},{},{}",
                        report.insecticide_amount,
                        report.peak_infected_humans,
                        report.peak_infected_humans_time,
                        report.peak_infected_mosquitoes,
                        report.cumulative_human_infections
                    )?;
                    out.flush()?;
                }
                Err(ExperimentError::NoFeasiblePeriod { reports, .. }) => {
                    for r in &reports {
                        eprintln!("{}", summary_line(r));
                    }
                    return Err(Failure::Numerical(format!(
                        "no period in [{lo}, {hi}] stays below {}",
                        reference_label(&exp.reference)
                    )));
                }
                Err(ExperimentError::InvalidRange { lo, hi }) => {
                    return Err(Failure::Usage(format!("invalid period range [{lo}, {hi}]")))
                }
                Err(e) => return Err(numerical(e)),
            }
        }
        Command::R0 {
            common,
            levels,
            threshold,
            tolerance,
        } => {
            let cfg = common.scenario()?;
            let levels = match (levels, threshold) {
                (Some(l), _) => l.0,
                (None, false) => vec![0.0, REFERENCE_LEVEL],
                (None, true) => Vec::new(),
            };
            let rows = levels
                .iter()
                .map(|&c| compute_r0(&cfg.params, c).map(|r| (c, r)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(numerical)?;
            let mut out = common.writer()?;
            if !rows.is_empty() {
                write_r0_csv(&mut out, &rows)?;
            }
            if threshold {
                let c_star = r0_threshold(&cfg.params, 0.0, 1.0, tolerance).map_err(numerical)?;
                let r0 = compute_r0(&cfg.params, c_star).map_err(numerical)?;
                writeln!(out, "c_star,R0")?;
                writeln!(out, "{c_star},{r0}")?;
            }
            out.flush()?;
        }
        Command::PlotScript { common, csv, kind } => {
            let kind = match kind {
                Kind::Trajectory => PlotKind::Trajectory,
                Kind::Sweep => PlotKind::Sweep,
            };
            let mut out = common.writer()?;
            out.write_all(plot_script(&csv, kind).as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
