//! CSV writers and plotting helpers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, which is
//! plain decimal and reproduces every `f64` exactly when parsed back.

use std::io::{self, Write};

use crate::experiments::{StrategyReport, SweepResult};
use crate::integrator::Trajectory;
use crate::model::Compartment;
use crate::schedule::ControlSchedule;

pub const TRAJECTORY_HEADER: &str = "t,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m,c";
pub const SWEEP_HEADER: &str = "period,insecticide_amount,peak_I_h,t_peak_I_h,peak_I_m,cumulative_infections,feasible";
pub const R0_HEADER: &str = "c,R0";

/// Output spacing in days used when no stride is requested.
pub const DEFAULT_OUTPUT_INTERVAL: f64 = 0.1;

/// Number of integration steps between emitted rows so rows are
/// `DEFAULT_OUTPUT_INTERVAL` apart.
pub fn default_stride(step: f64) -> usize {
    ((DEFAULT_OUTPUT_INTERVAL / step).round() as usize).max(1)
}

/// Writes every `stride`-th grid point plus the final one. States are
/// clamped at zero.
pub fn write_trajectory_csv<W: Write>(out: &mut W, trajectory: &Trajectory, stride: usize) -> io::Result<()> {
    let stride = stride.max(1);
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    let last = trajectory.len() - 1;
    for i in (0..=last).filter(|&i| i % stride == 0 || i == last) {
        write!(out, "{}", trajectory.times()[i])?;
        for value in trajectory.output_state(i).to_array() {
            write!(out, ",{value}")?;
        }
        writeln!(out, ",{}", trajectory.levels()[i])?;
    }
    Ok(())
}

fn feasible_cell(report: &StrategyReport) -> &'static str {
    match report.feasible_vs_reference {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

fn sweep_row<W: Write>(out: &mut W, label: &str, r: &StrategyReport) -> io::Result<()> {
    writeln!(
        out,
        "{label},{},{},{},{},{},{}",
        r.insecticide_amount,
        r.peak_infected_humans,
        r.peak_infected_humans_time,
        r.peak_infected_mosquitoes,
        r.cumulative_human_infections,
        feasible_cell(r)
    )
}

/// Row label of the reference strategy, e.g. `constant_0.084`.
pub fn reference_label(reference: &ControlSchedule) -> String {
    match reference {
        ControlSchedule::Constant { level } => format!("constant_{level}"),
        other => other.to_string(),
    }
}

pub fn write_sweep_csv<W: Write>(out: &mut W, sweep: &SweepResult, reference: &ControlSchedule) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for (period, report) in &sweep.entries {
        sweep_row(out, &period.to_string(), report)?;
    }
    sweep_row(out, &reference_label(reference), &sweep.reference)
}

pub fn write_r0_csv<W: Write>(out: &mut W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "{R0_HEADER}")?;
    for (c, r0) in rows {
        writeln!(out, "{c},{r0}")?;
    }
    Ok(())
}

/// One-line `key=value` rendering of a report.
pub fn summary_line(r: &StrategyReport) -> String {
    let mut line = format!(
        "schedule={} peak_I_h={} t_peak_I_h={} peak_I_m={} t_peak_I_m={} cumulative_infections={} insecticide_amount={}",
        r.schedule,
        r.peak_infected_humans,
        r.peak_infected_humans_time,
        r.peak_infected_mosquitoes,
        r.peak_infected_mosquitoes_time,
        r.cumulative_human_infections,
        r.insecticide_amount
    );
    if let Some(f) = r.feasible_vs_reference {
        line.push_str(&format!(" feasible={f}"));
    }
    line
}

/// Which CSV layout a plotting script reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectory,
    Sweep,
}

/// Gnuplot script drawing the infected curves of a trajectory CSV, or peak
/// infections against period for a sweep CSV.
pub fn plot_script(csv_path: &str, kind: PlotKind) -> String {
    match kind {
        PlotKind::Trajectory => {
            let col = |c: Compartment| c.index() + 2;
            format!(
                "# columns: {TRAJECTORY_HEADER}\n\
                 set datafile separator ','\n\
                 set key autotitle columnhead\n\
                 set xlabel 'days'\n\
                 set multiplot layout 2,1\n\
                 set ylabel 'infected humans'\n\
                 plot '{csv_path}' using 1:{} with lines\n\
                 set ylabel 'infected mosquitoes'\n\
                 plot '{csv_path}' using 1:{} with lines\n\
                 unset multiplot\n",
                col(Compartment::InfectedHumans),
                col(Compartment::InfectedMosquitoes),
            )
        }
        PlotKind::Sweep => format!(
            "# columns: {SWEEP_HEADER}\n\
             set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'period (days)'\n\
             set ylabel 'peak infected humans'\n\
             plot '{csv_path}' using 1:3 with linespoints\n"
        ),
    }
}
