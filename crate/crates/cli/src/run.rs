//! Single runs: simulate, summarize, hash, persist.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use tcell_delay::integrator::LongTermClass;
use tcell_delay::model::HistoryFunction;
use tcell_delay::{
    find_equilibria, simulate, summarize_longterm, EquilibriumSet, SolverConfig, Trajectory,
};

use crate::config::ResolvedRun;
use crate::error::{CliError, CliResult};
use crate::svg::{Plot, PALETTE};

/// Classification plus summary statistics of the final window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub classification: LongTermClass,
    pub final_value: f64,
    pub amplitude: f64,
    pub period: Option<f64>,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config: ResolvedRun,
    pub outcome: Outcome,
    /// Relative to the output directory.
    pub artifact_paths: Vec<String>,
}

pub struct RunResult {
    pub record: RunRecord,
    pub trajectory: Trajectory,
    /// Equilibria of the model as configured (`mu / r` decides them).
    pub equilibria: EquilibriumSet,
}

/// First 16 hex digits of the SHA-256 of the canonical JSON form of the run.
pub fn run_id(run: &ResolvedRun) -> String {
    let bytes = serde_json::to_vec(run).expect("resolved runs serialize");
    Sha256::digest(&bytes)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn execute(run: &ResolvedRun) -> CliResult<RunResult> {
    run.validate()?;
    let params = run.params()?;
    let mut solver = SolverConfig::new(run.t_end)?;
    if let Some(h) = run.step {
        solver = solver.with_step(h)?;
    }
    let history = HistoryFunction::constant(run.history)?;
    let trajectory = simulate(&params, &run.schedule, &history, &solver)?;
    let equilibria = find_equilibria(run.scaled_mu());
    let summary = summarize_longterm(&trajectory, &equilibria, run.window)?;
    let record = RunRecord {
        run_id: run_id(run),
        config: run.clone(),
        outcome: Outcome {
            classification: summary.class,
            final_value: summary.final_value,
            amplitude: summary.amplitude,
            period: summary.period,
            clamped: trajectory.was_clamped(),
        },
        artifact_paths: Vec::new(),
    };
    Ok(RunResult {
        record,
        trajectory,
        equilibria,
    })
}

/// Writes `<run_id>/trajectory.csv` and `<run_id>/trajectory.svg` under `out_dir`.
pub fn write_artifacts(result: &mut RunResult, out_dir: &Path) -> CliResult<()> {
    let id = result.record.run_id.clone();
    let dir = out_dir.join(&id);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let csv = dir.join("trajectory.csv");
    write_file(&csv, result.trajectory.to_csv_string().as_bytes())?;
    let svg = dir.join("trajectory.svg");
    write_file(
        &svg,
        trajectory_plot(result).to_svg(800.0, 450.0).as_bytes(),
    )?;

    result.record.artifact_paths = vec![
        format!("{id}/trajectory.csv"),
        format!("{id}/trajectory.svg"),
    ];
    Ok(())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Nodes with `t >= 0` as plot points.
pub(crate) fn forward_points(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.times()
        .iter()
        .zip(traj.values())
        .filter(|(t, _)| **t >= 0.0)
        .map(|(&t, &x)| (t, x))
        .collect()
}

/// Horizontal reference lines at the equilibria.
pub(crate) fn draw_equilibria(plot: &mut Plot, eq: &EquilibriumSet) {
    plot.hline(0.0, "#555555", None);
    if let Some(xm) = eq.x_minus {
        if eq.x_star != eq.x_minus {
            plot.hline(xm, "#999999", Some(format!("x- = {xm:.4}")));
        }
    }
    if let Some(xs) = eq.x_star {
        plot.hline(xs, "#555555", Some(format!("x* = {xs:.4}")));
    }
}

fn trajectory_plot(result: &RunResult) -> Plot {
    let cfg = &result.record.config;
    let mut plot = Plot::new(format!(
        "mu = {}, r = {}, tau = {}, x0 = {}: {}",
        cfg.mu,
        cfg.r,
        cfg.tau,
        cfg.history,
        result.record.outcome.classification.as_str()
    ))
    .labels("t", "x(t)");
    draw_equilibria(&mut plot, &result.equilibria);
    let points = forward_points(&result.trajectory);
    if cfg.schedule.switch_times().is_empty() && !cfg.schedule.initial_value() {
        // no DCs at all: exact exponential decay for comparison
        let exact = points
            .iter()
            .map(|&(t, _)| (t, cfg.history * (-cfg.mu * t).exp()))
            .collect();
        plot.dashed_line(exact, PALETTE[1], Some("x0 exp(-mu t)".into()));
    }
    plot.line(points, PALETTE[0], Some("x(t)".into()));
    plot
}

#[cfg(test)]
mod tests {
    use super::*;
    use tcell_delay::DcSchedule;

    fn base() -> ResolvedRun {
        ResolvedRun {
            mu: 0.5,
            r: 1.0,
            tau: 1.0,
            schedule: DcSchedule::always_on(),
            history: 1.2,
            t_end: 200.0,
            step: None,
            window: 50.0,
        }
    }

    #[test]
    fn run_id_is_stable_and_sensitive() {
        let a = base();
        assert_eq!(run_id(&a), run_id(&a.clone()));
        assert_eq!(run_id(&a).len(), 16);
        let mut b = base();
        b.tau = 1.0 + 1e-12;
        assert_ne!(run_id(&a), run_id(&b));
    }

    #[test]
    fn locked_run() {
        let r = execute(&base()).unwrap();
        assert_eq!(
            r.record.outcome.classification,
            LongTermClass::LockedToXStar
        );
        assert!((r.record.outcome.final_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unscaled_run_uses_scaled_equilibria() {
        // r = 2, mu = 1 has the same equilibria as mu = 0.5
        let run = ResolvedRun {
            mu: 1.0,
            r: 2.0,
            tau: 0.5,
            ..base()
        };
        let r = execute(&run).unwrap();
        assert_eq!(
            r.record.outcome.classification,
            LongTermClass::LockedToXStar
        );
        assert!((r.equilibria.x_star.unwrap() - 1.0).abs() < 1e-12);
    }
}
