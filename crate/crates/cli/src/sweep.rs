//! (mu, tau, history) grids run in parallel, written as a sorted CSV, a heatmap and records.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tcell_delay::stability::upper_dominant_root;
use tcell_delay::{existence_window, switching_times, DcSchedule};

use crate::config::{bad, positive, Overrides, ResolvedRun};
use crate::error::{CliError, CliResult};
use crate::run::{execute, run_id, write_artifacts, write_file, RunRecord};
use crate::svg::{self, Plot};

pub const DEFAULT_MU_RANGE: (f64, f64, usize) = (0.3, 0.55, 6);
pub const DEFAULT_TAU_RANGE: (f64, f64, usize) = (0.0, 12.0, 25);
pub const DEFAULT_HISTORIES: [f64; 1] = [1.2];
pub const DEFAULT_SWEEP_T_END: f64 = 1000.0;

pub const CSV_HEADER: &str = "mu,tau,history,classification,dominant_root_re,analytic_tau0";

/// Grid description. Each axis is given either as `[lo, hi, count]` (inclusive, evenly spaced)
/// or as an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub mu_range: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub mu_values: Option<Vec<f64>>,
    #[serde(default)]
    pub tau_range: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub tau_values: Option<Vec<f64>>,
    #[serde(default = "default_histories")]
    pub history_values: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default)]
    pub schedule: DcSchedule,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub window: Option<f64>,
    /// Overridden by `--output`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Also write `<run_id>/trajectory.{csv,svg}` for every cell.
    #[serde(default)]
    pub write_trajectories: bool,
}

fn default_histories() -> Vec<f64> {
    DEFAULT_HISTORIES.to_vec()
}

fn default_t_end() -> f64 {
    DEFAULT_SWEEP_T_END
}

fn one() -> f64 {
    1.0
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            mu_range: Some(DEFAULT_MU_RANGE),
            mu_values: None,
            tau_range: Some(DEFAULT_TAU_RANGE),
            tau_values: None,
            history_values: default_histories(),
            t_end: DEFAULT_SWEEP_T_END,
            r: 1.0,
            schedule: DcSchedule::always_on(),
            step: None,
            window: None,
            output_dir: None,
            write_trajectories: false,
        }
    }
}

fn axis(
    name: &str,
    range: Option<(f64, f64, usize)>,
    values: &Option<Vec<f64>>,
) -> CliResult<Vec<f64>> {
    let mut out = match (range, values) {
        (Some(_), Some(_)) => {
            return Err(CliError::invalid(format!(
                "give only one of `{name}_range` and `{name}_values`"
            )))
        }
        (None, None) => {
            return Err(CliError::invalid(format!(
                "missing `{name}_range` or `{name}_values`"
            )))
        }
        (Some((lo, hi, count)), None) => {
            if count < 1 {
                return Err(CliError::invalid(format!(
                    "`{name}_range` count must be >= 1"
                )));
            }
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CliError::invalid(format!(
                    "`{name}_range` needs finite lo <= hi"
                )));
            }
            if count == 1 {
                vec![lo]
            } else {
                (0..count)
                    .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                    .collect()
            }
        }
        (None, Some(v)) => {
            if v.is_empty() {
                return Err(CliError::invalid(format!(
                    "`{name}_values` must not be empty"
                )));
            }
            v.clone()
        }
    };
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

impl SweepSpec {
    pub fn mu_axis(&self) -> CliResult<Vec<f64>> {
        axis("mu", self.mu_range, &self.mu_values)
    }

    pub fn tau_axis(&self) -> CliResult<Vec<f64>> {
        axis("tau", self.tau_range, &self.tau_values)
    }

    pub fn history_axis(&self) -> CliResult<Vec<f64>> {
        let mut h = self.history_values.clone();
        if h.is_empty() {
            return Err(CliError::invalid("`history_values` must not be empty"));
        }
        h.sort_by(f64::total_cmp);
        h.dedup();
        Ok(h)
    }

    /// Every cell of the grid in (mu, tau, history) order, overrides applied.
    pub fn runs(&self, overrides: Overrides) -> CliResult<Vec<ResolvedRun>> {
        positive("r", self.r)?;
        let (_, upper) = existence_window::<f64>();
        let mus = self.mu_axis()?;
        for &mu in &mus {
            if !(mu > 0.0 && mu / self.r < upper) {
                return Err(bad(
                    "mu_range",
                    mu,
                    "mu / r must lie inside the existence window (0, 3^(3/4)/4)",
                ));
            }
        }
        let taus = self.tau_axis()?;
        let histories = self.history_axis()?;
        let t_end = overrides.t_end.unwrap_or(self.t_end);
        positive("t_end", t_end)?;
        let mut runs = Vec::with_capacity(mus.len() * taus.len() * histories.len());
        for &mu in &mus {
            for &tau in &taus {
                for &history in &histories {
                    let run = ResolvedRun {
                        mu,
                        r: self.r,
                        tau,
                        schedule: self.schedule.clone(),
                        history,
                        t_end,
                        step: overrides.step.or(self.step),
                        window: self.window.unwrap_or(t_end / 4.0),
                    };
                    run.validate()?;
                    runs.push(run);
                }
            }
        }
        Ok(runs)
    }
}

/// One row of `sweep.csv` together with the full record (or the error) behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub mu: f64,
    pub tau: f64,
    pub history: f64,
    pub classification: String,
    /// Real part of the rightmost characteristic root at `x*`, in the configured time units.
    pub dominant_root_re: Option<f64>,
    /// First delay at which `x*` can lose stability, in the configured time units.
    pub analytic_tau0: Option<f64>,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.mu,
            self.tau,
            self.history,
            self.classification,
            opt(self.dominant_root_re),
            opt(self.analytic_tau0)
        )
    }
}

pub fn run_cell(run: &ResolvedRun, out_dir: Option<&Path>) -> CellResult {
    let analytic_tau0 = switching_times(run.scaled_mu(), 0)
        .ok()
        .map(|s| s.taus[0] / run.r);
    let dominant = upper_dominant_root(run.scaled_mu(), run.scaled_tau());
    let mut cell = CellResult {
        mu: run.mu,
        tau: run.tau,
        history: run.history,
        classification: "error".to_string(),
        dominant_root_re: dominant.as_ref().ok().map(|root| root.real_part * run.r),
        analytic_tau0,
        record: None,
        error: dominant.err().map(|e| e.to_string()),
    };
    let result = execute(run).and_then(|mut res| {
        if let Some(dir) = out_dir {
            write_artifacts(&mut res, dir)?;
        }
        Ok(res)
    });
    match result {
        Ok(res) => {
            cell.classification = res.record.outcome.classification.as_str().to_string();
            cell.record = Some(res.record);
        }
        Err(e) => {
            cell.classification = "error".to_string();
            cell.error = Some(format!("run {}: {e}", run_id(run)));
        }
    }
    cell
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub errors: usize,
    pub counts: std::collections::BTreeMap<String, usize>,
    pub artifact_paths: Vec<String>,
}

/// Runs the grid on `jobs` threads (0 = all cores) and writes `sweep.csv`, `sweep.svg` and
/// `records.json` into `out_dir`.
pub fn run_sweep(
    spec: &SweepSpec,
    overrides: Overrides,
    jobs: usize,
    out_dir: &Path,
) -> CliResult<(SweepSummary, Vec<CellResult>)> {
    let runs = spec.runs(overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let traj_dir = spec.write_trajectories.then_some(out_dir);
    let mut cells: Vec<CellResult> =
        pool.install(|| runs.par_iter().map(|r| run_cell(r, traj_dir)).collect());
    cells.sort_by(|a, b| {
        a.mu.total_cmp(&b.mu)
            .then(a.tau.total_cmp(&b.tau))
            .then(a.history.total_cmp(&b.history))
    });

    write_file(&out_dir.join("sweep.csv"), sweep_csv(&cells).as_bytes())?;
    write_file(&out_dir.join("sweep.svg"), heatmap(spec, &cells).as_bytes())?;
    let records =
        serde_json::to_string_pretty(&cells).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&out_dir.join("records.json"), records.as_bytes())?;

    let mut counts = std::collections::BTreeMap::new();
    for c in &cells {
        *counts.entry(c.classification.clone()).or_insert(0) += 1;
    }
    let summary = SweepSummary {
        cells: cells.len(),
        errors: cells.iter().filter(|c| c.classification == "error").count(),
        counts,
        artifact_paths: vec![
            "sweep.csv".into(),
            "sweep.svg".into(),
            "records.json".into(),
        ],
    };
    Ok((summary, cells))
}

pub fn sweep_csv(cells: &[CellResult]) -> String {
    let mut out = String::with_capacity(64 * (cells.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(out, "{}", c.csv_row());
    }
    out
}

pub fn class_color(class: &str) -> &'static str {
    match class {
        "extinct" => "#bdbdbd",
        "locked_to_x_star" => "#2ca02c",
        "oscillating" => "#ff7f0e",
        "undetermined" => "#9467bd",
        _ => "#d62728",
    }
}

/// Cell extents around each axis value, halfway to the neighbours.
fn edges(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    if n == 1 {
        let half = (values[0].abs() * 0.1).max(0.05);
        return vec![(values[0] - half, values[0] + half)];
    }
    (0..n)
        .map(|i| {
            let lo = if i == 0 {
                values[0] - (values[1] - values[0]) / 2.0
            } else {
                (values[i - 1] + values[i]) / 2.0
            };
            let hi = if i + 1 == n {
                values[n - 1] + (values[n - 1] - values[n - 2]) / 2.0
            } else {
                (values[i] + values[i + 1]) / 2.0
            };
            (lo, hi)
        })
        .collect()
}

fn heatmap(spec: &SweepSpec, cells: &[CellResult]) -> String {
    let sorted = |f: fn(&CellResult) -> f64| {
        let mut v: Vec<f64> = cells.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (mus, taus, histories) = (sorted(|c| c.mu), sorted(|c| c.tau), sorted(|c| c.history));
    if cells.is_empty() {
        return Plot::new("empty sweep").to_svg(400.0, 300.0);
    }
    let (mu_edges, tau_edges) = (edges(&mus), edges(&taus));
    let x_range = (tau_edges[0].0, tau_edges[tau_edges.len() - 1].1);
    let y_range = (mu_edges[0].0, mu_edges[mu_edges.len() - 1].1);

    let plots: Vec<Plot> = histories
        .iter()
        .map(|&h| {
            let mut plot = Plot::new(format!("constant history {h}"))
                .labels("tau", "mu")
                .x_range(x_range.0, x_range.1)
                .y_range(y_range.0, y_range.1);
            for c in cells.iter().filter(|c| c.history == h) {
                let i = mus.iter().position(|&m| m == c.mu).expect("mu on axis");
                let j = taus.iter().position(|&t| t == c.tau).expect("tau on axis");
                plot.cell(
                    tau_edges[j],
                    mu_edges[i],
                    class_color(&c.classification),
                    format!("mu={} tau={}: {}", c.mu, c.tau, c.classification),
                );
            }
            let n = 200;
            let curve: Vec<(f64, f64)> = (0..=n)
                .filter_map(|k| {
                    let mu = y_range.0 + (y_range.1 - y_range.0) * k as f64 / n as f64;
                    let seq = switching_times(mu / spec.r, 0).ok()?;
                    Some((seq.taus[0] / spec.r, mu))
                })
                .collect();
            plot.dashed_line(curve, "black", Some("first switching delay".into()));
            for class in [
                "locked_to_x_star",
                "oscillating",
                "extinct",
                "undetermined",
                "error",
            ] {
                if cells.iter().any(|c| c.classification == class) {
                    plot.legend_entry(class_color(class), class);
                }
            }
            plot
        })
        .collect();
    svg::panels(
        "long-term behaviour over (tau, mu)",
        &plots,
        1,
        720.0,
        480.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        let spec = SweepSpec {
            mu_values: Some(vec![0.5, 0.3, 0.5]),
            mu_range: None,
            tau_range: Some((1.0, 3.0, 3)),
            ..SweepSpec::default()
        };
        assert_eq!(spec.mu_axis().unwrap(), vec![0.3, 0.5]);
        assert_eq!(spec.tau_axis().unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(spec.runs(Overrides::default()).unwrap().len(), 6);

        let both = SweepSpec {
            mu_values: Some(vec![0.5]),
            ..SweepSpec::default()
        };
        assert!(both.mu_axis().is_err());
        let outside = SweepSpec {
            mu_range: Some((0.3, 0.6, 4)),
            ..SweepSpec::default()
        };
        assert!(outside
            .runs(Overrides::default())
            .unwrap_err()
            .to_string()
            .contains("mu_range"));
        assert_eq!(
            edges(&[1.0, 2.0, 4.0]),
            vec![(0.5, 1.5), (1.5, 3.0), (3.0, 5.0)]
        );
    }

    #[test]
    fn failing_cell_is_recorded() {
        let run = ResolvedRun {
            mu: 0.5,
            r: 1.0,
            tau: 1.0,
            schedule: DcSchedule::always_on(),
            history: 1.2,
            t_end: 10.0,
            step: None,
            window: 8.0,
        };
        let cell = run_cell(&run, None);
        assert_eq!(cell.classification, "error");
        assert!(cell.error.is_some() && cell.record.is_none());
        assert!(cell.csv_row().starts_with("0.5,1,1.2,error,"));
    }
}
