//! Reproductions of the three standard figures: the equilibrium construction, bistability
//! without delay, and the sequence of regimes as the delay grows.

use std::path::Path;

use serde::Serialize;
use tcell_delay::find_equilibria;

use crate::config::{Histories, Overrides, SimulateConfig};
use crate::error::{CliError, CliResult};
use crate::run::{draw_equilibria, execute, forward_points, write_file};
use crate::svg::{self, Plot, PALETTE};

pub const FIGURES: [&str; 3] = ["fig2", "fig3", "fig4"];

pub const FIG2_MUS: [f64; 3] = [0.3, 0.5, 0.569];
pub const FIG3_HISTORIES: [f64; 5] = [0.3, 0.5, 0.6, 1.2, 1.5];
pub const FIG3_T_END: f64 = 100.0;
pub const FIG4_TAUS: [f64; 4] = [2.0, 3.3, 4.5, 8.0];
pub const FIG4_HISTORY: f64 = 1.2;
pub const FIG4_T_END: f64 = 400.0;

/// Default `simulate` configuration behind `fig3`: mu = 0.5, no delay, five constant histories.
pub fn fig3_config() -> SimulateConfig {
    SimulateConfig {
        mu: 0.5,
        r: 1.0,
        tau: 0.0,
        schedule: Default::default(),
        history: Histories::Many(FIG3_HISTORIES.to_vec()),
        t_end: FIG3_T_END,
        step: None,
        window: None,
    }
}

/// Default `simulate` configurations behind `fig4`: mu = 0.5, history 1.2, one per delay.
pub fn fig4_configs() -> Vec<SimulateConfig> {
    FIG4_TAUS
        .iter()
        .map(|&tau| SimulateConfig {
            mu: 0.5,
            r: 1.0,
            tau,
            schedule: Default::default(),
            history: Histories::One(FIG4_HISTORY),
            t_end: FIG4_T_END,
            step: None,
            window: None,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub mu: f64,
    pub tau: f64,
    pub history: f64,
    pub classification: String,
    pub final_value: f64,
    pub amplitude: f64,
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig2Row {
    pub mu: f64,
    pub regime: String,
    pub intersections: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum FigureData {
    Equilibria(Vec<Fig2Row>),
    Curves(Vec<CurveSummary>),
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureReport {
    pub figure: String,
    pub artifact_paths: Vec<String>,
    pub data: FigureData,
}

/// Builds the named figure, writes `<name>.svg` into `out_dir` and returns what was drawn.
pub fn make_figure(name: &str, out_dir: &Path, overrides: Overrides) -> CliResult<FigureReport> {
    let (svg, data) = match name {
        "fig2" => fig2(),
        "fig3" => fig3(overrides)?,
        "fig4" => fig4(overrides)?,
        other => {
            return Err(CliError::invalid(format!(
                "unknown figure `{other}` (expected one of {})",
                FIGURES.join(", ")
            )))
        }
    };
    let file = format!("{name}.svg");
    write_file(&out_dir.join(&file), svg.as_bytes())?;
    Ok(FigureReport {
        figure: name.to_string(),
        artifact_paths: vec![file],
        data,
    })
}

fn fig2() -> (String, FigureData) {
    let mut plot = Plot::new("positive equilibria: x - mu x^4 = mu")
        .labels("x", "x - mu x^4")
        .x_range(0.0, 1.6)
        .y_range(0.0, 0.8);
    let n = 400;
    let mut rows = Vec::new();
    for (k, &mu) in FIG2_MUS.iter().enumerate() {
        let color = PALETTE[k];
        let curve = (0..=n)
            .map(|i| {
                let x = 1.6 * i as f64 / n as f64;
                (x, x - mu * x.powi(4))
            })
            .collect();
        plot.line(curve, color, Some(format!("mu = {mu}")));
        plot.dashed_line(vec![(0.0, mu), (1.6, mu)], color, None);
        let eq = find_equilibria(mu);
        let roots: Vec<f64> = eq.roots().into_iter().filter(|&x| x > 0.0).collect();
        for &x in &roots {
            plot.marker(x, mu, color, None);
        }
        rows.push(Fig2Row {
            mu,
            regime: eq.regime.as_str().to_string(),
            intersections: roots,
        });
    }
    (plot.to_svg(720.0, 480.0), FigureData::Equilibria(rows))
}

fn summarize(
    cfg: &SimulateConfig,
    overrides: Overrides,
) -> CliResult<Vec<(CurveSummary, crate::run::RunResult)>> {
    cfg.resolve(overrides)?
        .iter()
        .map(|run| {
            let res = execute(run)?;
            let o = &res.record.outcome;
            Ok((
                CurveSummary {
                    mu: run.mu,
                    tau: run.tau,
                    history: run.history,
                    classification: o.classification.as_str().to_string(),
                    final_value: o.final_value,
                    amplitude: o.amplitude,
                    period: o.period,
                },
                res,
            ))
        })
        .collect()
}

fn fig3(overrides: Overrides) -> CliResult<(String, FigureData)> {
    let cfg = fig3_config();
    let runs = summarize(&cfg, overrides)?;
    let mut plot =
        Plot::new(format!("tau = 0, mu = {}: two stable equilibria", cfg.mu)).labels("t", "x(t)");
    draw_equilibria(&mut plot, &runs[0].1.equilibria);
    for (k, (s, res)) in runs.iter().enumerate() {
        plot.line(
            forward_points(&res.trajectory),
            PALETTE[k % PALETTE.len()],
            Some(format!("x0 = {}", s.history)),
        );
    }
    let data = runs.into_iter().map(|(s, _)| s).collect();
    Ok((plot.to_svg(800.0, 480.0), FigureData::Curves(data)))
}

fn fig4(overrides: Overrides) -> CliResult<(String, FigureData)> {
    let mut plots = Vec::new();
    let mut data = Vec::new();
    for (k, cfg) in fig4_configs().iter().enumerate() {
        for (s, res) in summarize(cfg, overrides)? {
            let mut plot =
                Plot::new(format!("tau = {}: {}", s.tau, s.classification)).labels("t", "x(t)");
            draw_equilibria(&mut plot, &res.equilibria);
            plot.line(
                forward_points(&res.trajectory),
                PALETTE[k % PALETTE.len()],
                None,
            );
            plots.push(plot);
            data.push(s);
        }
    }
    let svg = svg::panels(
        "mu = 0.5, constant history 1.2, increasing delay",
        &plots,
        2,
        560.0,
        360.0,
    );
    Ok((svg, FigureData::Curves(data)))
}
