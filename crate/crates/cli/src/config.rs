//! JSON configuration documents and their resolution into fully specified runs.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tcell_delay::{DcSchedule, ModelParams};

use crate::error::{CliError, CliResult};

pub const DEFAULT_T_END: f64 = 400.0;

/// One constant history or several; each history becomes its own run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Histories {
    One(f64),
    Many(Vec<f64>),
}

impl Histories {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Histories::One(v) => vec![*v],
            Histories::Many(v) => v.clone(),
        }
    }
}

/// The `simulate` configuration document.
///
/// ```json
/// {"mu": 0.5, "r": 1.0, "tau": 3.3,
///  "schedule": {"switch_times": [], "initial_value": 1},
///  "history": 1.2, "t_end": 400.0, "step": null, "window": null}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub mu: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub schedule: DcSchedule,
    pub history: Histories,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub step: Option<f64>,
    /// Length of the final window used for long-term classification; `t_end / 4` if absent.
    #[serde(default)]
    pub window: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

/// Values given on the command line that take precedence over the document.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub step: Option<f64>,
    pub t_end: Option<f64>,
}

/// A single, fully specified run. Its JSON form is what the run id hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub mu: f64,
    pub r: f64,
    pub tau: f64,
    pub schedule: DcSchedule,
    pub history: f64,
    pub t_end: f64,
    /// Requested step; the integrator shrinks it to divide `tau`. `None` means the default.
    pub step: Option<f64>,
    pub window: f64,
}

impl ResolvedRun {
    pub fn params(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.mu, self.r, self.tau)?)
    }

    /// `mu / r`, the decay rate of the scaled model that fixes the equilibria.
    pub fn scaled_mu(&self) -> f64 {
        self.mu / self.r
    }

    /// `r tau`, the delay in scaled time.
    pub fn scaled_tau(&self) -> f64 {
        self.r * self.tau
    }

    pub fn validate(&self) -> CliResult<()> {
        positive("mu", self.mu)?;
        positive("r", self.r)?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(bad("tau", self.tau, "must be finite and >= 0"));
        }
        if !(self.history >= 0.0 && self.history.is_finite()) {
            return Err(bad("history", self.history, "must be finite and >= 0"));
        }
        positive("t_end", self.t_end)?;
        if let Some(h) = self.step {
            positive("step", h)?;
        }
        positive("window", self.window)?;
        if 2.0 * self.window > self.t_end {
            return Err(bad("window", self.window, "must be at most t_end / 2"));
        }
        Ok(())
    }
}

impl SimulateConfig {
    /// One resolved run per history value, command-line overrides applied.
    pub fn resolve(&self, overrides: Overrides) -> CliResult<Vec<ResolvedRun>> {
        let histories = self.history.values();
        if histories.is_empty() {
            return Err(CliError::invalid("`history` must not be empty"));
        }
        let t_end = overrides.t_end.unwrap_or(self.t_end);
        let runs: Vec<ResolvedRun> = histories
            .into_iter()
            .map(|history| ResolvedRun {
                mu: self.mu,
                r: self.r,
                tau: self.tau,
                schedule: self.schedule.clone(),
                history,
                t_end,
                step: overrides.step.or(self.step),
                window: self.window.unwrap_or(t_end / 4.0),
            })
            .collect();
        for run in &runs {
            run.validate()?;
        }
        Ok(runs)
    }
}

pub(crate) fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(name, v, "must be finite and > 0"))
    }
}

pub(crate) fn bad(name: &str, v: f64, why: &str) -> CliError {
    CliError::invalid(format!("`{name}` = {v}: {why}"))
}

/// Parse a JSON document; errors name the offending key path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::invalid(e.inner().to_string())
        } else {
            CliError::invalid(format!("key `{path}`: {}", e.inner()))
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_history_forms() {
        let cfg: SimulateConfig = parse_json(r#"{"mu": 0.5, "history": 1.2}"#).unwrap();
        assert_eq!((cfg.r, cfg.tau, cfg.t_end), (1.0, 0.0, DEFAULT_T_END));
        let runs = cfg.resolve(Overrides::default()).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].window, 100.0);

        let cfg: SimulateConfig = parse_json(r#"{"mu": 0.5, "history": [0.3, 0.6]}"#).unwrap();
        let runs = cfg
            .resolve(Overrides {
                step: Some(0.01),
                t_end: Some(50.0),
            })
            .unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(
            (runs[1].history, runs[1].t_end, runs[1].step),
            (0.6, 50.0, Some(0.01))
        );
    }

    #[test]
    fn errors_name_the_key() {
        let err = parse_json::<SimulateConfig>(r#"{"mu": "x", "history": 1}"#).unwrap_err();
        assert!(err.to_string().contains("`mu`"), "{err}");
        let err = parse_json::<SimulateConfig>(
            r#"{"mu": 0.5, "history": 1, "schedule": {"switch_times": [3, 1], "initial_value": 1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("schedule"), "{err}");
        let err =
            parse_json::<SimulateConfig>(r#"{"mu": 0.5, "history": 1, "tua": 2}"#).unwrap_err();
        assert!(err.to_string().contains("tua"), "{err}");
        let cfg: SimulateConfig = parse_json(r#"{"mu": -0.5, "history": 1}"#).unwrap();
        let err = cfg.resolve(Overrides::default()).unwrap_err();
        assert!(
            err.to_string().contains("`mu`") && err.exit_code() == 2,
            "{err}"
        );
        let cfg: SimulateConfig =
            parse_json(r#"{"mu": 0.5, "history": 1, "window": 300}"#).unwrap();
        assert!(cfg
            .resolve(Overrides::default())
            .unwrap_err()
            .to_string()
            .contains("`window`"));
    }
}
