use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use tcell_delay::{find_equilibria, stability_report, switching_times};
use tcell_delay_cli::config::{load, Overrides, SimulateConfig};
use tcell_delay_cli::figures::make_figure;
use tcell_delay_cli::run::{execute, write_artifacts};
use tcell_delay_cli::{run_sweep, CliError, CliResult, SweepSpec};

const DEFAULT_OUTPUT: &str = "tcell-output";

/// Delay model of DC-driven T-cell proliferation: dx/dt = a(t-tau) r x_tau/(1+x_tau^4) x - mu x.
///
/// Structured results go to stdout as JSON; trajectories, sweep grids and figures are written
/// as CSV/SVG under --output. Exit codes: 0 success, 1 internal error, 2 invalid input.
#[derive(Parser, Debug)]
#[command(name = "tcell-delay", version)]
struct Cli {
    /// JSON configuration (simulate: model + histories, sweep: grid spec).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/SVG artifacts [default: tcell-output].
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Integrator step; shrunk to divide tau exactly. Default tau/64, or 1/64 without delay.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// End of the simulated interval, overriding the configuration.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the configured model (one run per history) and write trajectory CSV/SVG.
    Simulate,
    /// Equilibria of the scaled model for a given mu.
    Equilibria {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Linear stability of every equilibrium at (mu, tau).
    Stability {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau: f64,
        /// Number of switching delays to list beyond the first.
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
    /// Candidate switching delays tau_n = (2n+1) pi / (2|alpha|), n = 0..=n_max, at x*.
    SwitchingTimes {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
    /// Classify long-term behaviour over a (mu, tau, history) grid.
    ///
    /// Without --config the grid is mu in [0.3, 0.55] (6 values), tau in [0, 12] (25 values),
    /// constant history 1.2, t_end 1000, window t_end/4.
    Sweep,
    /// Reproduce a standard figure: fig2 (equilibrium construction for mu = 0.3, 0.5, 0.569),
    /// fig3 (mu = 0.5, tau = 0, histories 0.3, 0.5, 0.6, 1.2, 1.5, t_end 100) or
    /// fig4 (mu = 0.5, history 1.2, tau = 2, 3.3, 4.5, 8, t_end 400).
    Figure { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcell-delay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print<T: Serialize>(value: &T) -> CliResult<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn check_mu(mu: f64) -> CliResult<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(format!(
            "`mu` = {mu}: must be finite and > 0"
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let overrides = Overrides {
        step: cli.step,
        t_end: cli.t_end,
    };
    let output = cli
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    match cli.command {
        Command::Simulate => {
            let path = cli
                .config
                .ok_or_else(|| CliError::invalid("simulate needs --config <path>"))?;
            let cfg: SimulateConfig = load(&path)?;
            let mut records = Vec::new();
            for run in cfg.resolve(overrides)? {
                let mut result = execute(&run)?;
                write_artifacts(&mut result, &output)?;
                records.push(result.record);
            }
            if records.len() == 1 {
                print(&records[0])
            } else {
                print(&records)
            }
        }
        Command::Equilibria { mu } => {
            check_mu(mu)?;
            let eq = find_equilibria(mu);
            print(&json!({
                "mu": mu,
                "roots": eq.roots(),
                "regime": eq.regime,
                "x_max": eq.x_max_location,
            }))
        }
        Command::Stability { mu, tau, n_max } => {
            check_mu(mu)?;
            print(&stability_report(mu, tau, n_max)?)
        }
        Command::SwitchingTimes { mu, n_max } => {
            check_mu(mu)?;
            print(&switching_times(mu, n_max)?.taus)
        }
        Command::Sweep => {
            let spec: SweepSpec = match &cli.config {
                Some(path) => load(path)?,
                None => SweepSpec::default(),
            };
            let dir = cli
                .output
                .clone()
                .or_else(|| spec.output_dir.clone())
                .unwrap_or(output);
            let (summary, _) = run_sweep(&spec, overrides, cli.jobs, &dir)?;
            print(&summary)
        }
        Command::Figure { name } => print(&make_figure(&name, &output, overrides)?),
    }
}
