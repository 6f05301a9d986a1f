//! `axsplit`: run cavity splitting scenarios and the analyses built on them.
//!
//! ```sh
//! axsplit --config table1.confocal --out out simulate
//! axsplit --config scenario.toml --override cavity.theta_split_rad=0 simulate
//! axsplit --out out analyze --series out/growth_series.csv
//! axsplit presets show table2.bnl-quad
//! ```
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
//! guard trips, 1 otherwise.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use axsplit::sensitivity::FitKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{AnalyzeOptions, ProfileOptions, ScanOptions};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "axsplit",
    version,
    about = "Beam splitting in a magnetised optical cavity"
)]
struct Cli {
    /// Scenario file, or the name of a built-in preset.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Replace one scenario value, e.g. `cavity.theta_split_rad=0`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitArg {
    Linear,
    Power,
}

impl From<FitArg> for FitKind {
    fn from(f: FitArg) -> Self {
        match f {
            FitArg::Linear => FitKind::Linear,
            FitArg::Power => FitKind::Power,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the cavity with and without field and write detector differences.
    Simulate,
    /// Fit a growth series (or the scenario's stored fit) and report sensitivity.
    Analyze {
        /// Growth-series CSV as written by `simulate`.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, value_enum)]
        fit: Option<FitArg>,
        /// Extraction count to extrapolate to.
        #[arg(long)]
        n_target: Option<f64>,
        /// Coupling the series was produced at (GeV^-1).
        #[arg(long)]
        g_ref: Option<f64>,
        /// Column used as the abscissa.
        #[arg(long)]
        x_column: Option<String>,
        /// Column holding the signal.
        #[arg(long)]
        column: Option<String>,
    },
    /// Evaluate the analytic density deficit curves.
    Profile {
        /// Beam separation (m); defaults to theta_split times the cavity length.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Waist broadening (m).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long)]
        waist: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
        /// Curves span [-x_max, x_max] (m); defaults to three waists.
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 601)]
        points: usize,
    },
    /// Mixing angle and suppression against the axion mass.
    MassScan {
        #[arg(long)]
        m_min: Option<f64>,
        #[arg(long)]
        m_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Logarithmic mass spacing.
        #[arg(long)]
        log: bool,
    },
    /// Compare spread growth of the bifurcation and Pascal lattices.
    Pascal {
        #[arg(long, default_value_t = 10_000)]
        passes: usize,
        /// Distance per pass (m).
        #[arg(long, default_value_t = 1.0)]
        pass_length: f64,
    },
    /// Built-in scenario presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as TOML.
    Show {
        name: String,
        /// Print the parsed scenario, with overrides applied, instead of the shipped text.
        #[arg(long)]
        resolved: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let scenario = || config::load(cli.config.as_deref(), &cli.overrides);
    match cli.command {
        Command::Simulate => {
            let s = scenario()?;
            let summary = commands::simulate(&s, &cli.out)?;
            println!(
                "{}: {} extractions over {} traversals, {} files in {}",
                s.name,
                summary.signals.len(),
                s.cavity.n_traversals,
                summary.files.len(),
                cli.out.display()
            );
            if let Some(last) = summary.signals.last() {
                println!(
                    "traversal {}: central loss {:.6e} /s, sideband gain {:.6e} /s",
                    last.traversal, last.central_loss, last.sideband_gain
                );
            }
            println!(
                "central loss growth: {}",
                commands::describe_growth(&summary.signals, |t| t.central_loss)
            );
        }
        Command::Analyze {
            series,
            fit,
            n_target,
            g_ref,
            x_column,
            column,
        } => {
            let s = scenario()?;
            let opts = AnalyzeOptions {
                series,
                fit_kind: fit.map(Into::into),
                n_target,
                g_ref,
                x_column,
                column,
            };
            let doc = commands::analyze(&s, &opts, &cli.out)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("report serializes")
            );
        }
        Command::Profile {
            alpha,
            epsilon,
            waist,
            amplitude,
            x_max,
            points,
        } => {
            let s = scenario()?;
            let opts = ProfileOptions {
                alpha,
                epsilon,
                waist,
                amplitude,
                x_max,
                points,
            };
            let alpha = commands::profile(&s, &opts, &cli.out)?;
            println!(
                "deficit curves for alpha = {alpha:e} m written to {}",
                cli.out.display()
            );
        }
        Command::MassScan {
            m_min,
            m_max,
            steps,
            log,
        } => {
            let s = scenario()?;
            let opts = ScanOptions {
                m_min,
                m_max,
                steps,
                log: log.then_some(true),
            };
            let summary = commands::mass_scan_cmd(&s, &opts, &cli.out)?;
            println!(
                "{} masses written to {}",
                summary.rows,
                cli.out.join("mass_scan.csv").display()
            );
            if let Some(m) = summary.half_mass {
                println!("suppression reaches 1/2 at m_a = {m:.4e} eV");
            }
            if let Some(g) = summary.g_min {
                println!("zero-mass reach g_min = {g:.4e} GeV^-1");
            }
        }
        Command::Pascal {
            passes,
            pass_length,
        } => {
            println!("{}", commands::pascal(passes, pass_length, &cli.out)?);
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for (name, text) in config::PRESETS {
                    let s = config::parse(text, &[])?;
                    println!("{name:<18} {}", s.description);
                }
            }
            PresetAction::Show { name, resolved } => {
                let text = config::preset_text(&name)
                    .ok_or_else(|| CliError::Config(format!("no preset named {name:?}")))?;
                if resolved {
                    print!("{}", config::parse(text, &cli.overrides)?.to_toml());
                } else {
                    print!("{text}");
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
