use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use magnon_hom::beamsplitter::{calibrate_balanced, rabi_params};
use magnon_hom::cli::{
    parse_scenario_with, run_scenario, Overrides, ScenarioConfig, EXIT_RUNTIME, EXIT_VALIDATION,
    OUT_DIR_ENV,
};
use magnon_hom::{angular, Complex64, Error};

/// Two-mode magnon beam splitter and Hong-Ou-Mandel simulator.
///
/// All frequencies on the command line and in scenario files are ordinary
/// frequencies in Hz. They are multiplied by 2 pi internally, so `--g-hz 2e7`
/// means a coupling of g = 2 pi x 20 MHz rad/s. Times are in seconds.
#[derive(Debug, Parser)]
#[command(name = "magnon-hom", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        scenario: PathBuf,
        /// Output directory. Falls back to $MAGNON_HOM_OUT_DIR, then the
        /// current directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Check a scenario file without running it.
    Validate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Print the balanced pulse duration for a coupling and detuning.
    Calibrate {
        /// Coupling g/2pi in Hz.
        #[arg(long, allow_negative_numbers = true)]
        g_hz: f64,
        /// Detuning (omega1 - omega2)/2pi in Hz.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        delta_omega_hz: f64,
    },
}

#[derive(Debug, Args)]
struct OverrideArgs {
    /// Output file prefix. Defaults to the scenario's name, then the file stem.
    #[arg(long)]
    name: Option<String>,
    /// Coupling g/2pi in Hz.
    #[arg(long, allow_negative_numbers = true)]
    g_hz: Option<f64>,
    /// Detuning (omega1 - omega2)/2pi in Hz.
    #[arg(long, allow_negative_numbers = true)]
    delta_omega_hz: Option<f64>,
    /// Mean mode frequency in Hz.
    #[arg(long)]
    omega_bar_hz: Option<f64>,
    /// Samples per segment for trajectory output.
    #[arg(long = "samples")]
    samples_per_segment: Option<usize>,
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            name: self.name,
            g_hz: self.g_hz,
            delta_omega_hz: self.delta_omega_hz,
            omega_bar_hz: self.omega_bar_hz,
            samples_per_segment: self.samples_per_segment,
        }
    }
}

fn fail(code: i32, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("magnon-hom: {message}");
    ExitCode::from(code as u8)
}

fn load(path: &Path, overrides: OverrideArgs) -> Result<ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        fail(
            EXIT_VALIDATION,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    let mut overrides = overrides.into_overrides();
    let has_name = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.get("name").cloned())
        .is_some();
    if overrides.name.is_none() && !has_name {
        overrides.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    parse_scenario_with(&text, &overrides)
        .map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    match cli.command {
        Command::Run {
            scenario,
            out_dir,
            overrides,
        } => {
            let config = match load(&scenario, overrides) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let out_dir = out_dir
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            match run_scenario(&config, &out_dir) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_RUNTIME, e),
            }
        }
        Command::Validate {
            scenario,
            overrides,
        } => match load(&scenario, overrides) {
            Ok(config) => {
                println!("{}: ok ({})", scenario.display(), config.kind());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Calibrate {
            g_hz,
            delta_omega_hz,
        } => {
            let g = Complex64::new(angular(g_hz), 0.0);
            let dw = angular(delta_omega_hz);
            let rabi = match rabi_params(g, dw) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            match calibrate_balanced(g, dw) {
                Ok(tau) => {
                    let out = json!({
                        "g_hz": g_hz,
                        "delta_omega_hz": delta_omega_hz,
                        "big_omega_rad_s": rabi.big_omega,
                        "p_max": rabi.p_max,
                        "tau_s": tau,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&out).expect("finite values")
                    );
                    ExitCode::SUCCESS
                }
                Err(e @ Error::UnreachableBalance { .. }) => fail(EXIT_VALIDATION, e),
                Err(e) => fail(EXIT_RUNTIME, e),
            }
        }
    }
}
