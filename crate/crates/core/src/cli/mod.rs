//! Command-line front end: scenario files, runs and plots.

pub mod plot;
pub mod run;
pub mod scenario;

pub use plot::{emit_plot, PlotKind, PlotSource};
pub use run::{render_scenario, run_scenario, RunError, RunOutputs, Summary};
pub use scenario::{
    parse_scenario, parse_scenario_with, Experiment, ExperimentKind, Overrides, ScenarioConfig,
    ScenarioError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable consulted for the output directory when `--out-dir`
/// is absent.
pub const OUT_DIR_ENV: &str = "MAGNON_HOM_OUT_DIR";
