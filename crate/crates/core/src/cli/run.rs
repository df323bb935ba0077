//! Scenario execution and output files.
//!
//! Every output is rendered into memory first and written afterwards, so a
//! failed simulation writes nothing. Files contain no timestamps;
//! the tool version appears only in the summary's `tool_version` field.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    entanglement_entropy, noon_fidelity, phase_scan, rabi_deviation, run_hom, run_rabi,
    run_single_magnon_tbs, PhaseScanResult,
};
use crate::beamsplitter::{apply_tbs, extract_relative_phase};
use crate::cli::plot::{emit_plot, PlotKind, PlotSource};
use crate::cli::scenario::{Experiment, OutputKind, ScenarioConfig};
use crate::dynamics::{evolve, Trajectory};
use crate::fock::{build_basis, make_state, FockIndex, StateVector};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Simulation(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probability {
    pub m1: usize,
    pub m2: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedEntry {
    pub delta_omega_rad_s: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_min_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_max_rad: Option<f64>,
    pub skipped: Vec<SkippedEntry>,
}

/// Contents of `<name>.summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub kind: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_s: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub final_probabilities: Vec<Probability>,
    /// `arg(c_01 / c_10)` after the pulse acting on `|1,0>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_rad: Option<f64>,
    /// `arg(c_02 / c_20)` of the final state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noon_phase_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dip_depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_nats: Option<f64>,
    /// Best N00N overlap of the final state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noon_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi_max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSummary>,
}

impl Summary {
    fn new(config: &ScenarioConfig) -> Self {
        Self {
            name: config.name().to_owned(),
            kind: config.kind().as_str().to_owned(),
            tool_version: TOOL_VERSION.to_owned(),
            tau_s: None,
            window_s: None,
            final_probabilities: Vec::new(),
            phi_rad: None,
            noon_phase_rad: None,
            dip_depth: None,
            entropy_nats: None,
            noon_fidelity: None,
            rabi_max_deviation: None,
            scan: None,
        }
    }

    fn describe_state(&mut self, state: &StateVector) {
        self.final_probabilities = state
            .populations()
            .into_iter()
            .map(|(idx, p)| Probability {
                m1: idx.m1,
                m2: idx.m2,
                p,
            })
            .collect();
        self.entropy_nats = Some(entanglement_entropy(state));
        if state.basis().n_max() >= 2 {
            self.noon_phase_rad =
                extract_relative_phase(state, FockIndex::new(2, 0), FockIndex::new(0, 2)).ok();
            let f = noon_fidelity(state, 0.0);
            self.noon_fidelity = Some(f.best_fidelity);
        }
    }
}

/// Rendered outputs of one scenario, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub summary: Summary,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
}

/// Runs the experiment and renders the requested outputs.
pub fn render_scenario(config: &ScenarioConfig) -> Result<RunOutputs, RunError> {
    let name = config.name();
    let mut summary = Summary::new(config);
    let csv;
    let mut svg = None;

    match &config.experiment {
        Experiment::Rabi {
            g,
            delta_omega,
            omega_bar,
            duration,
            samples,
        } => {
            let traj = run_rabi(*g, *delta_omega, *omega_bar, *duration, *samples)?;
            summary.describe_state(traj.final_state());
            summary.rabi_max_deviation = Some(rabi_deviation(&traj, *g, *delta_omega)?);
            csv = Some((format!("{name}.trajectory.csv"), trajectory_csv(&traj)));
            svg = plot_trajectory(config, &traj, None)?;
        }
        Experiment::TbsSingle(protocol) => {
            let run = run_single_magnon_tbs(protocol)?;
            let fin = run.trajectory.final_state();
            summary.describe_state(fin);
            summary.phi_rad =
                extract_relative_phase(fin, FockIndex::new(1, 0), FockIndex::new(0, 1)).ok();
            summary.tau_s = run.protocol.pulse.map(|p| p.tau);
            summary.window_s = run.protocol.window.map(|(a, b)| [a, b]);
            csv = Some((
                format!("{name}.trajectory.csv"),
                trajectory_csv(&run.trajectory),
            ));
            svg = plot_trajectory(config, &run.trajectory, run.protocol.window)?;
        }
        Experiment::Hom(protocol) => {
            let hom = run_hom(protocol)?;
            summary.describe_state(hom.final_state());
            summary.dip_depth = Some(hom.dip_depth);
            summary.tau_s = hom.run.protocol.pulse.map(|p| p.tau);
            summary.window_s = hom.run.protocol.window.map(|(a, b)| [a, b]);
            if let Some(pulse) = hom.run.protocol.pulse {
                let basis = build_basis(protocol.n_max);
                let single = apply_tbs(
                    &pulse,
                    &StateVector::basis_state(&basis, FockIndex::new(1, 0))?,
                )?;
                summary.phi_rad =
                    extract_relative_phase(&single, FockIndex::new(1, 0), FockIndex::new(0, 1))
                        .ok();
            }
            csv = Some((
                format!("{name}.trajectory.csv"),
                trajectory_csv(hom.trajectory()),
            ));
            svg = plot_trajectory(config, hom.trajectory(), hom.run.protocol.window)?;
        }
        Experiment::PhaseScan { g, grid, omega_bar } => {
            let scan = phase_scan(*g, grid, *omega_bar)?;
            summary.scan = Some(ScanSummary {
                points: scan.len(),
                phase_min_rad: scan.phases.iter().copied().reduce(f64::min),
                phase_max_rad: scan.phases.iter().copied().reduce(f64::max),
                skipped: scan
                    .skipped
                    .iter()
                    .map(|s| SkippedEntry {
                        delta_omega_rad_s: s.delta_omega,
                        reason: s.reason.clone(),
                    })
                    .collect(),
            });
            csv = Some((format!("{name}.scan.csv"), scan_csv(&scan)));
            if config.wants(OutputKind::Svg) && !scan.is_empty() {
                svg = Some((
                    format!("{name}.svg"),
                    emit_plot(&PlotSource::PhaseScan(&scan), PlotKind::PhaseVsDetuning)?,
                ));
            }
        }
        Experiment::Evolve {
            schedule,
            initial,
            n_max,
            samples,
        } => {
            let basis = build_basis(*n_max);
            let psi0 = make_state(&basis, initial)?;
            let traj = evolve(schedule, &psi0, *samples)?;
            summary.describe_state(traj.final_state());
            csv = Some((format!("{name}.trajectory.csv"), trajectory_csv(&traj)));
            svg = plot_trajectory(config, &traj, None)?;
        }
    }

    let mut files = Vec::new();
    if config.wants(OutputKind::Csv) {
        files.extend(csv);
    }
    if config.wants(OutputKind::Json) {
        let mut json =
            serde_json::to_string_pretty(&summary).expect("summary holds only finite numbers");
        json.push('\n');
        files.push((format!("{name}.summary.json"), json));
    }
    files.extend(svg);
    Ok(RunOutputs { summary, files })
}

fn plot_trajectory(
    config: &ScenarioConfig,
    trajectory: &Trajectory,
    window: Option<(f64, f64)>,
) -> Result<Option<(String, String)>, RunError> {
    if !config.wants(OutputKind::Svg) {
        return Ok(None);
    }
    let svg = emit_plot(
        &PlotSource::Trajectory { trajectory, window },
        PlotKind::Populations,
    )?;
    Ok(Some((format!("{}.svg", config.name()), svg)))
}

/// Runs `config` and writes its outputs into `out_dir`, returning the paths
/// written.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let outputs = render_scenario(config)?;
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut written = Vec::with_capacity(outputs.files.len());
    for (file, contents) in outputs.files {
        let path = out_dir.join(file);
        fs::write(&path, contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

/// `t_s`, then `P_m1_m2` per basis state, then `re_m1_m2`/`im_m1_m2` per basis
/// state, all in basis order.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let states = trajectory.basis().states();
    let mut out = String::from("t_s");
    for s in states {
        let _ = write!(out, ",P_{}_{}", s.m1, s.m2);
    }
    for s in states {
        let _ = write!(out, ",re_{0}_{1},im_{0}_{1}", s.m1, s.m2);
    }
    out.push('\n');
    for ((t, pops), state) in trajectory
        .times
        .iter()
        .zip(&trajectory.populations)
        .zip(&trajectory.states)
    {
        let _ = write!(out, "{t:e}");
        for p in pops {
            let _ = write!(out, ",{p:e}");
        }
        for c in state.amplitudes().iter() {
            let _ = write!(out, ",{:e},{:e}", c.re, c.im);
        }
        out.push('\n');
    }
    out
}

pub fn scan_csv(scan: &PhaseScanResult) -> String {
    let mut out =
        String::from("delta_omega_rad_s,delta_omega_hz,tau_s,transfer,phi_rad,noon_phase_rad\n");
    for i in 0..scan.len() {
        let d = scan.detunings[i];
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            d,
            d / (2.0 * std::f64::consts::PI),
            scan.taus[i],
            scan.transfers[i],
            scan.single_phases[i],
            scan.phases[i]
        );
    }
    out
}
