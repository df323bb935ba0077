//! Scenario files.
//!
//! A scenario is a JSON object describing one experiment. Frequencies are
//! given in Hz (cycles per second) and converted to angular frequencies
//! (`2 pi x Hz`, rad/s) exactly once, in [`parse_scenario`]. Unknown keys are
//! rejected. See `docs/scenario-format.md` for the full schema.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{
    detuning_grid, ProtocolConfig, PulseTiming, DEFAULT_HOLD, DEFAULT_OMEGA_BAR,
    DEFAULT_SAMPLES_PER_SEGMENT,
};
use crate::angular;
use crate::beamsplitter::rabi_params;
use crate::dynamics::{HamiltonianParams, PulseSchedule, Segment};
use crate::fock::{FockIndex, DEFAULT_N_MAX};

const REQUIRED_FIELDS: [&str; 2] = ["kind", "g_hz"];
const DEFAULT_SCAN_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
}

fn invalid(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(message.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Rabi,
    TbsSingle,
    Hom,
    PhaseScan,
    Evolve,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rabi => "rabi",
            Self::TbsSingle => "tbs-single",
            Self::Hom => "hom",
            Self::PhaseScan => "phase-scan",
            Self::Evolve => "evolve",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub omega1_hz: f64,
    pub omega2_hz: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub m1: usize,
    pub m2: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

/// Scenario file contents as written, in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: ExperimentKind,
    /// g / 2 pi in Hz, multiplied by `exp(i g_phase_rad)`.
    pub g_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_phase_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_omega_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bar_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_detuning_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_hold_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_hold_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<SegmentSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<OutputKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_segment: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
    /// Reserved; the dynamics are deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub name: Option<String>,
    pub g_hz: Option<f64>,
    pub delta_omega_hz: Option<f64>,
    pub omega_bar_hz: Option<f64>,
    pub samples_per_segment: Option<usize>,
}

impl Overrides {
    fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(name) = &self.name {
            spec.name = Some(name.clone());
        }
        if let Some(g) = self.g_hz {
            spec.g_hz = g;
        }
        if let Some(d) = self.delta_omega_hz {
            spec.delta_omega_hz = Some(d);
        }
        if let Some(w) = self.omega_bar_hz {
            spec.omega_bar_hz = Some(w);
        }
        if let Some(s) = self.samples_per_segment {
            spec.samples_per_segment = Some(s);
        }
    }
}

/// Experiment parameters in rad/s and seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Rabi {
        g: Complex64,
        delta_omega: f64,
        omega_bar: f64,
        duration: f64,
        samples: usize,
    },
    TbsSingle(ProtocolConfig),
    Hom(ProtocolConfig),
    PhaseScan {
        g: Complex64,
        grid: Vec<f64>,
        omega_bar: f64,
    },
    Evolve {
        schedule: PulseSchedule,
        initial: Vec<(FockIndex, Complex64)>,
        n_max: usize,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub spec: ScenarioSpec,
    pub experiment: Experiment,
}

impl ScenarioConfig {
    pub fn kind(&self) -> ExperimentKind {
        self.spec.kind
    }

    pub fn name(&self) -> &str {
        self.spec.name.as_deref().unwrap_or(self.spec.kind.as_str())
    }

    pub fn wants(&self, output: OutputKind) -> bool {
        self.spec
            .outputs
            .as_ref()
            .is_none_or(|outs| outs.contains(&output))
    }

    /// Scenario as pretty-printed JSON; parsing it back yields an equal config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scenario spec is always serializable")
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    parse_scenario_with(text, &Overrides::default())
}

/// Parses, applies `overrides`, then validates.
pub fn parse_scenario_with(
    text: &str,
    overrides: &Overrides,
) -> Result<ScenarioConfig, ScenarioError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let object = value.as_object().ok_or_else(|| ScenarioError::Parse {
        path: "$".into(),
        message: "scenario must be a JSON object".into(),
    })?;
    let missing: Vec<&str> = REQUIRED_FIELDS
        .iter()
        .copied()
        .filter(|f| !object.contains_key(*f))
        .collect();
    if !missing.is_empty() {
        return Err(ScenarioError::Parse {
            path: "$".into(),
            message: format!("missing required fields: {}", missing.join(", ")),
        });
    }
    let mut spec: ScenarioSpec = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::Parse {
            path: if path == "." {
                "$".into()
            } else {
                format!("$.{path}")
            },
            message: e.into_inner().to_string(),
        }
    })?;
    overrides.apply(&mut spec);
    let experiment = validate(&spec)?;
    Ok(ScenarioConfig { spec, experiment })
}

fn finite(label: &str, x: f64) -> Result<f64, ScenarioError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("{label} must be finite")))
    }
}

fn positive_duration(label: &str, x: f64) -> Result<f64, ScenarioError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!(
            "{label} must be a positive duration in seconds, got {x}"
        )))
    }
}

fn hold_duration(label: &str, x: Option<f64>) -> Result<f64, ScenarioError> {
    match x {
        None => Ok(DEFAULT_HOLD),
        Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Some(v) => Err(invalid(format!(
            "{label} must be a non-negative duration, got {v}"
        ))),
    }
}

/// Fields that only make sense for some kinds.
fn check_applicable(spec: &ScenarioSpec) -> Result<(), ScenarioError> {
    use ExperimentKind::*;
    let kind = spec.kind;
    let present: [(&str, bool, &[ExperimentKind]); 8] = [
        (
            "hold_detuning_hz",
            spec.hold_detuning_hz.is_some(),
            &[TbsSingle, Hom],
        ),
        ("pre_hold_s", spec.pre_hold_s.is_some(), &[TbsSingle, Hom]),
        ("post_hold_s", spec.post_hold_s.is_some(), &[TbsSingle, Hom]),
        ("tau_s", spec.tau_s.is_some(), &[TbsSingle, Hom]),
        ("duration_s", spec.duration_s.is_some(), &[Rabi]),
        ("scan", spec.scan.is_some(), &[PhaseScan]),
        ("schedule", spec.schedule.is_some(), &[Evolve]),
        ("initial_state", spec.initial_state.is_some(), &[Evolve]),
    ];
    for (field, is_set, kinds) in present {
        if is_set && !kinds.contains(&kind) {
            return Err(invalid(format!(
                "field {field} does not apply to kind {kind}"
            )));
        }
    }
    if kind == PhaseScan && spec.delta_omega_hz.is_some() {
        return Err(invalid(
            "field delta_omega_hz does not apply to kind phase-scan; use scan",
        ));
    }
    Ok(())
}

fn validate(spec: &ScenarioSpec) -> Result<Experiment, ScenarioError> {
    check_applicable(spec)?;
    let g_hz = finite("g_hz", spec.g_hz)?;
    let g_phase = finite("g_phase_rad", spec.g_phase_rad.unwrap_or(0.0))?;
    let g = Complex64::from_polar(angular(g_hz), g_phase);
    let delta_omega = angular(finite(
        "delta_omega_hz",
        spec.delta_omega_hz.unwrap_or(0.0),
    )?);
    let mut omega_bar = match spec.omega_bar_hz {
        Some(w) => angular(finite("omega_bar_hz", w)?),
        None => DEFAULT_OMEGA_BAR,
    };
    let rotating = spec.frame == Some(Frame::Rotating);
    if rotating {
        omega_bar = 0.0;
    }
    let samples = spec
        .samples_per_segment
        .unwrap_or(DEFAULT_SAMPLES_PER_SEGMENT);
    if samples == 0 {
        return Err(invalid("samples_per_segment must be at least 1"));
    }
    let n_max = spec.n_max.unwrap_or(DEFAULT_N_MAX);

    let needs_coupling = !matches!(spec.kind, ExperimentKind::Evolve);
    if needs_coupling && g.norm() == 0.0 {
        return Err(invalid(format!(
            "g_hz must be nonzero for kind {}",
            spec.kind
        )));
    }

    match spec.kind {
        ExperimentKind::Rabi => {
            let duration = match spec.duration_s {
                Some(d) => positive_duration("duration_s", d)?,
                // two full exchange periods
                None => {
                    let rabi = rabi_params(g, delta_omega).map_err(|e| invalid(e.to_string()))?;
                    4.0 * std::f64::consts::PI / rabi.big_omega
                }
            };
            Ok(Experiment::Rabi {
                g,
                delta_omega,
                omega_bar,
                duration,
                samples,
            })
        }
        ExperimentKind::TbsSingle | ExperimentKind::Hom => {
            if spec.kind == ExperimentKind::Hom && n_max < 2 {
                return Err(invalid("kind hom needs n_max >= 2"));
            }
            let timing = match spec.tau_s {
                Some(tau) => PulseTiming::Fixed(positive_duration("tau_s", tau)?),
                None => {
                    let bound = 2.0 * g.norm();
                    if delta_omega.abs() > bound {
                        return Err(invalid(format!(
                            "balanced pulse unreachable: |delta_omega_hz| = {} Hz exceeds 2|g_hz| = {} Hz (|delta_omega| <= 2|g| is required)",
                            spec.delta_omega_hz.unwrap_or(0.0).abs(),
                            2.0 * g_hz.abs()
                        )));
                    }
                    PulseTiming::Balanced
                }
            };
            let hold_detuning = spec
                .hold_detuning_hz
                .map(|h| finite("hold_detuning_hz", h).map(angular))
                .transpose()?;
            let config = ProtocolConfig {
                g,
                delta_omega,
                omega_bar,
                hold_detuning,
                pre_hold: hold_duration("pre_hold_s", spec.pre_hold_s)?,
                post_hold: hold_duration("post_hold_s", spec.post_hold_s)?,
                timing,
                samples_per_segment: samples,
                n_max,
            };
            Ok(if spec.kind == ExperimentKind::Hom {
                Experiment::Hom(config)
            } else {
                Experiment::TbsSingle(config)
            })
        }
        ExperimentKind::PhaseScan => {
            let (start, stop, points) = match &spec.scan {
                Some(s) => (
                    angular(finite("scan.start_hz", s.start_hz)?),
                    angular(finite("scan.stop_hz", s.stop_hz)?),
                    s.points,
                ),
                None => (-2.0 * g.norm(), 2.0 * g.norm(), DEFAULT_SCAN_POINTS),
            };
            let grid = match points {
                0 => return Err(invalid("scan.points must be at least 1")),
                1 => vec![start],
                n => {
                    if stop <= start {
                        return Err(invalid("scan.stop_hz must exceed scan.start_hz"));
                    }
                    detuning_grid(start, stop, n)
                }
            };
            Ok(Experiment::PhaseScan { g, grid, omega_bar })
        }
        ExperimentKind::Evolve => {
            let segments = spec
                .schedule
                .as_ref()
                .ok_or_else(|| invalid("kind evolve requires a schedule"))?;
            if segments.is_empty() {
                return Err(invalid("schedule must hold at least one segment"));
            }
            let mut parsed = Vec::with_capacity(segments.len());
            for (i, s) in segments.iter().enumerate() {
                let w1 = angular(finite(&format!("schedule[{i}].omega1_hz"), s.omega1_hz)?);
                let w2 = angular(finite(&format!("schedule[{i}].omega2_hz"), s.omega2_hz)?);
                let d = positive_duration(&format!("schedule[{i}].duration_s"), s.duration_s)?;
                parsed.push(Segment::new(HamiltonianParams::new(w1, w2, g), d));
            }
            let mut schedule =
                PulseSchedule::piecewise(parsed).map_err(|e| invalid(e.to_string()))?;
            if rotating {
                let reference = match spec.omega_bar_hz {
                    Some(w) => angular(w),
                    None => match &schedule {
                        PulseSchedule::Piecewise(s) => s[0].params.mean_frequency(),
                        PulseSchedule::Smooth(p) => p.omega_bar(),
                    },
                };
                schedule = schedule.in_rotating_frame(reference);
            }

            let terms = match &spec.initial_state {
                Some(terms) => terms
                    .iter()
                    .map(|t| {
                        let amp = Complex64::new(
                            finite("initial_state.re", t.re)?,
                            finite("initial_state.im", t.im)?,
                        );
                        Ok((FockIndex::new(t.m1, t.m2), amp))
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?,
                None => vec![(FockIndex::new(1, 0), Complex64::new(1.0, 0.0))],
            };
            if let Some(top) = terms.iter().map(|(i, _)| i.total()).max() {
                if top > n_max {
                    return Err(invalid(format!(
                        "initial_state holds {top} quanta but n_max is {n_max}"
                    )));
                }
            }
            if terms.iter().all(|(_, a)| a.norm() == 0.0) {
                return Err(invalid("initial_state has zero norm"));
            }
            Ok(Experiment::Evolve {
                schedule,
                initial: terms,
                n_max,
                samples,
            })
        }
    }
}
