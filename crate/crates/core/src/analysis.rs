//! The three experiments (single-magnon beamsplitter, two-magnon HOM / N00N
//! generation, N00N phase versus detuning) and entanglement measures.
//!
//! Protocol schedules have the form hold → pulse → hold. During holds the
//! modes sit at a large gap (50|g| by default) so they barely interact. Hold
//! durations are rounded to whole periods of the hold-gap Rabi oscillation;
//! over a whole period the hold acts as a pure phase on every block, so the
//! populations leaving the protocol are exactly those produced by the pulse.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::beamsplitter::{
    apply_tbs, calibrate_balanced, extract_relative_phase, principal_angle, rabi_params, TbsPulse,
};
use crate::dynamics::{evolve, HamiltonianParams, PulseSchedule, Segment, Trajectory};
use crate::error::{Error, Result};
use crate::fock::{build_basis, FockBasis, FockIndex, Mode, StateVector, DEFAULT_N_MAX};

pub const DEFAULT_HOLD_DETUNING_FACTOR: f64 = 50.0;
/// 2 pi x 5 GHz
pub const DEFAULT_OMEGA_BAR: f64 = 2.0 * PI * 5.0e9;
pub const DEFAULT_HOLD: f64 = 10e-9;
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 200;

/// Largest phase jump accepted between neighbouring scan points.
pub const PHASE_STEP_LIMIT: f64 = 0.5 * PI;

/// Eigenvalues of reduced states below this are dropped from the entropy.
const ENTROPY_EIGEN_FLOOR: f64 = 1e-14;

const VAC_10: FockIndex = FockIndex::new(1, 0);
const VAC_01: FockIndex = FockIndex::new(0, 1);
const PAIR_20: FockIndex = FockIndex::new(2, 0);
const PAIR_11: FockIndex = FockIndex::new(1, 1);
const PAIR_02: FockIndex = FockIndex::new(0, 2);

/// How long the interaction window lasts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseTiming {
    /// Shortest 50:50 duration from [`calibrate_balanced`].
    Balanced,
    /// Explicit duration in seconds.
    Fixed(f64),
    /// No interaction window; the whole schedule is a hold.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub g: Complex64,
    /// Gap during the pulse.
    pub delta_omega: f64,
    pub omega_bar: f64,
    /// Gap during holds; `None` means `50 |g|`.
    pub hold_detuning: Option<f64>,
    pub pre_hold: f64,
    pub post_hold: f64,
    pub timing: PulseTiming,
    pub samples_per_segment: usize,
    pub n_max: usize,
}

impl ProtocolConfig {
    pub fn new(g: Complex64, delta_omega: f64) -> Self {
        Self {
            g,
            delta_omega,
            omega_bar: DEFAULT_OMEGA_BAR,
            hold_detuning: None,
            pre_hold: DEFAULT_HOLD,
            post_hold: DEFAULT_HOLD,
            timing: PulseTiming::Balanced,
            samples_per_segment: DEFAULT_SAMPLES_PER_SEGMENT,
            n_max: DEFAULT_N_MAX,
        }
    }

    pub fn hold_detuning(&self) -> f64 {
        self.hold_detuning
            .unwrap_or(DEFAULT_HOLD_DETUNING_FACTOR * self.g.norm())
    }

    /// Period of the residual exchange oscillation during holds, or `None`
    /// when nothing oscillates.
    pub fn hold_period(&self) -> Option<f64> {
        let omega = (2.0 * self.g.norm()).hypot(self.hold_detuning());
        (omega > 0.0).then(|| 2.0 * PI / omega)
    }

    /// Rounds a requested hold to a whole number (at least one) of hold
    /// periods. Zero stays zero.
    pub fn snap_hold(&self, requested: f64) -> Result<f64> {
        if !(requested.is_finite() && requested >= 0.0) {
            return Err(Error::InvalidDuration(requested));
        }
        if requested == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.hold_period() {
            Some(period) => (requested / period).round().max(1.0) * period,
            None => requested,
        })
    }

    pub fn pulse_duration(&self) -> Result<Option<f64>> {
        match self.timing {
            PulseTiming::Balanced => calibrate_balanced(self.g, self.delta_omega).map(Some),
            PulseTiming::Fixed(tau) if tau.is_finite() && tau > 0.0 => Ok(Some(tau)),
            PulseTiming::Fixed(tau) => Err(Error::InvalidDuration(tau)),
            PulseTiming::Off => Ok(None),
        }
    }

    /// hold → pulse → hold, with holds snapped to whole hold periods.
    pub fn build(&self) -> Result<ProtocolSchedule> {
        let hold = HamiltonianParams::from_detuning(self.omega_bar, self.hold_detuning(), self.g);
        let pre = self.snap_hold(self.pre_hold)?;
        let post = self.snap_hold(self.post_hold)?;
        let pulse = self
            .pulse_duration()?
            .map(|tau| TbsPulse::new(self.delta_omega, self.g, tau, self.omega_bar))
            .transpose()?;

        let mut segments = Vec::new();
        if pre > 0.0 {
            segments.push(Segment::new(hold, pre));
        }
        let window = pulse.map(|p| {
            segments.push(Segment::new(p.params(), p.tau));
            (pre, pre + p.tau)
        });
        if post > 0.0 {
            segments.push(Segment::new(hold, post));
        }
        Ok(ProtocolSchedule {
            schedule: PulseSchedule::piecewise(segments)?,
            pulse,
            window,
            pre_hold: pre,
            post_hold: post,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSchedule {
    pub schedule: PulseSchedule,
    pub pulse: Option<TbsPulse>,
    /// Start and end of the interaction window in seconds.
    pub window: Option<(f64, f64)>,
    pub pre_hold: f64,
    pub post_hold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub protocol: ProtocolSchedule,
    pub trajectory: Trajectory,
}

fn run_protocol(config: &ProtocolConfig, initial: FockIndex) -> Result<ProtocolRun> {
    let protocol = config.build()?;
    let basis = build_basis(config.n_max);
    let psi0 = StateVector::basis_state(&basis, initial)?;
    let trajectory = evolve(&protocol.schedule, &psi0, config.samples_per_segment)?;
    Ok(ProtocolRun {
        protocol,
        trajectory,
    })
}

/// `|1,0>` through hold → pulse → hold.
pub fn run_single_magnon_tbs(config: &ProtocolConfig) -> Result<ProtocolRun> {
    run_protocol(config, VAC_10)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomResult {
    pub run: ProtocolRun,
    pub p20: f64,
    pub p11: f64,
    pub p02: f64,
    /// `1 - P(1,1)` at the end of the run.
    pub dip_depth: f64,
    /// `arg(c_02 / c_20)`; `None` when either amplitude vanishes.
    pub noon_phase: Option<f64>,
}

impl HomResult {
    pub fn trajectory(&self) -> &Trajectory {
        &self.run.trajectory
    }

    pub fn final_state(&self) -> &StateVector {
        self.run.trajectory.final_state()
    }
}

/// `|1,1>` through hold → pulse → hold.
pub fn run_hom(config: &ProtocolConfig) -> Result<HomResult> {
    let run = run_protocol(config, PAIR_11)?;
    let fin = run.trajectory.final_state();
    let (p20, p11, p02) = (
        fin.probability(PAIR_20),
        fin.probability(PAIR_11),
        fin.probability(PAIR_02),
    );
    let noon_phase = extract_relative_phase(fin, PAIR_20, PAIR_02).ok();
    Ok(HomResult {
        run,
        p20,
        p11,
        p02,
        dip_depth: 1.0 - p11,
        noon_phase,
    })
}

/// Constant gap `delta_omega` with coupling `g` for `duration`, starting in
/// `|1,0>`. Used to compare against the analytic Rabi curve.
pub fn run_rabi(
    g: Complex64,
    delta_omega: f64,
    omega_bar: f64,
    duration: f64,
    samples: usize,
) -> Result<Trajectory> {
    let schedule = PulseSchedule::piecewise(vec![Segment::new(
        HamiltonianParams::from_detuning(omega_bar, delta_omega, g),
        duration,
    )])?;
    let basis = build_basis(1);
    evolve(
        &schedule,
        &StateVector::basis_state(&basis, VAC_10)?,
        samples,
    )
}

/// Largest deviation of the simulated `|0,1>` population from
/// `p_max sin^2(big_omega t / 2)` along a trajectory started in `|1,0>`.
pub fn rabi_deviation(trajectory: &Trajectory, g: Complex64, delta_omega: f64) -> Result<f64> {
    let rabi = rabi_params(g, delta_omega)?;
    Ok(trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, s)| (s.probability(VAC_01) - rabi.transfer_probability(t)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub delta_omega: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScanResult {
    /// Admissible gaps, in grid order (rad/s).
    pub detunings: Vec<f64>,
    /// Unwrapped N00N phase `arg(c_02 / c_20)` per point.
    pub phases: Vec<f64>,
    /// Single-magnon phase `arg(c_01 / c_10)` per point, principal value.
    pub single_phases: Vec<f64>,
    /// Calibrated pulse length per point (s).
    pub taus: Vec<f64>,
    /// Single-magnon transfer probability achieved per point.
    pub transfers: Vec<f64>,
    /// Grid points outside `[-2|g|, 2|g|]`.
    pub skipped: Vec<SkippedPoint>,
}

impl PhaseScanResult {
    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }
}

struct ScanPoint {
    tau: f64,
    transfer: f64,
    phi: f64,
    noon_phase: f64,
}

fn scan_point(
    basis: &Arc<FockBasis>,
    g: Complex64,
    delta_omega: f64,
    omega_bar: f64,
) -> Result<ScanPoint> {
    let pulse = TbsPulse::balanced(delta_omega, g, omega_bar)?;
    let single = apply_tbs(&pulse, &StateVector::basis_state(basis, VAC_10)?)?;
    let pair = apply_tbs(&pulse, &StateVector::basis_state(basis, PAIR_11)?)?;
    Ok(ScanPoint {
        tau: pulse.tau,
        transfer: single.probability(VAC_01),
        phi: extract_relative_phase(&single, VAC_10, VAC_01)?,
        noon_phase: extract_relative_phase(&pair, PAIR_20, PAIR_02)?,
    })
}

/// `n` evenly spaced gaps from `start` to `stop` inclusive. A grid over
/// `[-a, a]` is symmetric about zero bit for bit.
pub fn detuning_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|k| ((last - k as f64) * start + k as f64 * stop) / last)
                .collect()
        }
    }
}

/// Balanced pulse at every grid gap; records the N00N phase and the
/// single-magnon phase. Points are evaluated in parallel and returned in grid
/// order. Phases are unwrapped by nearest-branch continuation outward from the
/// point closest to zero gap.
pub fn phase_scan(g: Complex64, grid: &[f64], omega_bar: f64) -> Result<PhaseScanResult> {
    if g.norm() == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if grid.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("detuning grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedGrid);
    }
    let basis = build_basis(DEFAULT_N_MAX);
    let bound = 2.0 * g.norm();
    let evaluated: Vec<(f64, Result<ScanPoint>)> = grid
        .par_iter()
        .map(|&dw| (dw, scan_point(&basis, g, dw, omega_bar)))
        .collect();

    let mut result = PhaseScanResult {
        detunings: Vec::new(),
        phases: Vec::new(),
        single_phases: Vec::new(),
        taus: Vec::new(),
        transfers: Vec::new(),
        skipped: Vec::new(),
    };
    for (dw, point) in evaluated {
        match point {
            Ok(p) => {
                result.detunings.push(dw);
                result.phases.push(p.noon_phase);
                result.single_phases.push(p.phi);
                result.taus.push(p.tau);
                result.transfers.push(p.transfer);
            }
            Err(e @ Error::UnreachableBalance { .. }) => result.skipped.push(SkippedPoint {
                delta_omega: dw,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    debug_assert!(result.detunings.iter().all(|d| d.abs() <= bound));
    if let Some(anchor) = result
        .detunings
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
    {
        result.phases = unwrap_from(&result.phases, &result.detunings, anchor)?;
    }
    Ok(result)
}

/// Nearest-branch continuation of `phases` outward from index `anchor`, which
/// keeps its principal value.
fn unwrap_from(phases: &[f64], detunings: &[f64], anchor: usize) -> Result<Vec<f64>> {
    let mut out = phases.to_vec();
    let step = |from: usize, to: usize, out: &mut Vec<f64>| -> Result<()> {
        let jump = principal_angle(phases[to] - out[from]);
        if jump.abs() >= PHASE_STEP_LIMIT {
            return Err(Error::PhaseScanTooCoarse {
                from: detunings[from],
                to: detunings[to],
                step: jump,
            });
        }
        out[to] = out[from] + jump;
        Ok(())
    };
    for i in anchor + 1..phases.len() {
        step(i - 1, i, &mut out)?;
    }
    for i in (0..anchor).rev() {
        step(i + 1, i, &mut out)?;
    }
    Ok(out)
}

/// Reduced density matrix of one mode over its occupations `0..=n_max`.
pub fn reduced_density_matrix(state: &StateVector, keep: Mode) -> DMatrix<Complex64> {
    let n_max = state.basis().n_max();
    let dim = n_max + 1;
    // amplitude as (kept occupation, traced occupation)
    let amp = |kept: usize, traced: usize| -> Complex64 {
        let idx = match keep {
            Mode::First => FockIndex::new(kept, traced),
            Mode::Second => FockIndex::new(traced, kept),
        };
        state.amplitude_or_zero(idx)
    };
    DMatrix::from_fn(dim, dim, |a, b| {
        (0..=n_max - a.max(b))
            .map(|k| amp(a, k) * amp(b, k).conj())
            .sum()
    })
}

/// Von Neumann entropy (nats) of the mode-1 reduced state.
pub fn entanglement_entropy(state: &StateVector) -> f64 {
    let rho = reduced_density_matrix(state, Mode::First);
    let eig = SymmetricEigen::new(rho);
    eig.eigenvalues
        .iter()
        .filter(|&&p| p > ENTROPY_EIGEN_FLOOR)
        .map(|&p| -p * p.ln())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonFidelity {
    /// `|<N00N(phi)|psi>|^2` at the requested phase.
    pub fidelity: f64,
    /// Phase maximizing the overlap, `arg(c_02 / c_20)`.
    pub best_phase: f64,
    /// `(|c_20| + |c_02|)^2 / 2`
    pub best_fidelity: f64,
}

/// Overlap with `(|2,0> + e^{i phi} |0,2>) / sqrt(2)`.
pub fn noon_fidelity(state: &StateVector, phi: f64) -> NoonFidelity {
    let c20 = state.amplitude_or_zero(PAIR_20);
    let c02 = state.amplitude_or_zero(PAIR_02);
    let overlap = (c20 + Complex64::from_polar(1.0, -phi) * c02) * std::f64::consts::FRAC_1_SQRT_2;
    let best_phase = if c20.norm() == 0.0 || c02.norm() == 0.0 {
        0.0
    } else {
        (c02 * c20.conj()).arg()
    };
    let best = c20.norm() + c02.norm();
    NoonFidelity {
        fidelity: overlap.norm_sqr(),
        best_phase,
        best_fidelity: 0.5 * best * best,
    }
}
