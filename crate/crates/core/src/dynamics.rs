//! Hamiltonian assembly, pulse schedules and time evolution.
//!
//! Units: hbar = 1, every frequency is an angular frequency in rad/s and every
//! time is in seconds.
//!
//! Piecewise-constant schedules are propagated exactly: each segment's
//! Hamiltonian is diagonalized block by block and `exp(-i H t)` is formed from
//! the eigenpairs. Smooth schedules use the midpoint exponential (first-order
//! Magnus) rule, which is second-order accurate in the step size.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{hop_operator, populations, BlockOperator, FockBasis, FockIndex, StateVector};

/// Allowed deviation of `<psi|psi>` from one for inputs to the integrators.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Relative Hermiticity tolerance accepted by [`propagate_segment`].
const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g: Complex64,
}

impl HamiltonianParams {
    pub fn new(omega1: f64, omega2: f64, g: Complex64) -> Self {
        Self { omega1, omega2, g }
    }

    /// Splits the gap symmetrically: `omega1,2 = omega_bar +- delta_omega / 2`.
    pub fn from_detuning(omega_bar: f64, delta_omega: f64, g: Complex64) -> Self {
        Self {
            omega1: omega_bar + 0.5 * delta_omega,
            omega2: omega_bar - 0.5 * delta_omega,
            g,
        }
    }

    /// Frequency gap `omega1 - omega2`.
    pub fn delta_omega(&self) -> f64 {
        self.omega1 - self.omega2
    }

    pub fn mean_frequency(&self) -> f64 {
        0.5 * (self.omega1 + self.omega2)
    }

    /// Both mode frequencies moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            omega1: self.omega1 + delta,
            omega2: self.omega2 + delta,
            g: self.g,
        }
    }

    fn check_finite(&self) -> Result<()> {
        if !self.omega1.is_finite() {
            return Err(Error::NonFinite("omega1"));
        }
        if !self.omega2.is_finite() {
            return Err(Error::NonFinite("omega2"));
        }
        if !(self.g.re.is_finite() && self.g.im.is_finite()) {
            return Err(Error::NonFinite("g"));
        }
        Ok(())
    }
}

/// `omega1 m1^dagger m1 + omega2 m2^dagger m2 + g m1^dagger m2 + conj(g) m2^dagger m1`
pub fn assemble_hamiltonian(params: &HamiltonianParams, basis: &Arc<FockBasis>) -> BlockOperator {
    let hop = hop_operator(basis).weighted(params.g);
    BlockOperator::from_fn(basis, true, |n, r, c| {
        let mut h = hop.block(n)[(r, c)];
        if r == c {
            // local index r is m2
            let (m1, m2) = ((n - r) as f64, r as f64);
            h += m1 * params.omega1 + m2 * params.omega2;
        }
        h
    })
}

#[derive(Debug, Clone)]
struct BlockEigen {
    /// Mean of the diagonal, removed before diagonalizing and restored as a
    /// block phase.
    shift: f64,
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

/// Eigendecomposition of a Hermitian [`BlockOperator`], from which
/// `exp(-i H t)` can be evaluated for any `t`.
#[derive(Debug, Clone)]
pub struct SegmentPropagator {
    basis: Arc<FockBasis>,
    blocks: Vec<BlockEigen>,
}

impl SegmentPropagator {
    pub fn new(hamiltonian: &BlockOperator) -> Result<Self> {
        let scale = hamiltonian
            .blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|c| c.norm())
            .fold(1.0, f64::max);
        let defect = hamiltonian.hermiticity_defect();
        if defect.is_nan() || defect > HERMITICITY_TOLERANCE * scale {
            return Err(Error::NotHermitian { defect });
        }
        let blocks = hamiltonian
            .blocks()
            .iter()
            .map(|b| {
                let n = b.nrows();
                let shift = b.diagonal().iter().map(|c| c.re).sum::<f64>() / n as f64;
                let mut centered = b.clone();
                for i in 0..n {
                    centered[(i, i)] -= shift;
                }
                // symmetrize so round-off in the input cannot leak into the
                // eigenvectors
                let centered = (&centered + centered.adjoint()).scale(0.5);
                let eig = SymmetricEigen::new(centered);
                BlockEigen {
                    shift,
                    values: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(Self {
            basis: Arc::clone(hamiltonian.basis()),
            blocks,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    /// `exp(-i H t)` as a block operator.
    pub fn unitary(&self, t: f64) -> Result<BlockOperator> {
        check_duration(t)?;
        if t == 0.0 {
            return Ok(BlockOperator::identity(&self.basis));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|e| {
                let phases = phase_factors(e, t);
                let scaled = DMatrix::from_fn(e.vectors.nrows(), e.vectors.ncols(), |r, c| {
                    e.vectors[(r, c)] * phases[c]
                });
                scaled * e.vectors.adjoint()
            })
            .collect();
        Ok(BlockOperator::from_blocks(&self.basis, blocks, false))
    }

    /// `exp(-i H t) |state>` without forming the full unitary.
    pub fn evolve_state(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        check_duration(t)?;
        crate::fock::ensure_same_basis(&self.basis, state.basis())?;
        if t == 0.0 {
            return Ok(state.clone());
        }
        let mut out = state.amplitudes().clone();
        for (n, e) in self.blocks.iter().enumerate() {
            let range = self.basis.block_range(n);
            let block = state.amplitudes().rows(range.start, range.len());
            let mut coeffs = e.vectors.ad_mul(&block);
            for (c, p) in coeffs.iter_mut().zip(phase_factors(e, t)) {
                *c *= p;
            }
            out.rows_mut(range.start, range.len())
                .copy_from(&(&e.vectors * coeffs));
        }
        Ok(StateVector::from_amplitudes(Arc::clone(&self.basis), out))
    }
}

fn phase_factors(e: &BlockEigen, t: f64) -> Vec<Complex64> {
    let global = Complex64::from_polar(1.0, -e.shift * t);
    e.values
        .iter()
        .map(|&lambda| global * Complex64::from_polar(1.0, -lambda * t))
        .collect()
}

fn check_duration(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDuration(t))
    }
}

/// `U = exp(-i H tau)`, computed per block from the Hermitian
/// eigendecomposition of `H`.
pub fn propagate_segment(hamiltonian: &BlockOperator, tau: f64) -> Result<BlockOperator> {
    check_duration(tau)?;
    SegmentPropagator::new(hamiltonian)?.unitary(tau)
}

/// Constant Hamiltonian held for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub params: HamiltonianParams,
    pub duration: f64,
}

impl Segment {
    pub fn new(params: HamiltonianParams, duration: f64) -> Self {
        Self { params, duration }
    }
}

/// Gap `delta_omega(t)` sampled on a uniform grid, with the mean frequency and
/// coupling held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothProfile {
    omega_bar: f64,
    g: Complex64,
    dt: f64,
    delta_omega: Vec<f64>,
}

impl SmoothProfile {
    /// `times` must be uniformly spaced (relative deviation below 1e-9) and
    /// hold at least two samples.
    pub fn new(times: &[f64], delta_omega: Vec<f64>, omega_bar: f64, g: Complex64) -> Result<Self> {
        if times.len() != delta_omega.len() {
            return Err(Error::NonUniformSampling(format!(
                "{} sample times but {} values",
                times.len(),
                delta_omega.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::NonUniformSampling(
                "at least two samples are required".into(),
            ));
        }
        let steps = times.len() - 1;
        let dt = (times[steps] - times[0]) / steps as f64;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::NonUniformSampling(format!(
                "step {dt} is not positive"
            )));
        }
        for (k, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if ((step - dt) / dt).abs() > 1e-9 {
                return Err(Error::NonUniformSampling(format!(
                    "step {k} is {step:e} s, expected {dt:e} s"
                )));
            }
        }
        if delta_omega.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("delta_omega sample"));
        }
        Ok(Self {
            omega_bar,
            g,
            dt,
            delta_omega,
        })
    }

    /// Samples `f` at `steps + 1` points spanning `[0, duration]`.
    pub fn sample(
        f: impl Fn(f64) -> f64,
        duration: f64,
        steps: usize,
        omega_bar: f64,
        g: Complex64,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::NoSamples);
        }
        let dt = duration / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(&times, values, omega_bar, g)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.delta_omega.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn omega_bar(&self) -> f64 {
        self.omega_bar
    }

    pub fn g(&self) -> Complex64 {
        self.g
    }

    pub fn samples(&self) -> &[f64] {
        &self.delta_omega
    }

    /// Hamiltonian parameters at the midpoint of step `k`, using the linear
    /// interpolant of the samples.
    pub fn midpoint_params(&self, k: usize) -> HamiltonianParams {
        let gap = 0.5 * (self.delta_omega[k] + self.delta_omega[k + 1]);
        HamiltonianParams::from_detuning(self.omega_bar, gap, self.g)
    }
}

/// Either rectangular segments or a sampled smooth gap profile.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSchedule {
    Piecewise(Vec<Segment>),
    Smooth(SmoothProfile),
}

impl PulseSchedule {
    /// Rejects non-positive or non-finite durations and non-finite parameters.
    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::InvalidDuration(s.duration));
            }
            s.params.check_finite()?;
        }
        Ok(Self::Piecewise(segments))
    }

    pub fn total_duration(&self) -> f64 {
        match self {
            Self::Piecewise(segments) => segments.iter().map(|s| s.duration).sum(),
            Self::Smooth(profile) => profile.duration(),
        }
    }

    /// The same schedule seen from a frame rotating at `omega_ref`: both mode
    /// frequencies are lowered by `omega_ref`. Populations and relative phases
    /// within a block are unchanged.
    pub fn in_rotating_frame(&self, omega_ref: f64) -> Self {
        match self {
            Self::Piecewise(segments) => Self::Piecewise(
                segments
                    .iter()
                    .map(|s| Segment::new(s.params.shifted(-omega_ref), s.duration))
                    .collect(),
            ),
            Self::Smooth(p) => Self::Smooth(SmoothProfile {
                omega_bar: p.omega_bar - omega_ref,
                ..p.clone()
            }),
        }
    }
}

/// Sampled evolution. `times[0] = 0` and times are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Populations per sample, in basis order.
    pub populations: Vec<Vec<f64>>,
}

impl Trajectory {
    fn start(psi0: &StateVector) -> Self {
        let mut t = Self {
            times: Vec::new(),
            states: Vec::new(),
            populations: Vec::new(),
        };
        t.push(0.0, psi0.clone());
        t
    }

    fn push(&mut self, time: f64, state: StateVector) {
        self.populations
            .push(populations(&state).into_iter().map(|(_, p)| p).collect());
        self.times.push(time);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.states[0].basis()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Time series of `|c|^2` for one basis state.
    pub fn population_series(&self, index: FockIndex) -> Vec<f64> {
        self.states.iter().map(|s| s.probability(index)).collect()
    }
}

fn check_normalized(psi: &StateVector) -> Result<()> {
    let norm_sqr = psi.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm_sqr });
    }
    Ok(())
}

/// Time-ordered evolution through a piecewise-constant schedule.
///
/// Each segment is split into `samples_per_segment` recorded instants. Every
/// sample is obtained from the segment's start state with the exact
/// propagator, so the sampling density does not change the result. Smooth
/// schedules are forwarded to [`evolve_smooth`] and record every step.
pub fn evolve(
    schedule: &PulseSchedule,
    psi0: &StateVector,
    samples_per_segment: usize,
) -> Result<Trajectory> {
    let segments = match schedule {
        PulseSchedule::Piecewise(segments) => segments,
        PulseSchedule::Smooth(profile) => return evolve_smooth(profile, psi0),
    };
    if segments.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if samples_per_segment == 0 {
        return Err(Error::NoSamples);
    }
    check_normalized(psi0)?;

    let basis = psi0.basis();
    let mut traj = Trajectory::start(psi0);
    let mut t0 = 0.0;
    let mut state = psi0.clone();
    for segment in segments {
        let propagator = SegmentPropagator::new(&assemble_hamiltonian(&segment.params, basis))?;
        let dt = segment.duration / samples_per_segment as f64;
        for k in 1..=samples_per_segment {
            let elapsed = if k == samples_per_segment {
                segment.duration
            } else {
                k as f64 * dt
            };
            traj.push(t0 + elapsed, propagator.evolve_state(&state, elapsed)?);
        }
        state = traj.final_state().clone();
        t0 += segment.duration;
    }
    Ok(traj)
}

/// Midpoint-exponential integration of a smooth gap profile: each step applies
/// `exp(-i H(t_mid) dt)`. Global error is O(dt^2) for smooth profiles.
pub fn evolve_smooth(profile: &SmoothProfile, psi0: &StateVector) -> Result<Trajectory> {
    check_normalized(psi0)?;
    let basis = psi0.basis();
    let mut traj = Trajectory::start(psi0);
    let mut state = psi0.clone();
    for k in 0..profile.steps() {
        let h = assemble_hamiltonian(&profile.midpoint_params(k), basis);
        state = SegmentPropagator::new(&h)?.evolve_state(&state, profile.dt)?;
        traj.push((k + 1) as f64 * profile.dt, state.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, make_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    const G: f64 = 2.0 * PI * 20e6;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(basis: &Arc<FockBasis>, m1: usize, m2: usize) -> StateVector {
        StateVector::basis_state(basis, FockIndex::new(m1, m2)).unwrap()
    }

    #[test]
    fn hamiltonian_blocks_match_closed_form() {
        let basis = build_basis(2);
        let (w1, w2, g) = (1.3, -0.4, c(0.25, 0.7));
        let h = assemble_hamiltonian(&HamiltonianParams::new(w1, w2, g), &basis);
        assert_eq!(h.block(0)[(0, 0)], c(0.0, 0.0));

        let b1 = h.block(1);
        let expected1 = DMatrix::from_row_slice(2, 2, &[c(w1, 0.0), g, g.conj(), c(w2, 0.0)]);
        assert!((b1 - expected1).norm() < 1e-15);

        let s = g * SQRT_2;
        let z = c(0.0, 0.0);
        let expected2 = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0 * w1, 0.0),
                s,
                z,
                s.conj(),
                c(w1 + w2, 0.0),
                s,
                z,
                s.conj(),
                c(2.0 * w2, 0.0),
            ],
        );
        assert!((h.block(2) - expected2).norm() < 1e-15);
        assert!(h.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn pure_hop_block() {
        let basis = build_basis(2);
        let h = assemble_hamiltonian(&HamiltonianParams::new(0.0, 0.0, c(1.0, 0.0)), &basis);
        let expected =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(h.block(1), &expected);
    }

    #[test]
    fn single_quantum_splitting_is_generalized_rabi_frequency() {
        let basis = build_basis(1);
        for &(dw, g) in &[(0.0, 1.0), (3.0, 0.5), (-2.0, 2.0), (10.0, 0.1)] {
            let h = assemble_hamiltonian(
                &HamiltonianParams::from_detuning(7.0, dw, c(g, 0.0)),
                &basis,
            );
            let eig = SymmetricEigen::new(h.block(1).clone());
            let split = (eig.eigenvalues[0] - eig.eigenvalues[1]).abs();
            assert_abs_diff_eq!(split, (dw * dw + 4.0 * g * g).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        let basis = build_basis(3);
        let h = assemble_hamiltonian(&HamiltonianParams::new(2.0, 1.0, c(0.3, 0.1)), &basis);
        assert_eq!(
            propagate_segment(&h, 0.0).unwrap(),
            BlockOperator::identity(&basis)
        );
    }

    #[test]
    fn quarter_period_is_balanced_splitter() {
        let basis = build_basis(2);
        let h = assemble_hamiltonian(&HamiltonianParams::new(0.0, 0.0, c(G, 0.0)), &basis);
        let u = propagate_segment(&h, PI / (4.0 * G)).unwrap();
        let s = FRAC_1_SQRT_2;
        let expected =
            DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, -s), c(0.0, -s), c(s, 0.0)]);
        assert!((u.block(1) - expected).norm() < 1e-12);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn half_period_swaps() {
        let basis = build_basis(2);
        let h = assemble_hamiltonian(&HamiltonianParams::new(0.0, 0.0, c(G, 0.0)), &basis);
        let u = propagate_segment(&h, PI / (2.0 * G)).unwrap();
        let out = u.apply(&ket(&basis, 1, 0)).unwrap();
        assert!((out.amplitude(FockIndex::new(0, 1)).unwrap() - c(0.0, -1.0)).norm() < 1e-12);
        assert!(out.amplitude(FockIndex::new(1, 0)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let basis = build_basis(1);
        let hop = crate::fock::hop_operator(&basis);
        assert!(matches!(
            propagate_segment(&hop.forward, 1.0),
            Err(Error::NotHermitian { .. })
        ));
        let h = assemble_hamiltonian(&HamiltonianParams::new(0.0, 0.0, c(1.0, 0.0)), &basis);
        assert_eq!(
            propagate_segment(&h, -1.0),
            Err(Error::InvalidDuration(-1.0))
        );
    }

    #[test]
    fn evolve_balanced_pulse_from_single_magnon() {
        let basis = build_basis(2);
        let seg = Segment::new(HamiltonianParams::new(0.0, 0.0, c(G, 0.0)), PI / (4.0 * G));
        let traj = evolve(
            &PulseSchedule::piecewise(vec![seg]).unwrap(),
            &ket(&basis, 1, 0),
            50,
        )
        .unwrap();
        assert_eq!(traj.len(), 51);
        assert_eq!(traj.times[0], 0.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        let fin = traj.final_state();
        assert_abs_diff_eq!(fin.probability(FockIndex::new(1, 0)), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fin.probability(FockIndex::new(0, 1)), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn split_segments_compose() {
        let basis = build_basis(2);
        let p = HamiltonianParams::new(0.0, 0.0, c(G, 0.0));
        let one = PulseSchedule::piecewise(vec![Segment::new(p, PI / (4.0 * G))]).unwrap();
        let two = PulseSchedule::piecewise(vec![Segment::new(p, PI / (8.0 * G)); 2]).unwrap();
        let psi = ket(&basis, 1, 0);
        let a = evolve(&one, &psi, 1).unwrap();
        let b = evolve(&two, &psi, 3).unwrap();
        let diff = a.final_state().amplitudes() - b.final_state().amplitudes();
        assert!(diff.camax() < 1e-12);
    }

    #[test]
    fn zero_coupling_freezes_populations() {
        let basis = build_basis(2);
        let psi = make_state(
            &basis,
            &[
                (FockIndex::new(1, 1), c(1.0, 0.0)),
                (FockIndex::new(1, 0), c(0.0, 2.0)),
            ],
        )
        .unwrap();
        let schedule = PulseSchedule::piecewise(vec![
            Segment::new(HamiltonianParams::new(3e9, 1e9, c(0.0, 0.0)), 1e-8),
            Segment::new(HamiltonianParams::new(1e9, 4e9, c(0.0, 0.0)), 2e-8),
        ])
        .unwrap();
        let traj = evolve(&schedule, &psi, 20).unwrap();
        for pops in &traj.populations {
            for (p, p0) in pops.iter().zip(&traj.populations[0]) {
                assert_abs_diff_eq!(p, p0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn evolve_rejects_bad_input() {
        let basis = build_basis(2);
        let psi = ket(&basis, 1, 0);
        assert_eq!(
            evolve(&PulseSchedule::Piecewise(vec![]), &psi, 1),
            Err(Error::EmptySchedule)
        );
        let seg = Segment::new(HamiltonianParams::new(0.0, 0.0, c(1.0, 0.0)), 1.0);
        let sched = PulseSchedule::piecewise(vec![seg]).unwrap();
        let unnormalized =
            StateVector::from_amplitudes(basis.clone(), psi.amplitudes() * c(2.0, 0.0));
        assert!(matches!(
            evolve(&sched, &unnormalized, 1),
            Err(Error::Unnormalized { .. })
        ));
        assert_eq!(evolve(&sched, &psi, 0), Err(Error::NoSamples));
        assert_eq!(
            PulseSchedule::piecewise(vec![Segment::new(seg.params, 0.0)]),
            Err(Error::InvalidDuration(0.0))
        );
    }

    #[test]
    fn smooth_constant_profile_matches_exact() {
        let basis = build_basis(2);
        let psi = ket(&basis, 1, 1);
        let (wbar, dw, g, t) = (2.0 * PI * 1e9, 0.7 * G, c(G, 0.0), 3e-8);
        let profile = SmoothProfile::sample(|_| dw, t, 37, wbar, g).unwrap();
        let smooth = evolve_smooth(&profile, &psi).unwrap();
        let exact = evolve(
            &PulseSchedule::piecewise(vec![Segment::new(
                HamiltonianParams::from_detuning(wbar, dw, g),
                t,
            )])
            .unwrap(),
            &psi,
            1,
        )
        .unwrap();
        let diff = smooth.final_state().amplitudes() - exact.final_state().amplitudes();
        assert!(diff.camax() < 1e-10, "{}", diff.camax());
    }

    #[test]
    fn single_step_profile_is_one_exponential() {
        let basis = build_basis(1);
        let g = c(1.0, 0.0);
        let profile = SmoothProfile::new(&[0.0, 0.5], vec![1.0, 3.0], 0.0, g).unwrap();
        let traj = evolve_smooth(&profile, &ket(&basis, 1, 0)).unwrap();
        assert_eq!(traj.len(), 2);
        let u = propagate_segment(
            &assemble_hamiltonian(&HamiltonianParams::from_detuning(0.0, 2.0, g), &basis),
            0.5,
        )
        .unwrap();
        let direct = u.apply(&ket(&basis, 1, 0)).unwrap();
        assert!((traj.final_state().amplitudes() - direct.amplitudes()).camax() < 1e-15);
    }

    #[test]
    fn nonuniform_sampling_is_rejected() {
        let err = SmoothProfile::new(&[0.0, 1.0, 2.5], vec![0.0; 3], 0.0, c(1.0, 0.0));
        assert!(matches!(err, Err(Error::NonUniformSampling(_))));
        let err = SmoothProfile::new(&[0.0], vec![0.0], 0.0, c(1.0, 0.0));
        assert!(matches!(err, Err(Error::NonUniformSampling(_))));
    }

    #[test]
    fn rotating_frame_preserves_populations() {
        let basis = build_basis(2);
        let wbar = 2.0 * PI * 4e9;
        let sched = PulseSchedule::piecewise(vec![
            Segment::new(
                HamiltonianParams::from_detuning(wbar, 50.0 * G, c(G, 0.0)),
                3e-9,
            ),
            Segment::new(
                HamiltonianParams::from_detuning(wbar, 0.0, c(G, 0.0)),
                PI / (4.0 * G),
            ),
        ])
        .unwrap();
        let psi = ket(&basis, 1, 1);
        let lab = evolve(&sched, &psi, 5).unwrap();
        let rot = evolve(&sched.in_rotating_frame(wbar), &psi, 5).unwrap();
        for (a, b) in lab.populations.iter().zip(&rot.populations) {
            for (x, y) in a.iter().zip(b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }
}
