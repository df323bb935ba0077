//! Temporal beamsplitter: Rabi parameters, 50:50 calibration, pulse
//! application and relative-phase extraction.
//!
//! Phase convention: after a pulse acting on `|1,0>`, the single-magnon phase
//! is `phi = arg(c_01 / c_10)`. For a balanced pulse the two-magnon output of
//! `|1,1>` then carries `arg(c_02 / c_20) = 2 phi + pi (mod 2 pi)`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::dynamics::{assemble_hamiltonian, HamiltonianParams, SegmentPropagator};
use crate::error::{Error, Result};
use crate::fock::{FockIndex, StateVector};

/// Amplitudes with modulus below this have no meaningful phase.
pub const PHASE_AMPLITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams {
    /// Generalized Rabi angular frequency `sqrt(4|g|^2 + delta_omega^2)`.
    pub big_omega: f64,
    /// Peak single-magnon transfer probability `4|g|^2 / (4|g|^2 + delta_omega^2)`.
    pub p_max: f64,
}

impl RabiParams {
    /// Analytic single-magnon transfer probability after interacting for `t`.
    pub fn transfer_probability(&self, t: f64) -> f64 {
        let s = (0.5 * self.big_omega * t).sin();
        self.p_max * s * s
    }
}

pub fn rabi_params(g: Complex64, delta_omega: f64) -> Result<RabiParams> {
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if !(g_abs.is_finite() && delta_omega.is_finite()) {
        return Err(Error::NonFinite("rabi parameters"));
    }
    let four_g2 = 4.0 * g_abs * g_abs;
    let big_omega = (2.0 * g_abs).hypot(delta_omega);
    Ok(RabiParams {
        big_omega,
        p_max: four_g2 / (four_g2 + delta_omega * delta_omega),
    })
}

/// Shortest interaction time giving a 50% single-magnon transfer at gap
/// `delta_omega`. Requires `|delta_omega| <= 2|g|`.
pub fn calibrate_balanced(g: Complex64, delta_omega: f64) -> Result<f64> {
    let rabi = rabi_params(g, delta_omega)?;
    let bound = 2.0 * g.norm();
    if delta_omega.abs() > bound {
        return Err(Error::UnreachableBalance { delta_omega, bound });
    }
    // p_max sin^2(x) = 1/2 with x = big_omega tau / 2
    let s = (0.5 / rabi.p_max).sqrt().min(1.0);
    Ok(2.0 * s.asin() / rabi.big_omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbsPulse {
    pub delta_omega: f64,
    pub g: Complex64,
    pub tau: f64,
    pub omega_bar: f64,
}

impl TbsPulse {
    /// Pulse of duration `tau` at gap `delta_omega`.
    pub fn new(delta_omega: f64, g: Complex64, tau: f64, omega_bar: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidDuration(tau));
        }
        Ok(Self {
            delta_omega,
            g,
            tau,
            omega_bar,
        })
    }

    /// Pulse calibrated with [`calibrate_balanced`].
    pub fn balanced(delta_omega: f64, g: Complex64, omega_bar: f64) -> Result<Self> {
        let tau = calibrate_balanced(g, delta_omega)?;
        Self::new(delta_omega, g, tau, omega_bar)
    }

    pub fn params(&self) -> HamiltonianParams {
        HamiltonianParams::from_detuning(self.omega_bar, self.delta_omega, self.g)
    }

    pub fn rabi(&self) -> Result<RabiParams> {
        rabi_params(self.g, self.delta_omega)
    }

    /// Whether the pulse transfers a single magnon with probability 1/2
    /// within 1e-10.
    pub fn is_balanced(&self) -> bool {
        self.rabi()
            .map(|r| (r.transfer_probability(self.tau) - 0.5).abs() <= 1e-10)
            .unwrap_or(false)
    }
}

pub fn apply_tbs(pulse: &TbsPulse, psi: &StateVector) -> Result<StateVector> {
    let h = assemble_hamiltonian(&pulse.params(), psi.basis());
    SegmentPropagator::new(&h)?.evolve_state(psi, pulse.tau)
}

/// Closed-form `exp(-i tau [[dw/2, g], [conj(g), -dw/2]])` on the
/// single-magnon block `{|1,0>, |0,1>}`, via
/// `cos(W tau / 2) I - i sin(W tau / 2) (n . sigma)`.
///
/// The mean-frequency phase `exp(-i omega_bar tau)` is not included.
pub fn tbs_unitary_oracle(g: Complex64, delta_omega: f64, tau: f64) -> Matrix2<Complex64> {
    let half = (delta_omega * 0.5).hypot(g.norm());
    let (sin, cos) = (half * tau).sin_cos();
    // sin(h tau) / h, continuous at h = 0
    let sinc = if half == 0.0 { tau } else { sin / half };
    let minus_i = Complex64::new(0.0, -1.0);
    let generator = Matrix2::new(
        Complex64::from(0.5 * delta_omega),
        g,
        g.conj(),
        Complex64::from(-0.5 * delta_omega),
    );
    Matrix2::identity() * Complex64::from(cos) + generator * (minus_i * sinc)
}

/// `arg(c_to / c_from)` in `(-pi, pi]`.
pub fn extract_relative_phase(state: &StateVector, from: FockIndex, to: FockIndex) -> Result<f64> {
    let a = state.amplitude_or_zero(from);
    let b = state.amplitude_or_zero(to);
    let modulus = a.norm().min(b.norm());
    if modulus < PHASE_AMPLITUDE_FLOOR {
        return Err(Error::UndefinedPhase { from, to, modulus });
    }
    Ok(principal_angle((b * a.conj()).arg()))
}

/// Maps an angle into `(-pi, pi]`.
pub fn principal_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}
