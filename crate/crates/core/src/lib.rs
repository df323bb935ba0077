//! Simulation of time-domain two-magnon interference.
//!
//! Two localized bosonic modes with tunable frequencies `omega1(t)`,
//! `omega2(t)` and a fixed coherent coupling `g` are driven by rectangular
//! frequency pulses. Bringing the modes into resonance for a calibrated window
//! realizes a temporal beamsplitter; applied to `|1,1>` it produces the
//! Hong-Ou-Mandel dip and a two-magnon N00N state whose phase is set by the
//! detuning during the pulse.
//!
//! Modules, bottom-up:
//! - [`fock`]: truncated two-mode Fock space and block-diagonal operators
//! - [`dynamics`]: Hamiltonian assembly, schedules, exact and midpoint propagation
//! - [`beamsplitter`]: Rabi parameters, 50:50 calibration, pulse application
//! - [`analysis`]: single-magnon, HOM and phase-scan experiments; entanglement measures
//! - [`cli`]: scenario files, CSV/JSON/SVG output

pub mod analysis;
pub mod beamsplitter;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Hz to rad/s.
pub fn angular(hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * hz
}
