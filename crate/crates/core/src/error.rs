use thiserror::Error;

use crate::fock::FockIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has zero norm; at least one nonzero amplitude is required")]
    DegenerateState,

    #[error("Fock index {index} lies outside the basis with n_max = {n_max}")]
    IndexOutOfRange { index: FockIndex, n_max: usize },

    #[error("operands live on different bases (n_max {left} vs {right})")]
    BasisMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian: max |H - H^dagger| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("duration must be finite and non-negative, got {0}")]
    InvalidDuration(f64),

    #[error("at least one sample per segment is required")]
    NoSamples,

    #[error("pulse schedule is empty")]
    EmptySchedule,

    #[error("initial state is not normalized: norm^2 = {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("smooth profile must be sampled on a uniform grid: {0}")]
    NonUniformSampling(String),

    #[error("coupling rate g must be nonzero")]
    ZeroCoupling,

    #[error(
        "balanced splitting is unreachable: |delta_omega| = {delta_omega:e} rad/s exceeds the bound 2|g| = {bound:e} rad/s"
    )]
    UnreachableBalance { delta_omega: f64, bound: f64 },

    #[error("relative phase between {from} and {to} is undefined: amplitude modulus {modulus:e} is below 1e-6")]
    UndefinedPhase {
        from: FockIndex,
        to: FockIndex,
        modulus: f64,
    },

    #[error(
        "phase scan grid too coarse: phase step of {step:.3} rad between {from:e} and {to:e} rad/s"
    )]
    PhaseScanTooCoarse { from: f64, to: f64, step: f64 },

    #[error("detuning grid must be strictly increasing")]
    UnsortedGrid,

    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),

    #[error("plot kind {requested} does not match the supplied result ({actual})")]
    PlotKindMismatch {
        requested: &'static str,
        actual: &'static str,
    },

    #[error("nothing to plot: {0}")]
    EmptyPlot(&'static str),
}
