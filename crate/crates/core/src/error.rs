use thiserror::Error;

use crate::fitting::LorentzianFit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The two-photon pole `γ + Re Γ (+ D k²)` is not strictly positive.
    #[error("degenerate two-photon pole: gamma + Re(Gamma) = {0:e} must be > 0")]
    DegeneratePole(f64),

    #[error("contrast undefined: on- and off-resonance powers are both zero")]
    UndefinedContrast,

    #[error("line peak at grid edge (index {index} of {len})")]
    PeakAtEdge { index: usize, len: usize },

    #[error("transfer function vanishes or is not finite at omega = {0:e} rad/s")]
    ZeroTransfer(f64),

    #[error("phase jump of {jump:.3} rad between finite-difference samples; step too coarse")]
    PhaseJump { jump: f64 },

    #[error("finite-difference delay unresolved: {coarse:e} s vs {fine:e} s at half step")]
    StepUnresolved { coarse: f64, fine: f64 },

    #[error("time window {window:e} s too short for pulse duration {duration:e} s plus delay {delay:e} s")]
    Aliasing { window: f64, duration: f64, delay: f64 },

    #[error("pulse has zero energy")]
    ZeroEnergy,

    #[error("beam leaks onto the grid edge: edge power fraction {0:e} exceeds 1e-6")]
    EdgeLeakage(f64),

    #[error("gaussian width fit failed: overlap {0:.4} < 0.5")]
    FitFailure(f64),

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        best: Box<LorentzianFit>,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("rank-deficient regression: all abscissae are equal")]
    RankDeficient,

    #[error("inconsistent calibration: {0}")]
    Inconsistent(String),

    #[error("outside weak-EIT validity: |S f| = {0:.3} > 0.3")]
    OutOfValidity(f64),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
