//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("magnetic field is zero: fringe spacing is undefined")]
    ZeroField,

    #[error("coupling time {t_couple} s differs from free-evolution time {t_free} s: the linear fringe-phase law holds only for equal times")]
    TimeMismatch { t_couple: f64, t_free: f64 },

    #[error(
        "readout position coincides with the initial center x0: de Broglie wavelength is undefined"
    )]
    DegenerateGeometry,

    #[error("grid [{x_min:.3e}, {x_max:.3e}] m does not cover all branch centers with an 8 sigma_t margin (need [{need_min:.3e}, {need_max:.3e}] m)")]
    GridTooNarrow {
        x_min: f64,
        x_max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("edge amplitude is {edge_ratio:.3e} of the peak (limit {limit:.0e}): grid window too small for the requested evolution time")]
    Aliasing { edge_ratio: f64, limit: f64 },

    #[error("no fringe peak above {snr:.1}x the spectral background: visibility too low or spacing unresolved by the grid")]
    NoFringesDetected { snr: f64 },

    #[error("likelihood maximization failed: {0}")]
    NonConvergence(String),

    #[error("likelihood optimum sits at the scan-bracket edge: widen the bracket")]
    BracketMiss,

    #[error("density is not normalized: integral = {0:.6e}, expected 1")]
    UnnormalizedDensity(f64),

    #[error("finite-difference step too large: 1 - |overlap| = {0:.3e} exceeds 0.1")]
    StepTooLarge(f64),

    #[error("finite-difference step too small: 1 - |overlap| = {0:.3e} is lost to cancellation")]
    StepTooSmall(f64),

    #[error("numerical invariant violated: {0}")]
    NumericalInvariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
