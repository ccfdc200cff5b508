//! Physical constants (SI).

use std::f64::consts::TAU;

/// Planck constant, J·s (exact since the 2019 SI redefinition).
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Reduced Planck constant h/2π, J·s. Derived from the exact h rather than
/// the 10-digit CODATA rounding so that h and hbar based routes agree to
/// machine precision.
pub const HBAR: f64 = PLANCK_H / TAU;

/// Mass of ⁸⁷Rb, kg.
pub const RB87_MASS: f64 = 1.4431e-25;

/// Electron gyromagnetic ratio in the conventional GHz/T quotation (≈ 28).
pub const ELECTRON_GAMMA_GHZ_PER_T: f64 = 28.0;

/// Convert a gyromagnetic ratio quoted in GHz/T to rad·s⁻¹·T⁻¹.
pub fn gamma_from_ghz_per_t(ghz_per_t: f64) -> f64 {
    TAU * 1e9 * ghz_per_t
}
