//! Spin superposition configurations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::half::{multiplicity, projections, HalfInt};

/// Tolerance on |sum |C_m|^2 - 1| accepted by constructors.
pub const NORM_TOL: f64 = 1e-12;

/// A spin-s system with one complex amplitude per projection m = -s..+s.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfig {
    s: HalfInt,
    amplitudes: Vec<Complex64>,
}

impl SpinConfig {
    /// Amplitudes are ordered by ascending m. The vector must have length
    /// 2s+1 and unit norm within [`NORM_TOL`].
    pub fn new(s: HalfInt, amplitudes: Vec<Complex64>) -> Result<Self> {
        if s.is_negative() {
            return Err(Error::InvalidParam(format!(
                "spin quantum number must be non-negative, got {s}"
            )));
        }
        if amplitudes.len() != multiplicity(s) {
            return Err(Error::InvalidParam(format!(
                "spin {s} needs {} amplitudes, got {}",
                multiplicity(s),
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParam(format!(
                "amplitudes not normalized: sum |C_m|^2 = {norm:.15}"
            )));
        }
        Ok(SpinConfig { s, amplitudes })
    }

    /// Equal real amplitudes 1/sqrt(2s+1) on every projection.
    pub fn balanced(s: HalfInt) -> Self {
        let n = multiplicity(s);
        let c = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        SpinConfig {
            s,
            amplitudes: vec![c; n],
        }
    }

    /// Multiply every amplitude by a global phase e^{i phi}.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phi);
        SpinConfig {
            s: self.s,
            amplitudes: self.amplitudes.iter().map(|c| c * rot).collect(),
        }
    }

    pub fn spin(&self) -> HalfInt {
        self.s
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Projections in the same order as [`amplitudes`](Self::amplitudes).
    pub fn projections(&self) -> Vec<HalfInt> {
        projections(self.s)
    }

    pub fn amplitude(&self, m: HalfInt) -> Option<Complex64> {
        let idx = (m.twice() + self.s.twice()) / 2;
        if idx < 0 || m.twice() > self.s.twice() || (m.twice() - self.s.twice()) % 2 != 0 {
            return None;
        }
        self.amplitudes.get(idx as usize).copied()
    }
}

/// The balanced spin-1/2 superposition (C_+ = C_- = 1/sqrt(2)), the
/// maximal-coherence input state of the protocol.
pub fn balanced_spin_half() -> SpinConfig {
    SpinConfig::balanced(HalfInt::half())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn balanced_half_amplitudes() {
        let cfg = balanced_spin_half();
        assert_eq!(cfg.spin(), HalfInt::half());
        for c in cfg.amplitudes() {
            assert!((c.re - FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn balanced_is_normalized() {
        for twice_s in 0..6 {
            let cfg = SpinConfig::balanced(HalfInt::new(twice_s));
            let norm: f64 = cfg.amplitudes().iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn balanced_maximizes_coherence_product() {
        // Coherence |C_+ C_-| under |C_+|^2 + |C_-|^2 = 1, scanned over the
        // mixing angle: the balanced point must attain the scan maximum 1/2.
        let mut best = 0.0f64;
        let n = 100_001;
        for i in 0..n {
            let theta = std::f64::consts::PI * (i as f64) / ((n - 1) as f64);
            best = best.max((theta.cos() * theta.sin()).abs());
        }
        let cfg = balanced_spin_half();
        let prod = (cfg.amplitudes()[0] * cfg.amplitudes()[1]).norm();
        assert!((prod - 0.5).abs() < 1e-12);
        assert!(
            prod >= best - 1e-9,
            "balanced product {prod} below scan max {best}"
        );
    }

    #[test]
    fn rejects_wrong_length_or_norm() {
        let c = Complex64::new(1.0, 0.0);
        assert!(SpinConfig::new(HalfInt::half(), vec![c]).is_err());
        assert!(SpinConfig::new(HalfInt::half(), vec![c, c]).is_err());
        assert!(SpinConfig::new(HalfInt::new(-1), vec![c]).is_err());
    }

    #[test]
    fn amplitude_lookup() {
        let cfg = SpinConfig::balanced(HalfInt::from_int(1));
        assert!(cfg.amplitude(HalfInt::from_int(-1)).is_some());
        assert!(cfg.amplitude(HalfInt::half()).is_none());
        assert!(cfg.amplitude(HalfInt::from_int(2)).is_none());
        let expected = 1.0 / 3f64.sqrt();
        assert!((cfg.amplitude(HalfInt::ZERO).unwrap().re - expected).abs() < 1e-15);
    }

    #[test]
    fn global_phase_preserves_norm() {
        let cfg = balanced_spin_half().with_global_phase(1.234);
        let norm: f64 = cfg.amplitudes().iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }
}
