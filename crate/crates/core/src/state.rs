//! The entangled spin-position superposition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::spin::NORM_TOL;
use crate::wavepacket::{gaussian_overlap, GaussianWavepacket};

/// One spin-projection branch: amplitude C_m attached to a spatial packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub m: HalfInt,
    pub amplitude: Complex64,
    pub packet: GaussianWavepacket,
}

/// A superposition sum_m C_m |m> ⊗ |packet_m> with distinct projections and
/// unit total norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPositionState {
    branches: Vec<Branch>,
}

impl SpinPositionState {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidParam(
                "state needs at least one branch".into(),
            ));
        }
        for (i, a) in branches.iter().enumerate() {
            for b in branches.iter().skip(i + 1) {
                if a.m == b.m {
                    return Err(Error::InvalidParam(format!(
                        "duplicate branch projection m = {}",
                        a.m
                    )));
                }
            }
        }
        let norm: f64 = branches.iter().map(|b| b.amplitude.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParam(format!(
                "branch amplitudes not normalized: sum |C_m|^2 = {norm:.15}"
            )));
        }
        Ok(SpinPositionState { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn centers(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.packet.center).collect()
    }

    /// Common packet width. The entangling map never changes widths, so all
    /// branches share one; this asserts that invariant.
    pub fn common_width(&self) -> f64 {
        let w = self.branches[0].packet.width_sigma;
        debug_assert!(self
            .branches
            .iter()
            .all(|b| (b.packet.width_sigma - w).abs() <= 1e-12 * w));
        w
    }

    /// Overlap <self|other>. Branches with different spin projections are
    /// orthogonal, so only matching m values contribute, each through the
    /// closed-form Gaussian overlap of its packets.
    pub fn overlap(&self, other: &SpinPositionState, hbar: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.branches {
            if let Some(b) = other.branches.iter().find(|b| b.m == a.m) {
                acc += a.amplitude.conj()
                    * b.amplitude
                    * gaussian_overlap(&a.packet, &b.packet, hbar)?;
            }
        }
        Ok(acc)
    }
}
