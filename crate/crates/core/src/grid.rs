//! Uniform spatial grids for sampled wavefunctions.

use crate::error::{Error, Result};

/// A uniform grid of `n_points` cells on `[x_min, x_max)`.
///
/// Point i sits at `x_min + i*dx` with `dx = (x_max - x_min)/n_points`; the
/// half-open convention keeps the spacing consistent with the periodic
/// discrete Fourier transform used by the spectral propagator, which requires
/// `n_points` to be a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidParam(format!(
                "grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidParam(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.position(i))
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n_points.is_power_of_two()
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        i.max(0.0).min((self.n_points - 1) as f64) as usize
    }

    /// Check that the window covers `[lo, hi]` with margin `pad` on each side.
    pub fn covers(&self, lo: f64, hi: f64, pad: f64) -> bool {
        self.x_min <= lo - pad && self.x_max >= hi + pad
    }

    /// Auto-sized window for a set of branch centers with evolved width
    /// `sigma_t`: at least 9 sigma_t of clearance beyond the outermost
    /// centers (so edge amplitudes sit below the aliasing check), spacing at
    /// most `dx_max`, point count rounded up to a power of two, extra room
    /// split evenly between the two edges.
    pub fn auto(centers: &[f64], sigma_t: f64, dx_max: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParam(
                "auto grid needs at least one center".into(),
            ));
        }
        if !(sigma_t > 0.0) || !(dx_max > 0.0) {
            return Err(Error::InvalidParam(format!(
                "auto grid needs positive sigma_t and dx, got {sigma_t}, {dx_max}"
            )));
        }
        let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - 9.0 * sigma_t;
        let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 9.0 * sigma_t;
        let n = (((hi - lo) / dx_max).ceil() as usize)
            .max(2)
            .next_power_of_two();
        let span = n as f64 * dx_max;
        let mid = 0.5 * (lo + hi);
        Grid::new(mid - span / 2.0, mid + span / 2.0, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_positions() {
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.dx(), 0.5);
        let xs: Vec<f64> = g.positions().collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5]);
        assert_eq!(g.nearest_index(0.24), 2);
        assert_eq!(g.nearest_index(-5.0), 0);
        assert_eq!(g.nearest_index(5.0), 3);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Grid::new(1.0, 1.0, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn auto_covers_with_margin() {
        let sigma = 1e-6;
        let g = Grid::auto(&[-2e-6, 3e-6], sigma, sigma / 16.0).unwrap();
        assert!(g.is_power_of_two());
        assert!(g.covers(-2e-6, 3e-6, 9.0 * sigma));
        assert!(g.dx() <= sigma / 16.0 + 1e-30);
    }
}
