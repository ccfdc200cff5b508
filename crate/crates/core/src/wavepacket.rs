//! Analytic Gaussian wavepackets.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A normalized Gaussian branch wavefunction
///
/// ```text
/// psi(x) = (2 pi sigma^2)^(-1/4) exp(-(x-c)^2 / (4 sigma^2))
///          * exp(i p (x-c) / hbar) * exp(i phi)
/// ```
///
/// so |psi|^2 is a Gaussian density with standard deviation `width_sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWavepacket {
    /// Center, m.
    pub center: f64,
    /// Width (std of |psi|^2), m. Positive.
    pub width_sigma: f64,
    /// Mean momentum, kg·m·s⁻¹.
    pub mean_momentum: f64,
    /// Global phase, rad.
    pub global_phase: f64,
}

impl GaussianWavepacket {
    pub fn new(center: f64, width_sigma: f64) -> Result<Self> {
        if !(width_sigma > 0.0) || !width_sigma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "wavepacket width must be positive, got {width_sigma}"
            )));
        }
        Ok(GaussianWavepacket {
            center,
            width_sigma,
            mean_momentum: 0.0,
            global_phase: 0.0,
        })
    }

    pub fn with_momentum(mut self, p: f64) -> Self {
        self.mean_momentum = p;
        self
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.global_phase = phi;
        self
    }

    pub fn translated(&self, dx: f64) -> Self {
        GaussianWavepacket {
            center: self.center + dx,
            ..self.clone()
        }
    }

    /// Peak amplitude (2 pi sigma^2)^(-1/4), m^(-1/2).
    pub fn peak_amplitude(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.width_sigma * self.width_sigma).powf(-0.25)
    }

    /// Complex amplitude at `x`.
    pub fn amplitude(&self, x: f64, hbar: f64) -> Complex64 {
        let u = x - self.center;
        let envelope =
            self.peak_amplitude() * (-u * u / (4.0 * self.width_sigma * self.width_sigma)).exp();
        let phase = self.mean_momentum * u / hbar + self.global_phase;
        Complex64::from_polar(envelope, phase)
    }

    /// Probability density |psi|^2 at `x`, m^-1.
    pub fn density(&self, x: f64) -> f64 {
        let u = x - self.center;
        let s2 = self.width_sigma * self.width_sigma;
        (-u * u / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
    }
}

/// Exact overlap <a|b> of two equal-width Gaussian packets:
///
/// ```text
/// <a|b> = exp(-(c_a-c_b)^2/(8 sigma^2))
///       * exp(-sigma^2 (p_b-p_a)^2/(2 hbar^2))
///       * exp(i (p_a+p_b)(c_a-c_b)/(2 hbar))
///       * exp(i (phi_b-phi_a))
/// ```
///
/// Widths must match to 1e-12 relative (the states produced by the protocol
/// always share a common width).
pub fn gaussian_overlap(
    a: &GaussianWavepacket,
    b: &GaussianWavepacket,
    hbar: f64,
) -> Result<Complex64> {
    let sa = a.width_sigma;
    let sb = b.width_sigma;
    if (sa - sb).abs() > 1e-12 * sa.max(sb) {
        return Err(Error::InvalidParam(format!(
            "gaussian_overlap requires equal widths, got {sa:e} and {sb:e}"
        )));
    }
    let sigma = 0.5 * (sa + sb);
    let dc = a.center - b.center;
    let dp = b.mean_momentum - a.mean_momentum;
    let magnitude = (-dc * dc / (8.0 * sigma * sigma)).exp()
        * (-sigma * sigma * dp * dp / (2.0 * hbar * hbar)).exp();
    let phase =
        (a.mean_momentum + b.mean_momentum) * dc / (2.0 * hbar) + (b.global_phase - a.global_phase);
    Ok(Complex64::from_polar(magnitude, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR;

    /// Composite Simpson quadrature, used as the independent integral oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n.is_multiple_of(2) { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn unit_norm_by_quadrature() {
        let pkt = GaussianWavepacket::new(1.5e-6, 0.8e-6).unwrap();
        let norm = simpson(
            |x| pkt.amplitude(x, HBAR).norm_sqr(),
            pkt.center - 12.0 * pkt.width_sigma,
            pkt.center + 12.0 * pkt.width_sigma,
            4000,
        );
        assert!((norm - 1.0).abs() < 1e-10, "norm = {norm}");
    }

    #[test]
    fn density_matches_amplitude_modulus() {
        let pkt = GaussianWavepacket::new(0.0, 1e-6)
            .unwrap()
            .with_momentum(3e-28)
            .with_phase(0.7);
        for i in -5..=5 {
            let x = i as f64 * 0.5e-6;
            let d = pkt.density(x);
            let a2 = pkt.amplitude(x, HBAR).norm_sqr();
            assert!((d - a2).abs() <= 1e-12 * d.max(a2).max(1.0));
        }
    }

    #[test]
    fn overlap_matches_quadrature() {
        let hbar = HBAR;
        let a = GaussianWavepacket::new(0.0, 1e-6)
            .unwrap()
            .with_momentum(2e-28)
            .with_phase(0.3);
        let b = GaussianWavepacket::new(1.7e-6, 1e-6)
            .unwrap()
            .with_momentum(-1e-28)
            .with_phase(-0.9);
        let re = simpson(
            |x| (a.amplitude(x, hbar).conj() * b.amplitude(x, hbar)).re,
            -15e-6,
            17e-6,
            20_000,
        );
        let im = simpson(
            |x| (a.amplitude(x, hbar).conj() * b.amplitude(x, hbar)).im,
            -15e-6,
            17e-6,
            20_000,
        );
        let closed = gaussian_overlap(&a, &b, hbar).unwrap();
        assert!((closed.re - re).abs() < 1e-9, "re {} vs {}", closed.re, re);
        assert!((closed.im - im).abs() < 1e-9, "im {} vs {}", closed.im, im);
    }

    #[test]
    fn overlap_of_identical_packets_is_one() {
        let a = GaussianWavepacket::new(2e-6, 1e-6)
            .unwrap()
            .with_momentum(1e-28);
        let o = gaussian_overlap(&a, &a, HBAR).unwrap();
        assert!((o.re - 1.0).abs() < 1e-15 && o.im.abs() < 1e-15);
    }

    #[test]
    fn overlap_separation_law() {
        // Half overlap at separation sigma*sqrt(8 ln 2).
        let sigma = 1e-6;
        let a = GaussianWavepacket::new(0.0, sigma).unwrap();
        let b = a.translated(sigma * (8.0 * 2f64.ln()).sqrt());
        let o = gaussian_overlap(&a, &b, HBAR).unwrap();
        assert!((o.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejects_width_mismatch() {
        let a = GaussianWavepacket::new(0.0, 1e-6).unwrap();
        let b = GaussianWavepacket::new(0.0, 2e-6).unwrap();
        assert!(gaussian_overlap(&a, &b, HBAR).is_err());
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(GaussianWavepacket::new(0.0, 0.0).is_err());
        assert!(GaussianWavepacket::new(0.0, -1e-6).is_err());
    }
}
