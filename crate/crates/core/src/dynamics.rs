//! Entangling map and free evolution.
//!
//! Free evolution of a Gaussian branch is available through two independent
//! routes:
//!
//! * [`evolve_analytic`] — the closed form: the envelope widens from sigma to
//!   sigma_t and the phase carries a far-field kinetic chirp
//!   `m (x-c)^2 / (2 hbar t)` plus the matter-wave Gouy term
//!   `-arctan(hbar t / (2 m sigma^2)) / 2`.
//! * [`evolve_spectral`] — exact propagation of a sampled wavefunction by
//!   multiplying its momentum representation with the unitary free-particle
//!   multiplier.
//!
//! The spectral route is the ground truth. The closed form reproduces its
//! amplitude everywhere and its phase at the envelope center; the quadratic
//! chirp is the far-field limit of the exact one (ratio tau^2/(1+tau^2) with
//! tau = hbar t / (2 m sigma^2)), which the tests document rather than
//! correct.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::half::HalfInt;
use crate::params::ParamSet;
use crate::spin::SpinConfig;
use crate::state::{Branch, SpinPositionState};
use crate::wavepacket::GaussianWavepacket;

/// Relative edge-amplitude limit for the spectral propagator: beyond this the
/// periodic window wraps appreciable amplitude and the result aliases.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-8;

/// Dispersed width sigma_t = sigma * sqrt(1 + (hbar t / (2 m sigma^2))^2).
pub fn sigma_t(sigma: f64, t: f64, mass: f64, hbar: f64) -> f64 {
    let tau = hbar * t / (2.0 * mass * sigma * sigma);
    sigma * (1.0 + tau * tau).sqrt()
}

/// Entangle a spin superposition with spatial displacements: each projection
/// m picks up the displacement dx_m, producing one branch per m with
/// amplitude C_m and an otherwise unchanged packet.
///
/// The input packet's center serves as the reference x0.
pub fn entangle(cfg: &SpinConfig, packet: &GaussianWavepacket, p: &ParamSet) -> SpinPositionState {
    let branches: Vec<Branch> = cfg
        .projections()
        .into_iter()
        .zip(cfg.amplitudes())
        .map(|(m, &amplitude)| Branch {
            m,
            amplitude,
            packet: packet.translated(p.displacement(m)),
        })
        .collect();
    SpinPositionState::new(branches).expect("entangle preserves normalization and distinct m")
}

/// A freely evolved Gaussian branch: the widened packet plus the
/// position-dependent phase (kinetic chirp; the Gouy term lives in the
/// packet's global phase).
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedPacket {
    /// Envelope after evolution: width sigma_t, same center for a stationary
    /// packet (drifted by p t / m otherwise), global phase including the Gouy
    /// term.
    pub packet: GaussianWavepacket,
    /// Kinetic chirp coefficient, rad·m⁻²: phase += chirp * (x - center)^2.
    pub chirp: f64,
    hbar: f64,
}

impl EvolvedPacket {
    /// Total phase at `x`, rad.
    pub fn phase_at(&self, x: f64) -> f64 {
        let u = x - self.packet.center;
        self.chirp * u * u + self.packet.mean_momentum * u / self.hbar + self.packet.global_phase
    }

    /// Complex amplitude at `x`, m^(-1/2).
    pub fn amplitude_at(&self, x: f64) -> Complex64 {
        let u = x - self.packet.center;
        let chirp = Complex64::from_polar(1.0, self.chirp * u * u);
        self.packet.amplitude(x, self.hbar) * chirp
    }
}

/// Closed-form free evolution for duration `t >= 0`.
///
/// A nonzero mean momentum is handled by the exact Galilean composition:
/// the center drifts by `p t / m` and the global phase gains
/// `p^2 t / (2 m hbar)` on top of the momentum plane wave carried by the
/// packet itself.
pub fn evolve_analytic(packet: &GaussianWavepacket, t: f64, p: &ParamSet) -> Result<EvolvedPacket> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(EvolvedPacket {
            packet: packet.clone(),
            chirp: 0.0,
            hbar: p.hbar,
        });
    }
    let sigma0 = packet.width_sigma;
    let tau = p.hbar * t / (2.0 * p.mass * sigma0 * sigma0);
    let width_t = sigma0 * (1.0 + tau * tau).sqrt();
    let gouy = -0.5 * tau.atan();
    let pbar = packet.mean_momentum;
    let drift = pbar * t / p.mass;
    let evolved = GaussianWavepacket {
        center: packet.center + drift,
        width_sigma: width_t,
        mean_momentum: pbar,
        global_phase: packet.global_phase + gouy + pbar * pbar * t / (2.0 * p.mass * p.hbar),
    };
    Ok(EvolvedPacket {
        packet: evolved,
        chirp: p.mass / (2.0 * p.hbar * t),
        hbar: p.hbar,
    })
}

/// A wavefunction sampled on a uniform grid, amplitude units m^(-1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWavefunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledWavefunction {
    pub fn from_packet(packet: &GaussianWavepacket, grid: &Grid, hbar: f64) -> Self {
        let values = grid
            .positions()
            .map(|x| packet.amplitude(x, hbar))
            .collect();
        SampledWavefunction {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_evolved(ev: &EvolvedPacket, grid: &Grid) -> Self {
        let values = grid.positions().map(|x| ev.amplitude_at(x)).collect();
        SampledWavefunction {
            grid: grid.clone(),
            values,
        }
    }

    /// Discrete norm sum |psi|^2 dx.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Mean position of |psi|^2.
    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        let w: f64 = self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
        let m: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.position(i) * v.norm_sqr())
            .sum::<f64>()
            * dx;
        m / w
    }

    /// Variance of |psi|^2 about its mean.
    pub fn variance(&self) -> f64 {
        let dx = self.grid.dx();
        let mu = self.mean_position();
        let w: f64 = self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
        let v: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let u = self.grid.position(i) - mu;
                u * u * v.norm_sqr()
            })
            .sum::<f64>()
            * dx;
        v / w
    }

    /// CSV export: columns x, re, im, abs2.
    pub fn to_csv_string(&self, comment: &str) -> String {
        use crate::csvio::{g17, to_csv_string};
        let rows: Vec<Vec<String>> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                vec![
                    g17(self.grid.position(i)),
                    g17(v.re),
                    g17(v.im),
                    g17(v.norm_sqr()),
                ]
            })
            .collect();
        to_csv_string(comment, &["x", "re", "im", "abs2"], &rows)
    }

    fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.values.first().map(|v| v.norm()).unwrap_or(0.0);
        let last = self.values.last().map(|v| v.norm()).unwrap_or(0.0);
        first.max(last) / peak
    }
}

/// Exact free evolution of a sampled wavefunction: forward FFT, multiply by
/// `exp(-i hbar q^2 t / (2 m))`, inverse FFT.
///
/// The grid must have a power-of-two point count, and the amplitude at both
/// window edges must stay below [`EDGE_AMPLITUDE_LIMIT`] of the peak before
/// and after evolution; otherwise the periodic window is too small for the
/// requested time and the call fails with an aliasing error.
pub fn evolve_spectral(
    wf: &SampledWavefunction,
    t: f64,
    mass: f64,
    hbar: f64,
) -> Result<SampledWavefunction> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    let n = wf.grid.n_points;
    if !n.is_power_of_two() {
        return Err(Error::InvalidParam(format!(
            "spectral evolution needs a power-of-two grid, got {n} points"
        )));
    }
    let edge = wf.edge_ratio();
    if edge > EDGE_AMPLITUDE_LIMIT {
        return Err(Error::Aliasing {
            edge_ratio: edge,
            limit: EDGE_AMPLITUDE_LIMIT,
        });
    }

    let mut buf = wf.values.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let dx = wf.grid.dx();
    let dq = std::f64::consts::TAU / (n as f64 * dx);
    for (j, value) in buf.iter_mut().enumerate() {
        let j_signed = if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        let q = j_signed * dq;
        *value *= Complex64::from_polar(1.0, -hbar * q * q * t / (2.0 * mass));
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for value in buf.iter_mut() {
        *value *= scale;
    }

    let out = SampledWavefunction {
        grid: wf.grid.clone(),
        values: buf,
    };
    let edge_after = out.edge_ratio();
    if edge_after > EDGE_AMPLITUDE_LIMIT {
        return Err(Error::Aliasing {
            edge_ratio: edge_after,
            limit: EDGE_AMPLITUDE_LIMIT,
        });
    }
    Ok(out)
}

/// All branches of a state evolved analytically: the closed-form evaluator
/// behind densities and likelihood fits.
///
/// The interference readout projects the spin branches onto a common state,
/// so the observable density is the normalized coherent sum
/// `|sum_m C_m psi_m|^2 / N` with `N = <sum|sum>` computed in closed form.
/// For separated branches with resolved fringes `N - 1` is exponentially
/// small; at zero field the degenerate branches make `N = 2` and the
/// normalized density collapses to the single-packet Gaussian.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    branches: Vec<(Complex64, EvolvedPacket)>,
    norm: f64,
    fast_two: Option<FastTwoBranch>,
}

/// Precomputed constants for the two-branch density: the likelihood hot path,
/// costing two exponentials and one sin_cos per sample.
#[derive(Debug, Clone)]
struct FastTwoBranch {
    c1: f64,
    c2: f64,
    /// 1/(4 sigma_t^2).
    gauss_q: f64,
    /// |C1 A|^2, |C2 A|^2 with A the common peak amplitude.
    w1: f64,
    w2: f64,
    /// Cross coefficients 2 A^2 Re[C1 C2*], -2 A^2 Im[C1 C2*].
    cross_re: f64,
    cross_im: f64,
    /// Phase difference theta_1 - theta_2 = slope*x + offset.
    phase_slope: f64,
    phase_offset: f64,
    inv_norm: f64,
}

impl FastTwoBranch {
    fn build(branches: &[(Complex64, EvolvedPacket)], norm: f64, hbar: f64) -> Option<Self> {
        if branches.len() != 2 {
            return None;
        }
        let (ca, pa) = &branches[0];
        let (cb, pb) = &branches[1];
        let (sa, sb) = (pa.packet.width_sigma, pb.packet.width_sigma);
        if (sa - sb).abs() > 1e-12 * sa.max(sb)
            || (pa.chirp - pb.chirp).abs() > 1e-12 * pa.chirp.abs().max(pb.chirp.abs())
            || (pa.packet.mean_momentum - pb.packet.mean_momentum).abs()
                > 1e-12
                    * pa.packet
                        .mean_momentum
                        .abs()
                        .max(pb.packet.mean_momentum.abs())
        {
            return None;
        }
        let sigma = 0.5 * (sa + sb);
        let amp2 = (2.0 * std::f64::consts::PI * sigma * sigma).sqrt().recip();
        let (c1, c2) = (pa.packet.center, pb.packet.center);
        let kappa = 0.5 * (pa.chirp + pb.chirp);
        let pbar = pa.packet.mean_momentum;
        let cross = ca * cb.conj();
        Some(FastTwoBranch {
            c1,
            c2,
            gauss_q: 1.0 / (4.0 * sigma * sigma),
            w1: ca.norm_sqr() * amp2,
            w2: cb.norm_sqr() * amp2,
            cross_re: 2.0 * amp2 * cross.re,
            cross_im: -2.0 * amp2 * cross.im,
            // theta_i = kappa u_i^2 + (pbar/hbar) u_i + g_i with u_i = x - c_i:
            // theta_1 - theta_2 = kappa (c2 - c1) (2x - c1 - c2)
            //                   + (pbar/hbar)(c2 - c1) + (g1 - g2).
            phase_slope: 2.0 * kappa * (c2 - c1),
            phase_offset: -kappa * (c2 - c1) * (c1 + c2)
                + pbar * (c2 - c1) / hbar
                + (pa.packet.global_phase - pb.packet.global_phase),
            inv_norm: 1.0 / norm,
        })
    }

    #[inline]
    fn density_at(&self, x: f64) -> f64 {
        let u1 = x - self.c1;
        let u2 = x - self.c2;
        let e1 = (-u1 * u1 * self.gauss_q).exp();
        let e2 = (-u2 * u2 * self.gauss_q).exp();
        let (sin, cos) = (self.phase_slope * x + self.phase_offset).sin_cos();
        let classical = self.w1 * e1 * e1 + self.w2 * e2 * e2;
        let cross = e1 * e2 * (self.cross_re * cos + self.cross_im * sin);
        (classical + cross) * self.inv_norm
    }
}

impl EvolvedState {
    pub fn new(state: &SpinPositionState, t: f64, p: &ParamSet) -> Result<Self> {
        let branches = state
            .branches()
            .iter()
            .map(|b| Ok((b.amplitude, evolve_analytic(&b.packet, t, p)?)))
            .collect::<Result<Vec<_>>>()?;
        let norm = coherent_norm(&branches, p.hbar)?;
        if norm < 1e-12 {
            return Err(Error::NumericalInvariant(
                "projected readout state has vanishing norm (fully destructive superposition)"
                    .into(),
            ));
        }
        let fast_two = FastTwoBranch::build(&branches, norm, p.hbar);
        Ok(EvolvedState {
            branches,
            norm,
            fast_two,
        })
    }

    pub fn branches(&self) -> &[(Complex64, EvolvedPacket)] {
        &self.branches
    }

    /// Norm of the raw coherent sum; 1 + O(branch overlap).
    pub fn coherent_norm(&self) -> f64 {
        self.norm
    }

    /// Normalized total amplitude sum_m C_m psi_m(x) / sqrt(N).
    pub fn amplitude_at(&self, x: f64) -> Complex64 {
        let raw: Complex64 = self
            .branches
            .iter()
            .map(|(c, ev)| c * ev.amplitude_at(x))
            .sum();
        raw / self.norm.sqrt()
    }

    /// Readout density |sum_m C_m psi_m|^2 / N (non-negative by construction).
    #[inline]
    pub fn density_at(&self, x: f64) -> f64 {
        if let Some(fast) = &self.fast_two {
            return fast.density_at(x).max(0.0);
        }
        self.amplitude_at(x).norm_sqr()
    }

    /// Incoherent part sum_m |C_m psi_m|^2 / N.
    pub fn classical_at(&self, x: f64) -> f64 {
        self.branches
            .iter()
            .map(|(c, ev)| c.norm_sqr() * ev.amplitude_at(x).norm_sqr())
            .sum::<f64>()
            / self.norm
    }

    /// Interference part 2 sum_{m<m'} Re[C_m C_m'^* psi_m psi_m'^*] / N.
    pub fn cross_at(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, (ci, pi)) in self.branches.iter().enumerate() {
            let ai = pi.amplitude_at(x);
            for (cj, pj) in self.branches.iter().skip(i + 1) {
                let aj = pj.amplitude_at(x);
                acc += 2.0 * (ci * cj.conj() * ai * aj.conj()).re;
            }
        }
        acc / self.norm
    }
}

/// `<sum|sum>` of evolved branches in closed form. The pairwise overlap of
/// two equal-width, equal-chirp branches separated by `delta` is the envelope
/// factor `exp(-delta^2/(8 sigma_t^2))` times the chirp suppression
/// `exp(-2 chirp^2 delta^2 sigma_t^2)`, with a plane-wave phase for a shared
/// mean momentum.
fn coherent_norm(branches: &[(Complex64, EvolvedPacket)], hbar: f64) -> Result<f64> {
    let mut norm: f64 = branches.iter().map(|(c, _)| c.norm_sqr()).sum();
    for (i, (ci, pi)) in branches.iter().enumerate() {
        for (cj, pj) in branches.iter().skip(i + 1) {
            let si = pi.packet.width_sigma;
            let sj = pj.packet.width_sigma;
            if (si - sj).abs() > 1e-12 * si.max(sj) {
                return Err(Error::InvalidParam(
                    "coherent norm needs equal branch widths".into(),
                ));
            }
            if (pi.chirp - pj.chirp).abs() > 1e-12 * pi.chirp.abs().max(pj.chirp.abs()) {
                return Err(Error::InvalidParam(
                    "coherent norm needs equal branch chirps".into(),
                ));
            }
            let pbar_i = pi.packet.mean_momentum;
            let pbar_j = pj.packet.mean_momentum;
            if (pbar_i - pbar_j).abs() > 1e-12 * pbar_i.abs().max(pbar_j.abs()) {
                return Err(Error::InvalidParam(
                    "coherent norm needs equal branch momenta".into(),
                ));
            }
            let sigma = 0.5 * (si + sj);
            let delta = pi.packet.center - pj.packet.center;
            let kappa = 0.5 * (pi.chirp + pj.chirp);
            let mag = (-delta * delta / (8.0 * sigma * sigma)).exp()
                * (-2.0 * kappa * kappa * delta * delta * sigma * sigma).exp();
            let phase = pbar_i * delta / hbar + (pj.packet.global_phase - pi.packet.global_phase);
            let pair = Complex64::from_polar(mag, phase);
            norm += 2.0 * (ci.conj() * cj * pair).re;
        }
    }
    Ok(norm)
}

/// Evolve every branch on a grid, amplitude-weighted: the sampled total state
/// as a list of (m, C_m psi_m) components.
///
/// The grid must cover all branch centers with an 8 sigma_t margin.
pub fn sample_state(
    state: &SpinPositionState,
    grid: &Grid,
    t: f64,
    p: &ParamSet,
) -> Result<Vec<(HalfInt, SampledWavefunction)>> {
    let centers = state.centers();
    let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let st = sigma_t(state.common_width(), t, p.mass, p.hbar);
    if !grid.covers(lo, hi, 8.0 * st) {
        return Err(Error::GridTooNarrow {
            x_min: grid.x_min,
            x_max: grid.x_max,
            need_min: lo - 8.0 * st,
            need_max: hi + 8.0 * st,
        });
    }
    state
        .branches()
        .iter()
        .map(|b| {
            let ev = evolve_analytic(&b.packet, t, p)?;
            let values = grid
                .positions()
                .map(|x| b.amplitude * ev.amplitude_at(x))
                .collect();
            Ok((
                b.m,
                SampledWavefunction {
                    grid: grid.clone(),
                    values,
                },
            ))
        })
        .collect()
}

/// Auto-sized grid for a state evolved for time `t`: window per
/// [`Grid::auto`] over the branch centers, spacing at most sigma/16 (or
/// finer if `dx_max` demands it).
pub fn state_grid(
    state: &SpinPositionState,
    t: f64,
    p: &ParamSet,
    dx_max: Option<f64>,
) -> Result<Grid> {
    let sigma0 = state.common_width();
    let st = sigma_t(sigma0, t, p.mass, p.hbar);
    let mut dx = sigma0 / 16.0;
    if let Some(limit) = dx_max {
        dx = dx.min(limit);
    }
    Grid::auto(&state.centers(), st, dx)
}
