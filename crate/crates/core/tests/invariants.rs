//! Property tests for the structural invariants: density positivity and
//! normalization, fidelity bounds, and amplitude normalization.

use num_complex::Complex64;
use proptest::prelude::*;
use sdi_core::dynamics::{entangle, state_grid};
use sdi_core::half::HalfInt;
use sdi_core::interference::density_trace;
use sdi_core::metrology::{overlap_cat, GhzCatState};
use sdi_core::params::ParamSet;
use sdi_core::spin::{balanced_spin_half, SpinConfig};
use sdi_core::wavepacket::GaussianWavepacket;

fn param_draw(sigma_um: f64, t_ms: f64, b_sign: bool, b_mag: f64, k_scale: f64) -> ParamSet {
    let mut p = ParamSet::rb87_defaults();
    p.sigma = sigma_um * 1e-6;
    p.t_couple = t_ms * 1e-3;
    p.t_free = p.t_couple;
    p.b_field = if b_sign { b_mag } else { -b_mag };
    p.k = k_scale * 1e26;
    p
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// The readout density is non-negative, integrates to 1 within 1e-9, and
    /// decomposes exactly into classical plus cross parts, for randomized
    /// parameter draws.
    #[test]
    fn density_nonnegative_normalized_decomposed(
        sigma_um in 0.5f64..2.0,
        t_ms in 0.1f64..30.0,
        b_sign in any::<bool>(),
        b_mag in 1e-9f64..4e-7,
        k_scale in 0.5f64..8.0,
    ) {
        let p = param_draw(sigma_um, t_ms, b_sign, b_mag, k_scale);
        let packet = GaussianWavepacket::new(p.x0, p.sigma).unwrap();
        let state = entangle(&balanced_spin_half(), &packet, &p);
        let grid = state_grid(&state, p.t_free, &p, None).unwrap();
        let trace = density_trace(&state, &grid, p.t_free, &p).unwrap();
        let integral: f64 = trace.total.iter().sum::<f64>() * grid.dx();
        prop_assert!((integral - 1.0).abs() < 1e-9, "integral = {integral}");
        let peak = trace.total.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..grid.n_points {
            prop_assert!(trace.total[i] >= 0.0);
            let resid = trace.total[i] - trace.classical[i] - trace.cross[i];
            prop_assert!(resid.abs() <= 1e-12 * peak, "decomposition residual {resid:e}");
        }
    }

    /// |<Psi(B)|Psi(B+dB)>| stays in [0, 1] for any cat state and step.
    #[test]
    fn cat_fidelity_bounded(
        n in 1u32..40,
        sep_um in -50.0f64..50.0,
        sigma_um in 0.3f64..3.0,
        momentum_frac in -2.0f64..2.0,
        db in -1e-5f64..1e-5,
    ) {
        let p = ParamSet::rb87_defaults();
        let sigma = sigma_um * 1e-6;
        let cat = GhzCatState::new(n, sep_um * 1e-6, sigma)
            .unwrap()
            .with_mean_momentum(momentum_frac * p.hbar / sigma);
        let overlap = overlap_cat(&cat, db, &p).unwrap();
        prop_assert!(overlap.norm() <= 1.0 + 1e-12, "|overlap| = {}", overlap.norm());
        let at_zero = overlap_cat(&cat, 0.0, &p).unwrap();
        prop_assert!((at_zero - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    /// Any normalized amplitude vector builds a SpinConfig whose norm is
    /// preserved, and entangling preserves it branch-wise.
    #[test]
    fn spin_config_normalization_preserved(
        re in proptest::collection::vec(-1.0f64..1.0, 3),
        im in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let raw: Vec<Complex64> = re
            .iter()
            .zip(&im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amplitudes: Vec<Complex64> = raw.iter().map(|c| c / norm).collect();
        let cfg = SpinConfig::new(HalfInt::from_int(1), amplitudes).unwrap();
        let total: f64 = cfg.amplitudes().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let p = ParamSet::rb87_defaults();
        let state = entangle(&cfg, &GaussianWavepacket::new(p.x0, p.sigma).unwrap(), &p);
        let branch_norm: f64 = state.branches().iter().map(|b| b.amplitude.norm_sqr()).sum();
        prop_assert!((branch_norm - 1.0).abs() <= 1e-12);
    }
}
