//! Monte Carlo measurement simulation and field estimation.
//!
//! Position samples are drawn from a gridded interference density by
//! inverse-CDF sampling (linear within cells) with the counter-based RNG, so
//! every record is bit-reproducible from its seed. The field is recovered by
//! maximizing the closed-form log likelihood over a bracketed 1D search, and
//! scaling experiments compare the empirical spread of those estimates
//! against the published and oracle Cramér-Rao bounds.
//!
//! Quantum (cat-state) rows report bounds only: the N-body position readout
//! is left unspecified by the protocol, so there is nothing defensible to
//! sample. Their `empirical_std` column carries the oracle bound itself.

use rayon::prelude::*;

use crate::dynamics::{entangle, state_grid, EvolvedState};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::interference;
use crate::metrology::{
    crb_ghz_paper, crb_single, default_db_step, qfi_numeric_converged, GhzCatState,
};
use crate::params::ParamSet;
use crate::rng::{CounterRng, RNG_ALGORITHM};
use crate::spin::balanced_spin_half;
use crate::state::SpinPositionState;
use crate::stats::sample_std;
use crate::wavepacket::GaussianWavepacket;

/// One batch of detected positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    /// Detected positions, m, one per particle.
    pub positions: Vec<f64>,
    /// Seed of the stream that produced them.
    pub seed: u64,
    /// Parameter snapshot at sampling time.
    pub params: ParamSet,
    /// RNG algorithm identifier.
    pub rng_algorithm: &'static str,
}

/// Draw `n_shots` positions from a normalized gridded density by inverse-CDF
/// sampling with linear interpolation within cells.
pub fn sample_positions(
    dens: &[f64],
    grid: &Grid,
    n_shots: usize,
    seed: u64,
    params: &ParamSet,
) -> Result<ShotRecord> {
    if dens.len() != grid.n_points {
        return Err(Error::InvalidParam(format!(
            "density has {} samples, grid has {} points",
            dens.len(),
            grid.n_points
        )));
    }
    if n_shots == 0 {
        return Err(Error::InvalidParam("need at least one shot".into()));
    }
    let dx = grid.dx();
    let total: f64 = dens.iter().sum::<f64>() * dx;
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::UnnormalizedDensity(total));
    }
    if dens.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParam("density must be non-negative".into()));
    }
    // Exactly normalized cell CDF.
    let mut cum = Vec::with_capacity(dens.len());
    let mut acc = 0.0;
    for &d in dens {
        acc += d * dx;
        cum.push(acc);
    }
    let scale = 1.0 / acc;
    for c in cum.iter_mut() {
        *c *= scale;
    }
    *cum.last_mut().unwrap() = 1.0;

    // Cells are centered on the grid nodes (midpoint convention), so the
    // sampled distribution matches the continuous density to O(dx^2).
    let mut rng = CounterRng::seeded(seed);
    let mut positions = Vec::with_capacity(n_shots);
    for _ in 0..n_shots {
        let u = rng.next_f64();
        let i = cum.partition_point(|&c| c < u).min(cum.len() - 1);
        let prev = if i == 0 { 0.0 } else { cum[i - 1] };
        let mass = cum[i] - prev;
        let frac = if mass > 0.0 { (u - prev) / mass } else { 0.5 };
        let lo = (grid.position(i) - 0.5 * dx).max(grid.x_min);
        let hi = grid.position(i) + 0.5 * dx;
        positions.push(lo + (hi - lo) * frac);
    }
    Ok(ShotRecord {
        positions,
        seed,
        params: params.clone(),
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// The CDF the sampler draws from (piecewise linear over cells), for
/// goodness-of-fit checks.
pub fn sampling_cdf(dens: &[f64], grid: &Grid) -> impl Fn(f64) -> f64 {
    let dx = grid.dx();
    let (x_min, x_max) = (grid.x_min, grid.x_max);
    let mut cum = Vec::with_capacity(dens.len());
    let mut acc = 0.0;
    for &d in dens {
        acc += d * dx;
        cum.push(acc);
    }
    let scale = 1.0 / acc;
    for c in cum.iter_mut() {
        *c *= scale;
    }
    move |x: f64| {
        if x <= x_min {
            return 0.0;
        }
        if x >= x_max {
            return 1.0;
        }
        // Midpoint cells: cell i spans [x_i - dx/2, x_i + dx/2).
        let fidx = (x - x_min) / dx + 0.5;
        let i = (fidx as usize).min(cum.len() - 1);
        let prev = if i == 0 { 0.0 } else { cum[i - 1] };
        let lo = if i == 0 { 0.0 } else { i as f64 - 0.5 };
        let hi = i as f64 + 0.5;
        prev + (cum[i] - prev) * ((fidx - 0.5 - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

/// The balanced spin-1/2 interference state the estimator models.
fn model_state(p: &ParamSet) -> SpinPositionState {
    let packet = GaussianWavepacket::new(p.x0, p.sigma).expect("validated sigma");
    entangle(&balanced_spin_half(), &packet, p)
}

/// Log likelihood of positions under the balanced spin-1/2 density at field `b`.
///
/// Densities are accumulated as chunked products (one log per 16 samples,
/// with a 1e-18 per-sample floor keeping the partial products in range).
pub fn log_likelihood(positions: &[f64], model: &ParamSet, b: f64) -> Result<f64> {
    let p = model.with_b_field(b);
    let ev = EvolvedState::new(&model_state(&p), p.t_free, &p)?;
    let mut ll = 0.0;
    for chunk in positions.chunks(16) {
        let mut prod = 1.0f64;
        for &x in chunk {
            prod *= ev.density_at(x).max(1e-18);
        }
        ll += prod.ln();
    }
    Ok(ll)
}

/// Maximum-likelihood field estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFit {
    pub b_hat: f64,
    /// Observed-information standard error.
    pub std_err: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Scan bracket half-width as a fraction of |b_init|.
    pub bracket_fraction: f64,
    /// Absolute bracket half-width override, T.
    pub bracket_half_width: Option<f64>,
    /// Positions used in the coarse scan (0 = all).
    pub scan_subset: usize,
    /// Positions used to re-anchor the refinement window (0 = all). The
    /// golden refinement itself always uses the full record.
    pub anchor_subset: usize,
    /// Golden-section iteration cap.
    pub golden_iters: usize,
    /// Compute the observed-information standard error (two extra full
    /// likelihood evaluations). When off, `std_err` is NaN.
    pub estimate_error: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bracket_fraction: 0.5,
            bracket_half_width: None,
            scan_subset: 600,
            anchor_subset: 2500,
            golden_iters: 40,
            estimate_error: true,
        }
    }
}

/// Scale over which the likelihood oscillates in B: one fringe turn at the
/// outer edge of the envelope.
fn field_fringe_period(p: &ParamSet, b_scale: f64) -> f64 {
    let st = crate::dynamics::sigma_t(p.sigma, p.t_free, p.mass, p.hbar);
    let sep = (p.k * p.t_couple * p.gamma * b_scale * p.hbar).abs();
    let x_scale = 0.5 * sep + 3.0 * st;
    std::f64::consts::TAU / (p.mass * p.k * p.gamma.abs() * x_scale)
}

/// Fit the field by likelihood maximization: a phase-safe coarse grid scan
/// over the bracket, then golden-section refinement; the standard error comes
/// from the observed information at the optimum.
pub fn fit_field(record: &ShotRecord, model: &ParamSet, b_init: f64) -> Result<FieldFit> {
    fit_field_with(record, model, b_init, &FitOptions::default())
}

pub fn fit_field_with(
    record: &ShotRecord,
    model: &ParamSet,
    b_init: f64,
    opts: &FitOptions,
) -> Result<FieldFit> {
    if record.positions.is_empty() {
        return Err(Error::InvalidParam("empty shot record".into()));
    }
    let half = match opts.bracket_half_width {
        Some(w) if w > 0.0 => w,
        Some(w) => {
            return Err(Error::InvalidParam(format!(
                "bracket half-width must be positive, got {w:e}"
            )))
        }
        None => {
            let w = opts.bracket_fraction * b_init.abs();
            if !(w > 0.0) {
                return Err(Error::InvalidParam(
                    "bracket is empty: give a nonzero b_init or an absolute half-width".into(),
                ));
            }
            w
        }
    };
    let lo = b_init - half;
    let hi = b_init + half;

    // Coarse scan fine enough that the fringe phase moves < pi/2 per step.
    let period = field_fringe_period(model, b_init.abs().max(hi.abs()).max(lo.abs()));
    let n_scan = (((hi - lo) / (period / 4.0)).ceil() as usize).clamp(24, 8192);
    let subset = if opts.scan_subset == 0 {
        record.positions.len()
    } else {
        opts.scan_subset.min(record.positions.len())
    };
    let scan_positions = &record.positions[..subset];
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut lls = Vec::with_capacity(n_scan + 1);
    for i in 0..=n_scan {
        let b = lo + (hi - lo) * i as f64 / n_scan as f64;
        let ll = log_likelihood(scan_positions, model, b)?;
        if ll > best.1 {
            best = (i, ll);
        }
        lls.push(ll);
    }
    let ll_spread = lls.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - lls.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(ll_spread > 1e-9 * lls[best.0].abs().max(1.0)) {
        return Err(Error::NonConvergence(
            "likelihood is flat across the bracket (no field information)".into(),
        ));
    }
    if best.0 == 0 || best.0 == n_scan {
        return Err(Error::BracketMiss);
    }

    // Re-anchor on a larger subset: the coarse-scan argmax can sit a cell or
    // two off, which would push the refinement window off the true optimum.
    // Scan five cells around it, shifting while the argmax rides the window
    // edge.
    let full = &record.positions[..];
    let anchor = if opts.anchor_subset == 0 {
        full
    } else {
        &record.positions[..opts.anchor_subset.min(record.positions.len())]
    };
    let scan_b = |i: isize| lo + (hi - lo) * i as f64 / n_scan as f64;
    let mut center = best.0 as isize;
    let mut anchor_ll = vec![None::<f64>; n_scan + 1];
    let mut settled = false;
    for _ in 0..6 {
        let lo_i = (center - 2).max(0);
        let hi_i = (center + 2).min(n_scan as isize);
        let mut arg = lo_i;
        let mut arg_ll = f64::NEG_INFINITY;
        for i in lo_i..=hi_i {
            let ll = match anchor_ll[i as usize] {
                Some(v) => v,
                None => {
                    let v = log_likelihood(anchor, model, scan_b(i))?;
                    anchor_ll[i as usize] = Some(v);
                    v
                }
            };
            if ll > arg_ll {
                arg_ll = ll;
                arg = i;
            }
        }
        if arg == 0 || arg == n_scan as isize {
            return Err(Error::BracketMiss);
        }
        if arg > lo_i && arg < hi_i {
            center = arg;
            settled = true;
            break;
        }
        center = arg;
    }
    if !settled {
        return Err(Error::NonConvergence(
            "likelihood argmax kept drifting across the scan window".into(),
        ));
    }

    // Golden-section maximization of the full-record likelihood inside the
    // winning scan cell pair.
    let mut a = scan_b(center - 1);
    let mut b = scan_b(center + 1);
    let width0 = b - a;
    let inv_phi = 0.618_033_988_749_894_8;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = log_likelihood(full, model, x1)?;
    let mut f2 = log_likelihood(full, model, x2)?;
    for _ in 0..opts.golden_iters {
        if (b - a) < 5e-3 * width0 {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = log_likelihood(full, model, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = log_likelihood(full, model, x2)?;
        }
    }
    let (b_hat, ll_max) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };

    if !opts.estimate_error {
        return Ok(FieldFit {
            b_hat,
            std_err: f64::NAN,
            log_likelihood: ll_max,
        });
    }
    // Observed information by central second difference; the step sits well
    // below the fringe period so higher-order terms stay negligible.
    let h = period / 20.0;
    let ll_p = log_likelihood(full, model, b_hat + h)?;
    let ll_m = log_likelihood(full, model, b_hat - h)?;
    let d2 = (ll_p - 2.0 * ll_max + ll_m) / (h * h);
    if !(d2 < 0.0) {
        return Err(Error::NonConvergence(format!(
            "non-concave likelihood at the optimum (d2 = {d2:e})"
        )));
    }
    Ok(FieldFit {
        b_hat,
        std_err: (-d2).recip().sqrt(),
        log_likelihood: ll_max,
    })
}

/// Probe type of a scaling row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// N independent single-particle estimates, averaged.
    Classical,
    /// N-particle cat state; bound reporting only.
    Quantum,
}

impl std::fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalingMode::Classical => write!(f, "classical"),
            ScalingMode::Quantum => write!(f, "quantum"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: u32,
    pub shots: u32,
    pub trials: u32,
    /// Classical rows: Bessel-corrected std of the trial estimates, T.
    /// Quantum rows: the oracle bound itself (no estimator is simulated).
    pub empirical_std: f64,
    /// Published bound. Classical rows scale the single-particle form by
    /// 1/sqrt(N*shots); quantum rows carry the per-probe collective form
    /// exactly as published.
    pub crb_paper: f64,
    /// Fidelity-susceptibility oracle bound with the same scaling convention.
    pub crb_numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    pub mode: ScalingMode,
    pub rows: Vec<ScalingRow>,
}

impl ScalingCurve {
    pub const CSV_COLUMNS: [&'static str; 6] = [
        "n",
        "shots",
        "trials",
        "empirical_std",
        "crb_paper",
        "crb_numeric",
    ];

    pub fn to_csv_string(&self, comment: &str) -> String {
        use crate::csvio::{g17, to_csv_string};
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.shots.to_string(),
                    r.trials.to_string(),
                    g17(r.empirical_std),
                    g17(r.crb_paper),
                    g17(r.crb_numeric),
                ]
            })
            .collect();
        to_csv_string(comment, &Self::CSV_COLUMNS, &rows)
    }
}

/// Empirical sensitivity scaling against particle number.
///
/// Classical rows run the full Monte Carlo: per trial, N independent
/// single-particle records of `shots` positions each are fitted and averaged;
/// the row reports the spread of those averages over `trials`. Quantum rows
/// report the closed-form cat-state bounds. Trials use derived RNG streams
/// indexed by (row, trial, particle), so results are independent of
/// scheduling; at least 30 trials are recommended for stable spreads.
pub fn scaling_experiment(
    p: &ParamSet,
    n_list: &[u32],
    shots: u32,
    trials: u32,
    seed: u64,
    mode: ScalingMode,
) -> Result<ScalingCurve> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidParam(
            "n_list must be non-empty, all N >= 1".into(),
        ));
    }
    if shots == 0 {
        return Err(Error::InvalidParam("shots must be >= 1".into()));
    }
    if trials < 2 && mode == ScalingMode::Classical {
        return Err(Error::InvalidParam(
            "classical rows need at least 2 trials".into(),
        ));
    }
    p.validate()?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();

    let rows = match mode {
        ScalingMode::Quantum => ns
            .iter()
            .map(|&n| {
                let template = GhzCatState::from_params(p, n)?;
                let db = default_db_step(&template, p);
                let conv = qfi_numeric_converged(
                    |b| GhzCatState::from_params(&p.with_b_field(b), n),
                    p.b_field,
                    db,
                    p.hbar,
                )?;
                let bound = 1.0 / conv.value.sqrt();
                Ok(ScalingRow {
                    n,
                    shots,
                    trials,
                    empirical_std: bound,
                    crb_paper: crb_ghz_paper(p, n),
                    crb_numeric: bound,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        ScalingMode::Classical => {
            // Shared sampling density at the true field.
            let state = model_state(p);
            let lam = interference::fringe_spacing(p)?;
            let grid = state_grid(&state, p.t_free, p, Some(lam / 16.0))?;
            let dens = interference::density(&state, &grid, p.t_free, p)?;
            let template = GhzCatState::from_params(p, 1)?;
            let db = default_db_step(&template, p);
            let q1 = qfi_numeric_converged(
                |b| GhzCatState::from_params(&p.with_b_field(b), 1),
                p.b_field,
                db,
                p.hbar,
            )?
            .value;
            ns.iter()
                .enumerate()
                .map(|(row_idx, &n)| {
                    let means: Vec<f64> = (0..trials)
                        .into_par_iter()
                        .map(|trial| -> Result<f64> {
                            let mut acc = 0.0;
                            for particle in 0..n {
                                let stream = ((row_idx as u64) << 48)
                                    | ((trial as u64) << 24)
                                    | particle as u64;
                                let shot_seed = crate::rng::derive_seed(seed, stream);
                                let rec =
                                    sample_positions(&dens, &grid, shots as usize, shot_seed, p)?;
                                let opts = FitOptions {
                                    estimate_error: false,
                                    ..FitOptions::default()
                                };
                                acc += fit_field_with(&rec, p, p.b_field, &opts)?.b_hat;
                            }
                            Ok(acc / n as f64)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(ScalingRow {
                        n,
                        shots,
                        trials,
                        empirical_std: sample_std(&means),
                        crb_paper: crb_single(p) / ((n as f64) * shots as f64).sqrt(),
                        crb_numeric: 1.0 / ((n as f64) * shots as f64 * q1).sqrt(),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ScalingCurve { mode, rows })
}
