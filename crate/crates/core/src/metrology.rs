//! Quantum Fisher information and Cramér-Rao bounds.
//!
//! Two routes are kept deliberately separate:
//!
//! * `*_paper` values are the published closed forms, implemented verbatim —
//!   `(k t gamma hbar / (2 sigma))^2` for a single particle and
//!   `N^2 (k t gamma hbar / (4 sigma))^2` for the N-particle cat state. The
//!   two disagree by a factor of 4 at N = 1; both are reported, neither is
//!   edited.
//! * [`qfi_numeric`] is the arbitrating oracle: the pure-state fidelity
//!   susceptibility `8 (1 - |<Psi(B)|Psi(B+dB)>|) / dB^2`, evaluated from
//!   closed-form Gaussian overlaps (never an N-body grid) and validated by
//!   step halving.
//!
//! For stationary branch packets the oracle yields QFI linear in N: the
//! branch derivative overlap `<psi|d psi>` vanishes for a real Gaussian, so
//! the collective N^2 term has nothing to add coherently. A nonzero mean
//! momentum restores it (`<psi|d psi> = -i p/hbar`), which is exposed as an
//! experimental knob on [`GhzCatState`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::state::SpinPositionState;

/// N-particle two-branch cat state, represented by closed-form branch
/// parameters only.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzCatState {
    pub n_particles: u32,
    /// Per-particle branch-center difference dx_+ - dx_-, m (signed).
    pub per_particle_separation: f64,
    /// Per-particle packet width, m.
    pub width_sigma: f64,
    /// Per-particle mean momentum, kg·m·s⁻¹ (0 in the baseline protocol).
    pub mean_momentum: f64,
    /// Amplitudes of the all-up and all-down branches.
    pub branch_amplitudes: (Complex64, Complex64),
}

impl GhzCatState {
    pub fn new(n_particles: u32, per_particle_separation: f64, width_sigma: f64) -> Result<Self> {
        if n_particles < 1 {
            return Err(Error::InvalidParam("cat state needs N >= 1".into()));
        }
        if !(width_sigma > 0.0) {
            return Err(Error::InvalidParam(format!(
                "cat state needs positive width, got {width_sigma}"
            )));
        }
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(GhzCatState {
            n_particles,
            per_particle_separation,
            width_sigma,
            mean_momentum: 0.0,
            branch_amplitudes: (amp, amp),
        })
    }

    /// Cat state produced by the collective entangling map at the parameter
    /// set's field: separation dx_+ - dx_- = -k t gamma B hbar per particle.
    pub fn from_params(p: &ParamSet, n_particles: u32) -> Result<Self> {
        GhzCatState::new(
            n_particles,
            -p.k * p.t_couple * p.gamma * p.b_field * p.hbar,
            p.sigma,
        )
    }

    pub fn with_mean_momentum(mut self, p: f64) -> Self {
        self.mean_momentum = p;
        self
    }

    pub fn with_amplitudes(mut self, up: Complex64, down: Complex64) -> Result<Self> {
        let norm = up.norm_sqr() + down.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "branch amplitudes not normalized: |a+|^2 + |a-|^2 = {norm:.15}"
            )));
        }
        self.branch_amplitudes = (up, down);
        Ok(self)
    }
}

/// States whose pairwise overlap is available in closed form, the only
/// capability the fidelity-susceptibility oracle needs.
pub trait StateOverlap {
    fn state_overlap(&self, other: &Self, hbar: f64) -> Result<Complex64>;
}

impl StateOverlap for SpinPositionState {
    fn state_overlap(&self, other: &Self, hbar: f64) -> Result<Complex64> {
        self.overlap(other, hbar)
    }
}

impl StateOverlap for GhzCatState {
    /// `<a|b>` for two cat states of the same family. Same-branch terms are
    /// the N-th power of the single-particle Gaussian overlap; cross-branch
    /// terms vanish exactly because the collective spin factors
    /// `<+...+|-...->` are orthogonal (their spatial overlap would in any
    /// case be suppressed by the macroscopic branch separation).
    fn state_overlap(&self, other: &Self, hbar: f64) -> Result<Complex64> {
        if self.n_particles != other.n_particles {
            return Err(Error::InvalidParam(format!(
                "cat overlap needs equal N, got {} and {}",
                self.n_particles, other.n_particles
            )));
        }
        let (sa, sb) = (self.width_sigma, other.width_sigma);
        if (sa - sb).abs() > 1e-12 * sa.max(sb) {
            return Err(Error::InvalidParam(format!(
                "cat overlap needs equal widths, got {sa:e} and {sb:e}"
            )));
        }
        if (self.mean_momentum - other.mean_momentum).abs()
            > 1e-12 * self.mean_momentum.abs().max(other.mean_momentum.abs())
        {
            return Err(Error::InvalidParam(
                "cat overlap needs equal mean momenta".into(),
            ));
        }
        let sigma = 0.5 * (sa + sb);
        let pbar = self.mean_momentum;
        let n = self.n_particles;
        // Branch centers sit at +-separation/2 about a common origin.
        let single = |delta: f64| -> Complex64 {
            let mag = (-delta * delta / (8.0 * sigma * sigma)).exp();
            Complex64::from_polar(mag, -pbar * delta / hbar)
        };
        let power =
            |z: Complex64| Complex64::from_polar(z.norm().powi(n as i32), z.arg() * n as f64);
        let delta_up = (other.per_particle_separation - self.per_particle_separation) / 2.0;
        let delta_down = -delta_up;
        let (a_up, a_down) = self.branch_amplitudes;
        let (b_up, b_down) = other.branch_amplitudes;
        Ok(a_up.conj() * b_up * power(single(delta_up))
            + a_down.conj() * b_down * power(single(delta_down)))
    }
}

/// Fidelity `<Psi(B)|Psi(B+dB)>` of a cat state under a field step: each
/// branch center moves by -+ (k t gamma hbar / 2) dB.
pub fn overlap_cat(state: &GhzCatState, db: f64, p: &ParamSet) -> Result<Complex64> {
    let shifted = GhzCatState {
        per_particle_separation: state.per_particle_separation
            - p.k * p.t_couple * p.gamma * p.hbar * db,
        ..state.clone()
    };
    state.state_overlap(&shifted, p.hbar)
}

/// Published single-particle QFI `(k t gamma hbar / (2 sigma))^2`, T^-2.
/// Independent of B.
pub fn qfi_single_analytic(p: &ParamSet) -> f64 {
    let s = p.k * p.t_couple * p.gamma * p.hbar / (2.0 * p.sigma);
    s * s
}

/// Published single-particle bound `2 sigma / (k t gamma hbar)`, T.
pub fn crb_single(p: &ParamSet) -> f64 {
    1.0 / qfi_single_analytic(p).sqrt()
}

/// Published N-particle cat-state QFI `N^2 (k t gamma hbar / (4 sigma))^2`,
/// T^-2. Note the factor-4 clash with [`qfi_single_analytic`] at N = 1.
pub fn qfi_ghz_paper(p: &ParamSet, n_particles: u32) -> f64 {
    let s = p.k * p.t_couple * p.gamma * p.hbar / (4.0 * p.sigma);
    (n_particles as f64) * (n_particles as f64) * s * s
}

/// Published N-particle bound `4 sigma / (N k t gamma hbar)`, T.
pub fn crb_ghz_paper(p: &ParamSet, n_particles: u32) -> f64 {
    1.0 / qfi_ghz_paper(p, n_particles).sqrt()
}

/// Fidelity-susceptibility QFI: `8 (1 - |<Psi(B)|Psi(B+dB)>|) / dB^2`.
///
/// `build` materializes the state family at a given field. The step must
/// keep `1 - |overlap|` inside [1e-12, 0.1]: larger steps truncate, smaller
/// ones cancel.
pub fn qfi_numeric<S, F>(build: F, b: f64, db_step: f64, hbar: f64) -> Result<f64>
where
    S: StateOverlap,
    F: Fn(f64) -> Result<S>,
{
    if !(db_step > 0.0) || !db_step.is_finite() {
        return Err(Error::InvalidParam(format!(
            "finite-difference step must be positive, got {db_step}"
        )));
    }
    let overlap = build(b)?.state_overlap(&build(b + db_step)?, hbar)?;
    let one_minus = 1.0 - overlap.norm();
    if one_minus >= 0.1 {
        return Err(Error::StepTooLarge(one_minus));
    }
    if one_minus < 1e-12 {
        return Err(Error::StepTooSmall(one_minus));
    }
    Ok(8.0 * one_minus / (db_step * db_step))
}

/// A step-halving run of the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiConvergence {
    /// Value at the halved step (the quoted one).
    pub value: f64,
    /// Value at the requested step.
    pub coarse: f64,
    /// value / coarse; 1 within 1% when converged.
    pub ratio: f64,
    /// The halved step that produced `value`, T.
    pub db_step: f64,
}

/// Run the oracle at `db_step` and `db_step / 2` and report the convergence
/// ratio alongside the finer value.
pub fn qfi_numeric_converged<S, F>(
    build: F,
    b: f64,
    db_step: f64,
    hbar: f64,
) -> Result<QfiConvergence>
where
    S: StateOverlap,
    F: Fn(f64) -> Result<S>,
{
    let coarse = qfi_numeric(&build, b, db_step, hbar)?;
    let fine = qfi_numeric(&build, b, db_step / 2.0, hbar)?;
    Ok(QfiConvergence {
        value: fine,
        coarse,
        ratio: fine / coarse,
        db_step: db_step / 2.0,
    })
}

/// Default finite-difference step: targets `1 - |overlap| ~ 1e-4`, balancing
/// truncation against cancellation.
pub fn default_db_step(state: &GhzCatState, p: &ParamSet) -> f64 {
    let s = (p.k * p.t_couple * p.gamma * p.hbar / 2.0).abs();
    let n = state.n_particles as f64;
    let sigma = state.width_sigma;
    let curvature = n * s * s / (8.0 * sigma * sigma)
        + n * n * state.mean_momentum * state.mean_momentum * s * s / (2.0 * p.hbar * p.hbar);
    (1e-4 / curvature).sqrt()
}

/// Which published closed form a report is audited against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperFormula {
    SingleParticle,
    GhzCollective,
}

impl std::fmt::Display for PaperFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PaperFormula::SingleParticle => write!(f, "single_particle"),
            PaperFormula::GhzCollective => write!(f, "ghz_collective"),
        }
    }
}

impl std::str::FromStr for PaperFormula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_particle" => Ok(PaperFormula::SingleParticle),
            "ghz_collective" => Ok(PaperFormula::GhzCollective),
            other => Err(Error::InvalidConfig(format!("unknown formula {other:?}"))),
        }
    }
}

/// Published and oracle QFI/CRB values side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiReport {
    pub n_particles: u32,
    pub formula: PaperFormula,
    pub qfi_paper: f64,
    pub qfi_numeric: f64,
    pub crb_paper: f64,
    pub crb_numeric: f64,
    /// Finite-difference step behind `qfi_numeric`, T.
    pub delta_b_step: f64,
    /// qfi_paper / qfi_numeric.
    pub discrepancy_ratio: f64,
}

impl QfiReport {
    pub const CSV_COLUMNS: [&'static str; 8] = [
        "n_particles",
        "formula",
        "qfi_paper",
        "qfi_numeric",
        "crb_paper",
        "crb_numeric",
        "delta_b_step",
        "discrepancy_ratio",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        use crate::csvio::g17;
        vec![
            self.n_particles.to_string(),
            self.formula.to_string(),
            g17(self.qfi_paper),
            g17(self.qfi_numeric),
            g17(self.crb_paper),
            g17(self.crb_numeric),
            g17(self.delta_b_step),
            g17(self.discrepancy_ratio),
        ]
    }

    pub fn from_csv_row(cells: &[String]) -> Result<Self> {
        use crate::csvio::parse_f64;
        if cells.len() != Self::CSV_COLUMNS.len() {
            return Err(Error::InvalidConfig(format!(
                "report row has {} cells, expected {}",
                cells.len(),
                Self::CSV_COLUMNS.len()
            )));
        }
        Ok(QfiReport {
            n_particles: cells[0]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad n_particles {:?}", cells[0])))?,
            formula: cells[1].parse()?,
            qfi_paper: parse_f64(&cells[2])?,
            qfi_numeric: parse_f64(&cells[3])?,
            crb_paper: parse_f64(&cells[4])?,
            crb_numeric: parse_f64(&cells[5])?,
            delta_b_step: parse_f64(&cells[6])?,
            discrepancy_ratio: parse_f64(&cells[7])?,
        })
    }

    pub fn to_csv_string(reports: &[QfiReport], comment: &str) -> String {
        let rows: Vec<Vec<String>> = reports.iter().map(|r| r.csv_row()).collect();
        crate::csvio::to_csv_string(comment, &Self::CSV_COLUMNS, &rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Vec<QfiReport>> {
        let doc = crate::csvio::parse_csv(text)?;
        if doc.columns != Self::CSV_COLUMNS {
            return Err(Error::InvalidConfig("unexpected report columns".into()));
        }
        doc.rows.iter().map(|r| Self::from_csv_row(r)).collect()
    }
}

/// Bundle the published formula and the oracle for an N-particle cat state
/// at the parameter set's field, with an optional per-particle mean momentum
/// and finite-difference step (defaulting to [`default_db_step`]).
///
/// The oracle runs with step halving; a convergence ratio off 1 by more than
/// 1% is reported as a numerical-invariant violation.
pub fn qfi_report_using(
    formula: PaperFormula,
    p: &ParamSet,
    n_particles: u32,
    mean_momentum: f64,
) -> Result<QfiReport> {
    qfi_report_with_step(formula, p, n_particles, mean_momentum, None)
}

pub fn qfi_report_with_step(
    formula: PaperFormula,
    p: &ParamSet,
    n_particles: u32,
    mean_momentum: f64,
    db_step: Option<f64>,
) -> Result<QfiReport> {
    let template = GhzCatState::from_params(p, n_particles)?.with_mean_momentum(mean_momentum);
    let db = db_step.unwrap_or_else(|| default_db_step(&template, p));
    let build = |b: f64| {
        Ok(GhzCatState::from_params(&p.with_b_field(b), n_particles)?
            .with_mean_momentum(mean_momentum))
    };
    let conv = qfi_numeric_converged(build, p.b_field, db, p.hbar)?;
    if (conv.ratio - 1.0).abs() > 0.01 {
        return Err(Error::NumericalInvariant(format!(
            "fidelity-susceptibility step halving did not converge: ratio = {:.6}",
            conv.ratio
        )));
    }
    let qfi_paper = match formula {
        PaperFormula::SingleParticle => qfi_single_analytic(p),
        PaperFormula::GhzCollective => qfi_ghz_paper(p, n_particles),
    };
    Ok(QfiReport {
        n_particles,
        formula,
        qfi_paper,
        qfi_numeric: conv.value,
        crb_paper: 1.0 / qfi_paper.sqrt(),
        crb_numeric: 1.0 / conv.value.sqrt(),
        delta_b_step: conv.db_step,
        discrepancy_ratio: qfi_paper / conv.value,
    })
}

/// [`qfi_report_using`] with the published formula matching N (single
/// particle at N = 1, collective otherwise) and stationary packets.
pub fn qfi_report(p: &ParamSet, n_particles: u32) -> Result<QfiReport> {
    let formula = if n_particles == 1 {
        PaperFormula::SingleParticle
    } else {
        PaperFormula::GhzCollective
    };
    qfi_report_using(formula, p, n_particles, 0.0)
}

/// Oracle QFI as a function of N, with the fitted log-log scaling exponent.
pub fn ghz_scaling_exponent(
    p: &ParamSet,
    n_list: &[u32],
    mean_momentum: f64,
) -> Result<(crate::stats::LinearFit, Vec<(u32, f64)>)> {
    if n_list.len() < 3 {
        return Err(Error::InvalidParam(
            "scaling exponent needs at least 3 particle counts".into(),
        ));
    }
    let mut values = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let template = GhzCatState::from_params(p, n)?.with_mean_momentum(mean_momentum);
        let db = default_db_step(&template, p);
        let build = |b: f64| {
            Ok(GhzCatState::from_params(&p.with_b_field(b), n)?.with_mean_momentum(mean_momentum))
        };
        let conv = qfi_numeric_converged(build, p.b_field, db, p.hbar)?;
        values.push((n, conv.value));
    }
    let ln_n: Vec<f64> = values.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ln_q: Vec<f64> = values.iter().map(|(_, q)| q.ln()).collect();
    Ok((crate::stats::linear_fit(&ln_n, &ln_q), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::entangle;
    use crate::spin::balanced_spin_half;
    use crate::wavepacket::GaussianWavepacket;

    fn rb() -> ParamSet {
        ParamSet::rb87_defaults()
    }

    #[test]
    fn qfi_single_unit_construction() {
        // k t gamma hbar = 2 sigma makes the QFI exactly 1.
        let mut p = rb();
        p.k = 2.0 * p.sigma / (p.t_couple * p.gamma * p.hbar);
        assert!((qfi_single_analytic(&p) - 1.0).abs() < 1e-12);
        assert!((crb_single(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qfi_single_quadratic_in_coupling() {
        let p = rb();
        let mut p2 = p.clone();
        p2.k *= 2.0;
        assert!(
            (qfi_single_analytic(&p2) - 4.0 * qfi_single_analytic(&p)).abs()
                <= 1e-12 * qfi_single_analytic(&p2)
        );
    }

    #[test]
    fn crb_is_inverse_root_qfi() {
        let mut rng = crate::rng::CounterRng::seeded(11);
        for _ in 0..20 {
            let mut p = rb();
            p.k = (0.5 + rng.next_f64()) * 4e26;
            p.sigma = (0.5 + rng.next_f64()) * 1e-6;
            p.t_couple = (0.5 + rng.next_f64()) * 1e-3;
            assert!((crb_single(&p) * qfi_single_analytic(&p).sqrt() - 1.0).abs() < 1e-12);
            for n in [1u32, 3, 8] {
                assert!((crb_ghz_paper(&p, n) * qfi_ghz_paper(&p, n).sqrt() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rb87_crb_value() {
        let p = rb();
        let crb = crb_single(&p);
        assert!(
            (crb - 2.694_982_463_6e-7).abs() / crb < 1e-9,
            "crb = {crb:e}"
        );
    }

    #[test]
    fn ghz_formula_scalings() {
        let p = rb();
        // N = 1 differs from the single-particle form by a factor of 4.
        let ratio = qfi_ghz_paper(&p, 1) / qfi_single_analytic(&p);
        assert!((ratio - 0.25).abs() < 1e-12);
        // Quadratic N scaling, 1/N bound scaling.
        for n in [1u32, 2, 5] {
            assert!(
                (qfi_ghz_paper(&p, 2 * n) - 4.0 * qfi_ghz_paper(&p, n)).abs()
                    <= 1e-12 * qfi_ghz_paper(&p, 2 * n)
            );
        }
        assert!(
            (crb_ghz_paper(&p, 4) - crb_ghz_paper(&p, 1) / 4.0).abs()
                <= 1e-12 * crb_ghz_paper(&p, 4)
        );
    }

    #[test]
    fn overlap_cat_basics() {
        let p = rb();
        let cat = GhzCatState::from_params(&p, 3).unwrap();
        let o = overlap_cat(&cat, 0.0, &p).unwrap();
        assert!((o - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // |overlap| <= 1 under random steps.
        let mut rng = crate::rng::CounterRng::seeded(5);
        for _ in 0..50 {
            let db = (rng.next_f64() - 0.5) * 1e-6;
            let o = overlap_cat(&cat, db, &p).unwrap();
            assert!(o.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn overlap_cat_half_point() {
        // Branch overlap 1/2 at a center shift of sigma*sqrt(8 ln 2).
        let p = rb();
        let cat = GhzCatState::from_params(&p, 1).unwrap();
        let shift = p.sigma * (8.0 * 2f64.ln()).sqrt();
        let db = shift / (p.k * p.t_couple * p.gamma * p.hbar / 2.0);
        let o = overlap_cat(&cat, db, &p).unwrap();
        assert!((o.norm() - 0.5).abs() < 1e-12, "overlap = {}", o.norm());
    }

    #[test]
    fn overlap_cat_power_law_in_n() {
        let p = rb();
        let db = 2.3e-9;
        let one = overlap_cat(&GhzCatState::from_params(&p, 1).unwrap(), db, &p)
            .unwrap()
            .norm();
        for n in [2u32, 4, 8] {
            let many = overlap_cat(&GhzCatState::from_params(&p, n).unwrap(), db, &p)
                .unwrap()
                .norm();
            assert!(
                (many - one.powi(n as i32)).abs() < 1e-12,
                "N = {n}: {many} vs {}",
                one.powi(n as i32)
            );
        }
    }

    #[test]
    fn oracle_confirms_single_particle_form() {
        let p = rb();
        let cat = GhzCatState::from_params(&p, 1).unwrap();
        let db = default_db_step(&cat, &p);
        let build = |b: f64| GhzCatState::from_params(&p.with_b_field(b), 1);
        let conv = qfi_numeric_converged(build, p.b_field, db, p.hbar).unwrap();
        let analytic = qfi_single_analytic(&p);
        assert!(
            (conv.value - analytic).abs() / analytic < 0.005,
            "oracle {:e} vs analytic {:e}",
            conv.value,
            analytic
        );
        assert!((conv.ratio - 1.0).abs() < 0.01, "ratio = {}", conv.ratio);
    }

    #[test]
    fn oracle_matches_entangled_state_family() {
        // The cat state at N = 1 and the spin-1/2 entangled state describe
        // the same physics; the oracle must agree through both state types.
        let p = rb();
        let packet = GaussianWavepacket::new(p.x0, p.sigma).unwrap();
        let via_state = qfi_numeric(
            |b| Ok(entangle(&balanced_spin_half(), &packet, &p.with_b_field(b))),
            p.b_field,
            2e-9,
            p.hbar,
        )
        .unwrap();
        let via_cat = qfi_numeric(
            |b| GhzCatState::from_params(&p.with_b_field(b), 1),
            p.b_field,
            2e-9,
            p.hbar,
        )
        .unwrap();
        assert!(
            (via_state - via_cat).abs() / via_cat < 1e-10,
            "{via_state:e} vs {via_cat:e}"
        );
    }

    #[test]
    fn oracle_independent_of_field() {
        let p = rb();
        let db = 2e-9;
        let q1 = qfi_numeric(
            |b| GhzCatState::from_params(&p.with_b_field(b), 1),
            p.b_field,
            db,
            p.hbar,
        )
        .unwrap();
        let q2 = qfi_numeric(
            |b| GhzCatState::from_params(&p.with_b_field(b), 1),
            2.0 * p.b_field,
            db,
            p.hbar,
        )
        .unwrap();
        assert!((q1 - q2).abs() / q1 < 1e-9);
    }

    #[test]
    fn oracle_scaling_is_linear_for_stationary_packets() {
        let p = rb();
        let (fit, values) = ghz_scaling_exponent(&p, &[1, 2, 4, 8], 0.0).unwrap();
        assert!(
            (fit.slope - 1.0).abs() < 1e-3,
            "fitted exponent {} (published form scales as N^2)",
            fit.slope
        );
        // Monotone non-decreasing in N.
        for w in values.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn mean_momentum_restores_collective_scaling() {
        // With per-particle mean momentum the branch derivatives add
        // coherently; the oracle must match the closed-form
        // N s^2/sigma^2 + 4 N^2 p^2 s^2/hbar^2 and the fitted exponent
        // must move toward 2.
        let p = rb();
        let pbar = 2.0 * p.hbar / p.sigma;
        let s = p.k * p.t_couple * p.gamma * p.hbar / 2.0;
        for n in [1u32, 4] {
            let template = GhzCatState::from_params(&p, n)
                .unwrap()
                .with_mean_momentum(pbar);
            let db = default_db_step(&template, &p);
            let q = qfi_numeric(
                |b| Ok(GhzCatState::from_params(&p.with_b_field(b), n)?.with_mean_momentum(pbar)),
                p.b_field,
                db,
                p.hbar,
            )
            .unwrap();
            let nf = n as f64;
            let expected = nf * s * s / (p.sigma * p.sigma)
                + 4.0 * nf * nf * pbar * pbar * s * s / (p.hbar * p.hbar);
            assert!(
                (q - expected).abs() / expected < 0.005,
                "N = {n}: oracle {q:e} vs derivative form {expected:e}"
            );
        }
        let (fit, _) = ghz_scaling_exponent(&p, &[1, 2, 4, 8, 16], pbar).unwrap();
        assert!(fit.slope > 1.5, "exponent {} should approach 2", fit.slope);
    }

    #[test]
    fn oracle_step_guards() {
        let p = rb();
        let build = |b: f64| GhzCatState::from_params(&p.with_b_field(b), 1);
        assert!(matches!(
            qfi_numeric(build, p.b_field, 1.0, p.hbar),
            Err(Error::StepTooLarge(_))
        ));
        assert!(matches!(
            qfi_numeric(build, p.b_field, 1e-18, p.hbar),
            Err(Error::StepTooSmall(_))
        ));
    }

    #[test]
    fn report_ratios() {
        let p = rb();
        let single = qfi_report(&p, 1).unwrap();
        assert_eq!(single.formula, PaperFormula::SingleParticle);
        assert!(
            (single.discrepancy_ratio - 1.0).abs() < 0.005,
            "ratio = {}",
            single.discrepancy_ratio
        );
        let audited = qfi_report_using(PaperFormula::GhzCollective, &p, 1, 0.0).unwrap();
        assert!(
            (audited.discrepancy_ratio - 0.25).abs() < 0.01,
            "ratio = {}",
            audited.discrepancy_ratio
        );
        // crb = qfi^(-1/2) in every report.
        for r in [&single, &audited] {
            assert!((r.crb_paper * r.qfi_paper.sqrt() - 1.0).abs() < 1e-12);
            assert!((r.crb_numeric * r.qfi_numeric.sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn report_csv_round_trip_is_lossless() {
        let p = rb();
        let reports = vec![
            qfi_report(&p, 1).unwrap(),
            qfi_report(&p, 4).unwrap(),
            qfi_report_using(PaperFormula::GhzCollective, &p, 1, 0.0).unwrap(),
        ];
        let text = QfiReport::to_csv_string(&reports, &p.summary());
        let back = QfiReport::from_csv_str(&text).unwrap();
        assert_eq!(back.len(), reports.len());
        for (a, b) in reports.iter().zip(&back) {
            assert_eq!(a.n_particles, b.n_particles);
            assert_eq!(a.formula, b.formula);
            assert_eq!(a.qfi_paper.to_bits(), b.qfi_paper.to_bits());
            assert_eq!(a.qfi_numeric.to_bits(), b.qfi_numeric.to_bits());
            assert_eq!(a.crb_paper.to_bits(), b.crb_paper.to_bits());
            assert_eq!(a.crb_numeric.to_bits(), b.crb_numeric.to_bits());
            assert_eq!(a.delta_b_step.to_bits(), b.delta_b_step.to_bits());
            assert_eq!(a.discrepancy_ratio.to_bits(), b.discrepancy_ratio.to_bits());
        }
    }
}
