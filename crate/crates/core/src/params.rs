//! Physical parameter set and the elementary Zeeman/displacement maps.

use crate::constants::{gamma_from_ghz_per_t, HBAR, RB87_MASS};
use crate::error::{Error, Result};
use crate::half::HalfInt;

/// All physical scalars of the protocol, strict SI.
///
/// Two time parameters are carried even though the closed-form fringe laws
/// use a single `t`: the linear fringe-phase law requires the coupling time
/// entering the displacement to equal the free-evolution time entering the
/// kinetic phase, and keeping them separate makes that assumption explicit
/// and testable.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹. Nonzero.
    pub gamma: f64,
    /// Spin-momentum coupling constant, s·kg⁻¹·m⁻¹ (inverse momentum per second). Positive.
    pub k: f64,
    /// Coupling duration, s. Non-negative.
    pub t_couple: f64,
    /// Free-evolution duration, s. Non-negative.
    pub t_free: f64,
    /// Magnetic field, T. Any real, including 0.
    pub b_field: f64,
    /// Particle mass, kg. Positive.
    pub mass: f64,
    /// Initial wavepacket width, m, amplitude convention: |psi|^2 has standard deviation sigma. Positive.
    pub sigma: f64,
    /// Initial wavepacket center, m.
    pub x0: f64,
    /// Reduced Planck constant, J·s. Fixed CODATA value.
    pub hbar: f64,
}

impl ParamSet {
    /// ⁸⁷Rb-like defaults: 1 µm packet, ms-scale times, sub-µT field, and a
    /// coupling constant giving a few-µm branch separation.
    pub fn rb87_defaults() -> Self {
        ParamSet {
            gamma: gamma_from_ghz_per_t(28.0),
            k: 4e26,
            t_couple: 1e-3,
            t_free: 1e-3,
            b_field: 5e-7,
            mass: RB87_MASS,
            sigma: 1e-6,
            x0: 0.0,
            hbar: HBAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::InvalidParam(msg))
        }
        if self.gamma == 0.0 || !self.gamma.is_finite() {
            return bad(format!(
                "gamma must be finite and nonzero, got {}",
                self.gamma
            ));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("k must be positive, got {}", self.k));
        }
        if !(self.t_couple >= 0.0) {
            return bad(format!("t_couple must be >= 0, got {}", self.t_couple));
        }
        if !(self.t_free >= 0.0) {
            return bad(format!("t_free must be >= 0, got {}", self.t_free));
        }
        if !self.b_field.is_finite() {
            return bad(format!("B must be finite, got {}", self.b_field));
        }
        if !(self.mass > 0.0) {
            return bad(format!("m_p must be positive, got {}", self.mass));
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !self.x0.is_finite() {
            return bad(format!("x0 must be finite, got {}", self.x0));
        }
        Ok(())
    }

    /// Zeeman energy E_m = -gamma·B·hbar·m of projection `m`, J.
    pub fn zeeman_energy(&self, m: HalfInt) -> f64 {
        -self.gamma * self.b_field * self.hbar * m.to_f64()
    }

    /// Spin-dependent displacement dx_m = -k·t_couple·gamma·B·hbar·m, m.
    ///
    /// Equivalently k·t_couple·E_m: the coupling converts Zeeman energy into
    /// a translation at rate k per unit time.
    pub fn displacement(&self, m: HalfInt) -> f64 {
        self.k * self.t_couple * self.zeeman_energy(m)
    }

    /// Branch separation |dx_+ - dx_-| = |k·t_couple·gamma·B·hbar| of a
    /// spin-1/2 superposition, m.
    pub fn spin_half_separation(&self) -> f64 {
        (self.k * self.t_couple * self.gamma * self.b_field * self.hbar).abs()
    }

    pub fn with_b_field(&self, b: f64) -> Self {
        ParamSet {
            b_field: b,
            ..self.clone()
        }
    }

    /// Parse a plain-text `key=value` config. Blank lines and `#` comments are
    /// skipped. `gamma` takes rad·s⁻¹·T⁻¹; `gamma_ghz_per_t` takes GHz/T and
    /// is converted; specifying both is an error. Unknown keys are rejected.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut p = ParamSet::rb87_defaults();
        p.apply_config_str(text)?;
        Ok(p)
    }

    /// Apply `key=value` lines on top of the current values.
    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        let mut saw_gamma = false;
        let mut saw_gamma_ghz = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "line {}: expected key=value, got {:?}",
                    lineno + 1,
                    raw
                ))
            })?;
            let key = key.trim();
            if key == "gamma" {
                saw_gamma = true;
            }
            if key == "gamma_ghz_per_t" {
                saw_gamma_ghz = true;
            }
            if saw_gamma && saw_gamma_ghz {
                return Err(Error::InvalidConfig(
                    "both gamma and gamma_ghz_per_t given; specify exactly one".into(),
                ));
            }
            self.apply_kv(key, value.trim())?;
        }
        self.validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Apply a single `key=value` assignment.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("{key}: not a number: {v:?}")))
        };
        match key {
            "gamma" => self.gamma = num(value)?,
            "gamma_ghz_per_t" => self.gamma = gamma_from_ghz_per_t(num(value)?),
            "k" => self.k = num(value)?,
            "t_couple" => self.t_couple = num(value)?,
            "t_free" => self.t_free = num(value)?,
            "B" => self.b_field = num(value)?,
            "m_p" => self.mass = num(value)?,
            "sigma" => self.sigma = num(value)?,
            "x0" => self.x0 = num(value)?,
            other => {
                return Err(Error::InvalidConfig(format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }

    /// Serialize as a `key=value` config (SI units, 17 significant digits).
    pub fn to_config_string(&self) -> String {
        use crate::csvio::g17;
        format!(
            "gamma={}\nk={}\nt_couple={}\nt_free={}\nB={}\nm_p={}\nsigma={}\nx0={}\n",
            g17(self.gamma),
            g17(self.k),
            g17(self.t_couple),
            g17(self.t_free),
            g17(self.b_field),
            g17(self.mass),
            g17(self.sigma),
            g17(self.x0),
        )
    }

    /// One-line summary used in CSV comment headers.
    pub fn summary(&self) -> String {
        use crate::csvio::g17;
        format!(
            "gamma={} k={} t_couple={} t_free={} B={} m_p={} sigma={} x0={} hbar={}",
            g17(self.gamma),
            g17(self.k),
            g17(self.t_couple),
            g17(self.t_free),
            g17(self.b_field),
            g17(self.mass),
            g17(self.sigma),
            g17(self.x0),
            g17(self.hbar),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::half::projections;

    fn p() -> ParamSet {
        ParamSet::rb87_defaults()
    }

    #[test]
    fn zeeman_zero_projection() {
        assert_eq!(p().zeeman_energy(HalfInt::ZERO), 0.0);
    }

    #[test]
    fn zeeman_odd_in_m() {
        let p = p();
        let up = p.zeeman_energy(HalfInt::half());
        let down = p.zeeman_energy(-HalfInt::half());
        assert_eq!(up, -down);
        assert!(up != 0.0);
    }

    #[test]
    fn zeeman_electron_millitesla() {
        // gamma = 2*pi*28e9 rad/s/T, B = 1 mT, m = 1/2: E = -gamma*B*hbar/2.
        let mut p = p();
        p.gamma = gamma_from_ghz_per_t(28.0);
        p.b_field = 1e-3;
        let e = p.zeeman_energy(HalfInt::half());
        let expected = -9.276_497_5e-27;
        assert!(
            (e - expected).abs() / expected.abs() < 1e-6,
            "E = {e:e}, expected {expected:e}"
        );
    }

    #[test]
    fn displacement_spin_one_table() {
        let p = p();
        let d = p.k * p.t_couple * p.gamma * p.b_field * p.hbar;
        let table: Vec<f64> = projections(HalfInt::from_int(1))
            .into_iter()
            .map(|m| p.displacement(m))
            .collect();
        assert!((table[0] - d).abs() <= 1e-15 * d.abs()); // m = -1
        assert_eq!(table[1], 0.0); // m = 0
        assert!((table[2] + d).abs() <= 1e-15 * d.abs()); // m = +1
    }

    #[test]
    fn displacement_zero_field() {
        let p = p().with_b_field(0.0);
        for m in projections(HalfInt::new(3)) {
            assert_eq!(p.displacement(m), 0.0);
        }
    }

    #[test]
    fn displacement_spin_half() {
        let p = p();
        let d = p.k * p.t_couple * p.gamma * p.b_field * p.hbar;
        let up = p.displacement(HalfInt::half());
        let down = p.displacement(-HalfInt::half());
        assert!((up + d / 2.0).abs() <= 1e-15 * d.abs());
        assert_eq!(up, -down);
        assert!((p.spin_half_separation() - d.abs()).abs() <= 1e-15 * d.abs());
    }

    #[test]
    fn maps_linear_in_field_and_gamma() {
        // Exact doubling: both maps are products, so f(2B) = 2 f(B) bitwise.
        let p1 = p();
        let p2 = p1.with_b_field(2.0 * p1.b_field);
        let mut p3 = p1.clone();
        p3.gamma *= 2.0;
        let m = HalfInt::new(3);
        assert_eq!(p2.zeeman_energy(m), 2.0 * p1.zeeman_energy(m));
        assert_eq!(p2.displacement(m), 2.0 * p1.displacement(m));
        assert_eq!(p3.zeeman_energy(m), 2.0 * p1.zeeman_energy(m));
        assert_eq!(p3.displacement(m), 2.0 * p1.displacement(m));
    }

    #[test]
    fn displacement_is_k_t_times_energy() {
        let p = p();
        for m in projections(HalfInt::new(5)) {
            let via_energy = p.k * p.t_couple * p.zeeman_energy(m);
            assert_eq!(p.displacement(m), via_energy);
        }
    }

    #[test]
    fn config_round_trip() {
        let mut a = p();
        a.b_field = -3.25e-8;
        a.t_free = 2.5e-3;
        let text = a.to_config_string();
        let b = ParamSet::from_config_str(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_gamma_ghz_conversion() {
        let p = ParamSet::from_config_str("gamma_ghz_per_t = 28\n").unwrap();
        assert!((p.gamma - gamma_from_ghz_per_t(28.0)).abs() < 1.0);
    }

    #[test]
    fn config_rejects_both_gammas() {
        let r = ParamSet::from_config_str("gamma=1e11\ngamma_ghz_per_t=28\n");
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_rejects_unknown_key_and_junk() {
        assert!(ParamSet::from_config_str("coupling=1\n").is_err());
        assert!(ParamSet::from_config_str("k\n").is_err());
        assert!(ParamSet::from_config_str("k=fast\n").is_err());
    }

    #[test]
    fn config_comments_and_blanks() {
        let p = ParamSet::from_config_str("# comment\n\nB = 1e-6 # tail comment\n").unwrap();
        assert_eq!(p.b_field, 1e-6);
    }

    #[test]
    fn validate_rejects_bad_values() {
        let mut a = p();
        a.gamma = 0.0;
        assert!(a.validate().is_err());
        let mut b = p();
        b.k = -1.0;
        assert!(b.validate().is_err());
        let mut c = p();
        c.sigma = 0.0;
        assert!(c.validate().is_err());
        let mut d = p();
        d.b_field = 0.0;
        assert!(d.validate().is_ok()); // zero field is legal
    }
}
