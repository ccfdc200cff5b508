//! Small statistics helpers: moments, ordinary least squares with a 95%
//! confidence interval on the slope, and the Kolmogorov-Smirnov statistic.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with Bessel correction.
pub fn sample_std(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2, "sample_std needs at least 2 values");
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_ci95: f64,
    /// Residual degrees of freedom, n - 2.
    pub dof: usize,
}

/// Two-sided 97.5% Student-t quantiles for small residual degrees of freedom,
/// falling back to the normal quantile beyond the table.
fn t_quantile_975(dof: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
        2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
        2.052, 2.048, 2.045, 2.042,
    ];
    if dof == 0 {
        f64::INFINITY
    } else if dof <= TABLE.len() {
        TABLE[dof - 1]
    } else {
        1.960
    }
}

/// Ordinary least squares y = intercept + slope*x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "linear_fit needs at least 2 points");
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    assert!(sxx > 0.0, "linear_fit needs non-degenerate x values");
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = x.len().saturating_sub(2);
    let (stderr, ci) = if dof > 0 {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let r = yi - (intercept + slope * xi);
                r * r
            })
            .sum();
        let se = (ss_res / dof as f64 / sxx).sqrt();
        (se, t_quantile_975(dof) * se)
    } else {
        (0.0, 0.0)
    };
    LinearFit {
        slope,
        intercept,
        slope_stderr: stderr,
        slope_ci95: ci,
        dof: n as usize - 2,
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against a CDF. Samples need not
/// be sorted.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}
