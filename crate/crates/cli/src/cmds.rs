//! Subcommand implementations: compute with `sdi_core`, emit CSV (and
//! optionally SVG) under the output directory, return the written paths.

// Validation guards are written `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use sdi_core::csvio::{g17, to_csv_string};
use sdi_core::dynamics::{entangle, sample_state, sigma_t, state_grid};
use sdi_core::estimation::{scaling_experiment, ScalingCurve, ScalingMode};
use sdi_core::half::HalfInt;
use sdi_core::interference::{
    contrast_at_center, density_trace, extract_fringes, fringe_friendly_time, fringe_spacing,
    fringe_spacing_paper_literal, sensitivity as field_sensitivity, sensitivity_de_broglie_route,
    visibility as visibility_law,
};
use sdi_core::metrology::{ghz_scaling_exponent, qfi_report_with_step, PaperFormula, QfiReport};
use sdi_core::spin::{balanced_spin_half, SpinConfig};
use sdi_core::wavepacket::GaussianWavepacket;
use sdi_core::{Error, ParamSet, Result};

use crate::plot::{line_plot, PlotSpec, Series};

pub struct Ctx {
    pub params: ParamSet,
    pub out: PathBuf,
    pub svg: bool,
    pub seed: u64,
    pub paper_literal: bool,
}

impl Ctx {
    fn comment(&self, extra: &str) -> String {
        let mut c = format!(
            "{} | tool_version={} seed={}",
            self.params.summary(),
            env!("CARGO_PKG_VERSION"),
            self.seed
        );
        if !extra.is_empty() {
            c.push_str(" | ");
            c.push_str(extra);
        }
        c
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| {
            Error::InvalidConfig(format!("cannot create {}: {e}", self.out.display()))
        })?;
        let path = self.out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    fn packet(&self) -> GaussianWavepacket {
        GaussianWavepacket::new(self.params.x0, self.params.sigma).expect("validated sigma")
    }
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || n < 2 {
        return Err(Error::InvalidConfig(format!(
            "sweep needs 0 < min < max and at least 2 points, got [{lo}, {hi}] x {n}"
        )));
    }
    Ok((0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect())
}

/// Branch and total densities for spin-1/2 and spin-1 at time `t`.
pub fn snapshot(ctx: &Ctx, t: f64) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let cases = [
        ("spin_half", balanced_spin_half()),
        ("spin_one", SpinConfig::balanced(HalfInt::from_int(1))),
    ];
    for (label, cfg) in cases {
        let state = entangle(&cfg, &ctx.packet(), &ctx.params);
        let grid = state_grid(&state, t, &ctx.params, None)?;
        let trace = density_trace(&state, &grid, t, &ctx.params)?;
        let parts = sample_state(&state, &grid, t, &ctx.params)?;

        let mut columns: Vec<String> = vec![
            "x".into(),
            "total".into(),
            "classical_part".into(),
            "cross_term".into(),
        ];
        for (m, _) in &parts {
            columns.push(format!("branch_{}", m.to_f64()));
        }
        let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
        let rows: Vec<Vec<String>> = (0..grid.n_points)
            .map(|i| {
                let mut row = vec![
                    g17(grid.position(i)),
                    g17(trace.total[i]),
                    g17(trace.classical[i]),
                    g17(trace.cross[i]),
                ];
                for (_, wf) in &parts {
                    row.push(g17(wf.values[i].norm_sqr()));
                }
                row
            })
            .collect();
        let csv = to_csv_string(
            &ctx.comment(&format!("snapshot={label} time={}", g17(t))),
            &column_refs,
            &rows,
        );
        files.push(ctx.write(&format!("snapshot_{label}.csv"), &csv)?);

        if ctx.svg {
            let xs: Vec<f64> = grid.positions().collect();
            let total: Vec<(f64, f64)> = xs
                .iter()
                .cloned()
                .zip(trace.total.iter().cloned())
                .collect();
            let branch_pts: Vec<(String, Vec<(f64, f64)>)> = parts
                .iter()
                .map(|(m, wf)| {
                    (
                        format!("branch m={m}"),
                        xs.iter()
                            .cloned()
                            .zip(wf.values.iter().map(|v| v.norm_sqr()))
                            .collect(),
                    )
                })
                .collect();
            let mut series = vec![Series {
                name: "total",
                points: &total,
            }];
            for (name, pts) in &branch_pts {
                series.push(Series { name, points: pts });
            }
            let svg = line_plot(
                &PlotSpec {
                    title: &format!("Displaced branch densities ({label})"),
                    x_label: "x [m]",
                    y_label: "density [1/m]",
                    log_x: false,
                    log_y: false,
                },
                &series,
            );
            files.push(ctx.write(&format!("snapshot_{label}.svg"), &svg)?);
        }
    }
    Ok(files)
}

/// sigma_t versus evolution time.
pub fn disperse(ctx: &Ctx, t_max: f64, points: usize) -> Result<Vec<PathBuf>> {
    if !(t_max > 0.0) || points < 2 {
        return Err(Error::InvalidConfig(
            "disperse needs t_max > 0 and at least 2 points".into(),
        ));
    }
    let p = &ctx.params;
    let rows: Vec<Vec<String>> = (0..points)
        .map(|i| {
            let t = t_max * i as f64 / (points - 1) as f64;
            vec![g17(t), g17(sigma_t(p.sigma, t, p.mass, p.hbar))]
        })
        .collect();
    let csv = to_csv_string(&ctx.comment(""), &["t", "sigma_t"], &rows);
    let mut files = vec![ctx.write("disperse.csv", &csv)?];
    if ctx.svg {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect();
        let svg = line_plot(
            &PlotSpec {
                title: "Wavepacket dispersion",
                x_label: "t [s]",
                y_label: "sigma_t [m]",
                log_x: false,
                log_y: false,
            },
            &[Series {
                name: "sigma_t",
                points: &pts,
            }],
        );
        files.push(ctx.write("disperse.svg", &svg)?);
    }
    Ok(files)
}

/// Fringe spacing versus field with blind-extraction validation.
pub fn fringes(
    ctx: &Ctx,
    b_min: f64,
    b_max: f64,
    points: usize,
    separation_ratio: f64,
) -> Result<Vec<PathBuf>> {
    let fields = log_spaced(b_min, b_max, points)?;
    let mut columns = vec![
        "b",
        "t",
        "lambda_analytic",
        "lambda_extracted",
        "rel_err",
        "visibility_analytic",
        "visibility_extracted",
    ];
    if ctx.paper_literal {
        columns.push("lambda_paper_literal");
    }
    let mut rows = Vec::with_capacity(fields.len());
    let mut plot_analytic = Vec::new();
    let mut plot_extracted = Vec::new();
    for &b in &fields {
        let mut p = ctx.params.with_b_field(b);
        let t = fringe_friendly_time(&p, b, separation_ratio)?;
        p.t_couple = t;
        p.t_free = t;
        let lam = fringe_spacing(&p)?;
        let state = entangle(&balanced_spin_half(), &ctx.packet(), &p);
        let grid = state_grid(&state, p.t_free, &p, Some(lam / 8.0))?;
        let trace = density_trace(&state, &grid, p.t_free, &p)?;
        let obs = extract_fringes(&trace.total, &grid)?;
        let nu = visibility_law(&p);
        let mut row = vec![
            g17(b),
            g17(t),
            g17(lam),
            g17(obs.spacing),
            g17((obs.spacing - lam).abs() / lam),
            g17(nu),
            g17(obs.visibility),
        ];
        if ctx.paper_literal {
            row.push(g17(fringe_spacing_paper_literal(&p)?));
        }
        rows.push(row);
        plot_analytic.push((b, lam));
        plot_extracted.push((b, obs.spacing));
    }
    let extra = if ctx.paper_literal {
        "lambda_paper_literal = hbar * lambda_analytic (as-published expression; dimensionally inconsistent by a factor of hbar)"
    } else {
        ""
    };
    let csv = to_csv_string(&ctx.comment(extra), &columns, &rows);
    let mut files = vec![ctx.write("fringes.csv", &csv)?];
    if ctx.svg {
        let svg = line_plot(
            &PlotSpec {
                title: "Fringe spacing vs magnetic field",
                x_label: "B [T]",
                y_label: "spacing [m]",
                log_x: true,
                log_y: true,
            },
            &[
                Series {
                    name: "analytic",
                    points: &plot_analytic,
                },
                Series {
                    name: "extracted",
                    points: &plot_extracted,
                },
            ],
        );
        files.push(ctx.write("fringes.svg", &svg)?);
    }
    Ok(files)
}

/// Simpson quadrature of the overlap of two real width-`sigma` Gaussian
/// amplitudes separated by `sep`: the independent check on the visibility law.
fn overlap_quadrature(sep: f64, sigma: f64) -> f64 {
    let g = |x: f64, c: f64| {
        (-(x - c) * (x - c) / (4.0 * sigma * sigma)).exp()
            * (std::f64::consts::TAU * sigma * sigma).powf(-0.25)
    };
    let (a, b, n) = (-14.0 * sigma, 14.0 * sigma + sep, 16_000);
    let h = (b - a) / n as f64;
    let mut acc = g(a, 0.0) * g(a, sep) + g(b, 0.0) * g(b, sep);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        let x = a + i as f64 * h;
        acc += w * g(x, 0.0) * g(x, sep);
    }
    acc * h / 3.0
}

/// Visibility versus separation-to-dispersion ratio.
pub fn visibility(ctx: &Ctx, ratio_max: f64, points: usize) -> Result<Vec<PathBuf>> {
    if !(ratio_max > 0.0) || points < 2 {
        return Err(Error::InvalidConfig(
            "visibility needs ratio_max > 0 and at least 2 points".into(),
        ));
    }
    let base = &ctx.params;
    // One interrogation time for the whole sweep, long enough that the
    // smallest ratio still has >= 3.4 fringes inside the envelope FWHM.
    let r_min = ratio_max / points as f64;
    // (1+tau^2)/tau >= c with the large-tau root; c clamps at 2 (tau = 1)
    // when even the smallest ratio carries enough fringes on its own.
    let c_needed = (3.4 / (0.1874 * r_min)).max(2.0);
    let tau = 0.5 * (c_needed + (c_needed * c_needed - 4.0).sqrt());
    let t = tau * 2.0 * base.mass * base.sigma * base.sigma / base.hbar;
    let st = sigma_t(base.sigma, t, base.mass, base.hbar);

    let mut rows = Vec::with_capacity(points);
    let mut pts_analytic = Vec::new();
    let mut pts_measured = Vec::new();
    for i in 1..=points {
        let ratio = ratio_max * i as f64 / points as f64;
        let b = ratio * st / (base.k * t * base.gamma * base.hbar);
        let mut p = base.with_b_field(b);
        p.t_couple = t;
        p.t_free = t;
        let nu = visibility_law(&p);
        let overlap = overlap_quadrature(p.spin_half_separation(), st);
        let lam = fringe_spacing(&p)?;
        let state = entangle(&balanced_spin_half(), &ctx.packet(), &p);
        let grid = state_grid(&state, p.t_free, &p, Some(lam / 16.0))?;
        let trace = density_trace(&state, &grid, p.t_free, &p)?;
        let measured = contrast_at_center(&trace, st);
        rows.push(vec![
            g17(ratio),
            g17(b),
            g17(t),
            g17(nu),
            g17(overlap),
            g17(measured),
        ]);
        pts_analytic.push((ratio, nu));
        pts_measured.push((ratio, measured));
    }
    let csv = to_csv_string(
        &ctx.comment("ratio = branch separation / sigma_t"),
        &[
            "ratio",
            "b",
            "t",
            "visibility_analytic",
            "overlap_integral",
            "measured_contrast",
        ],
        &rows,
    );
    let mut files = vec![ctx.write("visibility.csv", &csv)?];
    if ctx.svg {
        let svg = line_plot(
            &PlotSpec {
                title: "Visibility vs separation-to-dispersion ratio",
                x_label: "separation / sigma_t",
                y_label: "visibility",
                log_x: false,
                log_y: false,
            },
            &[
                Series {
                    name: "analytic",
                    points: &pts_analytic,
                },
                Series {
                    name: "measured contrast",
                    points: &pts_measured,
                },
            ],
        );
        files.push(ctx.write("visibility.svg", &svg)?);
    }
    Ok(files)
}

/// Field resolution versus coupling constant at fixed phase resolution.
pub fn sensitivity(
    ctx: &Ctx,
    k_min: f64,
    k_max: f64,
    points: usize,
    delta_phi: f64,
    x_offset_sigmas: f64,
) -> Result<Vec<PathBuf>> {
    let ks = log_spaced(k_min, k_max, points)?;
    let base = &ctx.params;
    let st = sigma_t(base.sigma, base.t_free, base.mass, base.hbar);
    let x = base.x0 + x_offset_sigmas * st;
    let mut rows = Vec::with_capacity(ks.len());
    let mut pts = Vec::new();
    for &k in &ks {
        let mut p = base.clone();
        p.k = k;
        let s = field_sensitivity(&p, x, delta_phi)?;
        let dual = sensitivity_de_broglie_route(&p, x, delta_phi)?;
        rows.push(vec![g17(k), g17(s.slope), g17(s.delta_b), g17(dual)]);
        pts.push((k, s.delta_b.abs()));
    }
    let csv = to_csv_string(
        &ctx.comment(&format!("delta_phi={} x={}", g17(delta_phi), g17(x))),
        &["k", "dphi_db", "delta_b", "delta_b_de_broglie"],
        &rows,
    );
    let mut files = vec![ctx.write("sensitivity.csv", &csv)?];
    if ctx.svg {
        let svg = line_plot(
            &PlotSpec {
                title: "Field resolution vs coupling constant",
                x_label: "k [s/(kg m)]",
                y_label: "delta_B [T]",
                log_x: true,
                log_y: true,
            },
            &[Series {
                name: "delta_B",
                points: &pts,
            }],
        );
        files.push(ctx.write("sensitivity.svg", &svg)?);
    }
    Ok(files)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    K,
    T,
    Sigma,
    N,
}

/// QFI reports: the always-emitted three-row audit (single-particle form,
/// collective form at N = 1, collective form at N) plus an optional sweep.
#[allow(clippy::too_many_arguments)]
pub fn qfi(
    ctx: &Ctx,
    n_particles: u32,
    db_step: Option<f64>,
    mean_momentum: f64,
    sweep: Option<Sweep>,
    min: Option<f64>,
    max: Option<f64>,
    sweep_points: usize,
) -> Result<Vec<PathBuf>> {
    let p = &ctx.params;
    let reports = vec![
        qfi_report_with_step(PaperFormula::SingleParticle, p, 1, mean_momentum, db_step)?,
        qfi_report_with_step(PaperFormula::GhzCollective, p, 1, mean_momentum, db_step)?,
        qfi_report_with_step(
            PaperFormula::GhzCollective,
            p,
            n_particles,
            mean_momentum,
            db_step,
        )?,
    ];
    for r in &reports {
        println!(
            "N={:<3} {:<16} qfi_paper={} qfi_numeric={} discrepancy_ratio={:.4}",
            r.n_particles,
            r.formula.to_string(),
            g17(r.qfi_paper),
            g17(r.qfi_numeric),
            r.discrepancy_ratio
        );
    }
    let csv = QfiReport::to_csv_string(
        &reports,
        &ctx.comment(&format!("mean_momentum={}", g17(mean_momentum))),
    );
    let mut files = vec![ctx.write("qfi.csv", &csv)?];

    if let Some(var) = sweep {
        let columns: Vec<&str> = ["sweep_param", "sweep_value"]
            .iter()
            .chain(QfiReport::CSV_COLUMNS.iter())
            .cloned()
            .collect();
        let mut rows = Vec::new();
        let mut pts_paper = Vec::new();
        let mut pts_numeric = Vec::new();
        let mut extra_comment = format!("mean_momentum={}", g17(mean_momentum));
        let param_name = match var {
            Sweep::K => "k",
            Sweep::T => "t",
            Sweep::Sigma => "sigma",
            Sweep::N => "n",
        };
        if var == Sweep::N {
            let n_max = max.map(|m| m as u32).unwrap_or(16).max(2);
            let mut ns = Vec::new();
            let mut n = min.map(|m| m as u32).unwrap_or(1).max(1);
            while n <= n_max {
                ns.push(n);
                n *= 2;
            }
            for &n in &ns {
                let formula = if n == 1 {
                    PaperFormula::SingleParticle
                } else {
                    PaperFormula::GhzCollective
                };
                let r = qfi_report_with_step(formula, p, n, mean_momentum, db_step)?;
                let mut row = vec![param_name.to_string(), n.to_string()];
                row.extend(r.csv_row());
                rows.push(row);
                pts_paper.push((n as f64, r.qfi_paper));
                pts_numeric.push((n as f64, r.qfi_numeric));
            }
            let (fit, _) = ghz_scaling_exponent(p, &ns, mean_momentum)?;
            let fit_line = format!(
                "oracle scaling exponent alpha = {:.6} +- {:.6} (95% CI) over N = {:?}; published collective form scales as N^2",
                fit.slope, fit.slope_ci95, ns
            );
            println!("{fit_line}");
            extra_comment.push_str(" | ");
            extra_comment.push_str(&fit_line);
        } else {
            let (lo, hi) = match (min, max, var) {
                (Some(lo), Some(hi), _) => (lo, hi),
                (None, None, Sweep::K) => (p.k / 10.0, p.k * 10.0),
                (None, None, Sweep::T) => (p.t_couple / 10.0, p.t_couple * 10.0),
                (None, None, Sweep::Sigma) => (p.sigma / 2.0, p.sigma * 2.0),
                _ => {
                    return Err(Error::InvalidConfig(
                        "give both --min and --max, or neither".into(),
                    ))
                }
            };
            for v in log_spaced(lo, hi, sweep_points)? {
                let mut q = p.clone();
                match var {
                    Sweep::K => q.k = v,
                    Sweep::T => {
                        q.t_couple = v;
                        q.t_free = v;
                    }
                    Sweep::Sigma => q.sigma = v,
                    Sweep::N => unreachable!(),
                }
                let formula = if n_particles == 1 {
                    PaperFormula::SingleParticle
                } else {
                    PaperFormula::GhzCollective
                };
                let r = qfi_report_with_step(formula, &q, n_particles, mean_momentum, db_step)?;
                let mut row = vec![param_name.to_string(), g17(v)];
                row.extend(r.csv_row());
                rows.push(row);
                pts_paper.push((v, r.qfi_paper));
                pts_numeric.push((v, r.qfi_numeric));
            }
        }
        let csv = to_csv_string(&ctx.comment(&extra_comment), &columns, &rows);
        files.push(ctx.write("qfi_sweep.csv", &csv)?);
        if ctx.svg {
            let svg = line_plot(
                &PlotSpec {
                    title: &format!("QFI vs {param_name}"),
                    x_label: param_name,
                    y_label: "QFI [1/T^2]",
                    log_x: true,
                    log_y: true,
                },
                &[
                    Series {
                        name: "published form",
                        points: &pts_paper,
                    },
                    Series {
                        name: "fidelity oracle",
                        points: &pts_numeric,
                    },
                ],
            );
            files.push(ctx.write("qfi_sweep.svg", &svg)?);
        }
    }
    Ok(files)
}

/// Sensitivity-scaling experiment; one file per mode.
pub fn scaling(
    ctx: &Ctx,
    n_list: &[u32],
    shots: u32,
    trials: u32,
    modes: &[ScalingMode],
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut curves: Vec<ScalingCurve> = Vec::new();
    for &mode in modes {
        let curve = scaling_experiment(&ctx.params, n_list, shots, trials, ctx.seed, mode)?;
        let convention = match mode {
            ScalingMode::Classical => {
                "classical rows: empirical_std over trials of N averaged single-particle fits; bounds scaled by 1/sqrt(N*shots)"
            }
            ScalingMode::Quantum => {
                "quantum rows: bounds only (no defined N-body readout); empirical_std column carries crb_numeric; bounds are per single probe, as published"
            }
        };
        let csv = curve.to_csv_string(&ctx.comment(convention));
        files.push(ctx.write(&format!("scaling_{mode}.csv"), &csv)?);
        curves.push(curve);
    }
    if ctx.svg {
        let mut named: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for curve in &curves {
            named.push((
                format!("{} empirical", curve.mode),
                curve
                    .rows
                    .iter()
                    .map(|r| (r.n as f64, r.empirical_std))
                    .collect(),
            ));
            named.push((
                format!("{} bound (oracle)", curve.mode),
                curve
                    .rows
                    .iter()
                    .map(|r| (r.n as f64, r.crb_numeric))
                    .collect(),
            ));
        }
        let series: Vec<Series> = named
            .iter()
            .map(|(name, pts)| Series { name, points: pts })
            .collect();
        let svg = line_plot(
            &PlotSpec {
                title: "Sensitivity scaling vs particle number",
                x_label: "N",
                y_label: "delta_B [T]",
                log_x: true,
                log_y: true,
            },
            &series,
        );
        files.push(ctx.write("scaling.svg", &svg)?);
    }
    Ok(files)
}
