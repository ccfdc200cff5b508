//! Command-line behavior: exit codes, config handling, output shapes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn sdi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdi"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sdi-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read_csv_column(path: &Path, column: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|c| *c == column).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn count_local_maxima(values: &[f64]) -> usize {
    let peak = values.iter().cloned().fold(0.0f64, f64::max);
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2] && w[1] > 0.05 * peak)
        .count()
}

#[test]
fn snapshot_peak_structure() {
    let out = temp_dir("snapshot");
    let status = sdi()
        .args(["snapshot"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let half = read_csv_column(&out.join("snapshot_spin_half.csv"), "total");
    assert_eq!(
        count_local_maxima(&half),
        2,
        "spin-1/2 snapshot should show two branches"
    );
    let one = read_csv_column(&out.join("snapshot_spin_one.csv"), "total");
    assert_eq!(
        count_local_maxima(&one),
        3,
        "spin-1 snapshot should show three branches"
    );
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn snapshot_zero_field_single_peak() {
    let out = temp_dir("snapshot0");
    let status = sdi()
        .args(["--set", "B=0", "snapshot"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let half = read_csv_column(&out.join("snapshot_spin_half.csv"), "total");
    assert_eq!(count_local_maxima(&half), 1);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn disperse_table_properties() {
    let out = temp_dir("disperse");
    let status = sdi()
        .args(["disperse", "--t-max", "0.2", "--points", "200"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let t = read_csv_column(&out.join("disperse.csv"), "t");
    let st = read_csv_column(&out.join("disperse.csv"), "sigma_t");
    assert_eq!(t[0], 0.0);
    assert_eq!(st[0], 1e-6); // first row equals sigma
    assert!(st.windows(2).all(|w| w[1] >= w[0]), "monotone column");
    // Large-t slope approaches hbar/(2 m sigma).
    let n = t.len();
    let slope = (st[n - 1] - st[n - 2]) / (t[n - 1] - t[n - 2]);
    let asymptote = 1.0545718176461565e-34 / (2.0 * 1.4431e-25 * 1e-6);
    assert!(
        (slope - asymptote).abs() / asymptote < 1e-3,
        "slope {slope:e} vs asymptote {asymptote:e}"
    );
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn config_file_and_set_flags() {
    let out = temp_dir("config");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("run.cfg");
    std::fs::write(&cfg, "sigma = 2e-6\ngamma_ghz_per_t = 10\n").unwrap();
    let status = sdi()
        .arg("--config")
        .arg(&cfg)
        .args(["--set", "sigma=1.5e-6", "disperse"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let st = read_csv_column(&out.join("disperse.csv"), "sigma_t");
    assert_eq!(st[0], 1.5e-6, "--set must override the config file");
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn config_errors_exit_2() {
    let out = temp_dir("cfgerr");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("bad.cfg");
    std::fs::write(&cfg, "coupling = 1\n").unwrap();
    let code = sdi()
        .arg("--config")
        .arg(&cfg)
        .args(["disperse"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));

    let code = sdi()
        .args(["--set", "sigma=-1", "disperse"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));

    // Degenerate sweep range.
    let code = sdi()
        .args(["fringes", "--b-min", "0", "--b-max", "1e-4"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));

    // Field too weak for identifiable fringes.
    let code = sdi()
        .args(["fringes", "--b-min", "1e-9", "--b-max", "1e-8"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn numerical_failures_exit_3() {
    let out = temp_dir("numerr");
    // A finite-difference step so large the fidelity collapses: the oracle
    // reports a step error, which is a numerical failure, not a config one.
    let code = sdi()
        .args(["qfi", "--db-step", "1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(3));
    let code = sdi()
        .args(["qfi", "--db-step", "1e-30"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(3));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn sensitivity_is_exact_inverse_power_law() {
    let out = temp_dir("sens");
    let status = sdi()
        .args(["sensitivity", "--points", "9"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let k = read_csv_column(&out.join("sensitivity.csv"), "k");
    let db = read_csv_column(&out.join("sensitivity.csv"), "delta_b");
    let dual = read_csv_column(&out.join("sensitivity.csv"), "delta_b_de_broglie");
    let ln_k: Vec<f64> = k.iter().map(|v| v.ln()).collect();
    let ln_db: Vec<f64> = db.iter().map(|v| v.abs().ln()).collect();
    // Exact 1/k power law.
    let n = ln_k.len() as f64;
    let mean_x = ln_k.iter().sum::<f64>() / n;
    let mean_y = ln_db.iter().sum::<f64>() / n;
    let sxy: f64 = ln_k
        .iter()
        .zip(&ln_db)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let sxx: f64 = ln_k.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let slope = sxy / sxx;
    assert!((slope + 1.0).abs() < 1e-6, "log-log slope {slope}");
    for (a, b) in db.iter().zip(&dual) {
        assert!(
            (a - b).abs() <= 1e-12 * a.abs(),
            "dual-route mismatch {a:e} vs {b:e}"
        );
    }
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn zero_phase_resolution_gives_zero_resolution() {
    let out = temp_dir("sens0");
    let status = sdi()
        .args(["sensitivity", "--points", "3", "--delta-phi", "0"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let db = read_csv_column(&out.join("sensitivity.csv"), "delta_b");
    assert!(db.iter().all(|&v| v == 0.0));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn qfi_csv_round_trips() {
    let out = temp_dir("qfi");
    let status = sdi().args(["qfi"]).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("qfi.csv")).unwrap();
    let reports = sdi_core::metrology::QfiReport::from_csv_str(&text).unwrap();
    assert_eq!(reports.len(), 3);
    let back = sdi_core::metrology::QfiReport::to_csv_string(&reports, "");
    let reports2 = sdi_core::metrology::QfiReport::from_csv_str(&back).unwrap();
    for (a, b) in reports.iter().zip(&reports2) {
        assert_eq!(a.qfi_numeric.to_bits(), b.qfi_numeric.to_bits());
    }
    let _ = std::fs::remove_dir_all(&out);
}
