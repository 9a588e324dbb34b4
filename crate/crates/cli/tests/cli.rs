use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relaydmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaydmt"))
        .args(args)
        .current_dir(dir)
        .env_remove("RELAYDMT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// Data rows of a CSV, skipping `#` metadata and the column header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn naf_single_relay_optimal_curve_is_two_by_one_miso() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaydmt(dir.path(), &["curve", "--protocol", "naf", "--mode", "finite", "--relays", "1", "--kappa", "opt", "--out", "naf.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&dir.path().join("naf.csv"));
    assert_eq!(rows.len(), 1001);
    for row in rows {
        assert_eq!(row.len(), 2);
        let (r, d): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        assert!((d - 2.0 * (1.0 - r)).abs() < 1e-9, "r={r} d={d}");
    }
}

#[test]
fn kappa_overlay_has_one_column_per_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let o = relaydmt(dir.path(), &["curve", "--protocol", "nsdf", "--mode", "finite", "--kappa", "1,1.618,3", "--step", "0.01", "--out", "fam.csv"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("fam.csv")).unwrap();
    assert!(text.contains("r,d_kappa_1,d_kappa_1.618,d_kappa_3\n"));
    let rows = rows(&dir.path().join("fam.csv"));
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.len() == 4));
}

#[test]
fn invalid_curve_arguments_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["curve", "--protocol", "nsdf", "--mode", "finite"];
    for extra in [&["--step", "0.2"][..], &["--kappa", "0.5"], &["--kappa", "best"], &["--relays", "0"]] {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let o = relaydmt(dir.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&relaydmt(dir.path(), &["curve", "--protocol", "xyz", "--mode", "finite"])), 2);
}

#[test]
fn oaf_curves_are_identical_across_regimes_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (mode, out) in [("finite", "f.csv"), ("infinite", "i.csv"), ("finite", "f2.csv")] {
        assert_eq!(code(&relaydmt(d, &["curve", "--protocol", "oaf", "--mode", mode, "--relays", "2", "--out", out])), 0);
    }
    let f = fs::read(d.join("f.csv")).unwrap();
    assert_eq!(f, fs::read(d.join("i.csv")).unwrap());
    assert_eq!(f, fs::read(d.join("f2.csv")).unwrap());
    let text = String::from_utf8(f).unwrap();
    for key in ["# relaydmt ", "# config_sha256: ", "# seed: none"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn default_output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_relaydmt"))
        .args(["curve", "--protocol", "osdf", "--mode", "infinite", "--step", "0.05"])
        .current_dir(dir.path())
        .env("RELAYDMT_OUT_DIR", "envout")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("envout/curve_osdf_infinite_m1.csv").is_file());
}

#[test]
fn oracle_single_config_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = ["oracle", "--protocol", "nsdf", "--mode", "finite", "--relays", "1", "--kappa", "hat"];
    let o = relaydmt(d, &[&cfg[..], &["--out", "gap.csv"]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&d.join("gap.csv"));
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() <= 0.015));
    let o = relaydmt(d, &[&cfg[..], &["--threshold", "0", "--out", "gap0.csv"]].concat());
    assert_eq!(code(&o), 3);
}

#[test]
fn oracle_sweep_is_independent_of_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (jobs, out) in [("1", "a.csv"), ("3", "b.csv")] {
        let o = relaydmt(d, &["--jobs", jobs, "oracle", "--relays", "1", "--r-step", "0.1", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    assert_eq!(rows(&d.join("a.csv")).len(), 4 * 2 * 6);
}

fn report(path: &Path) -> Vec<(String, String, String)> {
    rows(path).into_iter().map(|r| (r[0].clone(), r[1].clone(), r[2].clone())).collect()
}

fn status<'a>(rep: &'a [(String, String, String)], check: &str) -> &'a str {
    &rep.iter().find(|r| r.0 == check).unwrap_or_else(|| panic!("no {check}")).2
}

#[test]
fn gram_checks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = relaydmt(d, &["gram", "--pulse", "rect", "--delays", "0,0.3", "--q", "16", "--out", "rect.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = report(&d.join("rect.csv"));
    assert_eq!(status(&rep, "gamma_min_eig"), "pass");
    assert_eq!(status(&rep, "szego_containment"), "pass");

    let o = relaydmt(d, &["gram", "--pulse", "sinc", "--delays", "0,0.4", "--out", "sinc.csv"]);
    assert_eq!(code(&o), 0);
    let rep = report(&d.join("sinc.csv"));
    assert_eq!(status(&rep, "symbol_rank_one"), "flagged");
    assert_eq!(status(&rep, "circulant_min_abs_dft_1"), "pass");

    let o = relaydmt(d, &["gram", "--pulse", "rect:4", "--delays", "0,0.3", "--q", "4"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
    assert_eq!(code(&relaydmt(d, &["gram", "--pulse", "rect,sinc", "--delays", "0,0.3"])), 2);
}

const EXPERIMENT: &str = r#"
protocol = "nsdf"
mode = "finite"
relays = 1
seed = 3
r = [0.25, 0.5, 0.25]
trials_per_point = 20000

[frame]
p = 1
q = 1

[snr]
start_db = 20.0
stop_db = 40.0
step_db = 5.0
"#;

#[test]
fn outage_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("exp.toml"), EXPERIMENT).unwrap();
    for (jobs, out) in [("1", "a"), ("2", "b")] {
        let o = relaydmt(d, &["--jobs", jobs, "outage", "--config", "exp.toml", "--seed", "42", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["exp_r0.2500.csv", "exp_r0.5000.csv", "exp_summary.csv"] {
        let a = fs::read_to_string(d.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read_to_string(d.join("b").join(f)).unwrap(), "{f}");
        assert!(a.contains("# seed: 42\n"));
    }
    let summary = fs::read_to_string(d.join("a/exp_summary.csv")).unwrap();
    assert!(summary.contains("duplicate r = 0.25 dropped"));
    assert_eq!(rows(&d.join("a/exp_summary.csv")).len(), 2);
    assert_eq!(rows(&d.join("a/exp_r0.2500.csv")).len(), 5);

    // a different seed changes both the numbers and the recorded hash
    relaydmt(d, &["outage", "--config", "exp.toml", "--out", "c"]);
    let c = fs::read_to_string(d.join("c/exp_r0.2500.csv")).unwrap();
    assert_ne!(c, fs::read_to_string(d.join("a/exp_r0.2500.csv")).unwrap());
}

#[test]
fn outage_output_directory_handling() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("exp.toml"), EXPERIMENT).unwrap();
    let o = relaydmt(d, &["--no-create", "outage", "--config", "exp.toml", "--out", "missing/deeper"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
    assert!(!d.join("missing").exists());
    let o = relaydmt(d, &["outage", "--config", "exp.toml", "--out", "missing/deeper"]);
    assert_eq!(code(&o), 0);
    assert!(d.join("missing/deeper/exp_summary.csv").is_file());
}

#[test]
fn experiment_files_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = [
        EXPERIMENT.replace("relays = 1", "relays = 1\ncolour = \"blue\""),
        EXPERIMENT.replace("step_db = 5.0", "step_db = 5.0\nunits = \"dB\""),
        EXPERIMENT.replace("p = 1\nq = 1", "p = 1"),
        EXPERIMENT.replace("mode = \"finite\"", "mode = \"medium\""),
        EXPERIMENT.replace("trials_per_point = 20000", "trials_per_point = 20000\nmetric = \"exact\""),
    ];
    for (i, text) in bad.iter().enumerate() {
        fs::write(d.join("bad.toml"), text).unwrap();
        let o = relaydmt(d, &["outage", "--config", "bad.toml", "--out", "x"]);
        assert_eq!(code(&o), 2, "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&relaydmt(d, &["outage", "--config", "nope.toml"])), 2);
}
