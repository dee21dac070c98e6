use std::path::Path;
use std::process::{Command, Output};

fn fyk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fyk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of `column` in the first data row of the table titled `title`.
fn cell(text: &str, title: &str, column: &str) -> String {
    let mut lines = text.lines().skip_while(|l| *l != format!("# {title}")).skip(1);
    let header: Vec<&str> = lines.next().expect("table present").split(',').collect();
    let row: Vec<&str> = lines.next().expect("data row").split(',').collect();
    let k = header.iter().position(|h| *h == column).expect("column present");
    row[k].to_string()
}

fn num(text: &str, title: &str, column: &str) -> f64 {
    cell(text, title, column).parse().unwrap()
}

#[test]
fn constants_at_half() {
    let o = fyk(&["constants", "--n", "3", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!((num(&s, "normalising constants", "kappa") - 1.0).abs() < 1e-12);
    assert!((num(&s, "normalising constants", "alpha") - 2.0).abs() < 1e-12);
    let g = num(&s, "normalising constants", "green_const");
    assert!((g - 1.0 / (2.0 * std::f64::consts::PI.powi(2))).abs() < 1e-12);
}

#[test]
fn invalid_index_is_a_usage_error() {
    assert_eq!(fyk(&["constants", "--n", "1", "--gamma", "0.6"]).status.code(), Some(1));
    assert_eq!(fyk(&["constants", "--n", "3", "--gamma", "1.0"]).status.code(), Some(1));
    assert_eq!(fyk(&["constants", "--gamma", "0.5"]).status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_one() {
    let o = fyk(&["integrals", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn help_exits_zero() {
    assert_eq!(fyk(&["--help"]).status.code(), Some(0));
}

#[test]
fn integral_ratios_at_five_half() {
    let o = fyk(&["integrals", "--n", "5", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let rows: Vec<Vec<f64>> = s
        .lines()
        .skip_while(|l| !l.starts_with("# bubble integral ratios"))
        .skip(2)
        .take(9)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    for (k, want) in [(7, 1.0), (8, -2.5), (9, 1.5)] {
        assert_eq!(rows[k - 1][0], k as f64);
        assert!((rows[k - 1][1] - want).abs() < 1e-10, "I_{k}");
    }
}

#[test]
fn divergent_integrals_are_rejected() {
    assert_eq!(fyk(&["integrals", "--n", "3", "--gamma", "0.5"]).status.code(), Some(1));
    let o = fyk(&["integrals", "--n", "5", "--gamma", "0.5", "--method", "simpson"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tight_tolerance_breach_exits_three() {
    let o = fyk(&["integrals", "--n", "4", "--gamma", "0.3", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stdout.is_empty());
}

#[test]
fn coefficient_scan_passes() {
    let o = fyk(&["coeff-scan"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(cell(&s, "sign equivalence verdict", "verdict"), "PASS");
    assert_eq!(cell(&s, "sign equivalence verdict", "boundary_points"), "(5 0.5)");
    assert_eq!(num(&s, "sign equivalence verdict", "mismatches"), 0.0);
}

#[test]
fn coefficient_rows_are_written_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = fyk(&["coeff-scan", "--n-min", "4", "--n-max", "5", "--gamma-step", "0.1", "--out"])
        .status;
    // `--out` needs a value.
    assert_eq!(o.code(), Some(1));
    let d = dir.path().to_str().unwrap();
    let o = fyk(&["coeff-scan", "--n-min", "4", "--n-max", "5", "--gamma-step", "0.1", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let rows = std::fs::read_to_string(dir.path().join("coeff_scan_rows.csv")).unwrap();
    let hit = rows
        .lines()
        .find(|l| l.starts_with("4,7e-1,"))
        .expect("row for n = 4, gamma = 0.7");
    let f: Vec<&str> = hit.split(',').collect();
    assert_eq!(f[4], "true");
    assert_eq!(f[5], "true");
    let half = rows.lines().find(|l| l.starts_with("5,5e-1,")).unwrap();
    assert!(half.ends_with(",true"));
}

#[test]
fn bad_scan_ranges() {
    assert_eq!(fyk(&["coeff-scan", "--n-min", "2"]).status.code(), Some(1));
    assert_eq!(fyk(&["coeff-scan", "--n-max", "65"]).status.code(), Some(1));
    assert_eq!(fyk(&["coeff-scan", "--gamma-step", "0.3"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let a = fyk(&["pohozaev", "--format", "json"]);
    let b = fyk(&["pohozaev", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let a = fyk(&["coeff-scan", "--n-max", "8"]);
    let b = fyk(&["coeff-scan", "--n-max", "8"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_is_well_formed() {
    let o = fyk(&["constants", "--n", "4", "--gamma", "0.3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["table"], "constants");
    assert_eq!(v["rows"][0]["n"], 4);
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "# index\nn = 4\ngamma = 0.3\n");
    let from_file = stdout(&fyk(&["constants", "--config", &c]));
    assert_eq!(cell(&from_file, "normalising constants", "n"), "4");
    let flagged = stdout(&fyk(&["constants", "--config", &c, "--n", "6"]));
    assert_eq!(cell(&flagged, "normalising constants", "n"), "6");
    assert_eq!(cell(&flagged, "normalising constants", "gamma"), "3e-1");
    let bad = write_config(dir.path(), "n = three\ngamma = 0.3\n");
    assert_eq!(fyk(&["constants", "--config", &bad]).status.code(), Some(1));
}

#[test]
fn pohozaev_identity_holds() {
    let o = fyk(&["pohozaev", "--radii", "0.5,1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(num(&s, "Pohozaev functional of the unit bubble", "rel_total") < 1e-4);
    assert_eq!(fyk(&["pohozaev", "--radii", "0,1"]).status.code(), Some(1));
}

#[test]
fn small_solves() {
    let o = fyk(&["solve", "lambda1", "--radii", "1,2", "--resolution", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(num(&stdout(&o), "scaling law residual", "max_rel_residual") < 1e-3);
    // The trace flux is too coarse at h = 1/8 for the default tolerance.
    let o = fyk(&["solve", "extension", "--coarse", "8", "--levels", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let o = fyk(&["solve", "extension", "--coarse", "8", "--levels", "3", "--tol", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let o = fyk(&["solve", "linearized", "--pi", "diag(1,1,1)"]);
    assert_eq!(o.status.code(), Some(1));
    let o = fyk(&["solve", "linearized", "--n", "4", "--pi", "diag(1,-1,0)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn linearized_with_small_grid() {
    let o = fyk(&[
        "solve",
        "linearized",
        "--pi",
        "tracefree:diag(2,-1,0)",
        "--extent",
        "8",
        "--resolution",
        "32",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(num(&s, "linearised correction diagnostics", "orth_energy") <= 1e-3);
    assert_eq!(num(&s, "linearised correction diagnostics", "value_at_origin"), 0.0);
}
