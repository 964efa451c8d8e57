use std::process::{Command, Output};

fn witnesskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witnesskit"))
        .args(args)
        .env_remove("WITNESSKIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const MEASURE_HEADER: &str = "d,alpha,D_closed,D_numeric,B,discrepancy,gap,iters";

#[test]
fn iso_sweep_qubit_matches_closed_form() {
    let o = witnesskit(&["iso-sweep", "--d", "2", "--alpha", "0.4:1.0:0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), MEASURE_HEADER);
    let table = rows(&out);
    assert_eq!(table.len(), 8);
    for row in &table[1..] {
        let alpha: f64 = row[1].parse().unwrap();
        let d: f64 = row[2].parse().unwrap();
        let b: f64 = row[4].parse().unwrap();
        let expected = 3f64.sqrt() / 2.0 * (alpha - 1.0 / 3.0);
        assert!((d - expected).abs() < 1e-11, "{row:?}");
        assert!((b - expected).abs() < 1e-7, "{row:?}");
    }
    assert_eq!(table.last().unwrap()[1], "1");
}

#[test]
fn iso_sweep_numeric_columns() {
    let o = witnesskit(&["iso-sweep", "--d", "2", "--alpha", "0.8", "--numeric"]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&stdout(&o));
    let d_num: f64 = table[1][3].parse().unwrap();
    assert!((d_num - 0.404145188433).abs() < 1e-6);
    assert!(!table[1][6].is_empty() && !table[1][7].is_empty());
}

#[test]
fn iso_sweep_separable_rows_are_zero() {
    let o = witnesskit(&["iso-sweep", "--d", "3", "--alpha", "0:0.25:0.125"]);
    assert_eq!(o.status.code(), Some(0));
    for row in &rows(&stdout(&o))[1..] {
        assert_eq!(row[2], "0");
        assert_eq!(row[4], "0");
    }
}

#[test]
fn gamma_signs_prints_patterns() {
    let o = witnesskit(&["gamma-signs", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "+ \u{2212} + + \u{2212} + \u{2212} +\n");
    let o = witnesskit(&["gamma-signs", "--d", "2"]);
    assert_eq!(stdout(&o), "+ \u{2212} +\n");
}

#[test]
fn gamma_signs_json() {
    let o = witnesskit(&["gamma-signs", "--d", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["signs"], serde_json::json!([1, -1, 1]));
}

#[test]
fn bnt_qutrit_row() {
    let o = witnesskit(&["bnt", "--d", "3", "--alpha", "1.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table[0].join(","), MEASURE_HEADER);
    let row = &table[1];
    let d: f64 = row[3].parse().unwrap();
    let b: f64 = row[4].parse().unwrap();
    let disc: f64 = row[5].parse().unwrap();
    assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    assert!((b - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    assert!(disc <= 5e-4);
}

#[test]
fn bnt_json_has_convergence_flag() {
    let o = witnesskit(&["bnt", "--d", "2", "--alpha", "0.8", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["converged"], true);
    assert_eq!(v[0]["d"], 2);
}

#[test]
fn out_of_range_alpha_is_a_domain_error() {
    let o = witnesskit(&["iso-sweep", "--d", "2", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("alpha"));
}

#[test]
fn bad_grid_is_rejected() {
    let o = witnesskit(&["iso-sweep", "--d", "2", "--alpha", "0.4:1.0:0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_two_with_partial_rows() {
    let o = witnesskit(&["bnt", "--d", "3", "--alpha", "1", "--max-outer-iters", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 2);
    assert_eq!(table[1][7], "3");
    assert!(stderr(&o).contains("converged=false"));
}

#[test]
fn witness_check_boundary_guess_is_optimal() {
    let o = witnesskit(&["witness-check", "--d", "2", "--alpha", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&stdout(&o));
    assert_eq!(
        table[0].join(","),
        "d,alpha,guess_alpha,offset_c,distance,ent_expectation,sep_minimum,is_witness,is_optimal"
    );
    assert_eq!(table[1][7], "true");
    assert_eq!(table[1][8], "true");

    let o = witnesskit(&[
        "witness-check",
        "--d",
        "2",
        "--alpha",
        "0.8",
        "--guess-alpha",
        "0",
    ]);
    let table = rows(&stdout(&o));
    assert_eq!(table[1][7], "false");
}

#[test]
fn chsh_scan_threshold() {
    let o = witnesskit(&["chsh-scan", "--alpha", "0.7:0.72:0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&stdout(&o));
    assert_eq!(
        table[0].join(","),
        "alpha,chsh_max,violates_chsh,gbi_violation,entangled"
    );
    // 1/sqrt(2) ~ 0.7071 separates the rows
    assert_eq!(table[1][2], "false");
    assert_eq!(table[2][2], "true");
    assert_eq!(table[2][4], "true");
}

#[test]
fn output_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solver.json");
    std::fs::write(
        &cfg,
        r#"{"n_starts": 4, "max_iters": 200, "tol_conv": 1e-12, "seed": 7}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = witnesskit(&[
        "witness-check",
        "--d",
        "3",
        "--alpha",
        "0.6",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.starts_with("d,alpha,guess_alpha"));
    assert_eq!(written.lines().count(), 2);
}

#[test]
fn malformed_config_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solver.json");
    std::fs::write(&cfg, "{not json").unwrap();
    let o = witnesskit(&[
        "witness-check",
        "--d",
        "2",
        "--alpha",
        "0.8",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn measure_from_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = witnesskit(&["measure", "--d", "2", "--alpha", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let distance = v[0]["d_numeric"].as_f64().unwrap();
    assert!((distance - 1.0 / 3f64.sqrt()).abs() < 1e-6);

    // feed the Bell state back in through a state file
    let h = 0.5;
    let entries: Vec<[f64; 2]> = (0..16)
        .map(|k| {
            let (i, j) = (k / 4, k % 4);
            let on = (i == 0 || i == 3) && (j == 0 || j == 3);
            [if on { h } else { 0.0 }, 0.0]
        })
        .collect();
    let state = serde_json::json!({ "d_a": 2, "d_b": 2, "entries": entries });
    let path = dir.path().join("bell.json");
    std::fs::write(&path, state.to_string()).unwrap();
    let o = witnesskit(&["measure", "--state", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table[1][1], "");
    let d: f64 = table[1][3].parse().unwrap();
    assert!((d - 1.0 / 3f64.sqrt()).abs() < 1e-6);
}

#[test]
fn invalid_state_file_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"d_a": 2, "d_b": 2, "entries": [[1, 0]]}"#).unwrap();
    let o = witnesskit(&["measure", "--state", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_env_var_is_accepted_and_flag_wins() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_witnesskit"));
        cmd.args([
            "witness-check",
            "--d",
            "2",
            "--alpha",
            "0.8",
            "--n-starts",
            "2",
        ]);
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        match env {
            Some(e) => cmd.env("WITNESSKIT_SEED", e),
            None => cmd.env_remove("WITNESSKIT_SEED"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(Some("5"), None).status.code(), Some(0));
    assert_eq!(run(Some("not-a-number"), Some("3")).status.code(), Some(0));
    assert_eq!(run(Some("not-a-number"), None).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let o = witnesskit(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("iso-sweep"));
}

#[test]
fn negative_alpha_is_accepted() {
    let o = witnesskit(&["iso-sweep", "--d", "2", "--alpha", "-0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = witnesskit(&[
        "iso-sweep",
        "--d",
        "2",
        "--alpha",
        "-0.3333333333333333:0:0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 5);
}
