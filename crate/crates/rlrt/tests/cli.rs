use std::path::Path;
use std::process::{Command, Output};

use rlrt::records::{CellRecord, Document, PowerRecord, TestRecord};

fn rlrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlrt")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn records<R: serde::de::DeserializeOwned>(out: &Output) -> Vec<R> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Document::<R>::parse_csv_records(&out.stdout).unwrap()
}

#[test]
fn three_points_give_zero_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.csv");
    std::fs::write(&f, "0\n1\n2\n").unwrap();
    let out = rlrt(&["test", path_str(&f), "--method", "rlrt", "--lambda", "0.5"]);
    let recs: Vec<TestRecord> = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].raw, 0.0);
    assert_eq!((recs[0].n, recs[0].p), (3, 1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# timestamp: "));
    assert!(text.contains("# config_sha256: "));
}

#[test]
fn missing_file_names_the_path() {
    let out = rlrt(&["test", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.csv"));
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.tsv");
    std::fs::write(&f, "a\tb\n1\t2\n3\tx\n4\t5\n").unwrap();
    let out = rlrt(&["test", path_str(&f)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 2"), "{err}");
}

#[test]
fn emitted_data_round_trips_through_test() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = rlrt(&[
        "simulate", "--scenario", "a3", "--n", "60", "--gamma", "0.5", "--seed", "9",
        "--emit-data", path_str(&data), "--replication", "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = rlrt(&["test", path_str(&data), "--method", "rlrt,clrt", "--lambda", "0.5"]);
    let recs: Vec<TestRecord> = records(&out);

    // the same replication drawn in-process
    use rlrt_core::hypothesis::PreparedTest;
    use rlrt_core::sampling::MvnSampler;
    use rlrt_core::simulation::CellPlan;
    use rlrt_core::{Method, Scenario, ShrinkageParams};
    let tests = vec![
        PreparedTest::new(Method::Rlrt(ShrinkageParams::new(0.5).unwrap()), 60, 30).unwrap(),
        PreparedTest::new(Method::Clrt, 60, 30).unwrap(),
    ];
    let sampler = MvnSampler::new(&Scenario::A3.materialize(30).unwrap()).unwrap();
    let plan = CellPlan::new(tests, sampler, 0.05).unwrap();
    let direct = plan.replicate(9, 0, 4).unwrap();
    for (rec, d) in recs.iter().zip(direct) {
        assert_eq!(rec.raw, d.unwrap().raw);
    }
}

#[test]
fn exit_on_reject() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = rlrt(&[
        "simulate", "--scenario", "cs:20", "--n", "100", "--gamma", "0.3",
        "--emit-data", path_str(&data),
    ]);
    assert!(out.status.success());
    let plain = rlrt(&["test", path_str(&data)]);
    assert_eq!(plain.status.code(), Some(0));
    let strict = rlrt(&["test", path_str(&data), "--exit-on-reject"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(!strict.stdout.is_empty());
}

#[test]
fn transpose_flag() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let cols = dir.path().join("cols.csv");
    std::fs::write(&rows, "1,2\n0,5\n3,3\n7,1\n").unwrap();
    std::fs::write(&cols, "1,0,3,7\n2,5,3,1\n").unwrap();
    let a: Vec<TestRecord> = records(&rlrt(&["test", path_str(&rows), "--method", "lw"]));
    let b: Vec<TestRecord> = records(&rlrt(&["test", path_str(&cols), "--method", "lw", "--transpose"]));
    assert_eq!(a[0].raw, b[0].raw);
}

#[test]
fn null_params_unregularized() {
    let out = rlrt(&["null-params", "--lambda", "1", "--n", "161", "--p", "80", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["records"][0];
    let g: f64 = 0.5;
    assert!((r["mean"].as_f64().unwrap() + (1.0 - g).ln() / 2.0).abs() < 1e-12);
    assert!((r["variance"].as_f64().unwrap() - (-2.0 * g - 2.0 * (1.0 - g).ln())).abs() < 1e-12);
    assert_eq!(v["provenance"]["command"], "null-params");
    // stable across runs
    let again = rlrt(&["null-params", "--lambda", "1", "--n", "161", "--p", "80", "--format", "json"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn null_params_out_of_regime() {
    let out = rlrt(&["null-params", "--n", "50", "--p", "60"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p/(n-1)"));
}

#[test]
fn invalid_config_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("table.csv");
    for bad in [
        vec!["--reps", "0"],
        vec!["--eta", "1.5"],
        vec!["--scenario", "a9"],
        vec!["--lambda", "0"],
        vec!["--a1-twos-rule", "fixed:"],
    ] {
        let mut args = vec!["simulate", "--output", path_str(&target)];
        args.extend(bad);
        let out = rlrt(&args);
        assert_eq!(out.status.code(), Some(1));
        assert!(!target.exists());
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_merges_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"scenarios": ["null"], "n": [20], "gamma": [0.5], "methods": ["clrt", "lw"], "reps": 50, "seed": 4}"#,
    )
    .unwrap();
    let recs: Vec<CellRecord> = records(&rlrt(&["simulate", "--config", path_str(&cfg), "--reps", "40"]));
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.reps == 40 && r.seed == 4 && r.p == 10));

    std::fs::write(&cfg, r#"{"reps": 50, "sedd": 4}"#).unwrap();
    let out = rlrt(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sedd"));
}

#[test]
fn simulate_records_cell_errors() {
    let recs: Vec<CellRecord> = records(&rlrt(&[
        "simulate", "--scenario", "null", "--n", "10", "--gamma", "1.5", "--method", "clrt,lw",
        "--reps", "20",
    ]));
    assert!(recs[0].error.is_some() && recs[0].rate.is_none());
    assert!(recs[1].error.is_none() && recs[1].rate.is_some());
}

#[test]
fn simulate_single_replication() {
    let recs: Vec<CellRecord> = records(&rlrt(&[
        "simulate", "--scenario", "null,a2", "--n", "20", "--gamma", "0.2", "--method", "rlrt,chen",
        "--lambda", "0.5", "--reps", "1",
    ]));
    for r in recs {
        assert!(r.rate == Some(0.0) || r.rate == Some(1.0));
        assert_eq!(r.mc_se, Some(0.0));
    }
}

#[test]
fn power_curve_columns() {
    let out = rlrt(&[
        "power-curve", "--lambda", "0.4", "--n", "40", "--gamma", "0.5", "--beta-grid", "0.8:2.4:0.4",
        "--reps", "300", "--eta", "0.5",
    ]);
    let recs: Vec<PowerRecord> = records(&out);
    assert_eq!(recs.len(), 10);
    let betas: Vec<f64> = recs.iter().filter(|r| r.method == "rlrt").map(|r| r.beta).collect();
    assert!(betas.windows(2).all(|w| w[1] > w[0]));
    assert!(recs.iter().all(|r| r.analytic_power.unwrap() >= 0.5 && !r.close_spike));
}

#[test]
fn power_curve_close_spikes() {
    let base = ["power-curve", "--n", "40", "--gamma", "0.5", "--beta-grid", "0.3,1.5", "--reps", "50"];
    let out = rlrt(&base);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-close-spike"));
    let mut args = base.to_vec();
    args.push("--allow-close-spike");
    let recs: Vec<PowerRecord> = records(&rlrt(&args));
    assert!(recs.iter().filter(|r| r.beta == 0.3).all(|r| r.close_spike));
    assert!(recs.iter().filter(|r| r.beta == 1.5).all(|r| !r.close_spike));
}

#[test]
fn critical_value_reproducible() {
    let args = ["critical-value", "--method", "lw", "--n", "40", "--gamma", "0.5", "--reps", "1000", "--seed", "3"];
    let a = rlrt(&args);
    let b = rlrt(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let few = rlrt(&["critical-value", "--n", "40", "--p", "20", "--reps", "999"]);
    assert_eq!(few.status.code(), Some(1));
}
