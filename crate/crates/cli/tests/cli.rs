use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_einbern"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_algebra_passes() {
    let o = run(&[
        "verify", "--suite", "algebra", "--seed", "7", "--cases", "200",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("homomorphism"));
}

#[test]
fn verify_all_prints_summary() {
    let o = run(&["verify", "--suite", "all", "--cases", "40"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("properties passed"));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn unknown_suite_is_usage_error() {
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 2);
}

#[test]
fn even_theorem_on_odd_order_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let cfg = configs().join("odd_model.json");
    let o = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--theorem",
        "even",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn bound_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let cfg = configs().join("demo_model.json");
    let o = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--theorem",
        "even",
        "--t-grid",
        "0:40:9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.starts_with("t,bound_raw,bound_clamped\n"));
    let kv = fs::read_to_string(out.with_extension("txt")).unwrap();
    assert_eq!(kv, stdout(&o));
    assert!(kv.contains("dim_factor=4.0000000000000000e0"));
}

#[test]
fn matrix_model_has_factor_two_d() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    fs::write(
        &cfg,
        r#"{"schema": 1, "order": 2, "dim": 3, "law": {"kind": "rademacher"},
            "generate": {"count": 4, "seed": 1, "symmetry": "none"}}"#,
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let o = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--theorem",
        "general",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dim_factor=6.0000000000000000e0"));
}

#[test]
fn intrinsic_grid_is_truncated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let cfg = configs().join("demo_model.json");
    let o = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--theorem",
        "intrinsic",
        "--t-grid",
        "0:30:7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let csv = fs::read_to_string(&out).unwrap();
    let domain: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("tail_domain_min="))
        .unwrap()
        .parse()
        .unwrap();
    let ts: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!ts.is_empty() && ts.len() < 7);
    assert!(ts.iter().all(|&t| t >= domain));
}

#[test]
fn demo_simulation_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("demo_experiment.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = bin()
        .env("EB_THREADS", "1")
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let (a, b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t,empirical_freq,upper_conf,bound_raw,bound_clamped,verdict"
    );
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn config_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let model = r#"{"order": 2, "dim": 2, "law": {"kind": "rademacher"}, "components": [{"data": [1, 0, 0, 1]}]}"#;
    for body in [
        format!(r#"{{"schema": 1, "model": {model}, "trials": 99, "seed": 1, "t_grid": [1]}}"#),
        format!(
            r#"{{"schema": 1, "model": {model}, "trials": 100, "seed": 1, "t_grid": [1], "bogus": 0}}"#
        ),
        format!(r#"{{"model": {model}, "trials": 100, "seed": 1, "t_grid": [1]}}"#),
        "not json".to_string(),
    ] {
        let cfg = dir.path().join("e.json");
        fs::write(&cfg, body).unwrap();
        let o = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 2);
    }
    let o = run(&[
        "simulate",
        "--config",
        "/nonexistent/e.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let o = bin()
        .env("EB_THREADS", "zero")
        .args(["example45"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn example45_reports_the_counterexample() {
    let o = run(&["example45"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("y^T f(A) y at y = (1,0,0,0,-1,0,0,0,0) = -2\n"));
    assert!(s.contains("lambda_max^E = 2.000000000000"));
    assert!(s.contains("lambda_min^E = -1.000000000000"));
    assert!(s.contains("is_e_psd = false"));
    assert!(s.contains("PSD but not E-PSD"));
}
