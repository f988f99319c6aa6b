use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phasequant"));
    c.env_remove("PHASEQUANT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn phasequant")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn phase_spectrum_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = run(&["phase-spectrum", "--k", "1", "--dim", "200", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("max|λ| = 0.99"), "{}", stdout(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# phasequant v"), "{header}");
    assert!(header.contains(", phase-spectrum, --k 1 --dim 200"), "{header}");
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    assert_eq!(lines.count(), 200);
}

#[test]
fn data_to_stdout_summary_to_stderr() {
    let o = run(&["ground-variance", "--k", "0.5,1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("k,closed_form,matrix\n0.5,0.4444444444444444,"), "{text}");
    assert!(stderr(&o).starts_with("k1 = 0.1623"), "{}", stderr(&o));
}

#[test]
fn kbound_scan_default_grid_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let json = dir.path().join("verdicts.json");
    let o = run(&[
        "kbound-scan",
        "--k-min",
        "0.1",
        "--k-max",
        "2",
        "--k-step",
        "0.05",
        "-o",
        path_str(&csv),
        "--verdicts",
        path_str(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let rows = v["data"].as_array().unwrap();
    assert_eq!(rows.len(), 39);
    let verdict = |k: f64| {
        rows.iter()
            .find(|r| (r["k"].as_f64().unwrap() - k).abs() < 1e-12)
            .unwrap()["verdict"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(verdict(0.25), "EXCEEDS");
    for k in [0.4, 0.5, 1.0, 2.0] {
        assert_eq!(verdict(k), "BOUNDED", "k={k}");
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2 + 39 * 200);
}

#[test]
fn json_envelope_key_order() {
    let o = run(&[
        "repr",
        "--k",
        "0.5",
        "--dim",
        "3",
        "--operator",
        "kplus",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let keys = [
        "\"phasequant\"",
        "\"subcommand\"",
        "\"flags\"",
        "\"data\"",
        "\"name\"",
        "\"k\"",
        "\"dim\"",
        "\"omega\"",
        "\"entries\"",
    ];
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| text.find(k).unwrap_or_else(|| panic!("{k} in {text}")))
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["data"]["entries"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trials.csv");
    let args = [
        "nfm-sim", "--state", "bg", "--k", "1", "--rho", "3", "--phi", "0.7", "--noise", "0.02", "--trials", "64",
        "--seed", "11", "-o",
    ];
    let mut seen = Vec::new();
    for threads in ["1", "4", "4"] {
        let o = bin()
            .args(args)
            .arg(&out)
            .env("PHASEQUANT_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        seen.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[1], seen[2]);
    assert_eq!(String::from_utf8_lossy(&seen[0]).lines().count(), 2 + 64);

    let scan = dir.path().join("scan.csv");
    let once = |threads: &str| {
        let o = bin()
            .args(["kbound-scan", "--k", "0.3,0.5,1", "-o"])
            .arg(&scan)
            .env("PHASEQUANT_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        std::fs::read(&scan).unwrap()
    };
    assert_eq!(once("1"), once("3"));
}

#[test]
fn nfm_config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"state": {"kind": "number", "k": 1.5, "n": 4}}"#).unwrap();
    let o = run(&["nfm-sim", "--config", path_str(&cfg), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["config"]["trials"], 1);
    assert_eq!(v["data"]["trials"][0]["err_k1"], 0.0);
    assert!(v["data"]["trials"][0]["err_rho"].is_null());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["no-such-command"],
        vec!["phase-spectrum"],
        vec!["phase-spectrum", "--k", "0"],
        vec!["coherent", "--k", "1", "--rho", "2,1"],
        vec!["kbound-scan", "--k-min", "1", "--k-max", "0.5"],
        vec!["completeness", "--k", "0.25", "--n", "0"],
        vec!["oscillator", "--k", "1", "--dim", "200"],
        vec!["repr", "--k", "0.5", "--group", "so12"],
        vec!["nfm-sim", "--state", "bg", "--k", "1"],
        vec!["verify-all", "--module", "nothing"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        assert!(
            stderr(&o).contains("--help") || stderr(&o).contains("Usage"),
            "{args:?}"
        );
    }
    let o = bin()
        .args(["ground-variance"])
        .env("PHASEQUANT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_output_path_rejected_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope/out.csv");
    let o = run(&["phase-spectrum", "--k", "1", "--dim", "10", "-o", path_str(&missing)]);
    assert_eq!(code(&o), 2);
    let o = run(&["phase-spectrum", "--k", "1", "--dim", "10", "-o", path_str(dir.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn module_failure_exits_1_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coherent.csv");
    // the coherent state at ρ = 10⁶ would need more than the allowed truncation
    let o = run(&["coherent", "--k", "1", "--rho", "1,1e6", "-o", path_str(&out)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("truncation"), "{}", stderr(&o));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn failed_run_keeps_previous_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    assert_eq!(
        code(&run(&["coherent", "--k", "1", "--rho", "1", "-o", path_str(&out)])),
        0
    );
    let before = std::fs::read(&out).unwrap();
    assert_eq!(
        code(&run(&["coherent", "--k", "1", "--rho", "1e6", "-o", path_str(&out)])),
        1
    );
    assert_eq!(std::fs::read(&out).unwrap(), before);
}

#[test]
fn verify_all_reports_per_module() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run(&["verify-all", "--module", "nfm", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS module nfm: 4/4 checks"), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);

    // the whole suite: one line per module, exit status follows the checks
    let o = run(&["verify-all"]);
    let text = stdout(&o);
    for m in ["specfun", "repalg", "phaseops", "bgstates", "fockreal", "nfm"] {
        assert!(text.contains(&format!(" module {m}: ")), "{m}: {text}");
    }
    let all_pass = !text.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(code(&o), if all_pass { 0 } else { 1 });
}

#[test]
fn remaining_subcommands_run() {
    for args in [
        vec![
            "repr",
            "--k",
            "1",
            "--dim",
            "8",
            "--operator",
            "cos",
            "--omega",
            "imaginary-unit",
        ],
        vec!["phase-spectrum", "--k", "0.5", "--dim", "40", "--diagonal"],
        vec!["coherent", "--k", "0.5", "--rho", "0.5,2,10", "--phi", "-1.2"],
        vec!["completeness", "--k", "0.5,1", "--n", "0,3"],
        vec!["oscillator", "--k", "0.5", "--dim", "144"],
        vec!["oscillator", "--k", "1", "--mode", "h-curve", "--r-points", "20"],
        vec!["oscillator", "--k", "1", "--mode", "compare", "--dim", "64"],
        vec!["two-mode", "--dim-per-mode", "6"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("# phasequant v"), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}
