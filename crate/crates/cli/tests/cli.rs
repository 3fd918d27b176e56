use std::path::PathBuf;
use std::process::{Command, Output};

use dirichlet_core::critical::CriticalData;
use dirichlet_core::experiments::{CounterexampleCertificate, ZeroOneReport};
use dirichlet_core::flow::DirichletReport;
use dirichlet_core::hyperbolic::ReductionResult;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirichlet")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dirichlet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn critical_prints_the_euclidean_value() {
    let out = run(&["critical", "--norm", r#"{"kind":"lp","p":2}"#]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0.8660254"));
    let data: CriticalData = serde_json::from_str(&text).unwrap();
    assert!((data.delta - 3f64.sqrt() / 2.0).abs() < 1e-6);
}

#[test]
fn critical_reads_a_norm_file_and_traces() {
    let path = scratch("hexagon.json");
    std::fs::write(&path, r#"{"kind":"polygon","vertices":[[1,0],[0.5,0.9],[-0.5,0.9]]}"#).unwrap();
    let out = run(&["critical", "--norm", path.to_str().unwrap(), "--trace", "12", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("t0,px,py,qx,qy,det,is_critical\n"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn reduce_prints_point_and_word() {
    let out = run(&["reduce", "--z", "5,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0,2\nT^-5\n");
    let json = run(&["reduce", "--z", "0.3,0.1", "--format", "json"]);
    let red: ReductionResult = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(red.word, "T^3 S");
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        &["check", "--alpha", "abc", "--psi", "scaled:c=0.9", "--smax", "10"][..],
        &["check", "--alpha", "1/3", "--psi", "wobbly:c=1", "--smax", "10"],
        &["critical", "--norm", r#"{"kind":"lp","p":0.5}"#],
        &["critical", "--norm", "/nonexistent/norm.json"],
        &["reduce", "--z", "1,-1"],
        &["delta", "--basis", "[[1,2],[0.5,1]]"],
        &["counterexample", "--psi", "scaled:c=1", "--depth", "3"],
        &["zeroone", "--psi", "loggap:k=1"],
        &["frobnicate"],
        &["check", "--alpha", "1/3", "--psi", "scaled:c=0.9", "--smax", "10", "--bogus", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn check_report_round_trips() {
    let out = run(&["check", "--alpha", "2/5", "--psi", "scaled:c=1", "--smax", "20", "--sstar", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"dirichlet_up_to_S\": true"));
    let report: DirichletReport = serde_json::from_str(&text).unwrap();
    assert!(report.dirichlet_up_to_s);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn zeroone_csv_and_json() {
    let csv_path = scratch("zeroone.csv");
    let args = ["zeroone", "--psi", "loggap:k=1", "--n", "40", "--windows", "3,6", "--seed", "7", "--grid-step", "0.02"];
    let out = run(&[&args[..], &["--out", csv_path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("window_lo,window_hi,hit_fraction,n,psi_id,classification\n"));
    assert!(csv.contains(",40,loggap:k=1,divergent"));
    let json = run(&[&args[..], &["--format", "json"]].concat());
    let text = stdout(&json);
    let report: ZeroOneReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.seed, 7);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn counterexample_certificate_round_trips() {
    let path = scratch("cert.json");
    let out = run(&["counterexample", "--psi", "scaled:c=0.98", "--depth", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let cert: CounterexampleCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(cert.stages.len(), 4);
    assert_eq!(serde_json::to_string_pretty(&cert).unwrap() + "\n", text);
}

#[test]
fn tabulated_psi_from_file() {
    let path = scratch("psi.csv");
    let mut table = String::from("t,psi\n");
    for i in 0..=100 {
        let t = (0.2 * i as f64).exp();
        table.push_str(&format!("{t},{}\n", 0.5 / t));
    }
    std::fs::write(&path, table).unwrap();
    let spec = format!("table:{}", path.display());
    let out = run(&["dani", "--psi", &spec, "--from", "1", "--to", "5", "--step", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    for line in text.lines().skip(1) {
        let r: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        // linear interpolation of a convex ψ overestimates it between nodes
        assert!(r >= 0.5f64.sqrt() - 1e-9 && r <= 0.5f64.sqrt() * 1.005, "{r}");
    }
}

#[test]
fn delta_and_locate() {
    let basis = "[[1.0745699318741,0.5372849659371],[0,0.9306048591021]]";
    let out = run(&["delta", "--basis", basis]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["delta"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let out = run(&["locate", "--basis", basis]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["distance_to_critical"].as_f64().unwrap() < 1e-9);
}

#[test]
fn table_lists_every_pair() {
    let out = run(&["table", "--psi", "loggap:k=1", "--psi", "powergap:k=1", "--k", "100,1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn help_lists_defaults() {
    let with_defaults = ["critical", "delta", "check", "reduce", "dani", "zeroone", "counterexample", "table"];
    for sub in ["critical", "delta", "check", "reduce", "locate", "dani", "zeroone", "counterexample", "table"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = stdout(&out);
        assert!(text.contains("Usage: dirichlet"), "{sub}");
        if with_defaults.contains(&sub) {
            assert!(text.contains("[default:"), "{sub} help has no defaults");
        }
    }
    assert!(stdout(&run(&["zeroone", "--help"])).contains("[default: 10,20,40]"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
