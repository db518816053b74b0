use std::process::{Command, Output};

use ising_rg_cli::commands::{
    CorrelationDoc, Document, EvolveDoc, ObservableDoc, RgFlowDoc, SimulateDoc, SpectrumDoc,
    Verdict,
};
use ising_rg_core::dynamics::ObservableValues;
use ising_rg_core::rgflow::rg_trajectory;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising-rg"))
        .args(args)
        .env_remove("ISING_RG_BUDGET")
        .output()
        .unwrap()
}

fn doc(args: &[&str]) -> Document {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(args: &[&str]) -> Vec<Vec<String>> {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

fn correlation(args: &[&str]) -> CorrelationDoc {
    match doc(args) {
        Document::Correlation(d) => d,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn correlation_csv_at_unit_coupling() {
    let rows = csv_rows(&["correlation", "--K", "1", "--d_max", "5", "--format", "csv"]);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    // tanh(1)³ from the exponential definition
    let e2 = (2.0f64).exp();
    let t = (e2 - 1.0) / (e2 + 1.0);
    assert!((rows[3][3].parse::<f64>().unwrap() - t * t * t).abs() < 1e-15);
}

#[test]
fn correlation_vanishes_at_zero_coupling() {
    let d = correlation(&["correlation", "--k", "0"]);
    assert_eq!(d.rows[0].value, 1.0);
    assert!(d.rows[1..].iter().all(|r| r.value == 0.0));
}

fn observable(args: &[&str]) -> ObservableDoc {
    match doc(args) {
        Document::Observable(d) => d,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn observable_of_constant_functions_is_zero() {
    let d = observable(&["observable", "--f2", "1,1", "--g2", "1,1"]);
    assert!(d.s.abs() < 1e-15);
}

#[test]
fn observable_oracle_agrees_within_printed_tolerance() {
    let d = observable(&[
        "observable",
        "--k",
        "0.5",
        "--f2",
        "2,1",
        "--g2",
        "3,1",
        "--d",
        "3",
        "--oracle",
        "18",
    ]);
    let o = d.oracle.unwrap();
    assert!(o.pass && o.max_gap <= o.tolerance);
    assert!((d.s - o.s).abs() <= o.tolerance);
}

#[test]
fn fixed_boundary_serializes_every_limit() {
    let d = observable(&[
        "observable",
        "--k",
        "0.5",
        "--boundary",
        "+-",
        "--i",
        "2",
        "--j",
        "5",
        "--oracle",
        "16",
    ]);
    let lim = d.limits.unwrap();
    assert_eq!(d.boundary, "+-");
    assert_eq!(d.s_hat, lim.s_hat[2]);
    assert!(d.oracle.unwrap().pass);
}

#[test]
fn nonzero_field_is_an_unsupported_regime() {
    let out = run(&["observable", "--h", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported regime"));
}

#[test]
fn rg_flow_follows_the_trajectory() {
    let Document::RgFlow(d) = doc(&["rg-flow", "--k", "1", "--n", "10"]) else {
        panic!()
    };
    let traj = rg_trajectory(1.0, 10).unwrap();
    let ks: Vec<f64> = d.rows.iter().map(|r| r.k_n).collect();
    assert_eq!(ks, traj.k_values);
    assert!(d.rates.s_n.unwrap() <= 0.7f64.ln());
}

#[test]
fn rg_flow_from_zero_is_flat() {
    let d: RgFlowDoc = match doc(&["rg-flow", "--k", "0"]) {
        Document::RgFlow(d) => d,
        _ => panic!(),
    };
    assert!(d
        .rows
        .iter()
        .all(|r| r.k_n == 0.0 && r.s_n == 0.0 && r.o == 0.0));
    assert!(d.rates.s_n.is_none());
    assert_eq!(run(&["rg-flow", "--n", "61"]).status.code(), Some(2));
}

fn spectrum(args: &[&str]) -> SpectrumDoc {
    match doc(args) {
        Document::Spectrum(d) => d,
        _ => panic!(),
    }
}

#[test]
fn spectrum_cases() {
    let d = spectrum(&["spectrum", "--gamma", "1"]);
    assert_eq!(d.horizon, 1);
    assert!(
        (d.eigenvalues[0] - 1.0).abs() < 1e-12
            && d.eigenvalues[1..].iter().all(|e| e.abs() < 1e-12)
    );

    let d = spectrum(&["spectrum", "--m", "2"]);
    for (e, want) in d
        .eigenvalues
        .iter()
        .zip([1.0, 0.6826895, 0.6826895, 0.4660649])
    {
        assert!((e - want).abs() < 1e-7);
    }
    let d = spectrum(&["spectrum", "--m", "3"]);
    assert_eq!(d.eigenvalues.len(), 8);
    assert!(d.eigenvalues[0] - d.eigenvalues[1] > 0.1);
}

fn evolve(args: &[&str]) -> EvolveDoc {
    match doc(args) {
        Document::Evolve(d) => d,
        _ => panic!(),
    }
}

#[test]
fn evolve_at_zero_coupling_converges() {
    let d = evolve(&[
        "evolve",
        "--schedule",
        "constant:0",
        "--T",
        "80",
        "--N",
        "10",
    ]);
    assert!(d.final_gap <= 1e-9);
    assert_eq!(d.rows.len(), 80);
}

#[test]
fn evolve_constant_functions_stay_zero() {
    let d = evolve(&["evolve", "--f2", "1,1", "--g2", "1,1", "--T", "20"]);
    for r in &d.rows {
        let ObservableValues::Pair { s, .. } = r.point.values else {
            panic!()
        };
        assert!(s.abs() < 1e-13);
    }
}

#[test]
fn evolve_geometric_gap_trends_down() {
    let d = evolve(&["evolve", "--schedule", "geometric:0.5,0.5", "--T", "60"]);
    let early = d.rows[..10].iter().map(|r| r.gap).fold(0.0, f64::max);
    let late = d.rows[40..].iter().map(|r| r.gap).fold(0.0, f64::max);
    assert!(late < 1e-3 * early);
    assert!(d.final_gap <= 1e-6);
}

#[test]
fn evolve_rejects_large_rings() {
    assert_eq!(run(&["evolve", "--N", "15"]).status.code(), Some(3));
}

const SIM: &[&str] = &[
    "simulate",
    "--N",
    "32",
    "--T",
    "20",
    "--replicas",
    "2000",
    "--seed",
    "11",
];

#[test]
fn simulate_is_deterministic_and_round_trips() {
    let a = run(SIM);
    let b = run(SIM);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let parsed: Document = serde_json::from_slice(&a.stdout).unwrap();
    let again = serde_json::to_vec_pretty(&parsed).unwrap();
    assert_eq!(
        String::from_utf8(again).unwrap().trim_end(),
        String::from_utf8(a.stdout).unwrap().trim_end()
    );
    let Document::Simulate(SimulateDoc { verdict, rows, .. }) = parsed else {
        panic!()
    };
    assert_eq!(verdict, Verdict::Pass);
    assert_eq!(rows.len(), 20);
}

#[test]
fn simulate_seed_changes_output() {
    let mut other = SIM.to_vec();
    other[8] = "12";
    assert_ne!(run(SIM).stdout, run(&other).stdout);
}

#[test]
fn simulate_budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ising-rg"))
        .args(SIM)
        .env("ISING_RG_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_ising-rg"))
        .args(SIM)
        .env("ISING_RG_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_one() {
    // one step at strong coupling leaves neighbours correlated
    let out = run(&[
        "simulate",
        "--schedule",
        "constant:2",
        "--T",
        "1",
        "--replicas",
        "4000",
        "--sites",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let Document::Simulate(d) = serde_json::from_slice(&out.stdout).unwrap() else {
        panic!()
    };
    assert_eq!(d.verdict, Verdict::Fail);
}

#[test]
fn config_file_with_overrides_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_path = dir.path().join("corr.csv");
    std::fs::write(
        &cfg,
        format!(
            "# correlation grid\nK = 0.5\nd_max = 2\nformat = csv\noutput = {}\n",
            out_path.display()
        ),
    )
    .unwrap();
    let out = run(&[
        "correlation",
        "--config",
        cfg.to_str().unwrap(),
        "--d_max=3",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("k,h,d,value\n5.0000000000000000e-1,"));
}

#[test]
fn error_classes_have_distinct_codes() {
    assert_eq!(
        run(&["correlation", "--colour", "red"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["correlation", "--k", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["correlation", "--config", "/definitely/missing.cfg"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["free-energy", "--k", "1e308"]).status.code(), Some(4));
    assert_eq!(run(&["spectrum", "--m", "9"]).status.code(), Some(3));
    let out = run(&["spectrum", "--output", "/definitely/missing/dir/x.json"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn free_energy_boundaries_close_to_bulk() {
    let Document::FreeEnergy(d) = doc(&["free-energy", "--k", "1"]) else {
        panic!()
    };
    assert_eq!(d.boundaries.len(), 4);
    assert!(d.boundaries.iter().all(|b| b.gap <= 0.03));
}
