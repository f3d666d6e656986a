//! Command-line behavior: exit codes, error objects, report shape, plot CSV.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_larsdiag"))
}

fn diabetes_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/diabetes.csv").to_string()
}

fn temp_file(name: &str) -> PathBuf {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
    let mut path = std::env::temp_dir();
    path.push(format!(
        "larsdiag_cli_{}_{unique}_{name}",
        std::process::id()
    ));
    path
}

fn write_small_csv() -> PathBuf {
    let path = temp_file("small.csv");
    let mut body = String::from("a,b,c,y\n");
    // deterministic, full-rank little dataset
    let mut state = 1234567u64;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (2u64.pow(31) as f64) - 1.0
    };
    for _ in 0..24 {
        let a = next();
        let b = next();
        let c = next();
        let y = 3.0 * a - 2.0 * b + 0.5 * c + 0.1 * next();
        body.push_str(&format!("{a},{b},{c},{y}\n"));
    }
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

#[test]
fn fit_succeeds_with_exit_zero() {
    let input = diabetes_path();
    let out = run(&["fit", "--input", &input, "--response", "Y"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid json");
    assert_eq!(report["command"], "fit");
    assert_eq!(report["config"]["seed"], 20040201);
    assert_eq!(report["result"]["selection"]["size"], 7);
    let selected: Vec<String> = report["result"]["selection"]["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(selected, vec!["BMI", "S5", "BP", "S3", "SEX", "S6", "S1"]);
}

#[test]
fn unknown_response_column_gives_error_object_and_exit_one() {
    let input = diabetes_path();
    let out = run(&["fit", "--input", &input, "--response", "NOPE"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("error json");
    assert_eq!(report["error"]["kind"], "missing_column");
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("NOPE"));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["fit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnose_full_model_step_collapses_to_leverage() {
    let input = diabetes_path();
    let out = run(&[
        "diagnose",
        "--input",
        &input,
        "--response",
        "Y",
        "--step",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cases = report["result"]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 442);
    // full-model step: c_pi = h_i, so every leverage deficit vanishes and
    // the total equals m + 1
    for case in cases {
        let deficit = case["leverage_deficit"].as_f64().unwrap();
        assert!(deficit.abs() <= 1e-8, "deficit {deficit}");
    }
    let sum = report["result"]["sum_c_pi"].as_f64().unwrap();
    assert!((sum - 11.0).abs() <= 1e-8);
    let cp = report["result"]["cp"].as_f64().unwrap();
    assert!((cp - 11.0).abs() <= 1e-8);
}

#[test]
fn plot_csv_has_one_row_per_step_and_predictor() {
    let input = write_small_csv();
    let plot = temp_file("plot.csv");
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "y",
        "--max-steps",
        "1",
        "--plot-out",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(&plot).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "step,predictor,coefficient,cp");
    // steps 0 and 1 over three predictors
    assert_eq!(lines.len(), 1 + 6);
    // step-0 coefficients are all zero
    for line in &lines[1..4] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "0");
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
    }
    // round-trip: parsing the printed coefficient recovers the exact bits
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let step1 = &report["result"]["steps"][1];
    let entered = step1["entered"].as_str().unwrap();
    let printed: f64 = lines[4..7]
        .iter()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[1] == entered)
        .map(|f| f[2].parse().unwrap())
        .unwrap();
    assert!(printed != 0.0);
    std::fs::remove_file(&input).ok();
    std::fs::remove_file(&plot).ok();
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let input = write_small_csv();
    let report_path = temp_file("report.json");
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "y",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(&report_path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(report["command"], "fit");
    std::fs::remove_file(&input).ok();
    std::fs::remove_file(&report_path).ok();
}

#[test]
fn text_format_is_a_human_summary() {
    let input = write_small_csv();
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "y",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = String::from_utf8(out.stdout).unwrap();
    assert!(body.contains("LARS path"));
    assert!(serde_json::from_str::<serde_json::Value>(&body).is_err());
    std::fs::remove_file(&input).ok();
}

#[test]
fn dim_and_stress_commands_run_on_diabetes() {
    let input = diabetes_path();
    let dim = run(&["dim", "--input", &input, "--response", "Y"]);
    assert_eq!(dim.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&dim.stdout).unwrap();
    assert_eq!(report["result"]["estimated_d"], 1);
    assert_eq!(report["config"]["slices"], 10);

    let round = run(&[
        "stress-round",
        "--input",
        &input,
        "--response",
        "Y",
        "--exclude",
        "SEX",
    ]);
    assert_eq!(round.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&round.stdout).unwrap();
    assert_eq!(report["result"]["perturbed"][0]["selection"]["size"], 8);
    assert_eq!(report["config"]["factor"].as_f64().unwrap(), 2.2);
}

#[test]
fn marginal_and_simulate_commands_run_on_small_data() {
    let input = write_small_csv();
    let marginal = run(&[
        "stress-marginal",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "y",
        "--pair",
        "a,b",
        "--target-corr",
        "0.0",
        "--replicates",
        "20",
    ]);
    assert_eq!(
        marginal.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&marginal.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&marginal.stdout).unwrap();
    assert_eq!(
        report["result"]["achieved_correlations"]
            .as_array()
            .unwrap()
            .len(),
        20
    );

    let sim = run(&[
        "simulate-cov",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "y",
        "--noise-sd",
        "0.5",
        "--step-count",
        "2",
        "--replicates",
        "100",
    ]);
    assert_eq!(
        sim.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap();
    assert_eq!(report["result"]["replicates_used"], 100);
    assert_eq!(
        report["result"]["rng_algorithm"],
        "chacha8+ziggurat(seed+replicate)"
    );
    std::fs::remove_file(&input).ok();
}

#[test]
fn bad_cell_error_names_row_and_column() {
    let path = temp_file("bad.csv");
    std::fs::write(&path, "a,b,y\n1,2,3\n4,oops,6\n").unwrap();
    let out = run(&["fit", "--input", path.to_str().unwrap(), "--response", "y"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["error"]["kind"], "bad_cell");
    let message = report["error"]["message"].as_str().unwrap();
    assert!(
        message.contains("row 3") && message.contains('b'),
        "{message}"
    );
    std::fs::remove_file(&path).ok();
}
