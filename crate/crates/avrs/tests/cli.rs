use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use avrs_core::adversary::deterministic_jammer_family;
use avrs_core::coding::{max_distortion_estimate, CodeDesign, CodeParams, EstimateSettings};
use avrs_core::game::GameConfig;
use avrs_core::singleletter::{GridConfig, Solver};
use avrs_core::Serial;

const SPEC: &str = "data/binary_spec.json";
const POLICY: &str = "data/binary_policy.json";

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avrs"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = run(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().skip(2).collect()
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bounds", "--spec", SPEC, "--d"], dir.path());
    let csv = read(dir.path(), "bounds.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# {"));
    assert_eq!(
        lines[1],
        "D,R_upper,R_lower,uncertainty_upper,uncertainty_lower"
    );
}

#[test]
fn rates_vanish_above_d1() {
    let spec = avrs::files::load_spec(&Path::new(env!("CARGO_MANIFEST_DIR")).join(SPEC)).unwrap();
    let solver = Solver::new(&spec, GridConfig::default(), &GameConfig::default()).unwrap();
    let d = format!("{}", solver.d1().upper + 0.1);
    let dir = tempfile::tempdir().unwrap();
    ok(&["bounds", "--spec", SPEC, "--d", &d], dir.path());
    let csv = read(dir.path(), "bounds.csv");
    assert_eq!(data_lines(&csv), vec![format!("{d},0,0,0,0")]);
}

#[test]
fn bundled_example_matches_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bounds", "--spec", SPEC, "--threads", "2"], dir.path());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/bounds.csv");
    assert_eq!(
        read(dir.path(), "bounds.csv"),
        std::fs::read_to_string(golden).unwrap()
    );
}

#[test]
fn zero_trials_give_empty_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "simulate", "--spec", SPEC, "--policy", POLICY, "--trials", "0",
        ],
        dir.path(),
    );
    let csv = read(dir.path(), "simulate.csv");
    assert!(data_lines(&csv).is_empty());
    assert_eq!(
        csv.lines().nth(1),
        Some("n,jammer_id,distortion,E_enc,E_dec1,E_dec2")
    );
    ok(
        &[
            "lemmas",
            "--spec",
            SPEC,
            "--policy",
            POLICY,
            "--trials",
            "0",
            "--covering",
        ],
        dir.path(),
    );
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "simulate",
        "--spec",
        SPEC,
        "--policy",
        POLICY,
        "--seed",
        "7",
        "--jammers",
        "all-deterministic",
        "--trials",
        "50",
    ];
    ok(&args, a.path());
    ok(&args, b.path());
    assert_eq!(
        read(a.path(), "simulate.csv"),
        read(b.path(), "simulate.csv")
    );
    assert_eq!(
        read(a.path(), "simulate.json"),
        read(b.path(), "simulate.json")
    );
    let c = tempfile::tempdir().unwrap();
    let mut other = args;
    other[6] = "8";
    ok(&other, c.path());
    assert_ne!(
        data_lines(&read(a.path(), "simulate.csv")),
        data_lines(&read(c.path(), "simulate.csv"))
    );
}

#[test]
fn invocation_is_recorded_without_threads() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "bounds",
            "--spec",
            SPEC,
            "--d",
            "0.2",
            "--threads",
            "3",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "bounds.json")).unwrap();
    let inv = &json["invocation"];
    assert_eq!(inv["seed"], 5);
    assert_eq!(inv["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(
        inv["args"],
        serde_json::json!(["bounds", "--spec", SPEC, "--d", "0.2", "--seed", "5"])
    );
}

#[test]
fn simulate_cell_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "simulate",
            "--spec",
            SPEC,
            "--policy",
            POLICY,
            "--seed",
            "11",
            "--n",
            "12",
            "--trials",
            "40",
            "--jammers",
            "all-deterministic",
        ],
        dir.path(),
    );
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "simulate.json")).unwrap();

    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let spec = avrs::files::load_spec(&root.join(SPEC)).unwrap();
    let policy = avrs::files::load_policy(&root.join(POLICY), &spec).unwrap();
    let design = CodeDesign::new(
        &spec,
        &policy,
        12,
        CodeParams::from_eps(0.1),
        &GridConfig::default(),
        &Serial,
    )
    .unwrap();
    let settings = EstimateSettings {
        sources: 1,
        trials: 40,
        delta0: None,
        seed: 11,
        code_seed: None,
    };
    let report = max_distortion_estimate(
        &design,
        &deterministic_jammer_family(&spec),
        &settings,
        &Serial,
    )
    .unwrap();
    for (cell, c) in json["cells"].as_array().unwrap().iter().zip(&report.cells) {
        assert_eq!(cell["mean"].as_f64().unwrap(), c.mean);
        assert_eq!(cell["E_dec1"].as_u64().unwrap(), c.e_dec1 as u64);
    }
    assert_eq!(json["max"].as_f64().unwrap(), report.max);
}

#[test]
fn malformed_spec_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(SPEC)).unwrap();
    std::fs::write(&bad, text.replace("[[0.7125, 0.2375]", "[[0.7, 0.2375]")).unwrap();
    let o = run(&["bounds", "--spec", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:7:"), "{err}");

    std::fs::write(&bad, "{\n  \"x_size\": 2,\n  \"p_x\": [0.5 0.5]\n}").unwrap();
    let o = run(&["bounds", "--spec", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:3:"));

    let o = run(&["bounds", "--spec", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bounds", "--spec", SPEC, "--frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // no block of odd length is within 1e-3 of a uniform binary source
    let o = run(
        &[
            "simulate", "--spec", SPEC, "--policy", POLICY, "--n", "15", "--delta0", "0.001",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
