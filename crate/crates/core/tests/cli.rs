use serde_json::Value;
use thermal_dj::cli::{main_with_args, EXIT_ERROR, EXIT_INDETERMINATE, EXIT_OK, EXIT_VERIFY_FAILED};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("thermal-dj").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--machine-output"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

#[test]
fn dj_decisions_and_exit_codes() {
    let (code, v) = run_json(&["dj", "--function", "x2 x3 ^ x4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["decision"], "balanced");
    assert_eq!(v["table"], "01010110");
    assert_eq!(v["expectation"].as_f64().unwrap(), 0.0);

    let (code, v) = run_json(&["dj", "--table", "00000000"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["decision"], "constant-0");
    assert!((v["expectation"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let (code, v) = run_json(&["dj", "--table", "00000001"]);
    assert_eq!(code, EXIT_INDETERMINATE);
    assert_eq!(v["class"], "neither");
}

#[test]
fn parse_errors_report_position() {
    let (code, _, err) = run(&["dj", "--function", "x2 ^^ x3"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("position") || err.contains("pos"), "{err}");
    let (code, _, err) = run(&["dj", "--function", "x9"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!err.is_empty());
    let (code, _, _) = run(&["dj"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn machine_output_is_deterministic() {
    for args in [
        &["dj", "--function", "x2 x3 ^ x4"][..],
        &["compile", "--function", "x2 x3 ^ x4"][..],
        &["spectrum", "--operator", "2*I1x*I4z", "--function", "x2 x3 ^ x4"][..],
    ] {
        let (_, a) = run_json(args);
        let (_, b) = run_json(args);
        assert_eq!(a, b);
    }
}

#[test]
fn compile_reports_verified_program() {
    let (code, v) = run_json(&["compile", "--function", "x2 x3 ^ x4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verifier"]["pass"], true);
    assert!(v["events"].as_u64().unwrap() <= v["raw_events"].as_u64().unwrap());
    let (code, v) = run_json(&["compile", "--function", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["events"], 0);
    assert_eq!(v["total_duration_s"].as_f64().unwrap(), 0.0);
}

#[test]
fn compile_grid_mode_reports_distance() {
    let (code, v) = run_json(&["compile", "--function", "x2 x3 ^ x4", "--grid"]);
    assert_eq!(code, EXIT_OK);
    assert!(v["verifier"]["distance"].as_f64().unwrap() > 1e-9);
    assert!(!v["grid_rounding"].as_array().unwrap().is_empty());
}

#[test]
fn compile_rejects_weight_four_term() {
    let (code, _, err) = run(&["compile", "--function", "x2 x3 ^ x4", "--branch", "principal"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("I1z*I2z*I3z*I4z"), "{err}");
}

#[test]
fn compile_writes_program_file() {
    let dir = std::env::temp_dir().join(format!("thermal-dj-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fb.txt");
    let (code, _, _) = run(&["compile", "--function", "x2 x3 ^ x4", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# pulse program"));
    assert!(text.contains("DELAY"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_code_for_failed_verification_is_distinct() {
    assert_ne!(EXIT_VERIFY_FAILED, EXIT_ERROR);
    assert_ne!(EXIT_VERIFY_FAILED, EXIT_INDETERMINATE);
}

#[test]
fn spectrum_ratios() {
    let cases: &[(&[&str], &str)] = &[
        (&["spectrum", "--function", "0"], "1:1:1:1"),
        (&["spectrum", "--function", "x2 x3 ^ x4"], "0:0:0:0"),
        (&["spectrum", "--function", "x2 x3 ^ x4", "--cnot", "4,2"], "-1:1:0:0"),
        (&["spectrum", "--operator", "2*I1x*I4z", "--function", "x2 x3 ^ x4"], "-1:1:1:1"),
        (&["spectrum", "--operator", "2*I1x*I3z"], "-1:-1:1:1"),
        (&["spectrum", "--operator", "4*I1z*I2z*I3z", "--readout", "1"], "1:-1:-1:1"),
    ];
    for (args, ratio) in cases {
        let (code, v) = run_json(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        assert_eq!(v["ratio"], *ratio, "{args:?}");
    }
}

#[test]
fn spectrum_plot_file() {
    let dir = std::env::temp_dir().join(format!("thermal-dj-plot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s.tsv");
    let (code, _, _) = run(&["spectrum", "--function", "0", "--points", "64", "--plot", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows = std::fs::read_to_string(&path).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 64);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_counts() {
    let (code, v) = run_json(&["sweep", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["tables"], 256);
    assert_eq!(v["constant"], 2);
    assert_eq!(v["balanced"], 70);
    assert_eq!(v["neither"], 184);
    assert_eq!(v["misdecided"], 0);
    let (code, _, _) = run(&["sweep", "5"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn custom_config_file() {
    let dir = std::env::temp_dir().join(format!("thermal-dj-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("two.toml");
    std::fs::write(
        &path,
        "[[spins]]\nlabel = \"a\"\n[[spins]]\nlabel = \"b\"\n[[couplings]]\nspins = [\"a\", \"b\"]\nj_hz = 50.0\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let (code, v) = run_json(&["--config", cfg, "dj", "--function", "x2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["decision"], "balanced");
    let (code, v) = run_json(&["--config", cfg, "compile", "--function", "x2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verifier"]["pass"], true);
    std::fs::write(&path, "[[spins]]\nlabel = \"a\"\nbogus = 1\n").unwrap();
    let (code, _, _) = run(&["--config", cfg, "dj", "--function", "x2"]);
    assert_eq!(code, EXIT_ERROR);
    std::fs::remove_dir_all(&dir).unwrap();
}
