use std::process::{Command, Output};

fn cvexact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvexact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn compiles_px2_into_seventeen_gates() {
    let o = cvexact(&["compile", "t=0.4 P[0] X[1]^2", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["report"]["n_gates_total"], 17);
    assert_eq!(v["report"]["n_gates_nonfourier"], 9);
    assert_eq!(v["route"], "px2");
    assert!(v["report"]["residual_symbolic"].as_f64().unwrap() < 1e-9);
}

#[test]
fn ineligible_power_exits_three() {
    let o = cvexact(&["compile", "t=1 X[0]^5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("divisible"));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(
        cvexact(&["compile", "t=1 X[0] X[0]"]).status.code(),
        Some(2)
    );
    assert_eq!(cvexact(&["compile", "X[0]^2"]).status.code(), Some(2));
    assert_eq!(
        cvexact(&["compile", "t=1 X[0]^2 + P[0]^2"]).status.code(),
        Some(2)
    );
    assert_eq!(cvexact(&["preset", "heat-bath"]).status.code(), Some(2));
    assert_eq!(
        cvexact(&["compile", "t=1 X[0]^2", "--param-split", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cvexact(&["verify", "/nonexistent.json", "t=1 X[0]"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(cvexact(&["bogus"]).status.code(), Some(2));
}

#[test]
fn oversized_numeric_check_exits_two() {
    let o = cvexact(&[
        "compile",
        "t=0.1 X[0] X[1] X[2] X[3]",
        "--numeric-cutoff",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn presets_compile_exactly() {
    for name in [
        "bose-hubbard-dipole",
        "bose-hubbard-tunneling",
        "cross-kerr",
        "pca-rotation",
        "matrix-inversion",
        "pde-cubic",
        "montecarlo:1",
        "montecarlo:2",
        "montecarlo:3",
    ] {
        let o = cvexact(&["preset", name, "-t", "0.3", "--format", "json"]);
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(
            json(&o)["report"]["residual_symbolic"].as_f64().unwrap() < 1e-9,
            "{name}"
        );
    }
    let o = cvexact(&["preset", "montecarlo:4", "-t", "0.3", "--no-verify"]);
    assert!(o.status.success());
}

#[test]
fn gate_budget_exits_two() {
    let o = cvexact(&["preset", "montecarlo:3", "--max-gates", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--max-gates"));
}

#[test]
fn circuit_round_trips_through_verify() {
    let dir = std::env::temp_dir().join(format!("cvexact-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("x4.json");
    let p = path.to_str().unwrap();
    assert!(cvexact(&["compile", "t=0.05 X[0]^4", "--out", p])
        .status
        .success());
    assert!(cvexact(&["verify", p, "t=0.05 X[0]^4"]).status.success());
    let wrong = cvexact(&["verify", p, "t=0.06 X[0]^4"]);
    assert_eq!(wrong.status.code(), Some(4));
    std::fs::write(&path, "{\"version\": 99}").unwrap();
    assert_eq!(
        cvexact(&["verify", p, "t=0.05 X[0]^4"]).status.code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn numeric_check_passes_for_small_triple_product() {
    let o = cvexact(&[
        "compile",
        "t=0.02 X[0] X[1] X[2]",
        "--numeric-cutoff",
        "24",
        "--subspace",
        "5",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(&o)["report"];
    assert!(r["residual_numeric"].as_f64().unwrap() < 1e-5);
    assert!(r["phase_offset"].as_f64().unwrap().abs() < 1e-4);
}

#[test]
fn compare_reports_ratio() {
    let o = cvexact(&[
        "compare",
        "t=1 X[0]^4",
        "--epsilon",
        "1e-3",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    let exact = v["exact"].as_f64().unwrap();
    let estimate = v["estimate"].as_f64().unwrap();
    assert!(estimate > 100.0 * exact);
    assert!((v["ratio"].as_f64().unwrap() - estimate / exact).abs() < 1e-6 * estimate);
    assert!(stdout(&cvexact(&["compare", "t=1 X[0] X[1] X[2]"])).contains("ratio"));
}

#[test]
fn trotter_escape_hatch() {
    let o = cvexact(&[
        "compile",
        "t=0.1 X[0]^2 + P[0]^2",
        "--trotter",
        "4",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert_eq!(json(&o)["steps"], 4);
    let o = cvexact(&[
        "compile",
        "t=0.1 X[0] + X[1]",
        "--trotter",
        "3",
        "--format",
        "json",
    ]);
    assert!(json(&o)["residual_symbolic"].as_f64().unwrap() < 1e-12);
}

#[test]
fn text_report_lists_counts_and_trace() {
    let text = stdout(&cvexact(&[
        "compile",
        "t=0.1 X[0]^2 X[1]^2",
        "--no-optimize",
    ]));
    for key in [
        "route",
        "gates",
        "before opt",
        "ancillas",
        "trace",
        "symbolic",
    ] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    let skipped = stdout(&cvexact(&["compile", "t=0.1 X[0]^2 X[1]^2", "--no-verify"]));
    assert!(skipped.contains("skipped"));
}
