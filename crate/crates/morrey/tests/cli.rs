//! End-to-end checks of the `morrey` binary: output schemas, file round
//! trips, exit-code semantics, and byte-level determinism of the suite.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morrey"))
}

#[test]
fn suite_is_byte_identical_across_runs() {
    let run = || {
        let out = bin().args(["suite", "--seed", "42"]).output().unwrap();
        assert!(out.status.success(), "suite exited nonzero: {out:?}");
        out.stdout
    };
    let a = run();
    let b = run();
    assert!(!a.is_empty());
    assert_eq!(a, b, "suite output differed between runs");
    // Every line is valid JSON with the fixed schema.
    for line in String::from_utf8(a).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["name", "params", "lhs", "rhs", "ratio", "pass"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
        assert!(v.get("elapsed_ms").is_none(), "timing leaked into {line}");
    }
}

#[test]
fn suite_csv_format() {
    let out = bin()
        .args(["suite", "--seed", "7", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "name,params,lhs,rhs,ratio,witness,pass,elapsed_ms"
    );
    assert!(lines.count() > 10);
}

#[test]
fn norm_of_file_input() {
    let dir = std::env::temp_dir().join("morrey-cli-test-norm");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.grid");
    // chi_[0,1) on [0,16) at K=4, written through the library format.
    let text = bin()
        .args([
            "maxop",
            "--op",
            "hl",
            "--mode",
            "windows",
            "--gen",
            "indicator:level=0,cx=0",
            "--n",
            "1",
            "--l",
            "4",
            "--k",
            "4",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(text.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(String::from_utf8(text.stdout).unwrap().trim()).unwrap();
    assert_eq!(summary["op"], "hl");
    assert!((summary["max"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = bin()
        .args([
            "norm",
            "--space",
            "morrey",
            "--p",
            "1",
            "--phi",
            "const:1",
            "--mode",
            "dyadic",
            "--input",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    // The maximal function of the indicator has norm 1 under the flat shape.
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn decompose_synthesize_round_trip_via_files() {
    let dir = std::env::temp_dir().join("morrey-cli-test-decomp");
    std::fs::create_dir_all(&dir).unwrap();
    let decomp_path = dir.join("d.json");
    let synth_path = dir.join("s.grid");
    let out = bin()
        .args([
            "decompose",
            "--p",
            "1",
            "--d",
            "0",
            "--gen",
            "random-step:amplitude=1",
            "--n",
            "1",
            "--l",
            "2",
            "--k",
            "5",
            "--seed",
            "3",
            "--out",
            decomp_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "decompose failed: {out:?}");
    let out = bin()
        .args([
            "synthesize",
            "--input",
            decomp_path.to_str().unwrap(),
            "--out",
            synth_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "synthesize failed: {out:?}");

    // The synthesized function (with residual) equals the generator output.
    let f = morrey::generate::random_step(
        &morrey::generate::GridSpec::new(1, 2, 5, morrey::grid::Boundary::Zero),
        3,
        1.0,
    );
    let g = morrey::grid::GridFunction::from_text(&std::fs::read_to_string(&synth_path).unwrap())
        .unwrap();
    let err = f.sub(&g).unwrap().sup_norm();
    assert!(err <= 1e-8 * f.sup_norm(), "file round trip error {err}");
}

#[test]
fn gating_failure_exits_2() {
    // Constant shape fails the integral condition required by czop.
    let out = bin()
        .args([
            "czop",
            "--p",
            "1",
            "--phi",
            "const:1",
            "--gen",
            "fourier-mode:mx=1",
            "--n",
            "1",
            "--l",
            "2",
            "--k",
            "4",
            "--boundary",
            "periodic",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "expected exit 2: {out:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("hypothesis unmet"), "stderr: {err}");
}

#[test]
fn malformed_config_exits_nonzero_naming_key() {
    let dir = std::env::temp_dir().join("morrey-cli-test-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "[grid]\nn=1\nl=2\nk=4\nbogus_key=9\n").unwrap();
    let out = bin()
        .args([
            "norm",
            "--space",
            "morrey",
            "--p",
            "1",
            "--phi",
            "const:1",
            "--gen",
            "spike:cx=1",
            "--config",
            cfg.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus_key"), "diagnostic must name the key: {err}");
}

#[test]
fn config_supplies_grid_geometry() {
    let dir = std::env::temp_dir().join("morrey-cli-test-cfg2");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("grid.cfg");
    std::fs::write(&cfg, "[grid]\nn=1\nl=2\nk=4\n[input]\ngen=indicator:level=0,cx=1\n").unwrap();
    let out = bin()
        .args([
            "norm",
            "--space",
            "morrey",
            "--p",
            "1",
            "--phi",
            "power:a=0.5",
            "--config",
            cfg.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "config-driven norm failed: {out:?}");
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn hardy_subcommand_reports_sharpness() {
    let out = bin()
        .args([
            "hardy",
            "--v1",
            "power:a=1",
            "--v2",
            "power:a=-1",
            "--w",
            "power:a=3",
            "--trials",
            "10",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    let b = v["b"].as_f64().unwrap();
    assert!((b - 1.0).abs() < 1e-3);
    assert!(v["worst_ratio"].as_f64().unwrap() <= b * 1.001);
    assert!(v["sharpness_ratio"].as_f64().unwrap() >= 0.9 * b);
    assert!(v["achiever_jump"].as_f64().is_some());
}
