//! End-to-end checks of the scenario runner: bundled scenarios, schema
//! rejection, exit codes, and report reproducibility.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclochar"))
}

#[test]
fn bundled_fredholm_scenario_reports_index_one_and_passes() {
    let out = bin().args(["run", "fredholm_rank_one"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit: {:?}\n{text}", out.status);
    assert!(text.contains("index = 1"), "{text}");
    assert!(text.contains("pairing = [1.0,0.0]"), "{text}");
    assert!(text.contains("overall: PASS"), "{text}");
    assert!(text.contains("normalization constant S = 1"), "{text}");
    assert!(text.contains("default tolerance"), "{text}");
}

#[test]
fn bundled_gv_scenario_is_exactly_zero_everywhere() {
    let out = bin().args(["run", "gv_circle"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit: {:?}\n{text}", out.status);
    assert!(text.contains("overall: PASS"), "{text}");
    // every recorded relation must be identically zero in the exact kernel
    for line in text.lines().filter(|l| l.trim_start().starts_with(['c', 's', 'd', 'e'])) {
        if let Some((_, v)) = line.split_once(" = ") {
            if v.starts_with(['0', '-', '1'])
                && (line.contains("boundary") || line.contains("endpoint"))
            {
                assert_eq!(v.trim(), "0.0", "{line}");
            }
        }
    }
}

#[test]
fn empty_task_list_gives_empty_report_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(
        &path,
        r#"{ "version": 1, "model": { "kind": "winding", "modes": 2, "m": 1 }, "tasks": [] }"#,
    )
    .unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    assert!(text.contains("no tasks requested"), "{text}");
}

#[test]
fn unknown_fields_are_rejected_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{ "version": 1, "model": { "kind": "winding", "modes": 2, "m": 1 }, "tasks": [], "bogus": true }"#,
    )
    .unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema violation"), "{err}");
    assert!(err.contains("line"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn winding_spectral_flow_task_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wind.json");
    std::fs::write(
        &path,
        r#"{ "version": 1, "model": { "kind": "winding", "modes": 3, "m": 2 },
             "tasks": ["spectral-flow"], "options": { "seed": 3 } }"#,
    )
    .unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("crossing count -1"), "{text}");
}

#[test]
fn sign_injection_makes_the_selftest_fail() {
    let out = bin().args(["selftest", "--inject-sign-error"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[FAIL] verify-boundary(sign-flipped)"), "{text}");
}

#[test]
fn reports_are_reproducible_for_a_fixed_seed_and_width() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{ "version": 1, "model": { "kind": "matform", "matrices": 2, "generators": 3, "degree": 2 },
             "tasks": ["verify-boundary", "verify-cocycle"],
             "options": { "seed": 5, "budget": 2000, "threads": 1 } }"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for run in 0..2 {
        let out_path = dir.path().join(format!("r{run}.json"));
        let out = bin()
            .args(["run", scenario.to_str().unwrap(), "--out", out_path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        // wall-clock timings are the only nondeterministic field
        for t in v["tasks"].as_array_mut().unwrap() {
            t["seconds"] = serde_json::json!(0);
        }
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn text_and_json_renderings_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rep.json");
    let out = bin()
        .args(["run", "fredholm_rank_one", "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    for t in v["tasks"].as_array().unwrap() {
        let rendered = serde_json::to_string(&t["residual"]).unwrap();
        assert!(
            text.contains(&format!("residual {rendered}")),
            "residual {rendered} missing from text:\n{text}"
        );
    }
}
