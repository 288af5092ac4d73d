use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tnorm-risk");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_hrm04(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("hrm04.json");
    std::fs::write(
        &path,
        r#"{"case_id":"HRM04","scores":{"critical_infrastructure":0.93,"safety_component":0.88,"autonomous_decision":0.61}}"#,
    )
    .unwrap();
    path
}

#[test]
fn classify_hrm04_goedel() {
    let dir = tempfile::tempdir().unwrap();
    let case = write_hrm04(dir.path());
    let out = run(&[
        "classify",
        "--case",
        p(&case),
        "--rules",
        "default",
        "--tnorm",
        "goedel",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with('\n'));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["predicted"], "high_risk");
    assert_eq!(v["case_id"], "HRM04");
    assert_eq!(v["winning_rule"], "high_risk_critical_infrastructure");
}

#[test]
fn classify_with_theta_override_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let case = write_hrm04(dir.path());
    let dest = dir.path().join("trail.json");
    let out = run(&[
        "classify",
        "--case",
        p(&case),
        "--tnorm",
        "product",
        "--theta",
        "0.45",
        "--out",
        p(&dest),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["predicted"], "high_risk");
    assert_eq!(v["theta"].as_f64(), Some(0.45));
}

#[test]
fn compare_emits_three_reports_and_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    assert!(
        run(&["generate", "--n", "200", "--seed", "5", "--out", p(&bench)])
            .status
            .success()
    );
    let out = run(&[
        "compare",
        "--dataset",
        p(&bench),
        "--tnorms",
        "lukasiewicz,product,goedel",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    for key in ["a", "b_kind", "b", "c", "p_one_sided", "p_two_sided"] {
        assert!(pairs[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn generate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert!(
        run(&["generate", "--n", "1035", "--seed", "42", "--out", p(&a)])
            .status
            .success()
    );
    assert!(
        run(&["generate", "--n", "1035", "--seed", "42", "--out", p(&b)])
            .status
            .success()
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    assert!(
        run(&["generate", "--n", "100", "--seed", "1", "--out", p(&bench)])
            .status
            .success()
    );
    let out = run(&[
        "sweep",
        "--dataset",
        p(&bench),
        "--tnorm",
        "product",
        "--theta-min",
        "0.25",
        "--theta-max",
        "0.75",
        "--theta-step",
        "0.05",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "theta,kind,accuracy,fp_rate,fn_rate");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("0.250000,product,"));
}

#[test]
fn validate_reports_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.jsonl");
    std::fs::write(
        &ds,
        concat!(
            r#"{"case_id":"A","description":"","case_type":"clear","expert_label":"high_risk","scores":{"public_space":0.5}}"#,
            "\n",
            r#"{"case_id":"B","description":"","case_type":"clear","expert_label":"high_risk","scores":{"public_space":0.9}}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = run(&["validate", "--dataset", p(&ds)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("warning: A (clear)"), "{text}");
    assert!(text.ends_with("2 cases checked, 1 warnings\n"), "{text}");

    let out = run(&["validate", "--rules", "default"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "rules ok: 14 rules over 22 conditions\n"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let case = write_hrm04(dir.path());

    // usage errors
    assert_eq!(
        run(&["classify", "--case", p(&case), "--tnorm", "hamacher"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "classify",
            "--case",
            p(&case),
            "--tnorm",
            "goedel",
            "--mixed"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["classify", "--case", p(&case)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["generate", "--n", "3", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    // missing file
    let out = run(&[
        "classify",
        "--case",
        "/nonexistent/case.json",
        "--tnorm",
        "goedel",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/case.json"));

    // validation: unknown condition named in the diagnostic
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"case_id":"X9","scores":{"unknown_cond":0.5}}"#).unwrap();
    let out = run(&["classify", "--case", p(&bad), "--tnorm", "goedel"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown_cond") && err.contains("X9"), "{err}");

    // mixed mode on unannotated default rules names a rule
    let out = run(&["classify", "--case", p(&case), "--mixed"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prohibited_rt_biometric"));

    // rule file with bad theta
    let rules = dir.path().join("rules.json");
    std::fs::write(
        &rules,
        r#"{"vocabulary":["a"],"rules":[{"rule_id":"r1","category":"high_risk","conditions":["a"],"theta":1.2}]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--rules", p(&rules)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta out of range"));
}

#[test]
fn mixed_mode_with_annotated_rule_file() {
    let dir = tempfile::tempdir().unwrap();
    let rules = tnorm_risk::default_ruleset()
        .with_uniform_standard(tnorm_risk::ConjunctionStandard::Strong)
        .with_standard(
            "high_risk_education",
            tnorm_risk::ConjunctionStandard::Bottleneck,
        )
        .unwrap();
    let rules_path = dir.path().join("mixed.json");
    std::fs::write(&rules_path, rules.to_json_string()).unwrap();
    let case = dir.path().join("hrm05.json");
    std::fs::write(
        &case,
        r#"{"case_id":"HRM05","scores":{"education_context":0.92,"determines_access":0.58,"affects_life_path":0.63}}"#,
    )
    .unwrap();
    let out = run(&[
        "classify",
        "--case",
        p(&case),
        "--rules",
        p(&rules_path),
        "--mixed",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tnorm"], "mixed");
    assert_eq!(v["predicted"], "high_risk");
}
