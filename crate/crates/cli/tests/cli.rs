//! CLI contract tests: exit codes, the partial-budget flag, schema
//! round-trips on emitted JSON, and the Gaussian-alphabet verify run.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_congcount")
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(repo_root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("congcount_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn validate_good_specs_exit_zero() {
    for cfg in ["configs/cf_12.json", "configs/cf_gauss.json", "configs/schottky_n2.json"] {
        let out_dir = tmp_out(&format!("validate_{}", cfg.replace('/', "_")));
        let out = run(&["--config", cfg, "--out", out_dir.to_str().unwrap(), "validate"]);
        assert!(out.status.success(), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validate_overlapping_disks_exit_one_with_pair_named() {
    let root = repo_root();
    let dir = tmp_out("bad_spec");
    std::fs::create_dir_all(&dir).unwrap();
    // blow up the second disk of the Schottky example so disks 1 and 2 overlap
    let spec = std::fs::read_to_string(root.join("specs/schottky_n2.json")).unwrap();
    let bad_spec = spec.replace("\"radius\": 0.125", "\"radius\": 3.0");
    assert_ne!(spec, bad_spec);
    std::fs::write(dir.join("bad_spec.json"), bad_spec).unwrap();
    let config = format!(
        "{{\"schema_version\":1,\"spec_path\":\"{}\"}}",
        dir.join("bad_spec.json").display()
    );
    std::fs::write(dir.join("config.json"), config).unwrap();
    let out = run(&[
        "--config",
        dir.join("config.json").to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "validate",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("disks 1 and 2 overlap"), "stdout: {stdout}");
}

#[test]
fn malformed_spec_json_exits_two() {
    let dir = tmp_out("malformed");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("broken.json"), "{ not json").unwrap();
    let config = format!(
        "{{\"schema_version\":1,\"spec_path\":\"{}\"}}",
        dir.join("broken.json").display()
    );
    std::fs::write(dir.join("config.json"), config).unwrap();
    let out = run(&[
        "--config",
        dir.join("config.json").to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "validate",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
}

#[test]
fn unknown_config_field_rejected() {
    let dir = tmp_out("unknown_field");
    std::fs::create_dir_all(&dir).unwrap();
    let config = r#"{"schema_version":1,"spec_path":"x.json","surprise":true}"#;
    std::fs::write(dir.join("config.json"), config).unwrap();
    let out = run(&[
        "--config",
        dir.join("config.json").to_str().unwrap(),
        "validate",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn count_with_tiny_budget_flags_partial_and_exits_zero() {
    let out_dir = tmp_out("partial");
    let out = run(&[
        "--config",
        "configs/cf_12.json",
        "--out",
        out_dir.to_str().unwrap(),
        "--budget",
        "10",
        "count",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("partial"), "stdout: {stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("count_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["per_modulus"][0]["complete"], false);
}

#[test]
fn verify_gaussian_alphabet_passes() {
    let out_dir = tmp_out("verify_gauss");
    let out = run(&[
        "--config",
        "configs/cf_gauss.json",
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "5",
        "verify",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}\nstdout: {}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("verify_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["all_pass"], true);
}

#[test]
fn randomized_commands_require_seed() {
    let out_dir = tmp_out("noseed");
    for cmd in ["spectral", "verify", "probe-lnic"] {
        let out = run(&[
            "--config",
            "configs/cf_12.json",
            "--out",
            out_dir.to_str().unwrap(),
            cmd,
        ]);
        assert_eq!(out.status.code(), Some(2), "{cmd} must demand a seed");
    }
}

#[test]
fn emitted_json_summaries_carry_schema_version() {
    let out_dir = tmp_out("schema");
    let cases: &[(&str, &[&str], &str)] = &[
        ("validate", &[], "validate_summary.json"),
        ("zaremba", &[], "zaremba_summary.json"),
        ("expander", &[], "expander_summary.json"),
        ("probe-lnic", &["--seed", "1"], "lnic_summary.json"),
    ];
    for (cmd, extra, file) in cases {
        let mut args = vec![
            "--config",
            "configs/cf_12.json",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        args.push(cmd);
        let out = run(&args);
        assert!(out.status.success(), "{cmd}");
        let text = std::fs::read_to_string(out_dir.join(file)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema_version"], 1, "{file}");
        assert_eq!(value["command"], *cmd, "{file}");
    }
    // CSV artifacts use LF endings and carry a header row
    let csv = std::fs::read_to_string(out_dir.join("gaps.csv")).unwrap();
    assert!(csv.starts_with("q,group_order,generating_set_size,lambda2\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn schottky_expander_shows_p0_threshold() {
    // at p = 1 the return set generates only a cyclic subgroup mod q, so
    // the Cayley graph on the full quotient closure is disconnected
    // (λ₂ ≈ 0); at p = 2 the gap is solidly positive
    let out_dir = tmp_out("schottky_expander");
    let out = run(&[
        "--config",
        "configs/schottky_n2.json",
        "--out",
        out_dir.to_str().unwrap(),
        "expander",
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("expander_summary.json")).unwrap(),
    )
    .unwrap();
    for row in summary["rows"].as_array().unwrap() {
        let lambda2 = row["lambda2"].as_f64().unwrap();
        match row["p"].as_u64().unwrap() {
            1 => assert!(lambda2.abs() < 1e-9, "p=1 gap should vanish: {lambda2}"),
            2 => assert!(lambda2 > 0.1, "p=2 gap should be positive: {lambda2}"),
            _ => {}
        }
    }
}

#[test]
fn find_epsilon_matches_spec_value() {
    let out = run(&["--config", "configs/cf_12.json", "find-epsilon"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0.3330078125"), "stdout: {stdout}");
}

#[test]
fn spec_files_round_trip_through_library() {
    let root = repo_root();
    for name in ["cf_12.json", "cf_gauss.json", "schottky_n2.json"] {
        let text = std::fs::read_to_string(root.join("specs").join(name)).unwrap();
        let spec = congcount::SemigroupSpec::from_json(&text).unwrap();
        let again = congcount::SemigroupSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec.n_symbols(), again.n_symbols());
    }
    let _ = Path::new("x");
}
