//! End-to-end behavior of the command-line interface: validation semantics,
//! exit codes, CSV round-tripping, and flag/file precedence.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_g2guard")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Parse the data section: (header columns, rows of f64 cells).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn validate_accepts_a_clean_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "ok.toml",
        r#"
            [source]
            preset = "our-hbn"
            [attack]
            kind = "soft"
            x_sweep = "0:1:0.25"
            [sampling]
            n_samples = 1e5
            n_runs = 10
            master_seed = 3
        "#,
    );
    let out = run(&["validate", &path]);
    assert!(out.status.success());
    assert!(stdout(&out).trim().is_empty(), "diagnostics: {}", stdout(&out));
}

#[test]
fn validate_reports_domain_violation_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad_x.toml",
        "[source]\npreset = \"our-hbn\"\n[attack]\nx = 1.5\n",
    );
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("attack.x"), "got: {}", stdout(&out));
}

#[test]
fn validate_reports_missing_source_as_structural() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "nosrc.toml", "[attack]\nkind = \"none\"\n");
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("source"), "got: {}", stdout(&out));
}

#[test]
fn validate_collects_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "multi.toml",
        r#"
            [attack]
            kind = "sneaky"
            x = 2.0
            [channel]
            detector_efficiency = 1.4
        "#,
    );
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    for needle in ["source", "attack.kind", "attack.x", "channel.detector_efficiency"] {
        assert!(text.contains(needle), "missing '{needle}' in: {text}");
    }
}

#[test]
fn unparseable_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "junk.toml", "this is { not toml");
    let out = run(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let out = run(&["keyrate", "--preset", "nonesuch", "--loss", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown preset"), "stderr: {err}");
}

#[test]
fn nonconvergent_source_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "runaway.toml",
        r#"
            [source]
            quantum_efficiency = 0.95
            g2 = 1.0
            g3 = 1.0
            repetition_rate_hz = 1e8
        "#,
    );
    let out = run(&["keyrate", "--config", &path, "--loss", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("build_distribution"), "stderr: {err}");
}

#[test]
fn attack_sweep_rows_stay_normalized() {
    let out = run(&[
        "attack-sweep",
        "--preset",
        "qd",
        "--kind",
        "hard",
        "--x",
        "0:1:0.25",
        "--samples",
        "1e5",
        "--runs",
        "8",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 5);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for row in &rows {
        let sum: f64 = ["p0", "p1", "p2", "p3"].iter().map(|q| row[col(q)]).sum();
        assert!((sum - 1.0).abs() < 1e-9, "P columns sum to {sum}");
        // Estimated mean tracks the exact transform closely at this scale.
        assert!((row[col("mu")] - row[col("mu_oracle")]).abs() / row[col("mu_oracle")] < 0.05);
    }
}

#[test]
fn guarded_sweep_point_is_marked() {
    let out = run(&[
        "attack-sweep",
        "--preset",
        "our-hbn",
        "--kind",
        "hard",
        "--x",
        "0:1:0.5",
        "--samples",
        "1e5",
        "--runs",
        "5",
        "--seed",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = parse_csv(&text);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let x1 = rows.iter().find(|r| r[col("x")] == 1.0).unwrap();
    assert_eq!(x1[col("guarded")], 1.0);
    assert!(x1[col("delta_g2")].is_nan());
    let x0 = rows.iter().find(|r| r[col("x")] == 0.0).unwrap();
    assert_eq!(x0[col("guarded")], 0.0);
    assert!(!x0[col("g2_oracle")].is_nan());
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "base.toml",
        r#"
            [source]
            preset = "our-hbn"
            [channel]
            loss_db = 10.0
            detector_efficiency = 0.5
        "#,
    );
    // Flag wins over the file's loss; the file's detector efficiency holds.
    let out = run(&["keyrate", "--config", &path, "--loss", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# channel.detector_efficiency: 0.5"), "{text}");
    let (header, rows) = parse_csv(&text);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][col("loss_db")], 20.0);
}

#[test]
fn scenario_file_alone_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let path = write(
        dir.path(),
        "full.toml",
        &format!(
            r#"
                [source]
                preset = "qd"
                [attack]
                kind = "soft"
                x_sweep = "0:1:0.5"
                [sampling]
                n_samples = 1e5
                n_runs = 5
                master_seed = 21
                [output]
                path = "{}"
            "#,
            out_path.display()
        ),
    );
    let out = run(&["attack-sweep", "--config", &path]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# source: qd"));
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 3);
}

#[test]
fn user_preset_file_extends_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "extra.toml",
        r#"
            [sources.lab-x]
            quantum_efficiency = 0.5
            g2 = 0.2
            g3 = 0.05
            repetition_rate_hz = 8e7
        "#,
    );
    let out = run(&[
        "keyrate",
        "--presets-file",
        &path,
        "--preset",
        "lab-x",
        "--loss",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("# source: lab-x"));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let out = run(&["attack-sweep", "--help"]);
    assert!(out.status.success());
}

#[test]
fn bad_flag_exits_one() {
    let out = run(&["keyrate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}
