use exotic_cli::config::ExperimentConfig;
use exotic_cli::report::strip_stamp;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 2000}, "ladder": [10, 100, 1000],
    "embed": {"random_cases": 10, "injectivity_trials": 2}}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_exotic"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn basis_check_writes_reports_and_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), SMALL, &["basis-check"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(d.path(), "c1_matrix.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# generated_at: "));
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "k1,k2,N,re,im,deviation,bound,pass");
    assert_eq!(lines.len(), 3 + 9 * 3);
    let c3: serde_json::Value = serde_json::from_str(&read(d.path(), "c3_sigma.json")).unwrap();
    assert_eq!(c3["pass"], true);
    assert_eq!(c3["config"]["frame"]["M_terms"], 2000);
}

#[test]
fn rejected_and_failing_frames() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"frame": {"a": 0.4, "K_a": 3, "M_terms": 100}, "ladder": [10]}"#,
        &["basis-check"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 200}, "ladder": [10, 100], "test_mode": {"duplicate_q": true}}"#,
        &["basis-check"],
    );
    assert_eq!(o.status.code(), Some(1));
    let c3: serde_json::Value = serde_json::from_str(&read(d.path(), "c3_sigma.json")).unwrap();
    assert_eq!(c3["pass"], false);
}

#[test]
fn config_and_flag_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "{not json", &["heat"]).status.code(), Some(2));
    assert_eq!(
        run(d.path(), r#"{"unknown": 1}"#, &["heat"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(d.path(), SMALL, &["heat", "--ladder", "10,x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(d.path(), SMALL, &["heat", "--ladder", "10,5000"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(d.path(), SMALL, &["heat", "--tol", "-1"]).status.code(),
        Some(2)
    );
}

#[test]
fn embed_bundled_empty_and_malformed() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), SMALL, &["embed"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let lemma = read(d.path(), "lemma1.csv");
    assert_eq!(lemma.lines().count(), 3 + 7 + 10);
    assert!(lemma.lines().skip(3).all(|l| l.ends_with(",true")));

    let empty = d.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 2000}, "ladder": [10],
            "embed": {"random_cases": 0, "injectivity_trials": 0}}"#,
        &["embed", "--data", empty.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(d.path(), "lemma1.csv").lines().count(), 3);

    let bad = d.path().join("bad.json");
    std::fs::write(&bad, r#"[{"label": "x", "coefficients": {"degree": 1"#).unwrap();
    let o = run(d.path(), SMALL, &["embed", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    let wide = d.path().join("wide.json");
    std::fs::write(
        &wide,
        r#"[{"label": "x", "coefficients": {"degree": 1, "K_a": 9, "entries": []}}]"#,
    )
    .unwrap();
    assert_eq!(
        run(
            d.path(),
            SMALL,
            &["embed", "--data", wide.to_str().unwrap()]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn heat_grids() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 2000}, "ladder": [10, 100], "time_grid": [0.0]}"#,
        &["heat"],
    );
    assert_eq!(o.status.code(), Some(0));
    let sol: serde_json::Value = serde_json::from_str(&read(d.path(), "solution.json")).unwrap();
    assert_eq!(sol["snapshots"].as_array().unwrap().len(), 1);
    assert_eq!(read(d.path(), "residuals.csv").lines().count(), 3);

    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 2000}, "ladder": [10, 100], "time_grid": [0.0, 2.0, 30.0]}"#,
        &["heat"],
    );
    assert_eq!(o.status.code(), Some(0));
    let h: serde_json::Value = serde_json::from_str(&read(d.path(), "horizon.json")).unwrap();
    assert_eq!(h["in_theory"], false);
    assert_eq!(h["verdicts"][2]["within_horizon"], false);
    let sol: serde_json::Value = serde_json::from_str(&read(d.path(), "solution.json")).unwrap();
    let last = &sol["snapshots"][2]["embedded"]["s_transform"][0]["value"];
    assert_eq!(last[0].as_f64(), Some(60.0));

    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 3, "M_terms": 2000}, "ladder": [10], "time_grid": [0.0, 1e-4]}"#,
        &["heat"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn heat_materializes_small_embeddings() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        r#"{"frame": {"a": 1.0, "K_a": 2, "M_terms": 50}, "ladder": [10, 50], "time_grid": [0.0, 1.0]}"#,
        &["heat"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let sol: serde_json::Value = serde_json::from_str(&read(d.path(), "solution.json")).unwrap();
    let emb = &sol["snapshots"][1]["embedded"]["materialized"];
    assert_eq!(emb["dim"], 50);
    assert_eq!(emb["kernels"][0]["entries"][0][1].as_f64(), Some(2.0));
}

#[test]
fn cesaro_scan_reports_intertwining() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), SMALL, &["cesaro-scan"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(d.path(), "cesaro_scan.csv");
    assert_eq!(
        csv.lines().nth(2),
        Some("xi,N,partial_re,partial_im,closed_form_re,closed_form_im,deviation")
    );
    assert_eq!(csv.lines().count(), 3 + 3 * 3);
}

#[test]
fn same_seed_same_bytes() {
    let d = tempfile::tempdir().unwrap();
    let a = {
        run(d.path(), SMALL, &["embed", "--seed", "5"]);
        strip_stamp(&read(d.path(), "injectivity.json"))
            + &strip_stamp(&read(d.path(), "lemma1.csv"))
    };
    let b = {
        run(d.path(), SMALL, &["embed", "--seed", "5"]);
        strip_stamp(&read(d.path(), "injectivity.json"))
            + &strip_stamp(&read(d.path(), "lemma1.csv"))
    };
    assert_eq!(a, b);
    run(d.path(), SMALL, &["embed", "--seed", "6"]);
    assert_ne!(
        a,
        strip_stamp(&read(d.path(), "injectivity.json"))
            + &strip_stamp(&read(d.path(), "lemma1.csv"))
    );
}

#[test]
fn resolved_config_round_trips() {
    let c: ExperimentConfig = serde_json::from_str(SMALL).unwrap();
    let text = c.to_json();
    assert_eq!(
        serde_json::from_str::<ExperimentConfig>(&text)
            .unwrap()
            .to_json(),
        text
    );
}
