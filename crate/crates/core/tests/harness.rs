use std::fs;
use std::path::Path;
use std::process::Command;

use tsinfo::analysis::CheckLevel;
use tsinfo::generators::symmetric_bandit;
use tsinfo::harness::{
    emit_report, run_experiment, simulate, Aggregator, ConfigEcho, EpisodeSettings,
    ExperimentConfig, CSV_COLUMNS,
};
use tsinfo::PolicyKind;

fn symmetric_config(horizon: usize, reps: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        symmetric_bandit().spec().clone(),
        PolicyKind::ThompsonExact,
        horizon,
        reps,
        seed,
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsinfo"))
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn experiment_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = symmetric_config(15, 20, 42);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.trajectories, b.trajectories);
    let pa = emit_report(&a.summary, &a.trajectories, &dir.path().join("a")).unwrap();
    let pb = emit_report(&b.summary, &b.trajectories, &dir.path().join("b")).unwrap();
    assert_eq!(read(&pa.trajectories_csv), read(&pb.trajectories_csv));
    assert_eq!(read(&pa.summary_json), read(&pb.summary_json));

    let c = run_experiment(&symmetric_config(15, 20, 43)).unwrap();
    assert_ne!(
        a.summary.mean_cumulative_regret,
        c.summary.mean_cumulative_regret
    );
}

#[test]
fn csv_round_trip_reproduces_mean_regret() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&symmetric_config(25, 30, 7)).unwrap();
    let paths = emit_report(&out.summary, &out.trajectories, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(&paths.trajectories_csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let mut per_rep = vec![0.0; 30];
    let mut last_t = vec![0usize; 30];
    for rec in reader.records() {
        let rec = rec.unwrap();
        let rep: usize = rec[0].parse().unwrap();
        let t: usize = rec[1].parse().unwrap();
        assert_eq!(t, last_t[rep] + 1, "rows ordered by t");
        last_t[rep] = t;
        per_rep[rep] += rec[5].parse::<f64>().unwrap();
        assert_eq!(&rec[13], "true");
    }
    let mean = per_rep.iter().sum::<f64>() / 30.0;
    assert!((mean - out.summary.mean_cumulative_regret[24]).abs() < 1e-9);

    let json: serde_json::Value = serde_json::from_str(&read(&paths.summary_json)).unwrap();
    assert_eq!(json["bound_violation_count"], 0);
    assert_eq!(json["seeds"].as_array().unwrap().len(), 30);
    assert_eq!(json["config"]["master_seed"], 7);
}

#[test]
fn empty_report_has_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let family = symmetric_bandit();
    let echo = ConfigEcho {
        family: family.spec().clone(),
        policy: PolicyKind::ThompsonExact,
        horizon: 3,
        replications: 0,
        master_seed: 0,
        checks_enabled: true,
        noise_variance: 0.25,
    };
    let summary = Aggregator::new(3).finish(&family, echo).unwrap();
    assert_eq!(summary.replications, 0);
    let paths = emit_report(&summary, &[], dir.path()).unwrap();
    assert_eq!(read(&paths.trajectories_csv).lines().count(), 1);
}

#[test]
fn two_step_trajectory_gives_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&symmetric_config(2, 1, 3)).unwrap();
    let paths = emit_report(&out.summary, &out.trajectories, dir.path()).unwrap();
    let text = read(&paths.trajectories_csv);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0,1,") && rows[1].starts_with("0,2,"));
}

#[test]
fn standard_error_shrinks_with_replications() {
    let family = symmetric_bandit();
    let settings = EpisodeSettings::new(PolicyKind::ThompsonExact, 20).with_checks(CheckLevel::Off);
    let (small, _) = simulate(&family, &settings, 1_000, 11, false).unwrap();
    let (large, _) = simulate(&family, &settings, 4_000, 12, false).unwrap();
    let ratio = small.standard_error()[19] / large.standard_error()[19];
    assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn symmetric_bandit_regret_below_bound() {
    let family = symmetric_bandit();
    let settings = EpisodeSettings::new(PolicyKind::ThompsonExact, 50).with_checks(CheckLevel::Off);
    let (agg, _) = simulate(&family, &settings, 10_000, 5, false).unwrap();
    let (mean, se) = (agg.mean(), agg.standard_error());
    for t in 1..=50 {
        let bound = (2f64.ln() * t as f64).sqrt();
        assert!(mean[t - 1] <= bound - 3.0 * se[t - 1], "t = {t}");
    }
}

#[test]
fn thompson_beats_uniform_on_paired_seeds() {
    let family = symmetric_bandit();
    let ts = EpisodeSettings::new(PolicyKind::ThompsonExact, 50).with_checks(CheckLevel::Off);
    let uni = EpisodeSettings::new(PolicyKind::UniformBaseline, 50).with_checks(CheckLevel::Off);
    let (_, a) = simulate(&family, &ts, 10_000, 99, true).unwrap();
    let (_, b) = simulate(&family, &uni, 10_000, 99, true).unwrap();
    let diffs: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| y.cumulative_regret() - x.cumulative_regret())
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean > 3.0 * (var / n).sqrt(), "mean difference {mean}");
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let status = bin().args(["verify", "--seed", "7"]).output().unwrap();
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stdout)
    );
    assert!(String::from_utf8_lossy(&status.stdout).contains("all certificates hold"));

    let status = bin()
        .args(["verify", "--structure", "semibandit", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        bin()
            .arg("run")
            .arg("--config")
            .arg(&missing)
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bin().arg("bogus").output().unwrap().status.code(), Some(2));
    assert_eq!(
        bin()
            .args(["demo", "--frobnicate"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"family": {"structure": "bandit", "arm_means": [[0.5]], "prior": [0.7]},
            "policy": "thompson_exact", "horizon": 3, "replications": 1, "master_seed": 0, "output_path": "x"}"#,
    )
    .unwrap();
    assert_eq!(
        bin()
            .arg("run")
            .arg("--config")
            .arg(&bad)
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );

    let good = dir.path().join("good.json");
    let out_dir = dir.path().join("good-out");
    let cfg = serde_json::json!({
        "family": {"structure": "full_information", "z_dists": [[0.2, 0.8], [0.7, 0.3]],
                   "rewards": [[1.0, 0.0], [0.0, 1.0]], "prior": [0.4, 0.6]},
        "policy": "thompson_exact", "horizon": 12, "replications": 5, "master_seed": 3,
        "output_path": out_dir,
    });
    fs::write(&good, cfg.to_string()).unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn demo_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["one", "two"] {
        let status = bin()
            .args(["demo", "--seed", "4", "--out"])
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(0));
    }
    for file in ["trajectories.csv", "summary.json"] {
        assert_eq!(
            read(&dir.path().join("one").join(file)),
            read(&dir.path().join("two").join(file))
        );
    }
}
