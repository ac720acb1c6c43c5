use std::path::Path;
use std::process::Command;
use std::time::Instant;

use zooming_q::agent::AgentKind;
use zooming_q::harness::{
    compare, dims, read_episode_log, read_regret_csv, run_experiment, seed_dir, DimsConfig, ExperimentConfig,
    SeedSummary,
};
use zooming_q::Error;

const ARTIFACTS: [&str; 5] = ["episodes.jsonl", "tree.json", "summary.json", "regret.csv", "regret.svg"];

fn experiment(env: &str, agent: AgentKind, k: usize, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(env, agent, k);
    cfg.out = Some(out.to_path_buf());
    cfg
}

#[test]
fn smoke_run_emits_all_artifacts_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment("line-bandit", AgentKind::Adaptive, 100, dir.path());
    let start = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    let sd = seed_dir(dir.path(), 1);
    for name in ARTIFACTS {
        let meta = std::fs::metadata(sd.join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        assert!(meta.len() > 0, "{name} is empty");
    }
    assert_eq!(report.summaries.len(), 1);
}

#[test]
fn artifacts_reparse_and_agree_with_the_episode_log() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = experiment("band-mdp", AgentKind::Adaptive, 150, dir.path());
    cfg.seeds = vec![4, 9];
    run_experiment(&cfg).unwrap();
    for seed in [4, 9] {
        let sd = seed_dir(dir.path(), seed);
        let logs = read_episode_log(sd.join("episodes.jsonl")).unwrap();
        assert_eq!(logs.len(), 150);
        let rows = read_regret_csv(sd.join("regret.csv")).unwrap();
        assert_eq!(rows.len(), 150);
        let summary: SeedSummary =
            serde_json::from_reader(std::fs::File::open(sd.join("summary.json")).unwrap()).unwrap();
        let total: f64 = logs.iter().map(|l| l.total_reward).sum();
        assert_eq!(summary.total_reward, total);
        let returns: f64 = rows.iter().map(|r| r.ret).sum();
        assert!((returns - total).abs() < 1e-9);
        let regret: f64 = rows.iter().map(|r| r.v_star - r.ret).sum();
        assert!((summary.regret - regret).abs() < 1e-9);
        assert!((rows.last().unwrap().cumulative - summary.regret).abs() < 1e-9);
        let tree: serde_json::Value =
            serde_json::from_reader(std::fs::File::open(sd.join("tree.json")).unwrap()).unwrap();
        assert_eq!(tree["stages"].as_array().unwrap().len(), 3);
        let svg = std::fs::read_to_string(sd.join("regret.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(summary.invariants_ok());
    }
}

#[test]
fn identical_configs_give_byte_identical_logs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let mut cfg = experiment("noisy-band-mdp", AgentKind::Adaptive, 120, dir);
        cfg.seeds = vec![2];
        run_experiment(&cfg).unwrap();
    }
    for name in ["episodes.jsonl", "tree.json", "summary.json", "regret.csv"] {
        let x = std::fs::read(seed_dir(a.path(), 2).join(name)).unwrap();
        let y = std::fs::read(seed_dir(b.path(), 2).join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn missing_env_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.out = Some(dir.path().to_path_buf());
    match run_experiment(&cfg) {
        Err(Error::Usage { field, .. }) => assert_eq!(field, "env"),
        other => panic!("expected a usage error, got {other:?}"),
    }
}

#[test]
fn comparing_an_experiment_with_itself_shows_no_difference() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let mut cfg = experiment("line-bandit", AgentKind::Uniform, 200, &run);
    cfg.seeds = vec![1, 2, 3];
    run_experiment(&cfg).unwrap();
    let c = compare(&run, &run, &dir.path().join("cmp")).unwrap();
    assert_eq!(c.max_regret_difference, 0.0);
    assert_eq!(c.slope_difference, Some(0.0));
    let rows = std::fs::read_to_string(dir.path().join("cmp/comparison.csv")).unwrap();
    assert_eq!(rows.lines().count(), 201);
}

#[test]
fn comparing_different_environments_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_experiment(&experiment("line-bandit", AgentKind::Uniform, 20, &a)).unwrap();
    run_experiment(&experiment("flat-mdp", AgentKind::Uniform, 20, &b)).unwrap();
    assert!(matches!(compare(&a, &b, &dir.path().join("c")), Err(Error::InvalidInput(_))));
    let c = dir.path().join("c2");
    run_experiment(&experiment("line-bandit", AgentKind::Uniform, 30, &c)).unwrap();
    assert!(matches!(compare(&a, &c, &dir.path().join("c")), Err(Error::InvalidInput(_))));
}

#[test]
fn adaptive_balls_concentrate_on_the_band() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("adaptive");
    let u = dir.path().join("uniform");
    run_experiment(&experiment("line-bandit", AgentKind::Adaptive, 3000, &a)).unwrap();
    let mut cfg = experiment("line-bandit", AgentKind::Uniform, 3000, &u);
    cfg.eps = Some(0.0625);
    run_experiment(&cfg).unwrap();
    let c = compare(&a, &u, &dir.path().join("cmp")).unwrap();
    let (inside, total) = c.a.alignment;
    assert!(total > 0 && inside as f64 >= 0.8 * total as f64, "{inside}/{total}");
    // The finest adaptive balls number fewer than a uniform net at that radius.
    let (r_min, fine) = *c.a.radius_histogram.last().unwrap();
    let uniform_at_r = ((1.0 / r_min) + 1.0).powi(2);
    assert!((fine as f64) < uniform_at_r, "{fine} balls at r = {r_min}");
}

#[test]
fn dims_report_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DimsConfig {
        env: Some("line-bandit".into()),
        scales: 6,
        grid: 1.0 / 64.0,
        out: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let report = dims(&cfg).unwrap();
    assert_eq!(report.scales.len(), 7);
    let csv = std::fs::read_to_string(dir.path().join("dims.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    for (z, c) in report.stages[0].zooming.iter().zip(&report.covering) {
        assert!(z.packing.count <= c.packing.upper);
    }
    let too_fine = DimsConfig {
        scales: 9,
        ..cfg
    };
    assert!(matches!(dims(&too_fine), Err(Error::Usage { .. })));
}

fn zoomq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zoomq"))
}

#[test]
fn cli_exit_codes_and_config_override() {
    let dir = tempfile::tempdir().unwrap();
    let status = zoomq().args(["run", "--episodes", "5"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "missing env");
    let status = zoomq().args(["run", "--env", "line-bandit", "--agent", "sideways"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "bad agent");
    let status = zoomq().args(["frobnicate"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "unknown subcommand");

    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"env": "flat-mdp", "agent": "uniform", "episodes": 40, "seeds": [1, 2], "eps": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = zoomq()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--episodes", "25", "--seed", "7", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let used: ExperimentConfig = serde_json::from_reader(std::fs::File::open(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(used.env.as_deref(), Some("flat-mdp"));
    assert_eq!(used.episodes, 25);
    assert_eq!(used.seeds, vec![7]);
    assert_eq!(used.eps, Some(0.5));
    assert_eq!(read_regret_csv(seed_dir(&out, 7).join("regret.csv")).unwrap().len(), 25);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"env": "flat-mdp", "episodez": 3}"#).unwrap();
    let status = zoomq().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "unknown config key");

    let cmp = dir.path().join("cmp");
    let status = zoomq().args(["compare", "--a"]).arg(&out).arg("--b").arg(&out).arg("--out").arg(&cmp).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(cmp.join("comparison.json").exists());

    let status = zoomq()
        .args(["dims", "--env", "flat-mdp", "--scales", "4", "--grid", "0.0625", "--out"])
        .arg(dir.path().join("dims"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
}
