// Three-stage band MDP: per-stage partitions and the structural audits.

use zooming_q::agent::AgentKind;
use zooming_q::diagnostics::{check_counts, check_partition, selection_bound};
use zooming_q::harness::{ExperimentConfig, Runner};

fn main() -> zooming_q::Result<()> {
    let runner = Runner::new(ExperimentConfig::new("band-mdp", AgentKind::Adaptive, 2000))?;
    let run = runner.run_seed(3)?;
    let cfg = &run.agent.config;
    println!("H = {}, K = {}, iota = {:.3}", cfg.horizon, cfg.episodes, cfg.iota());

    for tree in run.agent.trees() {
        let hist: Vec<String> = tree
            .depth_histogram()
            .iter()
            .enumerate()
            .filter(|(_, (all, _))| *all > 0)
            .map(|(d, (all, active))| format!("d{d}:{active}/{all}"))
            .collect();
        println!("stage {}: {}", tree.stage, hist.join(" "));
    }

    for report in check_partition(run.agent.trees()) {
        println!(
            "stage {} audit: {} grid points, {} uncovered, {} separation faults",
            report.stage,
            report.grid_points,
            report.uncovered,
            report.separation.len()
        );
    }
    let counts = check_counts(run.agent.trees());
    println!(
        "count audit: {} balls, {} violations, largest selections/bound ratio {:.3}",
        counts.balls_checked,
        counts.violations.len(),
        counts.max_ratio
    );
    println!("selection bounds by depth: {:?}", (0..5).map(selection_bound).collect::<Vec<_>>());

    let last = run.logs.last().expect("at least one episode");
    for step in &last.steps {
        println!(
            "episode {} stage {}: x = {:.3}, a = {:.3}, ball r = {:.4}, reward = {:.3}",
            step.episode, step.stage, step.state[0], step.action[0], step.radius, step.reward
        );
    }
    Ok(())
}
