// Adaptive Q-learning on the one-step contextual bandit `r(x, a) = 1 - |a - x|`.
//
// Prints the regret, the regret slope and where the finest balls ended up.

use zooming_q::agent::AgentKind;
use zooming_q::diagnostics::fine_ball_alignment;
use zooming_q::harness::{ExperimentConfig, Runner};

fn main() -> zooming_q::Result<()> {
    let runner = Runner::new(ExperimentConfig::new("line-bandit", AgentKind::Adaptive, 2000))?;
    let oracle = runner.oracle()?;
    let run = runner.run_seed(7)?;
    let report = zooming_q::diagnostics::regret(&run.logs, &oracle)?;
    println!("episodes: {}", report.episodes);
    println!("regret: {:.2} ({:.3} per episode)", report.total, report.total / report.episodes as f64);
    if let Some(fit) = report.slope {
        println!("log-log regret slope: {:.3} +- {:.3}", fit.slope, fit.stderr);
    }

    let tree = run.agent.tree(1);
    println!("active balls per depth:");
    for (depth, (all, active)) in tree.depth_histogram().into_iter().enumerate() {
        if all > 0 {
            println!("  depth {depth:2} (r = {:.5}): {active} active of {all}", tree.radius_at(depth as u32));
        }
    }
    let (inside, total) = fine_ball_alignment(run.agent.trees(), &oracle, run.agent.config.lipschitz)?;
    println!("finest balls inside the near-optimal set: {inside}/{total}");

    // The finest balls should hug the diagonal a = x.
    let mut fine: Vec<_> = tree.active().collect();
    fine.sort_by_key(|b| std::cmp::Reverse(b.depth));
    for b in fine.iter().take(5) {
        println!(
            "  x = {:.4}, a = {:.4}, r = {:.5}, Q = {:.3}",
            b.center.state[0], b.center.action[0], b.radius, b.q_value
        );
    }
    Ok(())
}
