// Learning-rate weights, surplus sequences and the clipped-surplus ledger.

use zooming_q::agent::{AgentConfig, AgentKind};
use zooming_q::diagnostics::{alpha_weight_sum, beta_bound, beta_sequence, clipped_surplus_ledger};
use zooming_q::harness::{ExperimentConfig, Runner};

fn main() -> zooming_q::Result<()> {
    for h in [1, 2, 5] {
        let sums: Vec<String> = [1, 7, 100]
            .iter()
            .map(|&i| format!("{:.5}", alpha_weight_sum(i, i + 10_000, h)))
            .collect();
        println!("H = {h}: sum_t alpha_t^i for i = 1, 7, 100: {} (1 + 1/H = {:.5})", sums.join(", "), 1.0 + 1.0 / h as f64);
    }

    let runner = Runner::new(ExperimentConfig::new("line-bandit", AgentKind::Adaptive, 1000))?;
    let oracle = runner.oracle()?;
    let run = runner.run_seed(11)?;
    let cfg: &AgentConfig = &run.agent.config;
    let betas = beta_sequence(1000, cfg);
    for t in [1u64, 10, 100, 1000] {
        println!("beta_{t} = {:.3} <= {:.3}", betas[t as usize], beta_bound(t, cfg));
    }

    let ledger = clipped_surplus_ledger(&run.logs, &oracle, cfg);
    println!("surplus: unclipped {:.1}, clipped {:.1}, scale-free clipped {:.1}", ledger.unclipped_total, ledger.total, ledger.unit_total);
    let large: Vec<_> = ledger.balls.iter().filter(|b| b.large_gap).collect();
    println!(
        "{} of {} balls have large gaps; {} of those kept scale-free surplus",
        large.len(),
        ledger.balls.len(),
        ledger.unclipped_large_gap_balls().len()
    );
    Ok(())
}
