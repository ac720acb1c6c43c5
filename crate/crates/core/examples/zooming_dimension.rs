// Zooming versus covering profiles on the contextual bandit.
//
// Near-optimal pairs lie in a band around the diagonal, so their packing
// numbers grow like `1/r` while the whole square grows like `1/r^2`.

use zooming_q::diagnostics::dyadic_scales;
use zooming_q::env::{Environment, OracleTables};
use zooming_q::harness::dimension_report;

fn main() -> zooming_q::Result<()> {
    let env = Environment::by_name("line-bandit", None, 0)?;
    let oracle = OracleTables::build(&env, 1.0 / 128.0)?;
    let scales = dyadic_scales(env.d_max(), 0, 7);
    let report = dimension_report(&env, &oracle, &scales, env.lipschitz_hint)?;
    let stage = &report.stages[0];
    println!("c1 = {}, max gap = {}", report.c1, stage.max_gap);
    println!("{:>10} {:>10} {:>10}", "r", "zooming", "covering");
    for (z, c) in stage.zooming.iter().zip(&report.covering) {
        println!("{:>10.5} {:>10} {:>10}", z.r, z.packing.count, c.packing.count);
    }
    let show = |f: &Option<zooming_q::diagnostics::SlopeFit>| f.map_or("n/a".into(), |f| format!("{:.3}", f.slope));
    println!("informative scales: {:?}", stage.informative.iter().map(|&i| scales[i]).collect::<Vec<_>>());
    println!("zooming dimension estimate: {}", show(&stage.zooming_fit_informative));
    println!("covering dimension estimate: {}", show(&stage.covering_fit_informative));
    Ok(())
}
