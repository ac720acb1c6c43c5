// Ground-truth tables by backward induction on a grid.

use zooming_q::env::{Environment, OracleTables};

fn main() -> zooming_q::Result<()> {
    for name in ["band-mdp", "noisy-band-mdp"] {
        let env = Environment::by_name(name, None, 0)?;
        let oracle = OracleTables::build(&env, 1.0 / 64.0)?;
        println!("{name}: H = {}, {} states x {} actions", oracle.horizon, oracle.n_states(), oracle.n_actions());
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = oracle.snap_state(&[x]);
            let best = oracle.action_coords(oracle.argmax_action(1, s));
            println!(
                "  x = {x:.2}: V*_1 = {:.4}, greedy a = {:.4}, gap of a = 0 is {:.4}",
                oracle.v_star(1, &[x]),
                best[0],
                oracle.gap(1, &[x], &[0.0])
            );
        }
        let lip = oracle.estimate_lipschitz();
        println!("  Bellman residual {:.2e}, empirical Lipschitz Q {:.3} / V {:.3}", oracle.bellman_residual(&env), lip.q, lip.v);
    }
    let env = Environment::by_name("line-bandit", None, 0)?;
    let oracle = OracleTables::build(&env, 0.25)?;
    let mut csv = Vec::new();
    oracle.write_csv(&mut csv)?;
    print!("line-bandit table at spacing 0.25:\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}
