// Run the adaptive agent and a fixed uniform net on the same seeds, write
// both artifact sets and compare them.

use zooming_q::agent::AgentKind;
use zooming_q::harness::{compare, run_experiment, ExperimentConfig};

fn main() -> zooming_q::Result<()> {
    let root = std::env::temp_dir().join(format!("zoomq-uniform-vs-adaptive-{}", std::process::id()));
    let episodes = 2000;
    let seeds = vec![1, 2, 3];

    let mut adaptive = ExperimentConfig::new("band-mdp", AgentKind::Adaptive, episodes);
    adaptive.seeds = seeds.clone();
    adaptive.out = Some(root.join("adaptive"));
    run_experiment(&adaptive)?;

    for eps in [0.25, 0.125] {
        let mut uniform = ExperimentConfig::new("band-mdp", AgentKind::Uniform, episodes);
        uniform.seeds = seeds.clone();
        uniform.eps = Some(eps);
        let dir = root.join(format!("uniform-{eps}"));
        uniform.out = Some(dir.clone());
        run_experiment(&uniform)?;

        let c = compare(&root.join("adaptive"), &dir, &root.join(format!("compare-{eps}")))?;
        let slope = |f: Option<zooming_q::diagnostics::SlopeFit>| f.map_or(f64::NAN, |f| f.slope);
        println!(
            "eps = {eps}: adaptive regret {:.1} (slope {:.3}), uniform regret {:.1} (slope {:.3})",
            c.a.median_regret,
            slope(c.a.slope),
            c.b.median_regret,
            slope(c.b.slope)
        );
        println!("  adaptive active balls by radius: {:?}", c.a.radius_histogram);
    }
    println!("artifacts written under {}", root.display());
    std::fs::remove_dir_all(&root)?;
    Ok(())
}
