// Greedy nets, packing numbers and diameters on small point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zooming_q::metric::{diameter, greedy_net, greedy_packing, packing_number, MetricKind, MetricSpec, PointCloud};

fn main() -> zooming_q::Result<()> {
    let spec = MetricSpec::unit_box(MetricKind::ProductMax, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs: Vec<(f64, f64)> = (0..20).map(|_| (rng.gen(), rng.gen())).collect();
    let cloud = PointCloud::from_pairs(&pairs);
    println!("20 random points, diameter {:.4}", diameter(&cloud, &spec));
    for r in [0.5, 0.25, 0.125] {
        let net = greedy_net(&cloud, r, &spec)?;
        let exact = packing_number(&cloud, r, &spec, 25)?;
        println!("r = {r}: greedy net of {} points {:?}, exact packing number {}", net.len(), net, exact.count);
    }

    // On a fine grid the exhaustive search is out of reach; the greedy
    // bracket is reported instead.
    let line: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 / 100.0, 0.0)).collect();
    let line = PointCloud::from_pairs(&line);
    let p = packing_number(&line, 0.075, &spec, 25)?;
    println!(
        "101-point segment at r = 0.075: packing in [{}, {}] (input-order packing {}, exact: {})",
        p.count,
        p.upper,
        greedy_packing(&line, 0.075, &spec)?.len(),
        p.exact
    );
    Ok(())
}
