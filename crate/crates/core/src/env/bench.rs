use std::sync::Arc;

use super::{Environment, InitialStates, Kernel};
use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricSpec};

/// Names accepted by [`Environment::by_name`].
pub const SHIPPED: [&str; 5] = [
    "line-bandit",
    "band-mdp",
    "noisy-band-mdp",
    "flat-mdp",
    "needle-mdp",
];

/// Optimal action of the band instance: a tent between 0.25 and 0.75.
///
/// Maps states on any grid with a multiple of four intervals onto grid
/// actions, so the grid optimum always reaches reward 1.
pub fn band_optimal_action(x: f64) -> f64 {
    0.25 + (x - 0.5).abs()
}

fn drift(x: f64, a: f64) -> f64 {
    (x + 0.5 * (a - 0.5)).clamp(0.0, 1.0)
}

fn unit_metric() -> MetricSpec {
    MetricSpec::unit_box(MetricKind::ProductMax, 1, 1)
}

pub(super) fn by_name(name: &str, horizon: Option<usize>, seed: u64) -> Result<Environment> {
    let initial = InitialStates::Uniform { seed };
    match name {
        "line-bandit" => {
            if horizon.is_some_and(|h| h != 1) {
                return Err(Error::usage("horizon", "line-bandit is a contextual bandit (H = 1)"));
            }
            // |Q(p) - Q(q)| <= |da| + |dx| <= 2 D(p, q) under the max metric.
            Environment::new(
                "line-bandit",
                1,
                unit_metric(),
                1,
                1,
                2.0,
                initial,
                Arc::new(|_, x, a| 1.0 - (a[0] - x[0]).abs()),
                Kernel::Deterministic(Arc::new(|_, x, _| x.to_vec())),
            )
        }
        "band-mdp" => Environment::new(
            "band-mdp",
            horizon.unwrap_or(3),
            unit_metric(),
            1,
            1,
            2.0,
            initial,
            Arc::new(|_, x, a| 1.0 - (a[0] - band_optimal_action(x[0])).abs()),
            Kernel::Deterministic(Arc::new(|_, x, a| vec![drift(x[0], a[0])])),
        ),
        "noisy-band-mdp" => {
            let width = 0.2;
            Environment::new(
                "noisy-band-mdp",
                horizon.unwrap_or(3),
                unit_metric(),
                1,
                1,
                2.0,
                initial,
                Arc::new(|_, x, a| 1.0 - (a[0] - band_optimal_action(x[0])).abs()),
                Kernel::UniformNoise {
                    // Squeezed into [w/2, 1 - w/2] so the clamp never binds.
                    mean: Arc::new(move |_, x, a| {
                        vec![width / 2.0 + (1.0 - width) * drift(x[0], a[0])]
                    }),
                    width,
                },
            )
        }
        "flat-mdp" => Environment::new(
            "flat-mdp",
            horizon.unwrap_or(2),
            unit_metric(),
            1,
            1,
            0.0,
            initial,
            Arc::new(|_, _, _| 0.5),
            Kernel::Deterministic(Arc::new(|_, x, _| vec![1.0 - x[0]])),
        ),
        "needle-mdp" => Environment::new(
            "needle-mdp",
            horizon.unwrap_or(2),
            unit_metric(),
            1,
            1,
            4.0,
            initial,
            Arc::new(|_, _, a| (1.0 - 4.0 * (a[0] - 0.75).abs()).max(0.0)),
            Kernel::Deterministic(Arc::new(|_, x, a| vec![drift(x[0], a[0])])),
        ),
        other => Err(Error::usage(
            "env",
            format!("unknown environment `{other}` (expected one of {})", SHIPPED.join(", ")),
        )),
    }
}
