//! Action of the geometric curve for the 1-D mixture ½N(0,1) + ½N(m,1).
//!
//! The action grows quickly with m while the W1 speed stays moderate for
//! small m; the table shows both over s ∈ [0.9, 0.99].

use annealz::curves::{action_1d, ou_action_and_bound, w1_metric_derivative_1d, MetricOptions, MogCurve};
use annealz::rng::RunSeed;
use annealz::targets::{make_gaussian, make_paper_gmm};

fn main() -> annealz::Result<()> {
    let (s_lo, s_hi) = (0.9, 0.99);
    let opts = MetricOptions::for_range(s_lo, s_hi);
    println!("{:>3} {:>14} {:>14} {:>10}", "m", "action", "theta action", "W1 speed");
    for m in [2.0, 4.0, 6.0, 8.0] {
        let curve = MogCurve { m };
        let rep = action_1d(&curve, s_lo, s_hi, 46, &opts)?;
        let w1 = w1_metric_derivative_1d(&curve, 0.95, &opts)?.value;
        println!("{m:>3} {:>14.4} {:>14.4} {w1:>10.4}", rep.action, rep.theta_action(&curve, 1.0));
    }

    // The OU path from the target to N(0, I) has action bounded by dβ + m².
    let mut rng = RunSeed::new(0, 0).auxiliary(0);
    for t in [make_gaussian(2, &[], 1.0)?, make_paper_gmm()] {
        let rep = ou_action_and_bound(&t, 12.0, 241, &mut rng)?;
        println!("OU action {:<12} {:.4} ≤ {:.4}", t.name, rep.action, rep.bound);
    }
    Ok(())
}
