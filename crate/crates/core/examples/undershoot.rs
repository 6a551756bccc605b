//! The undershoot law conditional on a crossing by a jump, and the
//! mixture proposal behind it.

use tsfp::undershoot::{sample_undershoot, sample_undershoot_fraction, UndershootContext};
use tsfp::{RngStream, StableParams};

fn main() -> tsfp::Result<()> {
    let mut rng = RngStream::new(3, 0);
    for alpha in [0.2, 0.5, 0.9] {
        let ctx = UndershootContext::new(1.0, alpha)?;
        let n = 2000;
        let (mut sum, mut outer) = (0.0, 0);
        for _ in 0..n {
            let d = sample_undershoot_fraction(&ctx, &mut rng)?;
            sum += d.fraction;
            outer += d.stats.outer_iterations;
        }
        println!(
            "alpha={alpha}: p={:.4} z={:.4} z*={:.4} mean fraction {:.4}, proposals per draw {:.3}",
            ctx.p(),
            ctx.z(),
            ctx.z_star(),
            sum / n as f64,
            outer as f64 / n as f64
        );
    }

    let p = StableParams::new(0.7, 2.0)?;
    let u = sample_undershoot(0.3, 1.5, &p, &mut rng)?;
    println!("undershoot at t=0.3 below level 1.5: {u:.6}");
    Ok(())
}
