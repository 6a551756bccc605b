//! Exact draws of stable and tempered stable marginals, checked against
//! their Laplace transforms.

use tsfp::apps::EstimateWithError;
use tsfp::variates::{sample_stable, sample_tempered_stable};
use tsfp::{RngStream, StableParams, TemperedParams};

fn main() -> tsfp::Result<()> {
    let n = 20_000;
    let mut rng = RngStream::new(7, 0);

    let sp = StableParams::new(0.6, 1.0)?;
    let xs: Vec<f64> = (0..n).map(|_| sample_stable(&sp, 2.0, &mut rng)).collect::<Result<_, _>>()?;
    let tp = TemperedParams::new(0.6, 1.0, 1.5)?;
    let ys: Vec<f64> = (0..n).map(|_| sample_tempered_stable(&tp, 2.0, &mut rng)).collect::<Result<_, _>>()?;

    println!("u,stable_mc,stable_exact,tempered_mc,tempered_exact");
    for u in [0.25, 0.5, 1.0, 2.0] {
        let lt = |v: &[f64]| EstimateWithError::from_samples(&v.iter().map(|x| (-u * x).exp()).collect::<Vec<_>>());
        let a = lt(&xs);
        let b = lt(&ys);
        let exact_s = (-2.0 * u.powf(0.6)).exp();
        let exact_t = (-2.0 * tp.laplace_exponent(u)).exp();
        println!("{u},{:.5}±{:.5},{exact_s:.5},{:.5}±{:.5},{exact_t:.5}", a.estimate, a.se, b.estimate, b.se);
    }
    println!("work: {:?}", rng.work);
    Ok(())
}
