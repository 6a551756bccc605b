//! The two tempered passage samplers side by side: the direct one, whose
//! cost grows exponentially in `q b(0)`, and the capped one, linear in `q`.

use std::time::Instant;

use tsfp::apps::EstimateWithError;
use tsfp::passage::{tsffp_cap, tsffp_sample, tsfp_sample};
use tsfp::validation::ks_two_sample;
use tsfp::{Boundary, RngStream, TemperedParams};

fn main() -> tsfp::Result<()> {
    let tp = TemperedParams::new(0.55, 1.0, 2.0)?;
    let b = Boundary::constant(1.0)?;
    let n = 2000;
    println!("cap used by the fast sampler: {:.4}", tsffp_cap(&tp));

    let mut r1 = RngStream::new(2, 0);
    let start = Instant::now();
    let a: Vec<f64> = (0..n).map(|_| tsfp_sample(&tp, &b, &mut r1).map(|t| t.tau)).collect::<Result<_, _>>()?;
    let ta = start.elapsed();

    let mut r2 = RngStream::new(2, 1);
    let start = Instant::now();
    let c: Vec<f64> = (0..n).map(|_| tsffp_sample(&tp, &b, &mut r2).map(|t| t.tau)).collect::<Result<_, _>>()?;
    let tc = start.elapsed();

    let (ea, ec) = (EstimateWithError::from_samples(&a), EstimateWithError::from_samples(&c));
    println!("tsfp : mean tau {:.5} ± {:.5}, {ta:?}, work {}", ea.estimate, ea.se, r1.work.total());
    println!("tsffp: mean tau {:.5} ± {:.5}, {tc:?}, work {}", ec.estimate, ec.se, r2.work.total());
    let ks = ks_two_sample(&a, &c)?;
    println!("KS: D = {:.4}, p = {:.4}", ks.statistic, ks.p_value);
    Ok(())
}
