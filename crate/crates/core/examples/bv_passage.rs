//! First passage of the difference of two tempered stable subordinators
//! over a level, stopped at a horizon.

use tsfp::bv::{exp_moment_bound, BVProcessSpec, BvSampler};
use tsfp::{RngStream, TemperedParams};

fn main() -> tsfp::Result<()> {
    let plus = TemperedParams::new(0.66, 0.1305, 6.5022)?;
    let minus = TemperedParams::new(0.66, 0.0615, 3.3088)?;
    let sampler = BvSampler::new(BVProcessSpec::new(plus, minus))?;
    let mut rng = RngStream::new(4, 0);

    let (level, horizon) = (0.02, 14.0 / 365.0);
    let n = 5000;
    let mut crossed = 0;
    let mut calls = 0;
    for _ in 0..n {
        let r = sampler.sample(level, horizon, &mut rng)?;
        crossed += !r.stopped_by_horizon as usize;
        calls += r.inner_calls;
    }
    println!("crossed {level} before {horizon:.4}: {:.4}", crossed as f64 / n as f64);
    println!("mean passes of the positive part: {:.2}", calls as f64 / n as f64);

    let r = sampler.sample(level, horizon, &mut rng)?;
    println!("{r:?}");
    println!("bound on E[tau] for the positive part: {:.4}", exp_moment_bound(&plus, level, 0.0, 1.0)? - 1.0);
    Ok(())
}
