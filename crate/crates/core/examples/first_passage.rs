//! Crossing time, undershoot and overshoot of a stable subordinator over a
//! constant and a linear barrier.

use tsfp::boundary::creep_probability;
use tsfp::passage::sfp_sample;
use tsfp::{Boundary, RngStream, StableParams};

fn main() -> tsfp::Result<()> {
    let p = StableParams::new(0.5, 1.0)?;
    let mut rng = RngStream::new(1, 0);

    let flat = Boundary::constant(1.0)?;
    println!("tau,pre,post,crept   (b = 1)");
    for _ in 0..5 {
        let t = sfp_sample(&p, &flat, f64::INFINITY, &mut rng)?;
        println!("{:.6},{:.6},{:.6},{}", t.tau, t.pre, t.post_value, t.crept);
    }

    // b(t) = 1 - t/2 can be crossed continuously
    let line = Boundary::linear(1.0, 0.5)?;
    let n = 5000;
    let (mut crept, mut expected) = (0usize, 0.0);
    for _ in 0..n {
        let t = sfp_sample(&p, &line, f64::INFINITY, &mut rng)?;
        crept += t.crept as usize;
        expected += creep_probability(&line, 0.5, t.tau)?;
    }
    println!("linear barrier: crept {crept} of {n}, expected {expected:.1}");

    // conditioning on an early crossing
    let t = sfp_sample(&p, &flat, 0.1, &mut rng)?;
    println!("conditional on tau <= 0.1: tau = {:.6}", t.tau);
    Ok(())
}
