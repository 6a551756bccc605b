//! Density, CDF and Mellin moments of a stable law from the Zolotarev
//! representation.

use tsfp::zolotarev::{levy_tail, mellin_moment, stable_cdf, stable_density};
use tsfp::{QuadratureSpec, StableParams};

fn main() -> tsfp::Result<()> {
    let p = StableParams::new(0.5, 1.0)?;
    let q = QuadratureSpec::default();
    println!("x,density,cdf,levy_tail");
    for x in [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 20.0] {
        println!(
            "{x},{:.10},{:.10},{:.6}",
            stable_density(x, 1.0, &p, &q)?,
            stable_cdf(x, 1.0, &p, &q)?,
            levy_tail(x, &p)?
        );
    }
    // negative moments exist of every order, positive ones only below alpha
    for eta in [-2.0, -1.0, -0.5, 0.25] {
        println!("E[S_1^{eta}] = {:.6}", mellin_moment(eta, 1.0, &p)?);
    }
    Ok(())
}
