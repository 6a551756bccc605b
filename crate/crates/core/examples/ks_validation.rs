//! The rejection samplers of the undershoot marginals against brute-force
//! inversion of their quadrature CDFs.

use std::time::Instant;

use tsfp::undershoot::UndershootContext;
use tsfp::validation::{ks_two_sample, stable_quantile, DirectPsiSampler, PsiComponent};
use tsfp::RngStream;

fn main() -> tsfp::Result<()> {
    let n = 5000;
    println!("alpha,s,component,D,p,rejection_s,direct_s");
    for alpha in [0.1, 0.5, 0.9] {
        let s = stable_quantile(0.5, alpha)?;
        let ctx = UndershootContext::new(s, alpha)?;
        for which in [PsiComponent::First, PsiComponent::Second] {
            let mut r1 = RngStream::new(8, 0);
            let mut r2 = RngStream::new(8, 1);
            let start = Instant::now();
            let ys: Vec<f64> = (0..n)
                .map(|_| match which {
                    PsiComponent::First => ctx.sample_psi1_y(&mut r1),
                    PsiComponent::Second => ctx.sample_psi2_y(&mut r1).map(|p| p.0),
                })
                .collect::<Result<_, _>>()?;
            let t_rej = start.elapsed().as_secs_f64();
            let start = Instant::now();
            let direct = DirectPsiSampler::new(which, &ctx)?;
            let xs: Vec<f64> = (0..n).map(|_| direct.sample(&mut r2)).collect::<Result<_, _>>()?;
            let t_dir = start.elapsed().as_secs_f64();
            let ks = ks_two_sample(&xs, &ys)?;
            println!("{alpha},{s:.5},{which:?},{:.4},{:.4},{t_rej:.3},{t_dir:.3}", ks.statistic, ks.p_value);
        }
    }
    Ok(())
}
