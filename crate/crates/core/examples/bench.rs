//! Work counters of the stable passage sampler as alpha approaches 0 and 1,
//! and of the fast tempered sampler as q grows.

use tsfp::validation::{bench_csv, bench_sweep, BenchTarget};
use tsfp::RngStream;

fn main() -> tsfp::Result<()> {
    let rng = RngStream::new(9, 0);
    let sfp = BenchTarget::Sfp { theta: 1.0, level: 1.0 };
    let alphas = [0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999];
    print!("{}", bench_csv(&bench_sweep(sfp, &alphas, 200, &rng.substream(0), 1)?));

    let tsffp = BenchTarget::Tsffp { alpha: 0.55, theta: 1.0, level: 1.0 };
    let qs: Vec<f64> = (0..=4).map(|i| f64::exp(i as f64)).collect();
    print!("{}", bench_csv(&bench_sweep(tsffp, &qs, 100, &rng.substream(1), 1)?));
    Ok(())
}
