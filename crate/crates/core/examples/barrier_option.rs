//! Up-and-out call under a two-sided tempered stable log-rate, priced over
//! a grid of initial rates with shared paths.

use tsfp::apps::{price_barrier, price_rows_csv, BarrierOptionSpec};
use tsfp::parallel::default_threads;
use tsfp::RngStream;

fn main() -> tsfp::Result<()> {
    let spec = BarrierOptionSpec::usdjpy_default();
    let grid: Vec<f64> = (0..9).map(|i| 98.0 + 0.5 * i as f64).collect();
    let (rows, work) = price_barrier(&spec, 4000, &RngStream::new(5, 0), Some(&grid), default_threads())?;
    print!("{}", price_rows_csv(&rows));
    eprintln!("work: {}", work.total());
    Ok(())
}
