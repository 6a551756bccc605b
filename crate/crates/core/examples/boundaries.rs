//! Building barriers: closed forms, knots read from CSV, and the shift and
//! cap operations used when a path is continued after a passage.

use tsfp::passage::sfp_sample;
use tsfp::{Boundary, Precision, RngStream, StableParams};

const KNOTS: &str = "t,b
0,2.0
0.5,1.2
1.5,0.4
3,0.0
";

fn main() -> tsfp::Result<()> {
    let alpha = 0.6;
    let b = Boundary::from_csv_str(KNOTS)?;
    println!(
        "b(0)={}, b(1)={:.3}, b'(1)={:.3}, hits zero at {}",
        b.initial(),
        b.value(1.0),
        b.derivative(1.0),
        b.zero_time()
    );

    // B(t) = t^{-1/alpha} b(t) is decreasing, so it has an inverse
    let v = b.scaled(alpha, 0.8);
    let t = b.inverse_scaled(alpha, v, Precision::default())?;
    println!("B(0.8) = {v:.6}, inverted back to {t:.15}");

    // seen from (t, S_t) = (0.5, 0.3), the rest of the path faces b(t + 0.5) - 0.3
    let rest = b.shift(0.5, 0.3)?;
    println!("shifted: starts at {:.3}", rest.initial());
    let capped = b.cap(1.0)?;
    println!("capped at 1: b(0) = {}, b(1) = {:.3}", capped.initial(), capped.value(1.0));

    let p = StableParams::new(alpha, 1.0)?;
    let mut rng = RngStream::new(10, 0);
    for bar in [&b, &rest, &capped] {
        let tri = sfp_sample(&p, bar, f64::INFINITY, &mut rng)?;
        println!("tau={:.5} pre={:.5} post={:.5} crept={}", tri.tau, tri.pre, tri.post_value, tri.crept);
    }
    Ok(())
}
