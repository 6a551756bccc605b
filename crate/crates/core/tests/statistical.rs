//! Monte Carlo checks against independent oracles. Seeds are pinned and KS
//! tests use level 0.001.

use tsfp::apps::{
    fpde_bias_study, fpde_biased_baseline, fpde_estimate, price_barrier, BarrierOptionSpec, EstimateWithError, FpdeSpec,
};
use tsfp::boundary::creep_probability;
use tsfp::bv::{exp_moment_bound, BVProcessSpec, BvSampler};
use tsfp::passage::{sfp_sample, tsffp_sample};
use tsfp::validation::ks_two_sample;
use tsfp::variates::{sample_stable, sample_tempered_stable};
use tsfp::{Boundary, RngStream, StableParams, TemperedParams};

const LEVEL: f64 = 0.001;

#[test]
fn constant_barrier_time_is_a_power_of_a_stable_draw() {
    let (alpha, c) = (0.65, 1.7);
    let p = StableParams::new(alpha, 1.3).unwrap();
    let b = Boundary::constant(c).unwrap();
    let mut r1 = RngStream::new(201, 0);
    let mut r2 = RngStream::new(201, 1);
    let n = 10_000;
    let taus: Vec<f64> = (0..n).map(|_| sfp_sample(&p, &b, f64::INFINITY, &mut r1).unwrap().tau).collect();
    let direct: Vec<f64> = (0..n).map(|_| (c / sample_stable(&p, 1.0, &mut r2).unwrap()).powf(alpha)).collect();
    let ks = ks_two_sample(&taus, &direct).unwrap();
    assert!(ks.passes(LEVEL), "{ks:?}");
}

#[test]
fn creep_frequency_in_narrow_bins() {
    let alpha = 0.5;
    let p = StableParams::new(alpha, 1.0).unwrap();
    let b = Boundary::linear(1.0, 0.5).unwrap();
    let mut rng = RngStream::new(202, 0);
    let draws: Vec<(f64, bool)> = (0..100_000)
        .map(|_| {
            let t = sfp_sample(&p, &b, f64::INFINITY, &mut rng).unwrap();
            (t.tau, t.crept)
        })
        .collect();
    for lo in [0.2, 0.6, 1.0] {
        let hi = lo + 0.05;
        let bin: Vec<&(f64, bool)> = draws.iter().filter(|d| d.0 >= lo && d.0 < hi).collect();
        assert!(bin.len() > 200, "bin [{lo}, {hi}) has {} draws", bin.len());
        let seen = bin.iter().filter(|d| d.1).count() as f64;
        let (mean, var) = bin.iter().fold((0.0, 0.0), |(m, v), d| {
            let q = creep_probability(&b, alpha, d.0).unwrap();
            (m + q, v + q * (1.0 - q))
        });
        assert!((seen - mean).abs() <= 3.0 * var.sqrt(), "bin [{lo}, {hi}): {seen} crept, expected {mean:.1}");
    }
}

#[test]
fn vanishing_negative_part_reduces_to_single_passage() {
    let plus = TemperedParams::new(0.6, 1.0, 1.0).unwrap();
    let minus = TemperedParams::new(0.6, 1e-6, 1.0).unwrap();
    let sampler = BvSampler::new(BVProcessSpec::new(plus, minus)).unwrap();
    let b = Boundary::constant(1.0).unwrap();
    let mut r1 = RngStream::new(203, 0);
    let mut r2 = RngStream::new(203, 1);
    let n = 10_000;
    let bv: Vec<f64> = (0..n)
        .map(|_| {
            let r = sampler.sample(1.0, 1e6, &mut r1).unwrap();
            assert!(!r.stopped_by_horizon);
            r.time
        })
        .collect();
    let single: Vec<f64> = (0..n).map(|_| tsffp_sample(&plus, &b, &mut r2).unwrap().tau).collect();
    let ks = ks_two_sample(&bv, &single).unwrap();
    assert!(ks.passes(LEVEL), "{ks:?}");
}

#[test]
fn mean_passage_time_below_moment_bound() {
    let (c, u) = (1.0, 1.0);
    let tp = TemperedParams::new(0.5, 1.0, 1.0).unwrap();
    let b = Boundary::constant(c).unwrap();
    let mut rng = RngStream::new(204, 0);
    let taus: Vec<f64> = (0..100_000).map(|_| tsffp_sample(&tp, &b, &mut rng).unwrap().tau).collect();
    let e = EstimateWithError::from_samples(&taus);
    let bound = exp_moment_bound(&tp, c, 0.0, u).unwrap() - 1.0;
    assert!((bound - (u * c).exp() / (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!(e.estimate <= bound, "{e:?} vs {bound}");
}

#[test]
fn remote_barrier_prices_the_forward() {
    let base = BarrierOptionSpec::usdjpy_default();
    let spec = BarrierOptionSpec { strike: 0.0, barrier: 1e6, discount: 0.0, ..base };
    let n = 10_000;
    let (rows, _) = price_barrier(&spec, n, &RngStream::new(205, 0), None, 1).unwrap();
    let price = &rows[0].price;

    let mut rng = RngStream::new(205, 1);
    let (pl, mi, t) = (spec.process.plus, spec.process.minus, spec.maturity);
    let direct: Vec<f64> = (0..n)
        .map(|_| {
            let z =
                sample_tempered_stable(&pl, t, &mut rng).unwrap() - sample_tempered_stable(&mi, t, &mut rng).unwrap();
            spec.r0 * z.exp()
        })
        .collect();
    let direct = EstimateWithError::from_samples(&direct);
    let se = (price.se.powi(2) + direct.se.powi(2)).sqrt();
    assert!((price.estimate - direct.estimate).abs() <= 3.0 * se, "{price:?} vs {direct:?}");
    let exact = spec.r0 * (t * spec.process.cumulant(1.0)).exp();
    assert!((price.estimate - exact).abs() <= 3.0 * price.se, "{price:?} vs {exact}");
}

#[test]
fn price_curve_falls_to_zero_at_the_barrier() {
    let spec = BarrierOptionSpec::usdjpy_default();
    let grid: Vec<f64> =
        (0..8).map(|i| 98.0 + 0.5 * i as f64).chain([101.9, 101.99, 101.999, 101.9999, 102.0, 103.0]).collect();
    let (rows, _) = price_barrier(&spec, 4000, &RngStream::new(206, 0), Some(&grid), 1).unwrap();
    for r in &rows {
        assert!(r.price.estimate.is_finite() && r.price.estimate >= 0.0);
    }
    assert_eq!(rows[rows.len() - 1].price.estimate, 0.0);
    assert_eq!(rows[rows.len() - 2].price.estimate, 0.0);
    let near = &rows[rows.len() - 3].price;
    let far = rows.iter().map(|r| r.price.estimate).fold(0.0, f64::max);
    assert!(near.estimate < 0.05 * far, "price at 101.9999 is {near:?}, peak {far}");
    // past the peak the curve decreases, up to Monte Carlo noise
    let peak = rows.iter().position(|r| r.price.estimate == far).unwrap();
    for w in rows[peak..].windows(2) {
        let se = (w[0].price.se.powi(2) + w[1].price.se.powi(2)).sqrt();
        assert!(w[1].price.estimate <= w[0].price.estimate + 3.0 * se, "{:?} then {:?}", w[0], w[1]);
    }
}

#[test]
fn random_walk_baseline_converges_as_mesh_shrinks() {
    let tp = TemperedParams::new(0.4, 1.0, 1.0).unwrap();
    let spec = FpdeSpec::new(tp, vec![1.0], vec![1.0], 10_000).unwrap();
    let exact = fpde_estimate(&spec, &RngStream::new(207, 0), 1).unwrap();
    let e = &exact.values[0][0];
    let walk = fpde_biased_baseline(&spec, 0.01, &RngStream::new(207, 1), 1).unwrap();
    let w = &walk.values[0][0];
    let se = (e.se.powi(2) + w.se.powi(2)).sqrt();
    assert!((w.estimate - e.estimate).abs() <= 3.0 * se, "h=0.01: {w:?} vs {e:?}");
    // on shared paths the skeleton lags the exact time by about h/2
    let rows = fpde_bias_study(&spec, &[0.1, 0.01], &RngStream::new(207, 2), 1).unwrap();
    for r in &rows {
        assert!((0.45..=0.55).contains(&(r.delay.estimate / r.h)), "{r:?}");
    }
    assert!(rows[1].bias.estimate.abs() < rows[0].bias.estimate.abs() + 3.0 * rows[0].bias.se, "{rows:?}");
}
