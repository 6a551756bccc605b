//! Monte Carlo estimators built on the passage samplers: an up-and-out
//! barrier call under an exponential bounded-variation model, and the
//! probabilistic solution of a time-fractional PDE.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::bv::{BVProcessSpec, BvSampler};
use crate::error::{domain, Result};
use crate::parallel::{map_streams, pairwise_sum};
use crate::params::TemperedParams;
use crate::passage::{tsffp_sample_with, PassageOptions};
use crate::rng::{RngStream, WorkCounters};
use crate::variates::{sample_normal, TemperedPlan};
use crate::zolotarev::Kernel;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub estimate: f64,
    /// Sample standard deviation over `√n`.
    pub se: f64,
    pub n: usize,
}

impl EstimateWithError {
    pub fn from_samples(xs: &[f64]) -> EstimateWithError {
        let n = xs.len();
        if n == 0 {
            return EstimateWithError { estimate: f64::NAN, se: f64::NAN, n };
        }
        let m = pairwise_sum(xs) / n as f64;
        let se = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        EstimateWithError { estimate: m, se, n }
    }

    pub fn scaled(self, c: f64) -> EstimateWithError {
        EstimateWithError { estimate: c * self.estimate, se: c.abs() * self.se, n: self.n }
    }
}

// ---------------------------------------------------------------------------
// Barrier option

/// An up-and-out call on `R_t = R_0 e^{Z_t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierOptionSpec {
    pub process: BVProcessSpec,
    pub r0: f64,
    pub strike: f64,
    /// Knock-out level `M > K`.
    pub barrier: f64,
    pub maturity: f64,
    pub discount: f64,
}

impl BarrierOptionSpec {
    /// The USD/JPY calibration used as the default example: `K = 98`,
    /// `M = 102`, two weeks to maturity, no discounting.
    pub fn usdjpy_default() -> BarrierOptionSpec {
        BarrierOptionSpec {
            process: BVProcessSpec::new(
                TemperedParams::new(0.66, 0.1305, 6.5022).expect("valid"),
                TemperedParams::new(0.66, 0.0615, 3.3088).expect("valid"),
            ),
            r0: 100.0,
            strike: 98.0,
            barrier: 102.0,
            maturity: 14.0 / 365.0,
            discount: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike >= 0.0 && self.strike < self.barrier) {
            return Err(domain(format!("need 0 <= K < M, got K={} M={}", self.strike, self.barrier)));
        }
        if !(self.r0 > 0.0) {
            return Err(domain(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(domain(format!("maturity must be positive and finite, got {}", self.maturity)));
        }
        if !self.discount.is_finite() {
            return Err(domain("discount rate must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub r0: f64,
    pub maturity: f64,
    pub price: EstimateWithError,
}

/// Where a path stands after its passage over the last level processed.
#[derive(Clone, Copy)]
enum PathState {
    Fresh,
    Crossed { time: f64, value: f64 },
    Expired { value: f64 },
}

/// Prices the option at `spec.r0`, or at every point of `r0_grid`.
///
/// All grid points share the same `n` paths: levels `log(M/R_0)` are
/// visited in increasing order and each path is continued from its last
/// crossing only when that crossing lies below the next level. Initial
/// values at or above the barrier price to zero.
pub fn price_barrier(
    spec: &BarrierOptionSpec,
    n: usize,
    rng: &RngStream,
    r0_grid: Option<&[f64]>,
    threads: usize,
) -> Result<(Vec<PriceRow>, WorkCounters)> {
    spec.validate()?;
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    let grid: Vec<f64> = r0_grid.map(|g| g.to_vec()).unwrap_or_else(|| vec![spec.r0]);
    if grid.iter().any(|&r| !(r > 0.0)) {
        return Err(domain("grid values of R0 must be positive"));
    }
    let sampler = BvSampler::new(spec.process)?;
    let t_end = spec.maturity;
    // increasing levels = decreasing R0
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]));
    let (payoffs, work) = map_streams(n, threads, rng, |_, rng| {
        let mut out = vec![0.0; grid.len()];
        let mut state = PathState::Fresh;
        for &i in &order {
            let r0 = grid[i];
            if r0 >= spec.barrier {
                continue;
            }
            let level = (spec.barrier / r0).ln();
            state = match state {
                PathState::Fresh => {
                    let r = sampler.sample(level, t_end, rng)?;
                    if r.stopped_by_horizon {
                        PathState::Expired { value: r.value }
                    } else {
                        PathState::Crossed { time: r.time, value: r.value }
                    }
                }
                PathState::Crossed { time, value } if value <= level => {
                    let r = sampler.sample(level - value, t_end - time, rng)?;
                    if r.stopped_by_horizon {
                        PathState::Expired { value: value + r.value }
                    } else {
                        PathState::Crossed { time: time + r.time, value: value + r.value }
                    }
                }
                s => s,
            };
            if let PathState::Expired { value } = state {
                out[i] = (r0 * value.exp() - spec.strike).max(0.0);
            }
        }
        Ok(out)
    })?;
    let disc = (-spec.discount * t_end).exp();
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &r0)| {
            let xs: Vec<f64> = payoffs.iter().map(|p| p[i]).collect();
            PriceRow { r0, maturity: t_end, price: EstimateWithError::from_samples(&xs).scaled(disc) }
        })
        .collect();
    Ok((rows, work))
}

pub fn price_rows_csv(rows: &[PriceRow]) -> String {
    let mut s = String::from("R0,T,price,se,n\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.r0, r.maturity, r.price.estimate, r.price.se, r.price.n);
    }
    s
}

// ---------------------------------------------------------------------------
// FPDE

pub type Payoff = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `u(t, x) = E[φ(X^x_{T_t})]` where `T_t` is the passage time of a tempered
/// stable subordinator over `t − a` and `X^x_s = x exp(√s N − s/2)`.
#[derive(Clone)]
pub struct FpdeSpec {
    pub tparams: TemperedParams,
    /// Left end `a` of the time domain.
    pub origin: f64,
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub n: usize,
    pub payoff: Payoff,
}

impl fmt::Debug for FpdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FpdeSpec")
            .field("tparams", &self.tparams)
            .field("origin", &self.origin)
            .field("t_grid", &self.t_grid)
            .field("x_grid", &self.x_grid)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl FpdeSpec {
    /// Spec with `φ(x) = x²` and `a = 0`.
    pub fn new(tparams: TemperedParams, t_grid: Vec<f64>, x_grid: Vec<f64>, n: usize) -> Result<FpdeSpec> {
        let s = FpdeSpec { tparams, origin: 0.0, t_grid, x_grid, n, payoff: Arc::new(|x| x * x) };
        s.validate()?;
        Ok(s)
    }

    pub fn with_payoff(mut self, payoff: Payoff) -> FpdeSpec {
        self.payoff = payoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !strictly_increasing(&self.t_grid) || !strictly_increasing(&self.x_grid) {
            return Err(domain("t and x grids must be nonempty and strictly increasing"));
        }
        if !(self.t_grid[0] > self.origin) {
            return Err(domain("all times must exceed the origin"));
        }
        if self.n == 0 {
            return Err(domain("n must be positive"));
        }
        Ok(())
    }

    fn value(&self, x: f64, s: f64, normal: f64) -> f64 {
        (self.payoff)(x * (s.sqrt() * normal - 0.5 * s).exp())
    }
}

/// Estimates on the `t × x` grid, indexed `[t][x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpdeResult {
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub values: Vec<Vec<EstimateWithError>>,
    /// `E[e^{T_t}]` per time point.
    pub exp_time: Vec<EstimateWithError>,
    pub work: WorkCounters,
}

impl FpdeResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,estimate,se,n\n");
        for (i, t) in self.t_grid.iter().enumerate() {
            for (j, x) in self.x_grid.iter().enumerate() {
                let e = &self.values[i][j];
                let _ = writeln!(s, "{t},{x},{},{},{}", e.estimate, e.se, e.n);
            }
        }
        s
    }
}

/// Per-sample output: the normal and the passage time for every `t`.
struct FpdePath {
    normal: f64,
    times: Vec<f64>,
}

fn assemble(spec: &FpdeSpec, paths: &[FpdePath], work: WorkCounters) -> FpdeResult {
    let nt = spec.t_grid.len();
    let mut values = Vec::with_capacity(nt);
    let mut exp_time = Vec::with_capacity(nt);
    for i in 0..nt {
        let row = spec
            .x_grid
            .iter()
            .map(|&x| {
                let xs: Vec<f64> = paths.iter().map(|p| spec.value(x, p.times[i], p.normal)).collect();
                EstimateWithError::from_samples(&xs)
            })
            .collect();
        values.push(row);
        let e: Vec<f64> = paths.iter().map(|p| p.times[i].exp()).collect();
        exp_time.push(EstimateWithError::from_samples(&e));
    }
    FpdeResult { t_grid: spec.t_grid.clone(), x_grid: spec.x_grid.clone(), values, exp_time, work }
}

/// Exact passage times over the increasing levels `t − a`, continuing one
/// subordinator path from level to level.
fn exact_times(spec: &FpdeSpec, k: &Kernel, opts: &PassageOptions, rng: &mut RngStream) -> Result<Vec<f64>> {
    let (mut tau, mut v) = (0.0, 0.0);
    let mut times = Vec::with_capacity(spec.t_grid.len());
    for &t in &spec.t_grid {
        let level = t - spec.origin;
        if v <= level {
            let c = Boundary::constant(level - v)?;
            let tri = tsffp_sample_with(&spec.tparams, k, &c, opts, rng)?;
            tau += tri.tau;
            v += tri.post_value;
        }
        times.push(tau);
    }
    Ok(times)
}

/// Monte Carlo solution with exact passage times. One normal per sample is
/// shared by all `x`, and passage times for successive `t` come from the
/// same path.
pub fn fpde_estimate(spec: &FpdeSpec, rng: &RngStream, threads: usize) -> Result<FpdeResult> {
    spec.validate()?;
    let k = Kernel::new(spec.tparams.alpha())?;
    let opts = PassageOptions::default();
    let (paths, work) = map_streams(spec.n, threads, rng, |_, rng| {
        let normal = sample_normal(rng);
        let times = exact_times(spec, &k, &opts, rng)?;
        Ok(FpdePath { normal, times })
    })?;
    Ok(assemble(spec, &paths, work))
}

/// The same estimator with `T_t` replaced by the first time a random walk
/// with step `h` and exact tempered stable increments exceeds `t − a`.
pub fn fpde_biased_baseline(spec: &FpdeSpec, h: f64, rng: &RngStream, threads: usize) -> Result<FpdeResult> {
    spec.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(domain(format!("mesh must be positive, got {h}")));
    }
    let k = Kernel::new(spec.tparams.alpha())?;
    let plan = TemperedPlan::new(&spec.tparams, h)?;
    let prec = PassageOptions::default().precision;
    let (paths, work) = map_streams(spec.n, threads, rng, |_, rng| {
        let normal = sample_normal(rng);
        let (mut steps, mut s) = (0u64, 0.0);
        let mut times = Vec::with_capacity(spec.t_grid.len());
        for &t in &spec.t_grid {
            let level = t - spec.origin;
            while s <= level {
                s += plan.sample_ln(&k, rng, prec)?.exp();
                steps += 1;
            }
            times.push(steps as f64 * h);
        }
        Ok(FpdePath { normal, times })
    })?;
    Ok(assemble(spec, &paths, work))
}

/// Bias of the random-walk estimator for one mesh, under common random
/// numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub h: f64,
    pub t: f64,
    pub x: f64,
    /// Mean of `φ(X_{T^{(h)}}) − φ(X_T)`.
    pub bias: EstimateWithError,
    /// Mean of `T^{(h)} − T`, never negative.
    pub delay: EstimateWithError,
}

/// Bias of the random-walk baseline for each mesh in `meshes`, measured on
/// coupled paths: the walk is the skeleton of the exact path, so it first
/// exceeds a level at `h ⌈T/h⌉`, and both estimators use the same normal.
pub fn fpde_bias_study(spec: &FpdeSpec, meshes: &[f64], rng: &RngStream, threads: usize) -> Result<Vec<BiasRow>> {
    spec.validate()?;
    if meshes.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err(domain("meshes must be positive"));
    }
    let k = Kernel::new(spec.tparams.alpha())?;
    let opts = PassageOptions::default();
    let (paths, _) = map_streams(spec.n, threads, rng, |_, rng| {
        let normal = sample_normal(rng);
        let times = exact_times(spec, &k, &opts, rng)?;
        Ok(FpdePath { normal, times })
    })?;
    let mut rows = Vec::new();
    for &h in meshes {
        for (i, &t) in spec.t_grid.iter().enumerate() {
            let skel: Vec<f64> = paths.iter().map(|p| h * (p.times[i] / h).ceil()).collect();
            let delay: Vec<f64> = paths.iter().zip(&skel).map(|(p, s)| s - p.times[i]).collect();
            let delay = EstimateWithError::from_samples(&delay);
            for &x in &spec.x_grid {
                let d: Vec<f64> = paths
                    .iter()
                    .zip(&skel)
                    .map(|(p, &s)| spec.value(x, s, p.normal) - spec.value(x, p.times[i], p.normal))
                    .collect();
                rows.push(BiasRow { h, t, x, bias: EstimateWithError::from_samples(&d), delay });
            }
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log |bias|` against `log h`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(h, b)| (h.ln(), b.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_with_error() {
        let e = EstimateWithError::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.estimate, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(EstimateWithError::from_samples(&[7.0]).se, 0.0);
    }

    #[test]
    fn knocked_out_at_inception_is_zero() {
        let mut spec = BarrierOptionSpec::usdjpy_default();
        spec.r0 = 102.0;
        let rng = RngStream::new(1, 0);
        let (rows, work) = price_barrier(&spec, 10, &rng, None, 1).unwrap();
        assert_eq!(rows[0].price.estimate, 0.0);
        assert_eq!(work.inner_calls, 0);
    }

    #[test]
    fn price_bounded_by_cap() {
        let spec = BarrierOptionSpec::usdjpy_default();
        let rng = RngStream::new(2, 0);
        let grid = [98.0, 99.0, 100.0, 101.0, 101.9];
        let (rows, _) = price_barrier(&spec, 200, &rng, Some(&grid), 2).unwrap();
        for r in &rows {
            assert!(r.price.estimate >= 0.0 && r.price.estimate <= spec.barrier - spec.strike);
        }
    }

    #[test]
    fn fpde_factorizes_in_x() {
        let tp = TemperedParams::new(0.4, 1.0, 1.0).unwrap();
        let spec = FpdeSpec::new(tp, vec![0.5, 1.0], vec![0.5, 1.0, 2.0], 200).unwrap();
        let res = fpde_estimate(&spec, &RngStream::new(4, 0), 2).unwrap();
        for row in &res.values {
            let base = row[1].estimate;
            for (j, x) in spec.x_grid.iter().enumerate() {
                let rel = row[j].estimate / (x * x) / base;
                assert!((rel - 1.0).abs() < 1e-12);
            }
        }
        // later times are reached later on the same path
        assert!(res.exp_time[1].estimate >= res.exp_time[0].estimate);
    }

    #[test]
    fn skeleton_never_detects_early() {
        let tp = TemperedParams::new(0.4, 1.0, 1.0).unwrap();
        let spec = FpdeSpec::new(tp, vec![1.0], vec![1.0], 300).unwrap();
        let rows = fpde_bias_study(&spec, &[0.1, 0.01], &RngStream::new(5, 0), 2).unwrap();
        for r in &rows {
            assert!(r.delay.estimate >= 0.0 && r.delay.estimate <= r.h);
        }
    }

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
    }
}
