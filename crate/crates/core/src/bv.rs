//! First passage of `Z = Z⁺ − Z⁻` over a level `c`, where `Z⁺` and `Z⁻`
//! are independent driftless tempered stable subordinators.
//!
//! Each round samples the passage of `Z⁺` over the remaining distance to
//! the level, subtracts an independent increment of `Z⁻` over the same
//! time, and stops once the remaining distance is negative or the horizon
//! would be overrun.

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{domain, Result};
use crate::params::TemperedParams;
use crate::passage::{tsffp_sample_with, PassageOptions};
use crate::rng::RngStream;
use crate::variates::sample_tempered_stable_ln;
use crate::zolotarev::Kernel;

/// Parameters of the two components. The drift of `Z` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BVProcessSpec {
    pub plus: TemperedParams,
    pub minus: TemperedParams,
}

impl BVProcessSpec {
    pub fn new(plus: TemperedParams, minus: TemperedParams) -> BVProcessSpec {
        BVProcessSpec { plus, minus }
    }

    pub fn drift(&self) -> f64 {
        0.0
    }

    /// Laplace exponent of `Z` in the sense `E[e^{u Z_t}] = e^{t κ(u)}`,
    /// finite for `u ≤ q⁺`.
    pub fn cumulant(&self, u: f64) -> f64 {
        -self.plus.laplace_exponent(-u) - self.minus.laplace_exponent(u)
    }
}

/// `(min(τ, T), Z_{min−}, Z_min)` together with work counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BVPassageResult {
    pub time: f64,
    pub left_limit: f64,
    pub value: f64,
    pub stopped_by_horizon: bool,
    /// First-passage calls made on `Z⁺`.
    pub inner_calls: u64,
    /// Draws of `Z⁺_{T−t}` rejected for exceeding the remaining distance.
    pub resamples: u64,
}

/// Sampler with the kernels of both components prepared once.
#[derive(Debug, Clone)]
pub struct BvSampler {
    spec: BVProcessSpec,
    k_plus: Kernel,
    k_minus: Kernel,
    pub opts: PassageOptions,
}

impl BvSampler {
    pub fn new(spec: BVProcessSpec) -> Result<BvSampler> {
        Ok(BvSampler {
            spec,
            k_plus: Kernel::new(spec.plus.alpha())?,
            k_minus: Kernel::new(spec.minus.alpha())?,
            opts: PassageOptions::default(),
        })
    }

    pub fn spec(&self) -> &BVProcessSpec {
        &self.spec
    }

    fn minus_increment(&self, t: f64, rng: &mut RngStream) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok(sample_tempered_stable_ln(&self.spec.minus, &self.k_minus, t, rng, self.opts.precision)?.exp())
    }

    /// Samples `Z⁺_t` conditional on `Z⁺_t < b`.
    fn plus_below(&self, t: f64, b: f64, rng: &mut RngStream, resamples: &mut u64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        loop {
            rng.work.rejections += 1;
            let u = sample_tempered_stable_ln(&self.spec.plus, &self.k_plus, t, rng, self.opts.precision)?.exp();
            if u < b {
                return Ok(u);
            }
            *resamples += 1;
        }
    }

    /// Passage of `Z` started at zero over `level` within `horizon`.
    pub fn sample(&self, level: f64, horizon: f64, rng: &mut RngStream) -> Result<BVPassageResult> {
        if !(level > 0.0) || !level.is_finite() {
            return Err(domain(format!("level must be positive and finite, got {level}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(domain(format!("horizon must be positive and finite, got {horizon}")));
        }
        let (mut t, mut h, mut b) = (0.0, 0.0, level);
        let mut out = BVPassageResult {
            time: 0.0,
            left_limit: 0.0,
            value: 0.0,
            stopped_by_horizon: false,
            inner_calls: 0,
            resamples: 0,
        };
        loop {
            out.inner_calls += 1;
            let c = Boundary::constant(b)?;
            let tri = tsffp_sample_with(&self.spec.plus, &self.k_plus, &c, &self.opts, rng)?;
            if t + tri.tau >= horizon {
                let rest = horizon - t;
                let u = self.plus_below(rest, b, rng, &mut out.resamples)?;
                let w = self.minus_increment(rest, rng)?;
                out.time = horizon;
                out.left_limit = h + u - w;
                out.value = out.left_limit;
                out.stopped_by_horizon = true;
                return Ok(out);
            }
            let w = self.minus_increment(tri.tau, rng)?;
            t += tri.tau;
            let before = h;
            h += tri.post_value - w;
            b += w - tri.post_value;
            if b < 0.0 {
                out.time = t;
                out.left_limit = before + tri.pre - w;
                out.value = h;
                return Ok(out);
            }
        }
    }
}

/// One draw of the passage of `Z` over `level` within the finite `horizon`.
pub fn bvfp_sample(spec: &BVProcessSpec, level: f64, horizon: f64, rng: &mut RngStream) -> Result<BVPassageResult> {
    BvSampler::new(*spec)?.sample(level, horizon, rng)
}

/// Bound `1 + e^{uc}/(ψ(u) − p)` on `E[e^{p τ_c}]` for the passage time of a
/// tempered stable subordinator over the level `c`, with `ψ` its Laplace
/// exponent. Taking `p = 0` and dropping the one bounds `E[τ_c]`.
pub fn exp_moment_bound(params: &TemperedParams, level: f64, p: f64, u: f64) -> Result<f64> {
    if !(level > 0.0) || !(u > 0.0) {
        return Err(domain("level and u must be positive"));
    }
    let psi = params.laplace_exponent(u);
    if !(psi > p) {
        return Err(domain(format!("bound is vacuous: psi(u) = {psi} <= p = {p}")));
    }
    Ok(1.0 + (u * level).exp() / (psi - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(theta_minus: f64) -> BVProcessSpec {
        BVProcessSpec::new(
            TemperedParams::new(0.6, 1.0, 1.0).unwrap(),
            TemperedParams::new(0.6, theta_minus, 1.0).unwrap(),
        )
    }

    #[test]
    fn bookkeeping() {
        let s = BvSampler::new(spec(0.5)).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut crossed = 0;
        for _ in 0..300 {
            let r = s.sample(0.5, 2.0, &mut rng).unwrap();
            assert!(r.time > 0.0 && r.time <= 2.0);
            if r.stopped_by_horizon {
                assert_eq!(r.time, 2.0);
                assert_eq!(r.left_limit, r.value);
                assert!(r.value <= 0.5);
            } else {
                crossed += 1;
                assert!(r.value > 0.5 && r.left_limit <= 0.5 + 1e-12);
            }
            assert!(r.inner_calls >= 1);
        }
        assert!(crossed > 0);
    }

    #[test]
    fn large_level_rarely_crosses() {
        let s = BvSampler::new(spec(1.0)).unwrap();
        let mut rng = RngStream::new(12, 0);
        let stopped = (0..200).filter(|_| s.sample(50.0, 0.01, &mut rng).unwrap().stopped_by_horizon).count();
        assert_eq!(stopped, 200);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = BvSampler::new(spec(1.0)).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert!(s.sample(0.0, 1.0, &mut rng).is_err());
        assert!(s.sample(1.0, f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn moment_bound() {
        let tp = TemperedParams::new(0.5, 1.0, 1.0).unwrap();
        assert!(exp_moment_bound(&tp, 1.0, 0.0, 1.0).unwrap() >= 1.0);
        assert!(exp_moment_bound(&tp, 1.0, 10.0, 1.0).is_err());
        let mut prev = f64::INFINITY;
        for th in [0.5, 1.0, 2.0, 4.0] {
            let b = exp_moment_bound(&TemperedParams::new(0.5, th, 1.0).unwrap(), 1.0, 0.1, 1.0).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }
}
