//! Primitive variates and the stable, tempered stable and log-concave samplers.

use crate::error::{domain, Error, Result};
use crate::params::{Precision, StableParams, TemperedParams};
use crate::rng::RngStream;
use crate::special::{erf, erf_inv, ln_gamma, PI};
use crate::zolotarev::Kernel;

pub fn sample_uniform(rng: &mut RngStream) -> f64 {
    rng.uniform()
}

/// `−ln u`.
pub fn exponential_from_uniform(u: f64) -> f64 {
    -u.ln()
}

pub fn sample_exponential(rng: &mut RngStream) -> f64 {
    -rng.uniform().ln()
}

/// Standard normal by Box–Muller (two uniforms per draw).
pub fn sample_normal(rng: &mut RngStream) -> f64 {
    let u = rng.uniform();
    let v = rng.uniform();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

/// `ln X` for `X ∼ Gamma(shape, 1)`.
///
/// Shapes below one use the Ahrens–Dieter rejection method with the
/// proposal kept in logarithms, so that tiny shapes do not underflow;
/// larger shapes use the Marsaglia–Tsang squeeze.
pub fn sample_ln_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(domain(format!("gamma shape must be positive, got {shape}")));
    }
    if shape < 1.0 {
        let b = 1.0 + shape / std::f64::consts::E;
        loop {
            rng.work.rejections += 1;
            let p = b * rng.uniform();
            let u = rng.uniform();
            if p <= 1.0 {
                let lx = p.ln() / shape;
                if u.ln() <= -lx.exp() {
                    return Ok(lx);
                }
            } else {
                let x = -((b - p) / shape).ln();
                if u.ln() <= (shape - 1.0) * x.ln() {
                    return Ok(x.ln());
                }
            }
        }
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        rng.work.rejections += 1;
        let x = sample_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v3 + v3.ln()) {
            return Ok(d.ln() + v3.ln());
        }
    }
}

/// `Gamma(shape, rate)` with density `rate^a x^{a−1} e^{−rate x}/Γ(a)`.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(domain(format!("gamma rate must be positive, got {rate}")));
    }
    Ok((sample_ln_gamma(shape, rng)? - rate.ln()).exp())
}

/// `N(0, scale²)` restricted to `[0, 1]`, by inversion of its CDF
/// `erf(x/(√2 scale)) / erf(1/(√2 scale))`.
pub fn sample_truncated_normal(scale: f64, rng: &mut RngStream, precision: Precision) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(domain(format!("truncated normal scale must be positive, got {scale}")));
    }
    Ok(truncated_normal_from_uniform(scale, rng.uniform(), precision))
}

pub fn truncated_normal_from_uniform(scale: f64, u: f64, precision: Precision) -> f64 {
    let c = std::f64::consts::SQRT_2 * scale;
    let x = c * erf_inv(u * erf(1.0 / c), precision.bits());
    x.clamp(0.0, 1.0)
}

/// The stable draw `(θt)^{1/α}(σ(u)/e)^{(1−α)/α}` in logarithms, for given
/// uniform `u` and exponential `e`.
pub fn ln_stable_from(k: &Kernel, ln_theta_t: f64, u: f64, e: f64) -> f64 {
    // (1−α)/α · log σ = log ρ / α
    (ln_theta_t + k.log_rho(u)) / k.alpha() - e.ln() / k.r()
}

/// `ln S_t` under the stable law.
pub fn sample_stable_ln(k: &Kernel, theta: f64, t: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform();
    let e = sample_exponential(rng);
    ln_stable_from(k, theta.ln() + t.ln(), u, e)
}

/// `S_t` for a stable subordinator with parameters `params`.
pub fn sample_stable(params: &StableParams, t: f64, rng: &mut RngStream) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("t > 0 required, got {t}")));
    }
    let k = Kernel::new(params.alpha())?;
    Ok(sample_stable_ln(&k, params.theta(), t, rng).exp())
}

/// Acceptance-rejection constants of the tempered stable sampler for one
/// value of `(α, θt, q)`.
#[derive(Debug, Clone)]
pub struct TemperedPlan {
    alpha: f64,
    r: f64,
    xi: f64,
    ln_lambda: f64,
    ln_q: f64,
    ln_scale: f64,
    ln_c: [f64; 5],
    branch: usize,
}

impl TemperedPlan {
    pub fn new(tp: &TemperedParams, t: f64) -> Result<TemperedPlan> {
        if !(t > 0.0) {
            return Err(domain(format!("t > 0 required, got {t}")));
        }
        if !(tp.q() > 0.0) {
            return Err(domain("tempered plan needs q > 0; use the stable sampler"));
        }
        let a = tp.alpha();
        let r = a / (1.0 - a);
        let ln_scale = (tp.theta().ln() + t.ln()) / a;
        let ln_q = tp.q().ln();
        let ln_lambda = ln_scale + ln_q;
        let xi = (a * ln_lambda).exp();
        let ln_c = ln_psi(a, xi);
        let mut branch = 1;
        for i in 2..=4 {
            if ln_c[i] < ln_c[branch] {
                branch = i;
            }
        }
        Ok(TemperedPlan { alpha: a, r, xi, ln_lambda, ln_q, ln_scale, ln_c, branch })
    }

    /// Branch selected by the smallest of the four bounds, in `1..=4`.
    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Expected number of proposals, which equals the selected bound.
    pub fn expected_trials(&self) -> f64 {
        self.ln_c[self.branch].exp()
    }

    pub fn ln_bounds(&self) -> [f64; 5] {
        self.ln_c
    }

    /// One draw of `ln S_t`.
    pub fn sample_ln(&self, k: &Kernel, rng: &mut RngStream, precision: Precision) -> Result<f64> {
        let (a, r, xi) = (self.alpha, self.r, self.xi);
        let b = 1.0 - a;
        let ln_xi = xi.ln();
        let tn_scale = 1.0 / (PI * (a * b * xi).sqrt());
        loop {
            rng.work.rejections += 1;
            let (u, log_weight) = if self.branch <= 2 {
                (rng.uniform(), 0.0)
            } else {
                let u = sample_truncated_normal(tn_scale, rng, precision)?;
                (u, self.ln_c[0] + 0.5 * PI * PI * a * b * xi * u * u)
            };
            let v = rng.uniform();
            let lr = k.log_rho(u);
            match self.branch {
                1 | 3 => {
                    let lx = sample_ln_gamma(a * xi, rng)?;
                    let la = (r + 1.0) * (lr + ln_xi);
                    let log_ratio = r.ln() + xi + ln_gamma(a * xi) + la - (r + a * xi) * lx - (la - r * lx).exp();
                    if v.ln() <= log_weight + log_ratio - self.ln_c[self.branch] {
                        return Ok(lx - self.ln_q);
                    }
                }
                _ => {
                    let shape = 1.0 + b * xi;
                    let lx = sample_ln_gamma(shape, rng)?;
                    let ls = lr / a - lx / r;
                    let log_ratio = xi + ln_gamma(shape) - b * xi * lx - (self.ln_lambda + ls).exp();
                    if v.ln() <= log_weight + log_ratio - self.ln_c[self.branch] {
                        return Ok(self.ln_scale + ls);
                    }
                }
            }
        }
    }
}

/// `ln Ψ_i(α, ξ)` for `i = 0..=4`.
pub fn ln_psi(a: f64, xi: f64) -> [f64; 5] {
    let b = 1.0 - a;
    let r = a / b;
    let ax = a * xi;
    let bx = b * xi;
    let half_ln_norm = 0.5 * (2.0 * PI * a * b * xi).ln();
    let l0 = erf((a * b * xi * PI * PI / 2.0).sqrt()).ln() - half_ln_norm;
    let l1 = ln_gamma(ax) + ax - 1.0 - xi * ax.ln() + (1.0 + bx) * (r + ax).ln();
    let l2 = ln_gamma(1.0 + bx) + bx - bx * bx.ln();
    let l3 = ln_gamma(1.0 + ax) + ax - 1.0 + (1.0 + bx) * (1.0 / bx).ln_1p() - ax * ax.ln() - half_ln_norm;
    let l4 = l2 - half_ln_norm;
    [l0, l1, l2, l3, l4]
}

/// `ln S_t` under the tempered law; falls back to the stable sampler at `q = 0`.
pub fn sample_tempered_stable_ln(
    tp: &TemperedParams,
    k: &Kernel,
    t: f64,
    rng: &mut RngStream,
    precision: Precision,
) -> Result<f64> {
    if tp.q() == 0.0 {
        return Ok(sample_stable_ln(k, tp.theta(), t, rng));
    }
    TemperedPlan::new(tp, t)?.sample_ln(k, rng, precision)
}

/// `S_t` for a tempered stable subordinator.
pub fn sample_tempered_stable(tp: &TemperedParams, t: f64, rng: &mut RngStream) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("t > 0 required, got {t}")));
    }
    let k = Kernel::new(tp.alpha())?;
    Ok(sample_tempered_stable_ln(tp, &k, t, rng, Precision::default())?.exp())
}

/// A nonincreasing log-concave function on `[0, 1]` with `f(0) = 1`,
/// given through its logarithm.
pub trait LogConcave {
    fn log_f(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> LogConcave for F {
    fn log_f(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Piecewise dominating function of the log-concave sampler.
///
/// With `a1` the largest power of two in `(0, 1/2]` where `f(a1) ≥ 1/4 ≥ f(2 a1)`
/// (values beyond one count as zero), `h` is `1` on `(0, a1]`, `f(a1)` on
/// `(a1, 2a1]` and the log-linear extrapolation through those two points beyond.
#[derive(Debug, Clone, Copy)]
pub struct LcEnvelope {
    pub a1: f64,
    pub log_f1: f64,
    /// `log f(2 a1)`, or `−∞` when `2 a1 = 1`.
    pub log_f2: f64,
    pub a0: f64,
    /// Halvings used to find `a1`.
    pub preprocessing: u32,
}

impl LcEnvelope {
    pub fn new<F: LogConcave + ?Sized>(f: &F) -> Result<LcEnvelope> {
        let f0 = f.log_f(0.0);
        if !(f0.abs() <= 1e-9) {
            return Err(Error::Contract(format!("log-concave target must satisfy f(0) = 1, got log f(0) = {f0}")));
        }
        let quarter = -(4f64.ln());
        let mut a1 = 0.5;
        let mut steps = 1u32;
        let mut lf1 = f.log_f(a1);
        let mut lf2 = f64::NEG_INFINITY;
        while !(lf1 >= quarter) {
            if lf1.is_nan() {
                return Err(Error::Contract(format!("log f is NaN at {a1}")));
            }
            lf2 = lf1;
            a1 *= 0.5;
            steps += 1;
            if a1 == 0.0 {
                return Err(Error::Numeric("log-concave break point underflowed".into()));
            }
            lf1 = f.log_f(a1);
        }
        let third = if lf2 == f64::NEG_INFINITY {
            0.0
        } else {
            let l = lf1 - lf2;
            if l > 0.0 {
                a1 * lf2.exp() / l
            } else {
                lf2.exp() * (1.0 - 2.0 * a1)
            }
        };
        let a0 = a1 + a1 * lf1.exp() + third;
        Ok(LcEnvelope { a1, log_f1: lf1, log_f2: lf2, a0, preprocessing: steps })
    }

    /// `log h(x)`.
    pub fn log_h(&self, x: f64) -> f64 {
        if x <= self.a1 {
            0.0
        } else if x <= 2.0 * self.a1 {
            self.log_f1
        } else if self.log_f2 == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            ((2.0 * self.a1 - x) * self.log_f1 + (x - self.a1) * self.log_f2) / self.a1
        }
    }

    /// Draws from the density proportional to `f`.
    pub fn sample<F: LogConcave + ?Sized>(&self, f: &F, rng: &mut RngStream) -> f64 {
        let a1 = self.a1;
        let l = self.log_f1 - self.log_f2;
        loop {
            rng.work.rejections += 1;
            let v1 = rng.uniform();
            let v2 = rng.uniform();
            let v3 = rng.uniform();
            let x = if self.a0 * v2 <= a1 {
                a1 * v1
            } else if self.a0 * v2 <= a1 + a1 * self.log_f1.exp() {
                a1 + a1 * v1
            } else if l > 0.0 {
                2.0 * a1 + a1 * (-v1.ln()) / l
            } else {
                2.0 * a1 + (1.0 - 2.0 * a1) * v1
            };
            if x <= 1.0 && v3.ln() <= f.log_f(x) - self.log_h(x) {
                return x;
            }
        }
    }
}

/// One draw from the density on `[0, 1]` proportional to a nonincreasing
/// log-concave `f` with `f(0) = 1`.
pub fn sample_logconcave<F: LogConcave + ?Sized>(f: &F, rng: &mut RngStream) -> Result<f64> {
    let env = LcEnvelope::new(f)?;
    rng.work.lc_preprocessing += env.preprocessing as u64;
    Ok(env.sample(f, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_one(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let c = cdf(x);
            d = d.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs());
        }
        d
    }

    #[test]
    fn exponential_injected() {
        assert!((exponential_from_uniform((-1.0f64).exp()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_small_shape_mean() {
        let mut rng = RngStream::new(11, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_gamma(0.3, 1.0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = (0.3f64 / n as f64).sqrt();
        assert!((mean - 0.3).abs() < 3.0 * se, "mean {mean}");
        let mut rng = RngStream::new(12, 0);
        let ys: Vec<f64> = (0..n).map(|_| sample_gamma(7.5, 2.0, &mut rng).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        assert!((mean - 3.75).abs() < 3.0 * (7.5f64 / 4.0 / n as f64).sqrt());
        assert!(sample_gamma(0.0, 1.0, &mut rng).is_err());
        let lx = sample_ln_gamma(1e-4, &mut rng).unwrap();
        assert!(lx.is_finite());
    }

    #[test]
    fn stable_injected_value() {
        let k = Kernel::new(0.5).unwrap();
        let s = ln_stable_from(&k, 0.0, 0.5, 1.0).exp();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncated_normal_range() {
        let mut rng = RngStream::new(5, 0);
        for &sc in &[1e-3, 0.3, 10.0] {
            for _ in 0..1000 {
                let x = sample_truncated_normal(sc, &mut rng, Precision::default()).unwrap();
                assert!((0.0..=1.0).contains(&x));
            }
        }
        let xs: Vec<f64> =
            (0..20_000).map(|_| sample_truncated_normal(0.4, &mut rng, Precision::default()).unwrap()).collect();
        let c = std::f64::consts::SQRT_2 * 0.4;
        let d = ks_one(xs, |x| erf(x / c) / erf(1.0 / c));
        assert!(d < 1.63 / (20_000f64).sqrt());
    }

    #[test]
    fn tempered_branches_are_all_reachable() {
        let mut seen = [false; 5];
        for &a in &[0.05, 0.3, 0.5, 0.7, 0.95] {
            for e in -8..12 {
                let tp = TemperedParams::new(a, 1.0, 2f64.powi(e)).unwrap();
                seen[TemperedPlan::new(&tp, 1.0).unwrap().branch()] = true;
            }
        }
        assert!(seen[1] && seen[2] && seen[3] && seen[4], "{seen:?}");
    }

    #[test]
    fn tempered_bound_and_laplace() {
        let tp = TemperedParams::new(0.7, 1.0, 2.0).unwrap();
        let k = Kernel::new(0.7).unwrap();
        let mut rng = RngStream::new(3, 1);
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_tempered_stable_ln(&tp, &k, 1.0, &mut rng, Precision::default()).unwrap().exp())
            .collect();
        for &u in &[0.5, 1.0, 2.0] {
            let vals: Vec<f64> = xs.iter().map(|x| (-u * x).exp()).collect();
            let m = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
            let expect = (-tp.laplace_exponent(u)).exp();
            assert!((m - expect).abs() < 3.5 * (var / n as f64).sqrt(), "u={u} m={m} expect={expect}");
        }
    }

    #[test]
    fn logconcave_targets() {
        let mut rng = RngStream::new(9, 0);
        let uni = |_x: f64| 0.0;
        let xs: Vec<f64> = (0..10_000).map(|_| sample_logconcave(&uni, &mut rng).unwrap()).collect();
        assert!(ks_one(xs, |x| x) < 1.95 / 100.0);
        let ex = |x: f64| -5.0 * x;
        let env = LcEnvelope::new(&ex).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(env.log_h(x) >= ex(x) - 1e-12);
        }
        let before = rng.work.rejections;
        let xs: Vec<f64> = (0..10_000).map(|_| sample_logconcave(&ex, &mut rng).unwrap()).collect();
        let iters = (rng.work.rejections - before) as f64 / 1e4;
        assert!(iters <= 5.5);
        let norm = 1.0 - (-5.0f64).exp();
        assert!(ks_one(xs, |x| (1.0 - (-5.0 * x).exp()) / norm) < 1.95 / 100.0);
        assert!(LcEnvelope::new(&|x: f64| 1.0 - x).is_err());
    }
}
