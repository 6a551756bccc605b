//! Zolotarev's functions and the stable quantities derived from them.
//!
//! With `β = 1 − α`, `ρ(u) = sin(απu)^α sin(βπu)^β / sin(πu)` on (0,1) and
//! `σ(u) = ρ(u)^{1/β}`. The stable(α) law with Laplace exponent `u^α` has
//! density `φ(x) = r ∫ σ(u) x^{-r-1} exp(-σ(u) x^{-r}) du`, `r = α/β`.
//!
//! Everything is computed from `log ρ`. Near `u = 0` the trigonometric form
//! cancels catastrophically, so a zeta series is used there instead:
//! `log ρ(u) − log ρ(0+) = Σ ζ(2n) a_n u^{2n} / n`, `a_n = 1 − α^{2n+1} − β^{2n+1}`.

use crate::error::{domain, Error, Result};
use crate::params::StableParams;
use crate::quadrature::{breakpoints, integrate, Integral, QuadratureSpec};
use crate::special::{ln_gamma, log_add_exp, zeta_even, PI};

const SERIES_CUTOFF: f64 = 0.25;
const SERIES_TERMS: usize = 22;

/// Precomputed constants of Zolotarev's functions for one value of α.
#[derive(Debug, Clone)]
pub struct Kernel {
    alpha: f64,
    beta: f64,
    r: f64,
    log_rho0: f64,
    coef: [f64; SERIES_TERMS],
}

impl Kernel {
    pub fn new(alpha: f64) -> Result<Kernel> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha in (0,1) required, got {alpha}")));
        }
        let beta = 1.0 - alpha;
        let mut coef = [0.0; SERIES_TERMS];
        for (i, c) in coef.iter_mut().enumerate() {
            let n = i + 1;
            let e = (2 * n + 1) as i32;
            *c = zeta_even(n) * (1.0 - alpha.powi(e) - beta.powi(e));
        }
        Ok(Kernel { alpha, beta, r: alpha / beta, log_rho0: alpha * alpha.ln() + beta * beta.ln(), coef })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `log ρ(0+) = α log α + β log β`.
    pub fn log_rho0(&self) -> f64 {
        self.log_rho0
    }

    /// `log σ(0+)`.
    pub fn log_sigma0(&self) -> f64 {
        self.log_rho0 / self.beta
    }

    /// `σ(0+) = β α^{α/β}`.
    pub fn sigma0(&self) -> f64 {
        self.log_sigma0().exp()
    }

    /// Sines of `απu`, `βπu`, `πu`, evaluated through reflections near
    /// `u = 1` so that small arguments keep full relative precision.
    fn sines(&self, u: f64) -> (f64, f64, f64) {
        if u < 0.5 {
            ((self.alpha * PI * u).sin(), (self.beta * PI * u).sin(), (PI * u).sin())
        } else {
            let v = 1.0 - u;
            ((PI * (self.beta + self.alpha * v)).sin(), (PI * (self.alpha + self.beta * v)).sin(), (PI * v).sin())
        }
    }

    /// `(cot, csc²)` of `απu`, `βπu` and `πu`.
    fn cot_csc(&self, u: f64) -> [(f64, f64); 3] {
        let pair = |x: f64, reflected: bool| {
            let (s, c) = x.sin_cos();
            let cot = if reflected { -c / s } else { c / s };
            (cot, 1.0 / (s * s))
        };
        if u < 0.5 {
            [pair(self.alpha * PI * u, false), pair(self.beta * PI * u, false), pair(PI * u, false)]
        } else {
            let v = 1.0 - u;
            let ra = self.alpha * u > 0.5;
            let rb = self.beta * u > 0.5;
            let xa = if ra { PI * (self.beta + self.alpha * v) } else { self.alpha * PI * u };
            let xb = if rb { PI * (self.alpha + self.beta * v) } else { self.beta * PI * u };
            [pair(xa, ra), pair(xb, rb), pair(PI * v, true)]
        }
    }

    fn series(&self, u: f64) -> f64 {
        let x = u * u;
        let mut acc = 0.0;
        for n in (1..=SERIES_TERMS).rev() {
            acc = acc * x + self.coef[n - 1] / n as f64;
        }
        acc * x
    }

    /// `ρ(u)` by the defining trigonometric formula.
    pub fn rho(&self, u: f64) -> f64 {
        let (a, b, c) = self.sines(u);
        a.powf(self.alpha) * b.powf(self.beta) / c
    }

    /// `log ρ(u)`.
    pub fn log_rho(&self, u: f64) -> f64 {
        if u < SERIES_CUTOFF {
            self.log_rho0 + self.series(u)
        } else {
            let (a, b, c) = self.sines(u);
            self.alpha * a.ln() + self.beta * b.ln() - c.ln()
        }
    }

    /// `log ρ(u) − log ρ(0+) ≥ 0`, accurate for small `u`.
    pub fn log_rho_excess(&self, u: f64) -> f64 {
        if u < SERIES_CUTOFF {
            self.series(u)
        } else {
            self.log_rho(u) - self.log_rho0
        }
    }

    /// First three derivatives of `log ρ`.
    pub fn log_rho_derivs(&self, u: f64) -> [f64; 3] {
        if u < SERIES_CUTOFF {
            let x = u * u;
            let (mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0);
            for n in (1..=SERIES_TERMS).rev() {
                let c = self.coef[n - 1];
                let m = (2 * n - 1) as f64;
                d1 = d1 * x + c;
                d2 = d2 * x + c * m;
                if n >= 2 {
                    d3 = d3 * x + c * m * (m - 1.0);
                }
            }
            // d1 carries u^{2n-2}; d3 starts at n = 2 and carries u^{2n-4}
            [2.0 * d1 * u, 2.0 * d2, 2.0 * d3 * u]
        } else {
            let [(ca, sa), (cb, sb), (c1, s1)] = self.cot_csc(u);
            let (a, b) = (self.alpha, self.beta);
            let (a2, b2) = (a * a, b * b);
            let d1 = PI * (a2 * ca + b2 * cb - c1);
            let d2 = -PI * PI * (a2 * a * sa + b2 * b * sb - s1);
            let d3 = 2.0 * PI.powi(3) * (a2 * a2 * sa * ca + b2 * b2 * sb * cb - s1 * c1);
            [d1, d2, d3]
        }
    }

    /// `log σ(u) = log ρ(u) / β`.
    pub fn log_sigma(&self, u: f64) -> f64 {
        self.log_rho(u) / self.beta
    }

    /// `log σ(u) − log σ(0+)`.
    pub fn log_sigma_excess(&self, u: f64) -> f64 {
        self.log_rho_excess(u) / self.beta
    }

    /// Derivatives of `log σ` of orders one to three.
    pub fn log_sigma_derivs(&self, u: f64) -> [f64; 3] {
        let d = self.log_rho_derivs(u);
        let k = 1.0 / self.beta;
        [k * d[0], k * d[1], k * d[2]]
    }

    /// `σ(u)`; switches to the logarithmic path when β < 2⁻⁶.
    pub fn sigma(&self, u: f64) -> f64 {
        if self.beta < 1.0 / 64.0 {
            self.log_sigma(u).exp()
        } else {
            self.rho(u).powf(1.0 / self.beta)
        }
    }

    /// `σ(u) − σ(0+)`, accurate near zero.
    pub fn sigma_excess(&self, u: f64) -> f64 {
        self.sigma0() * self.log_sigma_excess(u).exp_m1()
    }

    pub fn sigma_prime(&self, u: f64) -> f64 {
        self.sigma(u) * self.log_sigma_derivs(u)[0]
    }

    pub fn sigma_second(&self, u: f64) -> f64 {
        let [l1, l2, _] = self.log_sigma_derivs(u);
        self.sigma(u) * (l2 + l1 * l1)
    }

    /// `log ρ(1 − v)` for `v ∈ (0, 1/2]`, with full relative precision in `v`.
    pub fn log_rho_refl(&self, v: f64) -> f64 {
        let a = (PI * (self.beta + self.alpha * v)).sin();
        let b = (PI * (self.alpha + self.beta * v)).sin();
        self.alpha * a.ln() + self.beta * b.ln() - (PI * v).sin().ln()
    }

    /// `log σ(1 − v)` for `v ∈ (0, 1/2]`.
    pub fn log_sigma_refl(&self, v: f64) -> f64 {
        self.log_rho_refl(v) / self.beta
    }

    /// `v ∈ (0, 1/2)` with `log σ(1 − v) = level`, if `level > log σ(1/2)`.
    pub(crate) fn locate_log_sigma_refl(&self, level: f64) -> Option<f64> {
        if level <= self.log_sigma(0.5) {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..1100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_sigma_refl(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Location where `log σ` equals `level`, by bisection; `None` when the
    /// level is below `log σ(0+)`. Used for quadrature breakpoints only.
    pub(crate) fn locate_log_sigma(&self, level: f64) -> Option<f64> {
        if level <= self.log_sigma0() {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.log_sigma(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("u in (0,1) required, got {u}")))
    }
}

/// `ρ(u) = sin(απu)^α sin((1−α)πu)^{1−α} / sin(πu)`.
pub fn rho(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.rho(u))
}

pub fn log_rho(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.log_rho(u))
}

/// `σ_α(u) = ρ(u)^{1/(1−α)}`.
pub fn sigma(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.sigma(u))
}

pub fn log_sigma(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.log_sigma(u))
}

pub fn sigma_prime(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.sigma_prime(u))
}

pub fn sigma_second(u: f64, alpha: f64) -> Result<f64> {
    check_u(u)?;
    Ok(Kernel::new(alpha)?.sigma_second(u))
}

/// `∫_a^b f(log σ(u), log σ(u) − log σ(0+)) du` for `0 ≤ a ≤ b ≤ 1`.
///
/// The part above `1/2` is integrated in `v = 1 − u`, which resolves the
/// blow-up of `σ` at one. `level` marks where `log σ` crosses a feature of
/// the integrand and becomes a breakpoint.
pub(crate) fn integrate_in_sigma<F: Fn(f64, f64) -> f64>(
    k: &Kernel,
    a: f64,
    b: f64,
    level: Option<f64>,
    quad: &QuadratureSpec,
    f: F,
) -> Result<Integral> {
    let ls0 = k.log_sigma0();
    let left = if a < 0.5 { Some((a, b.min(0.5))) } else { None };
    let right = if b > 0.5 { Some((1.0 - b, 1.0 - a.max(0.5))) } else { None };
    let mut peak_u: Vec<f64> = level.and_then(|l| k.locate_log_sigma(l)).filter(|&u| u < 0.5).into_iter().collect();
    if let Some(l) = level.filter(|&l| l <= ls0) {
        // mode at 0+: the integrand decays once (σ/σ(0+) − 1) e^{ls0 − l} ~ 1,
        // where log σ − log σ(0+) ≈ c u² for small u
        let c = k.coef[0] / k.beta;
        let scale = (ls0 - l).exp();
        for t in [1.0, 64.0] {
            let u = (t / (scale * c)).sqrt();
            if u < 0.5 {
                peak_u.push(u);
            }
        }
    }
    let peak_v = level.and_then(|l| k.locate_log_sigma_refl(l));
    // the peak is only a few units wide in log σ, which is narrow next to
    // the panel when it sits close to an end of the range
    let around = |p: f64| [0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0, 16.0].map(|m| m * p);
    if let Some(p) = peak_u.first().copied().filter(|_| level.map_or(false, |l| l > ls0)) {
        peak_u.extend(around(p).into_iter().filter(|&u| u < 0.5));
    }
    let peak_v_br: Vec<f64> = peak_v.map(|p| around(p).into_iter().filter(|&v| v < 0.5).collect()).unwrap_or_default();
    let run_left = |spec: &QuadratureSpec| -> Result<Option<Integral>> {
        match left {
            Some((lo, hi)) if hi > lo => {
                let br = breakpoints(lo, hi, &peak_u);
                integrate(|u| f(k.log_sigma(u), k.log_sigma_excess(u)), &br, spec).map(Some)
            }
            _ => Ok(None),
        }
    };
    let run_right = |spec: &QuadratureSpec| -> Result<Option<Integral>> {
        match right {
            Some((lo, hi)) if hi > lo => {
                let br = breakpoints(lo, hi, &peak_v_br);
                integrate(
                    |v| {
                        if v <= 0.0 {
                            return f(f64::INFINITY, f64::INFINITY);
                        }
                        let ls = k.log_sigma_refl(v);
                        f(ls, ls - ls0)
                    },
                    &br,
                    spec,
                )
                .map(Some)
            }
            _ => Ok(None),
        }
    };
    // the side holding the feature first; the other only needs to be
    // accurate relative to it
    let (first, second) = if peak_v.is_some() {
        let r = run_right(quad)?;
        let floor = r.as_ref().map_or(0.0, |i| 0.5 * quad.rel_tol * i.value.abs());
        let spec = QuadratureSpec { abs_tol: quad.abs_tol.max(floor), ..*quad };
        (r, run_left(&spec)?)
    } else {
        let l = run_left(quad)?;
        let floor = l.as_ref().map_or(0.0, |i| 0.5 * quad.rel_tol * i.value.abs());
        let spec = QuadratureSpec { abs_tol: quad.abs_tol.max(floor), ..*quad };
        (l, run_right(&spec)?)
    };
    let mut out = Integral { value: 0.0, error: 0.0, evals: 0, panels: Vec::new() };
    for part in [first, second].into_iter().flatten() {
        out.value += part.value;
        out.error += part.error;
        out.evals += part.evals;
        out.panels.extend(part.panels);
    }
    Ok(out)
}

/// `(log ∫_a^b f du, evals)` for an integrand decaying like
/// `exp(−e^{ln_scale} (σ/σ(0+) − 1))` away from `u = 0`. When that window is
/// too narrow to resolve, or its mass underflows, the integral is taken in
/// `u = λw` with `λ = (e^{ln_scale} c)^{−1/2}`; the range beyond `w = 48`
/// and above `u = 1/2` then carries a relative weight below `e^{−2000}`.
pub(crate) fn log_integrate_in_sigma<F: Fn(f64, f64) -> f64>(
    k: &Kernel,
    a: f64,
    b: f64,
    level: f64,
    ln_scale: f64,
    quad: &QuadratureSpec,
    f: F,
) -> Result<(f64, usize)> {
    let ln_lam = -0.5 * (ln_scale + (k.coef[0] / k.beta).ln());
    if a == 0.0 && ln_lam < -14.0 {
        let lam = ln_lam.exp();
        let top = (b.min(0.5) / lam).min(48.0);
        let br = breakpoints(0.0, top, &[1.0, 4.0]);
        let res = integrate(|w| f(k.log_sigma(lam * w), k.log_sigma_excess(lam * w)), &br, quad)?;
        return Ok((res.value.ln() + ln_lam, res.evals));
    }
    let res = integrate_in_sigma(k, a, b, Some(level), quad, f)?;
    Ok((res.value.ln(), res.evals))
}

/// Density of the standard stable(α) law with Laplace transform `e^{-u^α}`.
pub fn phi_alpha(x: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(log_phi_alpha(x, &Kernel::new(alpha)?, quad)?.exp())
}

/// Logarithm of [`phi_alpha`].
pub fn log_phi_alpha(x: f64, k: &Kernel, quad: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("x > 0 required, got {x}")));
    }
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let r = k.r;
    let lx = x.ln();
    let level = r * lx;
    let ls0 = k.log_sigma0();
    let res = if ls0 < level {
        // relative to the maximum ln r − ln x − 1, free of cancellation
        let g_max = r.ln() - lx - 1.0;
        let res = integrate_in_sigma(k, 0.0, 1.0, Some(level), quad, |ls, _| {
            let d = ls - level;
            if d == f64::INFINITY {
                0.0
            } else {
                (d - d.exp_m1()).exp()
            }
        })?;
        g_max + res.value.ln()
    } else {
        let g0 = r.ln() + ls0 - (r + 1.0) * lx - (ls0 - level).exp();
        let (li, _) = log_integrate_in_sigma(k, 0.0, 1.0, level, ls0 - level, quad, |_, e| {
            if e == f64::INFINITY {
                0.0
            } else {
                (e - scaled_expm1(ls0 - level, e)).exp()
            }
        })?;
        g0 + li
    };
    Ok(res)
}

/// Density of `S_t` for the stable subordinator with parameters `params`.
pub fn stable_density(x: f64, t: f64, params: &StableParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    let a = params.alpha();
    let scale_ln = -(params.theta() * t).ln() / a;
    let k = Kernel::new(a)?;
    Ok((log_phi_alpha(x * scale_ln.exp(), &k, quad)? + scale_ln).exp())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("t > 0 required, got {t}")))
    }
}

/// `P[S_t ≤ x]` via `∫₀¹ exp(−σ(u) y^{−r}) du`, `y = x (θt)^{−1/α}`.
pub fn stable_cdf(x: f64, t: f64, params: &StableParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let k = Kernel::new(params.alpha())?;
    let ly = x.ln() - (params.theta() * t).ln() / params.alpha();
    Ok(log_standard_cdf(ly, &k, quad)?.exp())
}

/// `P[S_t > x]`, accurate in the upper tail.
pub fn stable_sf(x: f64, t: f64, params: &StableParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let k = Kernel::new(params.alpha())?;
    let ly = x.ln() - (params.theta() * t).ln() / params.alpha();
    standard_sf(ly, &k, quad)
}

/// `e^{ln_a} (e^e − 1)` for `e ≥ 0`, finite whenever the product is, even
/// when one of the factors alone overflows or underflows.
pub(crate) fn scaled_expm1(ln_a: f64, e: f64) -> f64 {
    let (a, x) = (ln_a.exp(), e.exp_m1());
    if a.is_finite() && a > 0.0 && x.is_finite() {
        a * x
    } else if e == 0.0 {
        0.0
    } else if e == f64::INFINITY {
        f64::INFINITY
    } else {
        let ln_x = if e > 1.0 { e + (-(-e).exp()).ln_1p() } else { x.ln() };
        (ln_a + ln_x).exp()
    }
}

/// Log of the standard stable CDF at `e^{ly}`.
pub fn log_standard_cdf(ly: f64, k: &Kernel, quad: &QuadratureSpec) -> Result<f64> {
    let level = k.r * ly;
    let ln_a = k.log_sigma0() - level;
    let (li, _) = log_integrate_in_sigma(k, 0.0, 1.0, level, ln_a, quad, |_, e| (-scaled_expm1(ln_a, e)).exp())?;
    Ok(-ln_a.exp() + li)
}

/// Standard stable survival function at `e^{ly}`.
pub fn standard_sf(ly: f64, k: &Kernel, quad: &QuadratureSpec) -> Result<f64> {
    let level = k.r * ly;
    let res = integrate_in_sigma(k, 0.0, 1.0, Some(level), quad, |ls, _| -(-(ls - level).exp()).exp_m1())?;
    Ok(res.value)
}

/// Lévy tail `ν((x,∞)) = x^{−α} θ / Γ(1−α)`.
pub fn levy_tail(x: f64, params: &StableParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("x > 0 required, got {x}")));
    }
    let a = params.alpha();
    Ok((-a * x.ln() + params.theta().ln() - ln_gamma(1.0 - a)).exp())
}

/// `E[S_t^η] = (tθ)^{η/α} Γ(1−η/α) / Γ(1−η)`, finite iff `η < α`.
pub fn mellin_moment(eta: f64, t: f64, params: &StableParams) -> Result<f64> {
    check_time(t)?;
    let a = params.alpha();
    if !(eta < a) {
        return Err(domain(format!("moment of order {eta} is infinite for alpha = {a}")));
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    Ok(((eta / a) * (t * params.theta()).ln() + ln_gamma(1.0 - eta / a) - ln_gamma(1.0 - eta)).exp())
}

/// Mixture weights of the undershoot proposal at scale `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureWeight {
    /// `log p′`.
    pub log_pprime: f64,
    /// `p = p′/(p′+1)`.
    pub p: f64,
    pub evals: usize,
}

impl MixtureWeight {
    pub fn pprime(&self) -> f64 {
        self.log_pprime.exp()
    }
}

/// `log ∫₀¹ exp(−σ(y) s^{−r}) dy + σ(0+) s^{−r}`.
fn log_mass_exp_shifted(k: &Kernel, ln_s: f64, quad: &QuadratureSpec) -> Result<(f64, usize)> {
    let level = k.r * ln_s;
    let ln_a = k.log_sigma0() - level;
    log_integrate_in_sigma(k, 0.0, 1.0, level, ln_a, quad, |_, e| (-scaled_expm1(ln_a, e)).exp())
}

/// Maximum of `log f̃` over (0,1), attained at `z` (or at `0+` when `z = 0`).
pub(crate) fn log_ftilde_max(k: &Kernel, level: f64) -> f64 {
    let peak = k.alpha.ln() + level;
    if peak >= k.log_sigma0() {
        k.alpha * peak - k.alpha
    } else {
        let ls = k.log_sigma0();
        k.alpha * ls - (ls - level).exp()
    }
}

/// `log f̃ − log_ftilde_max` from `log σ` and its excess over `log σ(0+)`,
/// computed without cancellation between the two large terms.
pub(crate) fn log_ftilde_rel_parts(k: &Kernel, level: f64, ls: f64, e: f64) -> f64 {
    if ls == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let peak = k.alpha.ln() + level;
    if peak >= k.log_sigma0() {
        let d = ls - peak;
        k.alpha * (d - d.exp_m1())
    } else {
        k.alpha * e - scaled_expm1(k.log_sigma0() - level, e)
    }
}

/// `log ∫_a^b f̃ − log_ftilde_max`, or `-∞` for an empty interval.
fn log_mass_ftilde_rel(k: &Kernel, ln_s: f64, a: f64, b: f64, quad: &QuadratureSpec) -> Result<(f64, usize)> {
    if !(b > a) {
        return Ok((f64::NEG_INFINITY, 0));
    }
    let level = k.r * ln_s;
    let peak = k.alpha.ln() + level;
    let ln_big = k.log_sigma0() - level;
    log_integrate_in_sigma(k, a, b, peak, ln_big, quad, |ls, e| log_ftilde_rel_parts(k, level, ls, e).exp())
}

/// `log_ftilde_max + σ(0+) s^{−r}`, free of the overflow in either term.
fn log_ftilde_max_shifted(k: &Kernel, level: f64) -> f64 {
    let peak = k.alpha.ln() + level;
    let ls0 = k.log_sigma0();
    if peak >= ls0 {
        k.alpha * peak - k.alpha + (ls0 - level).exp()
    } else {
        k.alpha * ls0
    }
}

/// Mixture weight `p′` and `p` at `s = e^{ln_s}`.
pub fn mixture_weight_ln(k: &Kernel, ln_s: f64, quad: &QuadratureSpec) -> Result<MixtureWeight> {
    let a = k.alpha;
    let r = k.r;
    // both masses carry the factor exp(−σ(0+) s^{−r}); it cancels
    let (l1, e1) = log_mass_exp_shifted(k, ln_s, quad)?;
    let (l2, e2) = log_mass_ftilde_rel(k, ln_s, 0.0, 1.0, quad)?;
    let l2 = l2 + log_ftilde_max_shifted(k, r * ln_s);
    let log_pprime = -a * (2.0 - 2f64.powf(a)).ln() - a * r.ln() + a * r * ln_s + l1 - ln_gamma(1.0 - a) - l2;
    let p = crate::special::logistic(log_pprime);
    Ok(MixtureWeight { log_pprime, p, evals: e1 + e2 })
}

/// Mixture weight `p′` and `p` of the undershoot proposal.
pub fn mixture_weight_pprime(s: f64, alpha: f64, quad: &QuadratureSpec) -> Result<MixtureWeight> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("s > 0 required, got {s}")));
    }
    mixture_weight_ln(&Kernel::new(alpha)?, s.ln(), quad)
}

/// Region weights of the second mixture component, stored as
/// `exp(log_scale) * scaled[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWeights {
    pub log_scale: f64,
    pub scaled: [f64; 3],
    pub evals: usize,
}

impl RegionWeights {
    /// The weights themselves; may overflow for extreme parameters.
    pub fn absolute(&self) -> [f64; 3] {
        let c = self.log_scale.exp();
        [self.scaled[0] * c, self.scaled[1] * c, self.scaled[2] * c]
    }

    /// Normalized weights summing to one.
    pub fn normalized(&self) -> [f64; 3] {
        let t: f64 = self.scaled.iter().sum();
        [self.scaled[0] / t, self.scaled[1] / t, self.scaled[2] / t]
    }
}

pub(crate) fn region_weights_ln(
    k: &Kernel,
    ln_s: f64,
    z: f64,
    z_star: f64,
    quad: &QuadratureSpec,
) -> Result<RegionWeights> {
    if !(0.0 <= z_star && z_star <= z && z <= 1.0) {
        return Err(domain(format!("0 <= z_star <= z <= 1 required, got z_star={z_star}, z={z}")));
    }
    let (l0, e0) = log_mass_ftilde_rel(k, ln_s, 0.0, z_star, quad)?;
    let (l1, e1) = log_mass_ftilde_rel(k, ln_s, z_star, z, quad)?;
    let (l2, e2) = log_mass_ftilde_rel(k, ln_s, z, 1.0, quad)?;
    let m = l0.max(l1).max(l2);
    let sc = |l: f64| {
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            (l - m).exp()
        }
    };
    let log_scale = log_ftilde_max(k, k.r * ln_s) + m;
    Ok(RegionWeights { log_scale, scaled: [sc(l0), sc(l1), sc(l2)], evals: e0 + e1 + e2 })
}

/// `W0 = ∫₀^{z*} f̃`, `W1 = ∫_{z*}^{z} f̃`, `W2 = ∫_z^1 f̃` with
/// `f̃(y) = σ(y)^α exp(−σ(y) s^{−r})`.
pub fn psi2_region_weights(s: f64, alpha: f64, z: f64, z_star: f64, quad: &QuadratureSpec) -> Result<RegionWeights> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("s > 0 required, got {s}")));
    }
    region_weights_ln(&Kernel::new(alpha)?, s.ln(), z, z_star, quad)
}

/// `log(e^a − e^b)` for `a ≥ b`.
pub(crate) fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

#[allow(dead_code)]
pub(crate) fn log_sum(a: f64, b: f64) -> f64 {
    log_add_exp(a, b)
}
