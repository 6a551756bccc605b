//! Root finding for monotone functions.
//!
//! [`nr_invert`] halves a bracket until an auxiliary bound certifies that
//! Newton's method converges quadratically from the current point, then
//! runs Newton. [`householder4_invert`] is the fourth-order Householder
//! iteration used by the direct-inversion reference samplers. The specific
//! inverters needed by the undershoot sampler live at the bottom.

use crate::boundary::Boundary;
use crate::error::{domain, numeric, Error, Result};
use crate::params::Precision;
use crate::special::PI;
use crate::zolotarev::Kernel;

/// Outcome of an inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub bisection_steps: u32,
    pub newton_steps: u32,
    /// Start point and bracket half-width at which the basin was certified.
    pub basin: Option<(f64, f64)>,
}

/// An increasing function on `[lo, hi]` with a root inside.
pub trait MonotoneObjective {
    fn domain(&self) -> (f64, f64);
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Bound on `sup|f''| / (2 inf|f'|)` over `[lo, x0]`, where `lo` is the
    /// lower end of the bracket known to contain the root.
    fn basin_bound(&self, lo: f64, x0: f64) -> f64;
}

/// Guarded Newton–Raphson inversion.
///
/// Starting at the top of the domain, the bracket `[x0 − w 2^{1−k}, x0]` is
/// halved until `w 2^{1−k} M < 1/2`, then Newton iterates until the update
/// is at most `2^{−N}`. Failing to certify the basin within `N` halvings is
/// reported, never silently degraded.
pub fn nr_invert<O: MonotoneObjective + ?Sized>(obj: &O, precision: Precision) -> Result<RootResult> {
    let (lo, hi) = obj.domain();
    let w = hi - lo;
    if !(w > 0.0) {
        return Err(domain(format!("empty domain [{lo}, {hi}]")));
    }
    let (flo, fhi) = (obj.value(lo), obj.value(hi));
    if flo > 0.0 || fhi < 0.0 {
        return Err(domain(format!("no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})")));
    }
    if flo == 0.0 {
        return Ok(RootResult { root: lo, bisection_steps: 0, newton_steps: 0, basin: None });
    }
    if fhi == 0.0 {
        return Ok(RootResult { root: hi, bisection_steps: 0, newton_steps: 0, basin: None });
    }
    let n = precision.bits();
    let mut x0 = hi;
    let mut k: u32 = 1;
    let mut steps = 0u32;
    loop {
        if steps >= n {
            return Err(Error::Certified {
                what: format!("basin condition unmet near x = {x0} on [{lo}, {hi}]"),
                steps,
            });
        }
        steps += 1;
        let probe = x0 - w * 2f64.powi(-(k as i32));
        let fp = obj.value(probe);
        if fp == 0.0 {
            return Ok(RootResult { root: probe, bisection_steps: steps, newton_steps: 0, basin: None });
        }
        if fp > 0.0 {
            x0 = probe;
        }
        k += 1;
        let half = w * 2f64.powi(1 - k as i32);
        let m = obj.basin_bound((x0 - half).max(lo), x0);
        if m.is_finite() && m >= 0.0 && half * m < 0.5 {
            break;
        }
    }
    let half = w * 2f64.powi(1 - k as i32);
    let basin = Some((x0, half));
    let mut br = ((x0 - half).max(lo), x0);
    let tol = precision.tol();
    let mut x = x0;
    let mut newton = 0u32;
    let mut prev = f64::NAN;
    for _ in 0..200 {
        let f = obj.value(x);
        if f == 0.0 {
            return Ok(RootResult { root: x, bisection_steps: steps, newton_steps: newton, basin });
        }
        if f > 0.0 {
            br.1 = br.1.min(x);
        } else {
            br.0 = br.0.max(x);
        }
        // evaluation noise can keep Newton hopping between neighbours of
        // the root; a bracket this narrow already pins it down
        if br.1 - br.0 <= tol.max(4.0 * f64::EPSILON * x.abs()) {
            return Ok(RootResult { root: 0.5 * (br.0 + br.1), bisection_steps: steps, newton_steps: newton, basin });
        }
        let d = obj.derivative(x);
        let mut next = x - f / d;
        // a return to the previous iterate is a noise-driven 2-cycle
        if !(next >= br.0 && next <= br.1) || !next.is_finite() || next == prev {
            next = 0.5 * (br.0 + br.1);
        }
        prev = x;
        let dx = (next - x).abs();
        if dx <= tol.max(2.0 * f64::EPSILON * x.abs()) {
            return Ok(RootResult { root: next, bisection_steps: steps, newton_steps: newton, basin });
        }
        newton += 1;
        x = next;
    }
    Err(numeric(format!("Newton iteration stalled near {x}")))
}

/// [`nr_invert`] for targets already validated to lie in the range of `f`:
/// an endpoint is returned when rounding puts the root just outside.
fn nr_invert_clamped<O: MonotoneObjective + ?Sized>(obj: &O, precision: Precision) -> Result<RootResult> {
    let (lo, hi) = obj.domain();
    let done = |root| Ok(RootResult { root, bisection_steps: 0, newton_steps: 0, basin: None });
    if obj.value(hi) <= 0.0 {
        return done(hi);
    }
    if obj.value(lo) >= 0.0 {
        return done(lo);
    }
    nr_invert(obj, precision)
}

/// A function with derivatives up to order four, increasing on a bracket
/// that contains its root.
pub trait SmoothObjective {
    /// `[f, f', f'', f''', f'''']` at `x`.
    fn derivs(&self, x: f64) -> [f64; 5];
    fn bracket(&self) -> (f64, f64);
}

/// Derivatives of `1/f` of orders three and four from those of `f`.
fn reciprocal_derivs(d: &[f64; 5]) -> (f64, f64) {
    const BINOM: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut h = [0.0; 5];
    h[0] = 1.0 / d[0];
    for m in 1..5 {
        let mut s = 0.0;
        for j in 0..m {
            s += BINOM[m][j] * h[j] * d[m - j];
        }
        h[m] = -s * h[0];
    }
    (h[3], h[4])
}

/// Householder iteration of order four, `x ← x + 4 g₃(x)/g₄(x)` with
/// `g_m = (1/f)^{(m)}`, safeguarded by bisection of the supplied bracket.
pub fn householder4_invert<O: SmoothObjective + ?Sized>(obj: &O, x0: f64, precision: Precision) -> Result<RootResult> {
    let (mut a, mut b) = obj.bracket();
    if !(b > a) {
        return Err(domain("empty bracket"));
    }
    let tol = precision.tol();
    let mut x = x0.clamp(a, b);
    let cap = precision.bits().max(8) * 2;
    for it in 0..cap {
        let d = obj.derivs(x);
        if d.iter().any(|v| v.is_nan()) {
            return Err(numeric(format!("derivative evaluation failed at {x}")));
        }
        if d[0] == 0.0 {
            return Ok(RootResult { root: x, bisection_steps: 0, newton_steps: it, basin: None });
        }
        if d[0] > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let (g3, g4) = reciprocal_derivs(&d);
        let mut next = x + 4.0 * g3 / g4;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= tol.max(2.0 * f64::EPSILON * x.abs()) || b - a <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(RootResult { root: next, bisection_steps: 0, newton_steps: it + 1, basin: None });
        }
        x = next;
    }
    Err(numeric(format!("Householder iteration exceeded {cap} steps near {x}")))
}

// ---------------------------------------------------------------------------
// Specific inverters

struct LogRhoObjective<'a> {
    k: &'a Kernel,
    lo: f64,
    hi: f64,
    /// Target for `log ρ − log ρ(0+)`.
    target_excess: f64,
}

impl MonotoneObjective for LogRhoObjective<'_> {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn value(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return f64::INFINITY;
        }
        self.k.log_rho_excess(x) - self.target_excess
    }
    fn derivative(&self, x: f64) -> f64 {
        self.k.log_rho_derivs(x)[0]
    }
    fn basin_bound(&self, lo: f64, x0: f64) -> f64 {
        if lo >= 0.5 {
            // on [1/2, 1) both log ρ' and log ρ'' increase, so the ratio is
            // bounded by its value at the bracket ends; the global bound
            // below degrades like (1 − x)^{-2} and never certifies near 1
            let [d1lo, d2lo, _] = self.k.log_rho_derivs(lo);
            let [_, d2hi, _] = self.k.log_rho_derivs(x0);
            return d2lo.abs().max(d2hi.abs()) / (2.0 * d1lo);
        }
        let a = self.k.alpha();
        1.0 / (2.0 * PI * a * (1.0 - a) * lo * x0 * x0 * (1.0 - x0) * (1.0 - x0))
    }
}

/// Solves `log σ(z) = ln_target`; the target must exceed `log σ(0+)`.
pub fn invert_log_sigma(k: &Kernel, ln_target: f64, precision: Precision) -> Result<RootResult> {
    let excess = (ln_target - k.log_sigma0()) * k.beta();
    if !(excess > 0.0) {
        return Err(domain(format!(
            "target {ln_target} (log) does not exceed log sigma(0+) = {}; take z = 0",
            k.log_sigma0()
        )));
    }
    nr_invert(&LogRhoObjective { k, lo: 0.0, hi: 1.0, target_excess: excess }, precision)
}

/// `z` with `σ_α(z) = target`.
pub fn invert_sigma(alpha: f64, target: f64, precision: Precision) -> Result<f64> {
    if !(target > 0.0) {
        return Err(domain(format!("target > 0 required, got {target}")));
    }
    Ok(invert_log_sigma(&Kernel::new(alpha)?, target.ln(), precision)?.root)
}

struct USigmaObjective<'a> {
    k: &'a Kernel,
    z_star: f64,
    log_sigma_zs: f64,
    y: f64,
    m_prefactor: f64,
}

impl USigmaObjective<'_> {
    fn scaled(&self, u: f64) -> f64 {
        (self.k.alpha() * (self.k.log_sigma(u) - self.log_sigma_zs)).exp()
    }
}

impl MonotoneObjective for USigmaObjective<'_> {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.z_star)
    }
    fn value(&self, u: f64) -> f64 {
        u / self.z_star * self.scaled(u) - self.y
    }
    fn derivative(&self, u: f64) -> f64 {
        let l1 = self.k.log_sigma_derivs(u)[0];
        self.scaled(u) * (1.0 + self.k.alpha() * u * l1) / self.z_star
    }
    fn basin_bound(&self, _lo: f64, x0: f64) -> f64 {
        let a = self.k.alpha();
        let [l1, l2, _] = self.k.log_sigma_derivs(x0);
        // σ''/σ + (α−1)σ'²/σ² = L'' + α L'²
        self.m_prefactor * (1.0 + 0.5 * x0 * a * (l2 + a * l1 * l1))
    }
}

/// `u ∈ (0, z*)` with `u σ(u)^α = y z* σ(z*)^α`.
pub fn invert_u_sigma_alpha_k(k: &Kernel, z_star: f64, y: f64, precision: Precision) -> Result<RootResult> {
    if !(y > 0.0 && y < 1.0) {
        return Err(domain(format!("y in (0,1) required, got {y}")));
    }
    if !(z_star > 0.0 && z_star <= 0.5) {
        return Err(domain(format!("z_star in (0, 1/2] required, got {z_star}")));
    }
    let a = k.alpha();
    let obj = USigmaObjective {
        k,
        z_star,
        log_sigma_zs: k.log_sigma(z_star),
        y,
        m_prefactor: (a * (k.log_sigma(0.5) - k.log_sigma0())).exp(),
    };
    nr_invert_clamped(&obj, precision)
}

pub fn invert_u_sigma_alpha(alpha: f64, z_star: f64, y: f64, precision: Precision) -> Result<f64> {
    Ok(invert_u_sigma_alpha_k(&Kernel::new(alpha)?, z_star, y, precision)?.root)
}

/// `((1/2)^c − (1−x)^c)/c`, continuous at `c = 0`.
fn power_increment(c: f64, x: f64) -> f64 {
    let la = -std::f64::consts::LN_2;
    let lb = (1.0 - x).ln();
    if c == 0.0 {
        return la - lb;
    }
    (c * lb).exp() * (c * (la - lb)).exp_m1() / c
}

/// Coefficients `(sin(π(1−α)), πα(1−α)cos(πα))` of the D=1 proposal for α ≤ 1/2.
pub(crate) fn c1_coefficients(alpha: f64) -> (f64, f64) {
    ((PI * (1.0 - alpha)).sin(), PI * alpha * (1.0 - alpha) * (PI * alpha).cos())
}

/// `F(x) = sin(π(1−α))(1−r)^{−1}(1−x)^{1−r} + πα(1−α)cos(πα)(2−r)^{−1}(1−x)^{2−r}`,
/// decreasing on (1/2, 1) for α < 1/2.
pub fn f_c1(alpha: f64, x: f64) -> f64 {
    let r = alpha / (1.0 - alpha);
    let (a, b) = c1_coefficients(alpha);
    a / (1.0 - r) * (1.0 - x).powf(1.0 - r) + b / (2.0 - r) * (1.0 - x).powf(2.0 - r)
}

/// `F(1/2) − F(x)`, computed without cancellation.
pub(crate) fn f_c1_increment(alpha: f64, x: f64) -> f64 {
    let r = alpha / (1.0 - alpha);
    let (a, b) = c1_coefficients(alpha);
    a * power_increment(1.0 - r, x) + b * power_increment(2.0 - r, x)
}

struct FC1Objective {
    alpha: f64,
    r: f64,
    a: f64,
    b: f64,
    z: f64,
    target: f64,
    m: f64,
}

impl MonotoneObjective for FC1Objective {
    fn domain(&self) -> (f64, f64) {
        (0.5, self.z)
    }
    fn value(&self, x: f64) -> f64 {
        f_c1_increment(self.alpha, x) - self.target
    }
    fn derivative(&self, x: f64) -> f64 {
        (1.0 - x).powf(-self.r) * (self.a + self.b * (1.0 - x))
    }
    fn basin_bound(&self, _lo: f64, _x0: f64) -> f64 {
        self.m
    }
}

/// Inverse of the D=1 proposal CDF for α < 1/2 in terms of the increment
/// `F(1/2) − F(x) = target`.
pub(crate) fn invert_c1_increment(alpha: f64, z: f64, target: f64, precision: Precision) -> Result<RootResult> {
    let r = alpha / (1.0 - alpha);
    let (a, b) = c1_coefficients(alpha);
    let m = (1.0 - z).powf(-(r + 1.0)) * (r * a + b * (1.0 - r)) / (2f64.powf(r) * (a + b * (1.0 - z)));
    nr_invert_clamped(&FC1Objective { alpha, r, a, b, z, target, m }, precision)
}

/// `x ∈ (1/2, z)` with `F(x) = y`.
pub fn invert_f_c1(alpha: f64, z: f64, y: f64, precision: Precision) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(domain(format!("alpha in (0, 1/2) required, got {alpha}")));
    }
    if !(z > 0.5 && z < 1.0) {
        return Err(domain(format!("z in (1/2, 1) required, got {z}")));
    }
    let (fz, fh) = (f_c1(alpha, z), f_c1(alpha, 0.5));
    if !(y >= fz && y <= fh) {
        return Err(domain(format!("y must lie in [F(z), F(1/2)] = [{fz}, {fh}], got {y}")));
    }
    Ok(invert_c1_increment(alpha, z, fh - y, precision)?.root)
}

/// `u ∈ (1/2, z)` with `ρ(u)^{r−1} = ρ(1/2)^{r−1} + v (ρ(z)^{r−1} − ρ(1/2)^{r−1})`.
pub fn invert_rho_power_k(k: &Kernel, z: f64, v: f64, precision: Precision) -> Result<RootResult> {
    if !(v > 0.0 && v < 1.0) {
        return Err(domain(format!("v in (0,1) required, got {v}")));
    }
    if !(k.alpha() > 0.5) || !(z > 0.5 && z < 1.0) {
        return Err(domain("alpha > 1/2 and z in (1/2,1) required"));
    }
    let e = k.r() - 1.0;
    let lh = k.log_rho(0.5);
    let lz = k.log_rho(z);
    let d = e * (lz - lh);
    let target = lh + (v * d.exp_m1()).ln_1p() / e;
    let obj = LogRhoObjective { k, lo: 0.5, hi: z, target_excess: target - k.log_rho0() };
    nr_invert_clamped(&obj, precision)
}

pub fn invert_rho_power(alpha: f64, z: f64, v: f64, precision: Precision) -> Result<f64> {
    Ok(invert_rho_power_k(&Kernel::new(alpha)?, z, v, precision)?.root)
}

/// Solves `B(t) = e^{ln_v}` with `B(t) = t^{−1/α} b(t)`.
///
/// Works in `x = ln t`, where `ln B` is decreasing with slope at most `−1/α`;
/// uses the boundary's analytic inverse when it has one.
pub fn invert_boundary_ln(boundary: &Boundary, alpha: f64, ln_v: f64, precision: Precision) -> Result<RootResult> {
    if ln_v.is_nan() || ln_v == f64::NEG_INFINITY {
        return Err(domain("v > 0 required"));
    }
    if let Some(t) = boundary.analytic_inverse_ln(alpha, ln_v) {
        return Ok(RootResult { root: t, bisection_steps: 0, newton_steps: 0, basin: None });
    }
    let b0 = boundary.value(0.0);
    let tb = boundary.zero_time();
    let g = |x: f64| -> f64 {
        let t = x.exp();
        if t >= tb {
            return f64::NEG_INFINITY;
        }
        let b = boundary.value(t);
        if b <= 0.0 {
            return f64::NEG_INFINITY;
        }
        -x / alpha + b.ln() - ln_v
    };
    // B(t) ≤ t^{-1/α} b(0), so the root lies below x = α(ln b0 − ln v)
    let mut hi = alpha * (b0.ln() - ln_v);
    if tb.is_finite() {
        hi = hi.min(tb.ln());
    }
    let mut lo = hi - 1.0;
    let mut steps = 0u32;
    let floor = -1074.0 * std::f64::consts::LN_2;
    while g(lo) < 0.0 {
        let width = hi - lo;
        hi = lo;
        lo -= 2.0 * width;
        steps += 1;
        if lo < floor {
            return Err(numeric("boundary inverse below the smallest positive time"));
        }
    }
    let tol = precision.tol();
    let mut x = 0.5 * (lo + hi);
    let mut newton = 0;
    for _ in 0..400 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let t = x.exp();
        let b = boundary.value(t);
        let slope = -1.0 / alpha + t * boundary.derivative(t) / b;
        let mut next = x - gx / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
            steps += 1;
        } else {
            newton += 1;
        }
        let done = (next - x).abs() <= tol * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0);
        x = next;
        if done {
            break;
        }
    }
    Ok(RootResult { root: x.exp(), bisection_steps: steps, newton_steps: newton, basin: None })
}

/// `B^{-1}(v)` for `B(t) = t^{−1/α} b(t)`.
pub fn invert_boundary_b(boundary: &Boundary, alpha: f64, v: f64, precision: Precision) -> Result<f64> {
    if !(v > 0.0) {
        return Err(domain(format!("v > 0 required, got {v}")));
    }
    Ok(invert_boundary_ln(boundary, alpha, v.ln(), precision)?.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Affine(f64);
    impl MonotoneObjective for Affine {
        fn domain(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn value(&self, x: f64) -> f64 {
            x - self.0
        }
        fn derivative(&self, _x: f64) -> f64 {
            1.0
        }
        fn basin_bound(&self, _lo: f64, _x0: f64) -> f64 {
            0.0
        }
    }
    impl SmoothObjective for Affine {
        fn derivs(&self, x: f64) -> [f64; 5] {
            [x - self.0, 1.0, 0.0, 0.0, 0.0]
        }
        fn bracket(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    struct Square;
    impl MonotoneObjective for Square {
        fn domain(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn value(&self, x: f64) -> f64 {
            x * x - 0.25
        }
        fn derivative(&self, x: f64) -> f64 {
            2.0 * x
        }
        fn basin_bound(&self, lo: f64, _x0: f64) -> f64 {
            if lo <= 0.0 {
                f64::INFINITY
            } else {
                1.0 / (2.0 * lo)
            }
        }
    }

    struct Cube;
    impl MonotoneObjective for Cube {
        fn domain(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn value(&self, x: f64) -> f64 {
            x * x * x - 0.125
        }
        fn derivative(&self, x: f64) -> f64 {
            3.0 * x * x
        }
        fn basin_bound(&self, lo: f64, x0: f64) -> f64 {
            if lo <= 0.0 {
                f64::INFINITY
            } else {
                6.0 * x0 / (2.0 * 3.0 * lo * lo)
            }
        }
    }
    impl SmoothObjective for Cube {
        fn derivs(&self, x: f64) -> [f64; 5] {
            [x * x * x - 0.125, 3.0 * x * x, 6.0 * x, 6.0, 0.0]
        }
        fn bracket(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn affine_in_one_newton_step() {
        let res = nr_invert(&Affine(0.37), Precision::default()).unwrap();
        assert!((res.root - 0.37).abs() < 1e-16);
        assert_eq!(res.newton_steps, 1);
        let h = householder4_invert(&Affine(0.37), 0.9, Precision::default()).unwrap();
        assert!((h.root - 0.37).abs() < 1e-16);
        assert!(h.newton_steps <= 2);
    }

    #[test]
    fn square_root_half() {
        let res = nr_invert(&Square, Precision::default()).unwrap();
        assert!((res.root - 0.5).abs() <= 2f64.powi(-53));
        if let Some((x0, half)) = res.basin {
            assert!(half * Square.basin_bound(x0 - half, x0) < 0.5);
        }
        struct Fifth;
        impl MonotoneObjective for Fifth {
            fn domain(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
            fn value(&self, x: f64) -> f64 {
                x * x - 0.2
            }
            fn derivative(&self, x: f64) -> f64 {
                2.0 * x
            }
            fn basin_bound(&self, lo: f64, _x0: f64) -> f64 {
                if lo <= 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / (2.0 * lo)
                }
            }
        }
        let res = nr_invert(&Fifth, Precision::default()).unwrap();
        assert!((res.root - 0.2f64.sqrt()).abs() <= 2f64.powi(-52));
        let (x0, half) = res.basin.unwrap();
        assert!(half * Fifth.basin_bound(x0 - half, x0) < 0.5);
        assert!(res.newton_steps <= 8);
    }

    #[test]
    fn householder_agrees_with_newton() {
        let a = nr_invert(&Cube, Precision::default()).unwrap().root;
        let b = householder4_invert(&Cube, 0.9, Precision::default()).unwrap().root;
        assert!((a - b).abs() <= 2f64.powi(-50));
        assert!((a - 0.5).abs() <= 2f64.powi(-50));
    }

    #[test]
    fn certified_failure_is_explicit() {
        struct Bad;
        impl MonotoneObjective for Bad {
            fn domain(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
            fn value(&self, x: f64) -> f64 {
                x - 0.3
            }
            fn derivative(&self, _x: f64) -> f64 {
                1.0
            }
            fn basin_bound(&self, _lo: f64, _x0: f64) -> f64 {
                f64::INFINITY
            }
        }
        let err = nr_invert(&Bad, Precision::default()).unwrap_err();
        assert!(matches!(err, Error::Certified { steps: 53, .. }));
        assert!(nr_invert(&Affine(1.5), Precision::default()).is_err());
    }

    #[test]
    fn sigma_inverse_values() {
        let p = Precision::default();
        assert!((invert_sigma(0.5, 0.5, p).unwrap() - 0.5).abs() < 1e-15);
        for &a in &[0.2, 0.5, 0.8] {
            let k = Kernel::new(a).unwrap();
            for i in 0..40 {
                let y = k.sigma0() * 10f64.powf(0.01 + i as f64 * 0.25);
                let res = invert_log_sigma(&k, y.ln(), p).unwrap();
                let back = k.sigma(res.root);
                // conditioning of σ in z limits the round trip near z = 1
                let tol = 1e-12f64.max(8.0 * f64::EPSILON * res.root * k.log_sigma_derivs(res.root)[0]);
                assert!(((back - y) / y).abs() < tol, "a={a} y={y} back={back}");
                assert!(res.newton_steps <= (53f64.log2().ceil() as u32) + 2, "newton {}", res.newton_steps);
            }
        }
    }

    #[test]
    fn sigma_inverse_stress_near_zero() {
        let k = Kernel::new(0.5).unwrap();
        let target = k.sigma0() * (1.0 + 1e-9);
        let z = invert_sigma(0.5, target, Precision::default()).unwrap();
        assert!(z > 0.0 && z < 1e-3);
        assert!(((k.sigma(z) - target) / target).abs() < 1e-12);
        assert!(invert_sigma(0.5, k.sigma0() * 0.99, Precision::default()).is_err());
    }

    #[test]
    fn u_sigma_inverse() {
        let p = Precision::default();
        let k = Kernel::new(0.5).unwrap();
        let cdf = |u: f64| u * k.sigma(u).sqrt() / (0.5 * k.sigma(0.5).sqrt());
        let u = invert_u_sigma_alpha(0.5, 0.5, 0.5, p).unwrap();
        let oracle = bisect(|x| cdf(x) - 0.5, 0.0, 0.5);
        assert!((u - oracle).abs() < 2f64.powi(-40));
        let near = invert_u_sigma_alpha(0.5, 0.5, 1.0 - 1e-12, p).unwrap();
        assert!((near - 0.5).abs() < 1e-10);
        for &a in &[0.1, 0.6, 0.95] {
            let k = Kernel::new(a).unwrap();
            for &zs in &[0.01, 0.3, 0.5] {
                for i in 1..20 {
                    let y = i as f64 / 20.0;
                    let u = invert_u_sigma_alpha_k(&k, zs, y, p).unwrap().root;
                    let back = u / zs * (a * (k.log_sigma(u) - k.log_sigma(zs))).exp();
                    assert!((back - y).abs() < 1e-12, "a={a} zs={zs} y={y}");
                }
            }
        }
        assert!(invert_u_sigma_alpha(0.5, 0.5, 1.0, p).is_err());
    }

    #[test]
    fn f_c1_inverse() {
        let p = Precision::default();
        let (a, z) = (0.3, 0.9);
        assert!((invert_f_c1(a, z, f_c1(a, 0.5), p).unwrap() - 0.5).abs() < 1e-12);
        assert!((invert_f_c1(a, z, f_c1(a, z), p).unwrap() - z).abs() < 1e-12);
        for i in 1..20 {
            let y = f_c1(a, z) + (f_c1(a, 0.5) - f_c1(a, z)) * i as f64 / 20.0;
            let x = invert_f_c1(a, z, y, p).unwrap();
            assert!(((f_c1(a, x) - y) / y).abs() < 1e-12);
        }
        let (a, z) = (0.25, 0.8);
        let y = 0.5 * (f_c1(a, z) + f_c1(a, 0.5));
        let x = invert_f_c1(a, z, y, p).unwrap();
        let oracle = bisect(|x| y - f_c1(a, x), 0.5, z);
        assert!((x - oracle).abs() < 2f64.powi(-40));
        assert!(invert_f_c1(a, z, f_c1(a, 0.5) + 1.0, p).is_err());
        // the increment form stays accurate as r approaches 1
        let inc = f_c1_increment(0.5 - 1e-12, 0.9);
        assert!((inc - (0.5f64 / 0.1).ln()).abs() < 1e-9);
    }

    #[test]
    fn rho_power_inverse() {
        let p = Precision::default();
        let (a, z) = (0.75, 0.95);
        let k = Kernel::new(a).unwrap();
        let e = k.r() - 1.0;
        let cdf = |u: f64| (k.rho(u).powf(e) - k.rho(0.5).powf(e)) / (k.rho(z).powf(e) - k.rho(0.5).powf(e));
        let u = invert_rho_power(a, z, 0.5, p).unwrap();
        let oracle = bisect(|x| cdf(x) - 0.5, 0.5, z);
        assert!((u - oracle).abs() < 2f64.powi(-40));
        assert!((cdf(u) - 0.5).abs() < 1e-12);
        assert!((invert_rho_power(a, z, 1e-15, p).unwrap() - 0.5).abs() < 1e-10);
        assert!((invert_rho_power(a, z, 1.0 - 1e-15, p).unwrap() - z).abs() < 1e-10);
        assert!(invert_rho_power(a, z, 0.0, p).is_err());
    }

    #[test]
    fn boundary_inverse() {
        let p = Precision::default();
        let c = Boundary::constant(2.0).unwrap();
        let t = invert_boundary_b(&c, 0.5, 3.0, p).unwrap();
        assert!((t - (2.0f64 / 3.0).powf(0.5)).abs() < 1e-15);
        let lin = Boundary::linear(1.0, 0.5).unwrap();
        for &v in &[0.1, 1.0, 10.0, 1e6] {
            let t = invert_boundary_b(&lin, 0.5, v, p).unwrap();
            let back = t.powf(-2.0) * lin.value(t);
            assert!(((back - v) / v).abs() < 1e-10, "v={v} t={t}");
            assert!(t > 0.0 && t < 2.0);
        }
        assert!(invert_boundary_b(&lin, 0.5, 0.0, p).is_err());
    }
}
