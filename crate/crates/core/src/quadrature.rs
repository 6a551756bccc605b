//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with an `order`-point rule and a companion rule
//! of half the order; the difference serves as the panel error estimate.
//! The panel with the largest estimate is bisected until the summed
//! estimate drops below the relative tolerance, or the evaluation budget is
//! exhausted, in which case an explicit error is returned. Integrands are
//! only ever evaluated at interior nodes.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{numeric, Error, Result};

/// Tolerance and budget of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Points of the main rule; the error companion uses `order / 2`.
    pub order: usize,
    pub rel_tol: f64,
    /// Absolute floor on the summed error estimate.
    pub abs_tol: f64,
    /// Hard cap on integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { order: 32, rel_tol: 1e-12, abs_tol: 0.0, max_evals: 1 << 16 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 4 || self.order % 2 != 0 {
            return Err(Error::Domain(format!("quadrature order must be even and >= 4, got {}", self.order)));
        }
        if !(self.rel_tol > 0.0) || self.abs_tol < 0.0 {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        if self.max_evals < self.order + self.order / 2 {
            return Err(Error::Domain("quadrature cap below the cost of one panel".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared, lazily built rule.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(rule) = cache.read().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::new(n));
        cache.write().unwrap().entry(n).or_insert(rule).clone()
    }

    /// Applies the rule on [a, b].
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        self.apply_abs(f, a, b).0
    }

    /// The rule applied to `f` and to `|f|`.
    pub fn apply_abs<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let (mut s, mut sa) = (0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(c + h * x);
            s += w * v;
            sa += w * v.abs();
        }
        (s * h, sa * h)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One accepted panel of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub panels: Vec<Panel>,
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, never splitting a panel
/// across an interior breakpoint.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    let hi_rule = GaussLegendre::cached(spec.order);
    let lo_rule = GaussLegendre::cached(spec.order / 2);
    let mut evals = 0usize;
    let eval_panel = |f: &mut F, a: f64, b: f64, evals: &mut usize| -> Result<Panel> {
        let (hi, habs) = hi_rule.apply_abs(f, a, b);
        let lo = lo_rule.apply(f, a, b);
        *evals += spec.order + spec.order / 2;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(numeric(format!("non-finite integrand on [{a}, {b}]")));
        }
        let mut error = (hi - lo).abs();
        // differences at rounding level carry no information
        if error <= 50.0 * f64::EPSILON * habs {
            error = 0.0;
        }
        Ok(Panel { a, b, value: hi, error })
    };

    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b >= a) {
            return Err(Error::Domain(format!("breakpoints not sorted: {a} > {b}")));
        }
        if b > a {
            panels.push(eval_panel(&mut f, a, b, &mut evals)?);
        }
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= (spec.rel_tol * total.abs()).max(spec.abs_tol) {
            return Ok(Integral { value: total, error: err, evals, panels });
        }
        let (idx, _) =
            panels.iter().enumerate().filter(|(_, p)| splittable(p)).fold((usize::MAX, -1.0), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        if idx == usize::MAX {
            // nothing left to refine at double resolution
            return Ok(Integral { value: total, error: err, evals, panels });
        }
        if evals + 2 * (spec.order + spec.order / 2) > spec.max_evals {
            return Err(numeric(format!(
                "quadrature did not reach relative tolerance {:e} within {} evaluations (estimate {:e}, error {:e})",
                spec.rel_tol, spec.max_evals, total, err
            )));
        }
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        panels.push(eval_panel(&mut f, p.a, m, &mut evals)?);
        panels.push(eval_panel(&mut f, m, p.b, &mut evals)?);
    }
}

fn splittable(p: &Panel) -> bool {
    let m = 0.5 * (p.a + p.b);
    m > p.a && m < p.b && (p.b - p.a) > 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs())
}

/// Integral of `exp(g(x))` returned as its logarithm. `g_max` must bound `g`
/// from above (or be close to its maximum) so that the scaled integrand stays
/// in floating range.
pub fn integrate_log<G: FnMut(f64) -> f64>(
    mut g: G,
    g_max: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, Integral)> {
    let res = integrate(|x| (g(x) - g_max).exp(), breaks, spec)?;
    Ok((g_max + res.value.ln(), res))
}

/// Sorted, deduplicated breakpoints clipped to `[a, b]`.
pub(crate) fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut v = vec![a];
    let mut inner: Vec<f64> = interior.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    v.extend(inner);
    v.push(b);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(16);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 31 is the exactness limit of a 16-point rule
        let v = rule.apply(&mut |x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_resolves_narrow_peak() {
        let spec = QuadratureSpec::default();
        let w = 1e-4;
        let res = integrate(|x: f64| (-((x - 0.3) / w).powi(2)).exp(), &[0.0, 0.29, 0.3, 0.31, 1.0], &spec).unwrap();
        let exact = w * std::f64::consts::PI.sqrt();
        assert!(((res.value - exact) / exact).abs() < 1e-11, "{} vs {}", res.value, exact);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadratureSpec { max_evals: 200, ..Default::default() };
        let res = integrate(|x: f64| (1.0 / x).sin() / x.sqrt(), &[0.0, 1.0], &spec);
        assert!(matches!(res, Err(Error::Numeric(_))));
    }

    #[test]
    fn log_integral_of_huge_scale() {
        let spec = QuadratureSpec::default();
        let (l, _) = integrate_log(|x| 2000.0 - x, 2000.0, &[0.0, 1.0], &spec).unwrap();
        let exact = 2000.0 + (1.0 - (-1f64).exp()).ln();
        assert!((l - exact).abs() < 1e-12);
    }
}
