//! Statistical and deterministic checks, reference samplers and work
//! benchmarks.
//!
//! * [`ks_two_sample`]: two-sample Kolmogorov–Smirnov test.
//! * [`DirectPsiSampler`]: samples the `y`-marginals of the two undershoot
//!   mixture components by inverting their CDFs, computed by quadrature,
//!   with order-four Householder steps. It is slow and only serves as a
//!   reference for the rejection samplers.
//! * [`bench_sweep`]: mean work counters and wall time over a parameter grid.
//! * [`invariant_grid_suite`]: the inequalities the samplers rely on,
//!   evaluated on fixed grids.

use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{domain, numeric, Result};
use crate::parallel::map_streams;
use crate::params::{Precision, StableParams, TemperedParams};
use crate::passage::{sfp_sample_with, tsffp_sample_with, PassageOptions};
use crate::quadrature::{integrate, GaussLegendre, QuadratureSpec};
use crate::rng::{RngStream, WorkCounters};
use crate::rootfind::{householder4_invert, SmoothObjective};
use crate::special::PI;
use crate::undershoot::{su_acceptance_ratio, UndershootContext};
use crate::zolotarev::{log_ftilde_rel_parts, log_standard_cdf, scaled_expm1, Kernel};

// ---------------------------------------------------------------------------
// Kolmogorov–Smirnov

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

impl KsResult {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Survival function of the Kolmogorov distribution, `P[K > λ]`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi form, fast for small λ
        let c = -PI * PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 0..20 {
            let j = (2 * k + 1) as f64;
            s += (c * j * j).exp();
        }
        return (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample KS test. The statistic is exact; the p-value is the
/// asymptotic one at effective size `nm/(n+m)`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(domain("both samples must be nonempty"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(domain("samples contain NaN"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(ne.sqrt() * d), n, m })
}

// ---------------------------------------------------------------------------
// Direct inversion

/// Which mixture component's `y`-marginal to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiComponent {
    /// Density `∝ exp(−σ(y) s^{−r})`.
    First,
    /// Density `∝ σ(y)^α exp(−σ(y) s^{−r})`.
    Second,
}

/// CDF-inversion sampler for a `y`-marginal. The adaptive quadrature of the
/// full density is kept as a panel table; each CDF evaluation adds one
/// Gauss–Legendre integral over part of a panel.
#[derive(Debug, Clone)]
pub struct DirectPsiSampler {
    which: PsiComponent,
    k: Kernel,
    level: f64,
    /// `(a, b, mass of [0, a])` per panel.
    table: Vec<(f64, f64, f64)>,
    total: f64,
    rule_order: usize,
    precision: Precision,
}

struct CdfObjective<'a> {
    s: &'a DirectPsiSampler,
    panel: usize,
    target: f64,
}

impl SmoothObjective for CdfObjective<'_> {
    fn derivs(&self, y: f64) -> [f64; 5] {
        let s = self.s;
        let (a, _, below) = s.table[self.panel];
        let rule = GaussLegendre::cached(s.rule_order);
        let part = rule.apply(&mut |u| s.density(u), a, y);
        let f0 = below + part - self.target;
        let [g0, g1, g2, g3] = s.log_density_derivs(y);
        let f = g0.exp();
        if f == 0.0 || !f.is_finite() {
            return [f0, 0.0, 0.0, 0.0, 0.0];
        }
        [f0, f, f * g1, f * (g1 * g1 + g2), f * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3)]
    }

    fn bracket(&self) -> (f64, f64) {
        let (a, b, _) = self.s.table[self.panel];
        (a, b)
    }
}

impl DirectPsiSampler {
    pub fn new(which: PsiComponent, ctx: &UndershootContext) -> Result<DirectPsiSampler> {
        DirectPsiSampler::with_settings(which, ctx.kernel().clone(), ctx.ln_s(), ctx.quadrature(), ctx.precision())
    }

    pub fn with_settings(
        which: PsiComponent,
        k: Kernel,
        ln_s: f64,
        quad: &QuadratureSpec,
        precision: Precision,
    ) -> Result<DirectPsiSampler> {
        let level = k.r() * ln_s;
        let mut s =
            DirectPsiSampler { which, k, level, table: Vec::new(), total: 0.0, rule_order: quad.order, precision };
        let mut breaks = vec![0.0, 0.25, 0.5];
        for j in 2..=52 {
            breaks.push(1.0 - 0.5f64.powi(j));
        }
        breaks.push(1.0);
        if let Some(u) = s.k_peak() {
            breaks.push(u);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let res = integrate(|u| s.density(u), &breaks, quad)?;
        let mut panels = res.panels;
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut acc = 0.0;
        for p in &panels {
            s.table.push((p.a, p.b, acc));
            acc += p.value;
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(numeric(format!("direct sampler normalizer is {acc}")));
        }
        s.total = acc;
        Ok(s)
    }

    /// Where the second component's density peaks, if inside (0,1).
    fn k_peak(&self) -> Option<f64> {
        if self.which == PsiComponent::First {
            return None;
        }
        let target = self.k.alpha().ln() + self.level;
        if target <= self.k.log_sigma0() {
            return None;
        }
        crate::rootfind::invert_log_sigma(&self.k, target, self.precision).ok().map(|r| r.root)
    }

    fn log_sigma_pair(&self, y: f64) -> (f64, f64) {
        if y < 0.5 {
            (self.k.log_sigma(y), self.k.log_sigma_excess(y))
        } else if y >= 1.0 {
            (f64::INFINITY, f64::INFINITY)
        } else {
            let ls = self.k.log_sigma_refl(1.0 - y);
            (ls, ls - self.k.log_sigma0())
        }
    }

    /// Log density relative to its maximum.
    fn log_density(&self, y: f64) -> f64 {
        let (ls, e) = self.log_sigma_pair(y);
        if ls == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        match self.which {
            PsiComponent::First => -scaled_expm1(self.k.log_sigma0() - self.level, e),
            PsiComponent::Second => log_ftilde_rel_parts(&self.k, self.level, ls, e),
        }
    }

    fn density(&self, y: f64) -> f64 {
        self.log_density(y).exp()
    }

    /// Log density and its first three derivatives.
    fn log_density_derivs(&self, y: f64) -> [f64; 4] {
        let g0 = self.log_density(y);
        if g0 == f64::NEG_INFINITY {
            return [g0, 0.0, 0.0, 0.0];
        }
        let (ls, _) = self.log_sigma_pair(y);
        let [l1, l2, l3] = self.k.log_sigma_derivs(y);
        let sc = (ls - self.level).exp();
        let (p1, p2, p3) = (l1, l1 * l1 + l2, l1 * l1 * l1 + 3.0 * l1 * l2 + l3);
        match self.which {
            PsiComponent::First => [g0, -sc * p1, -sc * p2, -sc * p3],
            PsiComponent::Second => {
                let a = self.k.alpha();
                [g0, a * l1 - sc * p1, a * l2 - sc * p2, a * l3 - sc * p3]
            }
        }
    }

    /// Inverts the CDF at `u ∈ (0,1)`.
    pub fn invert(&self, u: f64) -> Result<f64> {
        let target = u * self.total;
        let idx = self.table.partition_point(|p| p.2 <= target).saturating_sub(1);
        let (a, b, below) = self.table[idx];
        let next = self.table.get(idx + 1).map_or(self.total, |p| p.2);
        let frac = ((target - below) / (next - below)).clamp(0.0, 1.0);
        let obj = CdfObjective { s: self, panel: idx, target };
        Ok(householder4_invert(&obj, a + frac * (b - a), self.precision)?.root)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.invert(rng.uniform())
    }
}

/// One draw of a `y`-marginal by direct inversion.
pub fn direct_psi_marginal_sampler(which: PsiComponent, ctx: &UndershootContext, rng: &mut RngStream) -> Result<f64> {
    DirectPsiSampler::new(which, ctx)?.sample(rng)
}

/// The `p`-quantile of `S_1` for the standard stable law.
pub fn stable_quantile(p: f64, alpha: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p in (0,1) required"));
    }
    let k = Kernel::new(alpha)?;
    let quad = QuadratureSpec::default();
    let lp = p.ln();
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while log_standard_cdf(lo, &k, &quad)? > lp {
        lo *= 2.0;
    }
    while log_standard_cdf(hi, &k, &quad)? < lp {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_standard_cdf(mid, &k, &quad)? < lp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

// ---------------------------------------------------------------------------
// Benchmarks

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BenchTarget {
    /// Stable passage over the constant `level`, swept over α.
    Sfp { theta: f64, level: f64 },
    /// Fast tempered passage over the constant `level`, swept over `q`.
    Tsffp { alpha: f64, theta: f64, level: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// α for stable sweeps, `q` for tempered ones.
    pub param: f64,
    pub n: usize,
    /// Mean of [`WorkCounters::total`] per sample.
    pub mean_work: f64,
    pub mean_uniforms: f64,
    pub mean_rejections: f64,
    pub mean_newton: f64,
    pub mean_bisection: f64,
    pub mean_quadratures: f64,
    pub mean_inner_calls: f64,
    pub walltime_s_per_1e4: f64,
    /// `mean_work / |log α|`.
    pub work_over_log_alpha: f64,
    /// `log(mean_work) / |log(1 − α)|`.
    pub log_work_over_log_one_minus_alpha: f64,
    /// `log(mean_work) / log(e + q)`.
    pub log_work_over_log_e_plus_q: f64,
}

/// Runs the target `n` times at each grid point. Grid points run in
/// parallel, each on its own substream, so counters are reproducible.
pub fn bench_sweep(
    target: BenchTarget,
    grid: &[f64],
    n: usize,
    rng: &RngStream,
    threads: usize,
) -> Result<Vec<BenchRow>> {
    if n < 100 {
        return Err(domain("bench needs n >= 100"));
    }
    let opts = PassageOptions::default();
    let (rows, _) = map_streams(grid.len(), threads, rng, |i, rng| {
        let p = grid[i];
        let start = Instant::now();
        match target {
            BenchTarget::Sfp { theta, level } => {
                let params = StableParams::new(p, theta)?;
                let k = Kernel::new(p)?;
                let b = Boundary::constant(level)?;
                for _ in 0..n {
                    sfp_sample_with(&params, &k, &b, f64::INFINITY, &opts, rng)?;
                }
            }
            BenchTarget::Tsffp { alpha, theta, level } => {
                let tp = TemperedParams::new(alpha, theta, p)?;
                let k = Kernel::new(alpha)?;
                let b = Boundary::constant(level)?;
                for _ in 0..n {
                    tsffp_sample_with(&tp, &k, &b, &opts, rng)?;
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok(bench_row(p, n, &rng.work, secs, target))
    })?;
    Ok(rows)
}

fn bench_row(param: f64, n: usize, w: &WorkCounters, secs: f64, target: BenchTarget) -> BenchRow {
    let per = |x: u64| x as f64 / n as f64;
    let mean_work = per(w.total());
    let (a, q) = match target {
        BenchTarget::Sfp { .. } => (param, f64::NAN),
        BenchTarget::Tsffp { alpha, .. } => (alpha, param),
    };
    BenchRow {
        param,
        n,
        mean_work,
        mean_uniforms: per(w.uniforms),
        mean_rejections: per(w.rejections),
        mean_newton: per(w.newton_iterations),
        mean_bisection: per(w.bisection_steps),
        mean_quadratures: per(w.quadrature_calls),
        mean_inner_calls: per(w.inner_calls),
        walltime_s_per_1e4: secs * 1e4 / n as f64,
        work_over_log_alpha: mean_work / a.ln().abs(),
        log_work_over_log_one_minus_alpha: mean_work.ln() / (-a).ln_1p().abs(),
        log_work_over_log_e_plus_q: mean_work.ln() / (std::f64::consts::E + q).ln(),
    }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "param,n,mean_work,mean_uniforms,mean_rejections,mean_newton,mean_bisection,mean_quadratures,\
         mean_inner_calls,walltime_s_per_1e4,work_over_log_alpha,log_work_over_log_one_minus_alpha,\
         log_work_over_log_e_plus_q\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.param,
            r.n,
            r.mean_work,
            r.mean_uniforms,
            r.mean_rejections,
            r.mean_newton,
            r.mean_bisection,
            r.mean_quadratures,
            r.mean_inner_calls,
            r.walltime_s_per_1e4,
            r.work_over_log_alpha,
            r.log_work_over_log_one_minus_alpha,
            r.log_work_over_log_e_plus_q
        );
    }
    s
}

// ---------------------------------------------------------------------------
// Deterministic inequality suite

/// What the grid checks need from `σ`; implemented by [`Kernel`] and
/// replaceable to test the suite itself.
pub trait SigmaModel {
    fn alpha(&self) -> f64;
    fn log_sigma(&self, u: f64) -> f64;
    /// `log σ(u) − log σ(0+)`.
    fn log_sigma_excess(&self, u: f64) -> f64;
    fn log_sigma0(&self) -> f64;
    /// First three derivatives of `log σ`.
    fn log_sigma_derivs(&self, u: f64) -> [f64; 3];
}

impl SigmaModel for Kernel {
    fn alpha(&self) -> f64 {
        Kernel::alpha(self)
    }
    fn log_sigma(&self, u: f64) -> f64 {
        if u < 0.5 {
            Kernel::log_sigma(self, u)
        } else {
            self.log_sigma_refl(1.0 - u)
        }
    }
    fn log_sigma_excess(&self, u: f64) -> f64 {
        Kernel::log_sigma_excess(self, u)
    }
    fn log_sigma0(&self) -> f64 {
        Kernel::log_sigma0(self)
    }
    fn log_sigma_derivs(&self, u: f64) -> [f64; 3] {
        Kernel::log_sigma_derivs(self, u)
    }
}

/// Outcome of one grid check. `worst_margin` is the smallest slack seen,
/// negative when the check failed somewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub name: String,
    pub points: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

impl GridCheck {
    fn new(name: &str) -> GridCheck {
        GridCheck { name: name.to_string(), points: 0, failures: 0, worst_margin: f64::INFINITY }
    }

    /// Records a point whose slack is `margin`; values below `-tol` fail.
    fn record(&mut self, margin: f64, tol: f64) {
        self.points += 1;
        if margin.is_nan() || margin < -tol {
            self.failures += 1;
        }
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.points > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub checks: Vec<GridCheck>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(GridCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&GridCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,points,failures,worst_margin,pass\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{},{},{:.6e},{}", c.name, c.points, c.failures, c.worst_margin, c.passed());
        }
        s
    }
}

impl fmt::Display for GridReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{tag} {:<28} points={:<7} failures={:<5} worst_margin={:.6e}",
                c.name, c.points, c.failures, c.worst_margin
            )?;
        }
        Ok(())
    }
}

const LEMMA_ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn unit_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (i as f64 + 0.5) / n as f64)
}

/// Runs every grid check on the real kernel.
pub fn invariant_grid_suite() -> Result<GridReport> {
    invariant_grid_suite_with(&|a| Ok(Box::new(Kernel::new(a)?)))
}

/// Runs the grid checks, taking `σ` from `model` for the checks on `σ`
/// itself. The sampler-level checks always use the real kernel.
pub fn invariant_grid_suite_with(model: &dyn Fn(f64) -> Result<Box<dyn SigmaModel>>) -> Result<GridReport> {
    let mut checks = vec![sandwich_check()?];
    checks.extend(sigma_checks(model)?);
    checks.extend(acceptance_floor_checks()?);
    Ok(GridReport { checks })
}

fn sandwich_check() -> Result<GridCheck> {
    let mut c = GridCheck::new("mixture_sandwich");
    for i in 0..50 {
        let a = 0.01 + 0.98 * i as f64 / 49.0;
        let r = a / (1.0 - a);
        for &s in &[0.01f64, 0.1, 1.0, 10.0, 100.0] {
            let base = (-r * s.ln()).exp();
            for j in 0..200 {
                let x = 10f64.powf(-8.0 + 16.0 * j as f64 / 199.0);
                let h = su_acceptance_ratio(base * (1.0 + x), s, a)?;
                c.record((1.0 - h).min(h - 0.5 * (1.0 - a)), 1e-12);
            }
        }
    }
    Ok(c)
}

fn sigma_checks(model: &dyn Fn(f64) -> Result<Box<dyn SigmaModel>>) -> Result<Vec<GridCheck>> {
    let mut convex = GridCheck::new("log_sigma_derivs_positive");
    let mut fd = GridCheck::new("log_sigma_fd_positive");
    let mut inv_rho = GridCheck::new("inverse_rho_concave");
    let mut bounds = GridCheck::new("sigma_power_bounds");
    let mut linear = GridCheck::new("sigma_linear_near_zero");
    let mut slope = GridCheck::new("sigma_prime_bound");
    for &a in &LEMMA_ALPHAS {
        let m = model(a)?;
        let beta = 1.0 - a;
        let r = a / beta;
        let ls0 = m.log_sigma0();
        let ln_lo = (-(4f64.ln()) + (a * PI).sin().ln()) / beta;
        let ln_hi = r * a.ln() + beta.ln();
        for u in unit_grid(1000) {
            let d = m.log_sigma_derivs(u);
            // relative slack keeps the check meaningful across scales
            for dk in d {
                convex.record(dk / (1.0 + dk.abs()), 0.0);
            }
            let h = 1e-3 * u.min(1.0 - u);
            let f = |x: f64| m.log_sigma(x);
            let (fm2, fm1, f0, fp1, fp2) = (f(u - 2.0 * h), f(u - h), f(u), f(u + h), f(u + 2.0 * h));
            let noise = 64.0 * f64::EPSILON * f0.abs().max(1.0);
            fd.record((fp1 - fm1) / (2.0 * h) + noise / h, 0.0);
            fd.record((fp1 - 2.0 * f0 + fm1) / (h * h) + 4.0 * noise / (h * h), 0.0);
            fd.record((fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h) + 6.0 * noise / (h * h * h), 0.0);
            // (1/ρ)'' = ρ^{-1} (L₁² − L₂) with L = β log σ
            let (l1, l2) = (beta * d[0], beta * d[1]);
            inv_rho.record((l2 - l1 * l1) / (l1 * l1 + l2.abs() + 1.0), 1e-12);
            let ls = m.log_sigma(u);
            let tail = -(1.0 - u).ln() / beta;
            bounds.record(ls - (ln_lo + tail), 1e-12 * ls.abs().max(1.0));
            bounds.record((ln_hi + tail) - ls, 1e-12 * ls.abs().max(1.0));
            let ln_sp = ls + d[0].ln();
            let ln_cap = r * a.ln() + beta.ln() + (r + 1.0).ln() - (r + 2.0) * (1.0 - u).ln();
            slope.record(ln_cap - ln_sp, 1e-12 * ln_sp.abs().max(1.0));
            if u < 0.5 {
                let excess = ls0.exp() * m.log_sigma_excess(u).exp_m1();
                let cap = (PI - 2.0 / std::f64::consts::E) * beta * u;
                linear.record(excess / cap, 1e-12);
                linear.record(1.0 - excess / cap, 1e-12);
            }
        }
    }
    Ok(vec![convex, fd, inv_rho, bounds, linear, slope])
}

fn acceptance_floor_checks() -> Result<Vec<GridCheck>> {
    let mut left = GridCheck::new("left_acceptance_floor");
    let mut mid_low = GridCheck::new("middle_low_acceptance_floor");
    let mut mid_high = GridCheck::new("middle_high_acceptance_positive");
    let left_floor = (-1.0f64).exp() / (2.0 + PI * PI / 4.0);
    let mid_floor = 4.0 / (3.0 * PI * 0.5f64.exp());
    let quantiles = [0.5, 0.99];
    for &a in &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
        for &p in &quantiles {
            let s = stable_quantile(p, a)?;
            for &scale in &[0.2, 1.0, 5.0] {
                let ctx = UndershootContext::new(s * scale, a)?;
                if ctx.z_star() > 0.0 {
                    for y in unit_grid(400) {
                        let y = y * ctx.z_star();
                        left.record(ctx.log_h_left(y).exp() - left_floor * (1.0 - 1e-9), 0.0);
                    }
                }
                if ctx.z() > 0.5 {
                    for v in unit_grid(400) {
                        let y = 0.5 + v * (ctx.z() - 0.5);
                        if a < 0.5 {
                            mid_low.record(ctx.log_h_middle_low(y).exp() - mid_floor, 1e-12);
                        } else if a > 0.5 {
                            let h = ctx.log_h_middle_high(y).exp();
                            mid_high.record(h / ((1.0 - a) * (1.0 - a)), 0.0);
                        }
                    }
                }
            }
        }
    }
    Ok(vec![left, mid_low, mid_high])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_basics() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(ks_two_sample(&[], &xs).is_err());
        let mut rng = RngStream::new(1, 0);
        let a: Vec<f64> = (0..1000).map(|_| rng.uniform()).collect();
        let b: Vec<f64> = (0..1000).map(|_| rng.uniform() + 0.5).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series at the switch point
        let l = 1.0f64;
        let mut s = 0.0;
        for k in 1..50 {
            let t = (-2.0 * (k * k) as f64 * l * l).exp();
            s += if k % 2 == 1 { t } else { -t };
        }
        assert!((kolmogorov_sf(l.next_down()) - 2.0 * s).abs() < 1e-12);
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn direct_sampler_median() {
        let ctx = UndershootContext::new(1.0, 0.5).unwrap();
        for which in [PsiComponent::First, PsiComponent::Second] {
            let d = DirectPsiSampler::new(which, &ctx).unwrap();
            for u in [1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-9] {
                let y = d.invert(u).unwrap();
                assert!(y > 0.0 && y < 1.0);
                let obj = CdfObjective { s: &d, panel: d.table.partition_point(|p| p.0 <= y) - 1, target: u * d.total };
                assert!(obj.derivs(y)[0].abs() < 1e-9 * d.total, "{which:?} u={u}");
            }
        }
    }

    #[test]
    fn quantile_of_levy() {
        // α = 1/2: S_1 = 1/(4 G) with G ~ Gamma(1/2), median 1/(4·0.2274682...)
        let m = stable_quantile(0.5, 0.5).unwrap();
        assert!((m - 1.0 / (4.0 * 0.227_468_211_559_786_1)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn corrupted_sigma_fails() {
        struct Flip(Kernel);
        impl SigmaModel for Flip {
            fn alpha(&self) -> f64 {
                self.0.alpha()
            }
            fn log_sigma(&self, u: f64) -> f64 {
                SigmaModel::log_sigma(&self.0, u)
            }
            fn log_sigma_excess(&self, u: f64) -> f64 {
                self.0.log_sigma_excess(u)
            }
            fn log_sigma0(&self) -> f64 {
                self.0.log_sigma0()
            }
            fn log_sigma_derivs(&self, u: f64) -> [f64; 3] {
                let [a, b, c] = self.0.log_sigma_derivs(u);
                [-a, b, c]
            }
        }
        let checks = sigma_checks(&|a| Ok(Box::new(Flip(Kernel::new(a)?)))).unwrap();
        assert!(!checks[0].passed());
        let good = sigma_checks(&|a| Ok(Box::new(Kernel::new(a)?))).unwrap();
        assert!(good[0].passed());
    }
}
