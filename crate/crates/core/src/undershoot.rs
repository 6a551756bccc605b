//! The stable undershoot law conditional on the crossing time.
//!
//! Given a crossing at time `t` of the level `w` by a jump, the undershoot
//! has density proportional to `(w − u)^{−α} g_t(u)` on `(0, w)`. With
//! `s = (θt)^{−1/α} w` and `ζ = s^{−r}(1 + x)`, the problem becomes sampling
//! `(ζ, y)` from a density on `(s^{−r}, ∞) × (0, 1)`, which is dominated by a
//! mixture of two simpler laws ("ψ1" and "ψ2" below) and corrected by an
//! accept-reject step. The undershoot is then `w (1 + x)^{−1/r}`.
//!
//! All quantities are kept in logarithms: `s` is heavy tailed and `r`
//! explodes as `α → 1`, so `s^r` and `ζ` routinely leave double range.

use std::cell::OnceCell;

use crate::error::{domain, Result};
use crate::params::{Precision, StableParams};
use crate::quadrature::QuadratureSpec;
use crate::rng::RngStream;
use crate::rootfind::{
    c1_coefficients, f_c1_increment, invert_c1_increment, invert_log_sigma, invert_rho_power_k, invert_u_sigma_alpha_k,
    RootResult,
};
use crate::special::log_add_exp;
use crate::variates::{sample_exponential, sample_ln_gamma, sample_logconcave};
use crate::zolotarev::{
    log_ftilde_rel_parts, mixture_weight_ln, region_weights_ln, scaled_expm1, Kernel, MixtureWeight, RegionWeights,
};

/// Slack allowed on acceptance ratios before a value above one is counted
/// as a bound violation; covers rounding in the log-domain evaluation.
const RATIO_SLACK: f64 = 1e-9;

/// Per-scale constants of the undershoot sampler.
#[derive(Debug, Clone)]
pub struct UndershootContext {
    k: Kernel,
    ln_s: f64,
    /// `log s^r`.
    level: f64,
    mix: MixtureWeight,
    z: f64,
    one_minus_z: f64,
    z_star: f64,
    regions: OnceCell<RegionWeights>,
    precision: Precision,
    quad: QuadratureSpec,
    /// Newton and bisection work spent locating `z`.
    z_root: Option<RootResult>,
}

/// A draw `(ζ, y)`, with `ζ` stored through `x = ζ s^r − 1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSample {
    /// `log(ζ − s^{−r})`.
    pub log_excess: f64,
    /// `log ζ`.
    pub log_zeta: f64,
    pub y: f64,
}

impl PsiSample {
    pub fn zeta(&self) -> f64 {
        self.log_zeta.exp()
    }
}

/// Region of the second mixture component a draw came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `(0, z*]`, inverse of `u σ(u)^α`.
    Left,
    /// `(1/2, z]`, only when `z > 1/2`.
    Middle,
    /// `[z, 1)`, log-concave sampler.
    Right,
}

/// Diagnostics of one undershoot draw.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UndershootStats {
    /// Proposals made by the outer mixture loop.
    pub outer_iterations: u64,
    pub psi1_proposals: u64,
    pub psi2_proposals: u64,
}

impl UndershootContext {
    /// Context for `s = e^{ln_s}`.
    pub fn from_ln_s(k: &Kernel, ln_s: f64, precision: Precision, quad: QuadratureSpec) -> Result<UndershootContext> {
        if !ln_s.is_finite() {
            return Err(domain(format!("s must be positive and finite, got log s = {ln_s}")));
        }
        let level = k.r() * ln_s;
        if !level.is_finite() {
            return Err(domain("s^r out of range"));
        }
        let mix = mixture_weight_ln(k, ln_s, &quad)?;
        let target = k.alpha().ln() + level;
        let (z, one_minus_z, z_root) = if target <= k.log_sigma0() {
            (0.0, 1.0, None)
        } else {
            let res = invert_log_sigma(k, target, precision)?;
            (res.root, 1.0 - res.root, Some(res))
        };
        Ok(UndershootContext {
            k: k.clone(),
            ln_s,
            level,
            mix,
            z,
            one_minus_z,
            z_star: z.min(0.5),
            regions: OnceCell::new(),
            precision,
            quad,
            z_root,
        })
    }

    pub fn new(s: f64, alpha: f64) -> Result<UndershootContext> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(domain(format!("s > 0 required, got {s}")));
        }
        UndershootContext::from_ln_s(&Kernel::new(alpha)?, s.ln(), Precision::default(), QuadratureSpec::default())
    }

    /// Context for a crossing of level `w` at time `t`: `s = (θt)^{−1/α} w`.
    pub fn for_crossing(t: f64, w: f64, params: &StableParams, precision: Precision) -> Result<UndershootContext> {
        if !(t > 0.0 && w > 0.0) {
            return Err(domain(format!("t > 0 and w > 0 required, got t={t}, w={w}")));
        }
        let k = Kernel::new(params.alpha())?;
        let ln_s = w.ln() - (params.theta() * t).ln() / params.alpha();
        UndershootContext::from_ln_s(&k, ln_s, precision, QuadratureSpec::default())
    }

    pub fn kernel(&self) -> &Kernel {
        &self.k
    }

    pub fn alpha(&self) -> f64 {
        self.k.alpha()
    }

    pub fn ln_s(&self) -> f64 {
        self.ln_s
    }

    pub fn s(&self) -> f64 {
        self.ln_s.exp()
    }

    pub fn r(&self) -> f64 {
        self.k.r()
    }

    pub fn mixture(&self) -> &MixtureWeight {
        &self.mix
    }

    /// Probability of proposing from the first component.
    pub fn p(&self) -> f64 {
        self.mix.p
    }

    /// Mode of `σ^α e^{−σ s^{−r}}`, or 0 when it is at `0+`.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn z_star(&self) -> f64 {
        self.z_star
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// Weights of the three regions, computed on first use.
    pub fn region_weights(&self) -> Result<&RegionWeights> {
        if let Some(w) = self.regions.get() {
            return Ok(w);
        }
        let w = region_weights_ln(&self.k, self.ln_s, self.z, self.z_star, &self.quad)?;
        Ok(self.regions.get_or_init(|| w))
    }

    /// `(log σ(y), log σ(y) − log σ(0+))` given `y` and `1 − y`.
    fn log_sigma_pair(&self, y: f64, one_minus_y: f64) -> (f64, f64) {
        if y < 0.5 {
            (self.k.log_sigma(y), self.k.log_sigma_excess(y))
        } else if one_minus_y <= 0.0 {
            (f64::INFINITY, f64::INFINITY)
        } else {
            let ls = self.k.log_sigma_refl(one_minus_y);
            (ls, ls - self.k.log_sigma0())
        }
    }

    fn log_sigma_at(&self, y: f64) -> f64 {
        self.log_sigma_pair(y, 1.0 - y).0
    }

    /// `σ(y) s^{−r}` as `exp(log σ − level)`.
    fn sigma_scaled(&self, ls: f64) -> f64 {
        (ls - self.level).exp()
    }

    /// Log acceptance probability of the left-region proposal at `y`.
    pub fn log_h_left(&self, y: f64) -> f64 {
        let ls = self.log_sigma_at(y);
        let d1 = self.k.log_sigma_derivs(y)[0];
        -self.sigma_scaled(ls) - (self.alpha() * y * d1).ln_1p()
    }

    /// Log acceptance probability of the middle-region proposal for α ≤ 1/2.
    pub fn log_h_middle_low(&self, y: f64) -> f64 {
        let a = self.alpha();
        let r = self.r();
        let (ca, cb) = self.c1_coefs();
        let omy = 1.0 - y;
        let ls = self.log_sigma_at(y);
        a * ls - self.sigma_scaled(ls) + (1.0 - a) * ca.ln() + r * (std::f64::consts::LN_2 + omy.ln())
            - (ca + cb * omy).ln()
    }

    /// Log acceptance probability of the middle-region proposal for α > 1/2.
    pub fn log_h_middle_high(&self, y: f64) -> f64 {
        let k = &self.k;
        let ln_c = k.log_rho_derivs(0.5)[0].ln() - k.log_rho(0.5);
        let ls = self.log_sigma_at(y);
        ln_c - self.sigma_scaled(ls) + k.log_rho(y) - k.log_rho_derivs(y)[0].ln()
    }

    fn c1_coefs(&self) -> (f64, f64) {
        let (a, b) = c1_coefficients(self.alpha());
        if self.alpha() == 0.5 {
            (a, 0.0)
        } else {
            (a, b)
        }
    }

    fn record_root(rng: &mut RngStream, res: &RootResult) {
        rng.work.newton_iterations += res.newton_steps as u64;
        rng.work.bisection_steps += res.bisection_steps as u64;
    }

    /// Work spent on the context itself (quadratures and locating `z`).
    pub fn charge_setup(&self, rng: &mut RngStream) {
        rng.work.quadrature(self.mix.evals);
        rng.work.quadrature_calls += 1;
        if let Some(res) = &self.z_root {
            UndershootContext::record_root(rng, res);
        }
    }

    /// The `y`-marginal of the first component, density `∝ exp(−σ(y) s^{−r})`.
    pub fn sample_psi1_y(&self, rng: &mut RngStream) -> Result<f64> {
        let ln_big = self.k.log_sigma0() - self.level;
        let f = |y: f64| {
            let (_, e) = self.log_sigma_pair(y, 1.0 - y);
            if e == f64::INFINITY {
                f64::NEG_INFINITY
            } else {
                -scaled_expm1(ln_big, e)
            }
        };
        sample_logconcave(&f, rng)
    }

    /// Draws a proposal from `region` of the second component, without the
    /// accept step; `Left` and `Middle` are proposals, `Right` is exact.
    pub fn propose(&self, region: Region, rng: &mut RngStream) -> Result<f64> {
        let prec = self.precision;
        match region {
            Region::Left => {
                if !(self.z_star > 0.0) {
                    return Err(domain("left region is empty"));
                }
                let res = invert_u_sigma_alpha_k(&self.k, self.z_star, rng.uniform(), prec)?;
                UndershootContext::record_root(rng, &res);
                Ok(res.root)
            }
            Region::Middle => {
                if !(self.z > 0.5) {
                    return Err(domain("middle region is empty"));
                }
                let a = self.alpha();
                let v = rng.uniform();
                if a == 0.5 {
                    // density ∝ (1 − u)^{−1}: 1 − u = (1/2) (2(1 − z))^v
                    let omu = 0.5 * (v * (2.0 * self.one_minus_z).ln()).exp();
                    Ok(1.0 - omu)
                } else if a < 0.5 {
                    let total = f_c1_increment(a, self.z);
                    let res = invert_c1_increment(a, self.z, v * total, prec)?;
                    UndershootContext::record_root(rng, &res);
                    Ok(res.root)
                } else {
                    let res = invert_rho_power_k(&self.k, self.z, v, prec)?;
                    UndershootContext::record_root(rng, &res);
                    Ok(res.root)
                }
            }
            Region::Right => {
                let (z, omz) = (self.z, self.one_minus_z);
                let (lsz, ez) = if z == 0.0 { (self.k.log_sigma0(), 0.0) } else { self.log_sigma_pair(z, omz) };
                let top = log_ftilde_rel_parts(&self.k, self.level, lsz, ez);
                let g = |v: f64| {
                    let y = z + v * omz;
                    let (ls, e) = self.log_sigma_pair(y, omz * (1.0 - v));
                    log_ftilde_rel_parts(&self.k, self.level, ls, e) - top
                };
                let v = sample_logconcave(&g, rng)?;
                Ok(z + v * omz)
            }
        }
    }

    fn accept(&self, log_h: f64, rng: &mut RngStream) -> bool {
        if log_h > RATIO_SLACK {
            rng.work.bound_violations += 1;
        }
        rng.uniform().ln() <= log_h
    }

    /// The `y`-marginal of the second component, density `∝ σ(y)^α e^{−σ(y) s^{−r}}`.
    pub fn sample_psi2_y(&self, rng: &mut RngStream) -> Result<(f64, Region)> {
        let fresh = self.regions.get().is_none();
        let w = self.region_weights()?;
        if fresh {
            rng.work.quadrature(w.evals);
            rng.work.quadrature_calls += 2;
        }
        let [w0, w1, _] = w.normalized();
        let u = rng.uniform();
        let region = if u < w0 {
            Region::Left
        } else if u < w0 + w1 {
            Region::Middle
        } else {
            Region::Right
        };
        loop {
            rng.work.rejections += 1;
            let y = self.propose(region, rng)?;
            let log_h = match region {
                Region::Right => return Ok((y, region)),
                Region::Left => self.log_h_left(y),
                Region::Middle if self.alpha() <= 0.5 => self.log_h_middle_low(y),
                Region::Middle => self.log_h_middle_high(y),
            };
            if self.accept(log_h, rng) {
                return Ok((y, region));
            }
        }
    }

    fn finish(&self, y: f64, ln_e: f64) -> PsiSample {
        let log_excess = ln_e - self.log_sigma_at(y);
        let log_zeta = log_add_exp(-self.level, log_excess);
        PsiSample { log_excess, log_zeta, y }
    }

    /// `log(ζ s^r − 1)`.
    fn log_x(&self, ps: &PsiSample) -> f64 {
        ps.log_excess + self.level
    }

    /// Log of the acceptance ratio of the outer loop at a proposal.
    pub fn log_acceptance(&self, ps: &PsiSample) -> f64 {
        log_acceptance_from_log_x(self.alpha(), self.log_x(ps))
    }

    /// Ratio `u/w` of the undershoot to the crossing level for a proposal,
    /// and its complement `1 − u/w`, each to full relative precision.
    pub fn undershoot_fraction(&self, ps: &PsiSample) -> (f64, f64) {
        let e = -crate::special::log1p_exp(self.log_x(ps)) / self.r();
        (e.exp(), -e.exp_m1())
    }
}

/// One draw from the first mixture component.
pub fn sample_psi1(ctx: &UndershootContext, rng: &mut RngStream) -> Result<PsiSample> {
    let y = ctx.sample_psi1_y(rng)?;
    let e = sample_exponential(rng);
    Ok(ctx.finish(y, e.ln()))
}

/// One draw from the second mixture component.
pub fn sample_psi2(ctx: &UndershootContext, rng: &mut RngStream) -> Result<PsiSample> {
    let (y, _) = ctx.sample_psi2_y(rng)?;
    let ln_e = sample_ln_gamma(1.0 - ctx.alpha(), rng)?;
    Ok(ctx.finish(y, ln_e))
}

/// `log` of the outer acceptance ratio as a function of `log x`, where
/// `ζ = s^{−r}(1 + x)`. The scale `s` cancels from the ratio.
fn log_acceptance_from_log_x(alpha: f64, log_x: f64) -> f64 {
    let r = alpha / (1.0 - alpha);
    // 1 − (1 + x)^{−1/r}
    let lg = (-(-crate::special::log1p_exp(log_x) / r).exp_m1()).ln();
    let c1 = -alpha * (-(2f64.powf(alpha - 1.0))).ln_1p();
    let c2 = alpha * (2.0 * r).ln() - alpha * log_x;
    -alpha * lg - log_add_exp(c1, c2)
}

/// Acceptance ratio of the undershoot sampler's outer loop,
/// `(s − ζ^{−1/r})^{−α} / ((1 − 2^{α−1})^{−α} s^{−α} + (2r)^α s^{−r} (ζ − s^{−r})^{−α})`.
pub fn su_acceptance_ratio(zeta: f64, s: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha in (0,1) required, got {alpha}")));
    }
    if !(s > 0.0 && zeta > 0.0) {
        return Err(domain("s > 0 and zeta > 0 required"));
    }
    let r = alpha / (1.0 - alpha);
    let level = r * s.ln();
    // x = ζ s^r − 1
    let lz = zeta.ln() + level;
    if !(lz > 0.0) {
        return Err(domain(format!("zeta must exceed s^-r, got zeta={zeta}, s={s}")));
    }
    let log_x = crate::zolotarev::log_sub_exp(lz, 0.0);
    Ok(log_acceptance_from_log_x(alpha, log_x).exp())
}

/// An undershoot as a fraction of the crossing level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndershootDraw {
    /// `u/w ∈ (0, 1)`.
    pub fraction: f64,
    /// `1 − u/w`, kept separately for the overshoot.
    pub gap: f64,
    pub stats: UndershootStats,
}

/// Undershoot draw with diagnostics, as a fraction of the crossing level.
pub fn sample_undershoot_fraction(ctx: &UndershootContext, rng: &mut RngStream) -> Result<UndershootDraw> {
    ctx.charge_setup(rng);
    let mut stats = UndershootStats::default();
    loop {
        stats.outer_iterations += 1;
        rng.work.rejections += 1;
        let v1 = rng.uniform();
        let ps = if v1 < ctx.p() {
            stats.psi1_proposals += 1;
            sample_psi1(ctx, rng)?
        } else {
            stats.psi2_proposals += 1;
            sample_psi2(ctx, rng)?
        };
        let log_ratio = ctx.log_acceptance(&ps);
        if ctx.accept(log_ratio, rng) {
            let (f, gap) = ctx.undershoot_fraction(&ps);
            // rounding can push a vanishing excess onto the level itself
            return Ok(UndershootDraw { fraction: f.min(1.0f64.next_down()), gap, stats });
        }
    }
}

/// One draw from the undershoot law at a crossing of level `w` at time `t`,
/// conditional on the crossing being by a jump. The result lies in `(0, w)`.
pub fn sample_undershoot(t: f64, w: f64, params: &StableParams, rng: &mut RngStream) -> Result<f64> {
    let ctx = UndershootContext::for_crossing(t, w, params, Precision::default())?;
    Ok(w * sample_undershoot_fraction(&ctx, rng)?.fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_ratio_sandwich() {
        for &a in &[0.05, 0.3, 0.5, 0.7, 0.95] {
            for &s in &[0.1f64, 1.0, 10.0] {
                let r = a / (1.0 - a);
                let base = s.powf(-r);
                for i in 0..200 {
                    let zeta = base * (1.0 + 10f64.powf(-8.0 + 16.0 * i as f64 / 199.0));
                    let h = su_acceptance_ratio(zeta, s, a).unwrap();
                    assert!(h <= 1.0 + 1e-12 && h >= (1.0 - a) / 2.0 - 1e-12, "a={a} s={s} zeta={zeta} h={h}");
                }
            }
        }
        assert!(su_acceptance_ratio(0.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn acceptance_ratio_continuous_at_crossover() {
        let (a, s) = (0.6f64, 2.0f64);
        let r = a / (1.0 - a);
        let z0 = 2f64.powf(a) * s.powf(-r);
        let lo = su_acceptance_ratio(z0 * (1.0 - 1e-13), s, a).unwrap();
        let hi = su_acceptance_ratio(z0 * (1.0 + 1e-13), s, a).unwrap();
        assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn context_mode_and_weights() {
        let ctx = UndershootContext::new(1e-3, 0.5).unwrap();
        assert_eq!(ctx.z(), 0.0);
        let w = ctx.region_weights().unwrap().normalized();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.0);
        let ctx = UndershootContext::new(50.0, 0.3).unwrap();
        assert!(ctx.z() > 0.5 && ctx.z_star() == 0.5);
        let k = ctx.kernel();
        let target = 0.3f64.ln() + ctx.r() * ctx.ln_s();
        assert!((k.log_sigma(ctx.z()) - target).abs() < 1e-12 * target.abs().max(1.0));
        assert!(ctx.p() > 0.0 && ctx.p() < 1.0);
    }

    #[test]
    fn undershoot_in_range_and_conditional_means() {
        let mut rng = RngStream::new(11, 0);
        for &(a, s) in &[(0.3, 0.5), (0.5, 1.0), (0.7, 3.0), (0.9, 1.2)] {
            let ctx = UndershootContext::new(s, a).unwrap();
            let n = 4000;
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for _ in 0..n {
                let ps = sample_psi1(&ctx, &mut rng).unwrap();
                assert!(ps.log_excess.is_finite() && ps.y > 0.0 && ps.y < 1.0);
                m1 += (ps.log_excess + ctx.log_sigma_at(ps.y)).exp();
                let ps = sample_psi2(&ctx, &mut rng).unwrap();
                m2 += (ps.log_excess + ctx.log_sigma_at(ps.y)).exp();
                let d = sample_undershoot_fraction(&ctx, &mut rng).unwrap();
                assert!(d.fraction > 0.0 && d.fraction < 1.0 && d.gap > 0.0);
            }
            m1 /= n as f64;
            m2 /= n as f64;
            // exponential(1) and gamma(1 − α, 1) means
            assert!((m1 - 1.0).abs() < 4.0 / (n as f64).sqrt(), "a={a} m1={m1}");
            let sd = (1.0 - a).sqrt();
            assert!((m2 - (1.0 - a)).abs() < 4.0 * sd / (n as f64).sqrt(), "a={a} m2={m2}");
            assert_eq!(rng.work.bound_violations, 0);
        }
    }

    #[test]
    fn middle_region_acceptance_floors() {
        let mut rng = RngStream::new(3, 1);
        // α ≤ 1/2: floor 4/(3π√e)
        let ctx = UndershootContext::new(40.0, 0.3).unwrap();
        let floor = 4.0 / (3.0 * std::f64::consts::PI * 0.5f64.exp());
        for _ in 0..2000 {
            let y = ctx.propose(Region::Middle, &mut rng).unwrap();
            let h = ctx.log_h_middle_low(y).exp();
            assert!(h >= floor && h <= 1.0 + 1e-9, "h={h} y={y}");
        }
        let ctx = UndershootContext::new(5.0, 0.75).unwrap();
        for _ in 0..2000 {
            let y = ctx.propose(Region::Middle, &mut rng).unwrap();
            let h = ctx.log_h_middle_high(y).exp();
            assert!(h > 0.0 && h <= 1.0 + 1e-9, "h={h}");
        }
        let ctx = UndershootContext::new(4.0, 0.5).unwrap();
        for _ in 0..500 {
            let y = ctx.propose(Region::Middle, &mut rng).unwrap();
            assert!(y > 0.5 && y <= ctx.z());
        }
    }
}
