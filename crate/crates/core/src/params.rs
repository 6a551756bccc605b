use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Stability index and intensity of a stable subordinator with Laplace
/// exponent `theta * u^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    theta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha in (0,1) required, got {alpha}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("theta > 0 required, got {theta}")));
        }
        Ok(StableParams { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `alpha / (1 - alpha)`.
    pub fn r(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    /// `Γ(1 - alpha) / alpha`.
    pub fn w_alpha(&self) -> f64 {
        (ln_gamma(1.0 - self.alpha) - self.alpha.ln()).exp()
    }
}

/// Stable parameters together with an exponential tempering rate `q ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperedParams {
    pub base: StableParams,
    q: f64,
}

impl TemperedParams {
    pub fn new(alpha: f64, theta: f64, q: f64) -> Result<Self> {
        let base = StableParams::new(alpha, theta)?;
        Self::from_base(base, q)
    }

    pub fn from_base(base: StableParams, q: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("q >= 0 required, got {q}")));
        }
        Ok(TemperedParams { base, q })
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha
    }

    pub fn theta(&self) -> f64 {
        self.base.theta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Laplace exponent `θ((u+q)^α − q^α)`, so that `E[e^{-u S_t}] = e^{-t ψ(u)}`.
    pub fn laplace_exponent(&self, u: f64) -> f64 {
        let a = self.alpha();
        self.theta() * ((u + self.q).powf(a) - self.q.powf(a))
    }
}

/// Number of output precision bits; tolerances are `2^-bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::Domain("precision must be at least one bit".into()));
        }
        Ok(Precision(bits))
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn tol(&self) -> f64 {
        2f64.powi(-(self.0 as i32))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(53)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = StableParams::new(0.5, 1.0).unwrap();
        assert_eq!(p.r(), 1.0);
        assert!((p.w_alpha() - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        for &a in &[0.01, 0.3, 0.77, 0.999] {
            let p = StableParams::new(a, 2.0).unwrap();
            assert!((p.r() / a - (p.r() + 1.0)).abs() < 1e-9 * p.r().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(StableParams::new(1.2, 1.0).unwrap_err().to_string().contains("alpha in (0,1)"));
        assert!(StableParams::new(0.5, 0.0).is_err());
        assert!(TemperedParams::new(0.5, 1.0, -1.0).is_err());
        assert!(Precision::new(0).is_err());
        assert_eq!(Precision::default().bits(), 53);
    }
}
