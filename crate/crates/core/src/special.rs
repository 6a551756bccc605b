//! Scalar special functions used throughout the crate.
//!
//! Gamma and error functions come from `statrs` (Lanczos approximation for
//! the gamma family). The inverse error function is polished with Newton
//! steps so that truncated normal draws are accurate to the requested bits.

use statrs::function::{erf as serf, gamma as sgamma};

pub use std::f64::consts::PI;

/// Values of the Riemann zeta function at even integers, `ZETA_EVEN[n-1] = ζ(2n)`.
pub(crate) const ZETA_EVEN: [f64; 10] = [
    1.644_934_066_848_226_4,
    1.082_323_233_711_138_2,
    1.017_343_061_984_449_1,
    1.004_077_356_197_944_3,
    1.000_994_575_127_818_1,
    1.000_246_086_553_308_0,
    1.000_061_248_135_058_7,
    1.000_015_282_259_408_7,
    1.000_003_817_293_265_0,
    1.000_000_953_962_033_9,
];

/// ζ(2n) for n ≥ 1.
pub(crate) fn zeta_even(n: usize) -> f64 {
    if n <= ZETA_EVEN.len() {
        ZETA_EVEN[n - 1]
    } else {
        let s = -2.0 * n as f64;
        1.0 + 2f64.powf(s) + 3f64.powf(s) + 4f64.powf(s)
    }
}

pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

pub fn erf(x: f64) -> f64 {
    serf::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    serf::erfc(x)
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Inverse of `erf` on (-1, 1), refined by Newton steps until the update is
/// below `2^-bits` relative.
pub fn erf_inv(p: f64, bits: u32) -> f64 {
    if p <= -1.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p.abs() > 0.5 {
        let x = erfc_inv(1.0 - p.abs(), bits);
        return x.copysign(p);
    }
    let mut x = serf::erf_inv(p);
    let tol = 2f64.powi(-(bits as i32));
    for _ in 0..8 {
        let dx = (serf::erf(x) - p) / (FRAC_2_SQRT_PI * (-x * x).exp());
        x -= dx;
        if dx.abs() <= tol * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

/// Inverse of `erfc` on (0, 2).
pub fn erfc_inv(q: f64, bits: u32) -> f64 {
    if q <= 0.0 {
        return f64::INFINITY;
    }
    if q >= 2.0 {
        return f64::NEG_INFINITY;
    }
    let mut x = serf::erfc_inv(q);
    if !x.is_finite() {
        return x;
    }
    let tol = 2f64.powi(-(bits as i32));
    for _ in 0..8 {
        let d = FRAC_2_SQRT_PI * (-x * x).exp();
        if d == 0.0 {
            break;
        }
        // relative residual keeps the step meaningful deep in the tail
        let dx = (serf::erfc(x) - q) / d;
        x += dx;
        if dx.abs() <= tol * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(1 + e^x)`.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-x})`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((ln_gamma(3.0) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn zeta_tail_matches_table() {
        for n in 6..=10 {
            let s = -2.0 * n as f64;
            let direct: f64 = (1..2000).map(|k| (k as f64).powf(s)).sum();
            assert!((zeta_even(n) - direct).abs() < 1e-15);
        }
        assert!((zeta_even(1) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_even(2) - PI.powi(4) / 90.0).abs() < 1e-15);
    }

    #[test]
    fn erf_inverse_round_trip() {
        for &p in &[-0.999_999, -0.7, -0.1, 1e-12, 0.3, 0.5, 0.9, 0.999_999_9] {
            let x = erf_inv(p, 53);
            assert!((erf(x) - p).abs() <= 4.0 * f64::EPSILON * p.abs().max(1e-300), "p={p}");
        }
        for &q in &[1e-300, 1e-40, 1e-5, 0.2, 1.0, 1.7] {
            let x = erfc_inv(q, 53);
            assert!(((erfc(x) - q) / q).abs() < 1e-13, "q={q}");
        }
    }

    #[test]
    fn log_helpers() {
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert!((log1p_exp(-40.0) - (-40f64).exp()).abs() < 1e-30);
        assert!((logistic(0.0) - 0.5).abs() < 1e-16);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) <= 1.0);
    }
}
