//! Non-increasing barriers and their composition.
//!
//! A [`Boundary`] is `t ↦ min(base(t + T) − V, C)` for a base shape, an
//! accumulated time shift `T`, a vertical translate `V` and a cap `C`.
//! Shifting and capping only touch these three numbers, so a barrier can be
//! moved along a sample path without re-evaluating anything.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

/// A caller-supplied barrier shape.
pub trait BarrierFn: Send + Sync {
    /// `b(t)` for `t ≥ 0`; must be nonincreasing and nonnegative.
    fn value(&self, t: f64) -> f64;
    /// `b'(t)`, with `−1` where `b` is not differentiable.
    fn derivative(&self, t: f64) -> f64;
    /// First time `b` reaches zero, or infinity.
    fn zero_time(&self) -> f64;
    /// Analytic solution of `t^{−1/α} b(t) = v`, if available.
    fn inverse_scaled(&self, _alpha: f64, _v: f64) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
enum Shape {
    Constant(f64),
    /// `a0 − a1 t`, truncated at zero.
    Linear {
        a0: f64,
        a1: f64,
    },
    /// Knots `(t_i, b_i)` with `t_0 = 0`; constant after the last knot.
    Piecewise {
        t: Vec<f64>,
        b: Vec<f64>,
    },
    Custom(Arc<dyn BarrierFn>),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Constant(c) => write!(f, "Constant({c})"),
            Shape::Linear { a0, a1 } => write!(f, "Linear({a0} - {a1} t)"),
            Shape::Piecewise { t, .. } => write!(f, "Piecewise({} knots)", t.len()),
            Shape::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Shape {
    fn value(&self, u: f64) -> f64 {
        match self {
            Shape::Constant(c) => *c,
            Shape::Linear { a0, a1 } => (a0 - a1 * u).max(0.0),
            Shape::Piecewise { t, b } => {
                let n = t.len();
                if u >= t[n - 1] {
                    return b[n - 1];
                }
                let i = t.partition_point(|&x| x <= u) - 1;
                let w = (u - t[i]) / (t[i + 1] - t[i]);
                b[i] + w * (b[i + 1] - b[i])
            }
            Shape::Custom(f) => f.value(u).max(0.0),
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match self {
            Shape::Constant(_) => 0.0,
            Shape::Linear { a0, a1 } => {
                let z = a0 / a1;
                if *a1 == 0.0 || u < z {
                    -a1
                } else if u == z {
                    -1.0
                } else {
                    0.0
                }
            }
            Shape::Piecewise { t, b } => {
                let n = t.len();
                let slope = |i: usize| {
                    if i + 1 < n {
                        (b[i + 1] - b[i]) / (t[i + 1] - t[i])
                    } else {
                        0.0
                    }
                };
                if u >= t[n - 1] {
                    if u == t[n - 1] && n >= 2 && slope(n - 2) != 0.0 {
                        return -1.0;
                    }
                    return 0.0;
                }
                let i = t.partition_point(|&x| x <= u) - 1;
                if u == t[i] && i > 0 && slope(i - 1) != slope(i) {
                    return -1.0;
                }
                slope(i)
            }
            Shape::Custom(f) => f.derivative(u),
        }
    }

    /// First `u ≥ from` with `value(u) ≤ level`, or infinity.
    fn level_time(&self, level: f64, from: f64) -> f64 {
        if self.value(from) <= level {
            return from;
        }
        match self {
            Shape::Constant(c) => {
                if *c <= level {
                    from
                } else {
                    f64::INFINITY
                }
            }
            Shape::Linear { a0, a1 } => {
                if *a1 == 0.0 {
                    f64::INFINITY
                } else {
                    ((a0 - level) / a1).max(from)
                }
            }
            Shape::Piecewise { t, b } => {
                for i in 0..t.len() - 1 {
                    if t[i + 1] > from && b[i + 1] <= level {
                        let u = t[i] + (b[i] - level) / (b[i] - b[i + 1]) * (t[i + 1] - t[i]);
                        return u.max(from);
                    }
                }
                f64::INFINITY
            }
            Shape::Custom(f) => {
                let z = f.zero_time();
                let mut hi = if z.is_finite() { z } else { from + 1.0 };
                if !z.is_finite() {
                    while self.value(hi) > level {
                        hi = from + 2.0 * (hi - from);
                        if hi > 1e300 {
                            return f64::INFINITY;
                        }
                    }
                }
                let mut lo = from;
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if m <= lo || m >= hi {
                        break;
                    }
                    if self.value(m) <= level {
                        hi = m;
                    } else {
                        lo = m;
                    }
                }
                hi
            }
        }
    }
}

/// A non-increasing, absolutely continuous barrier on `[0, ∞)`.
#[derive(Clone, Debug)]
pub struct Boundary {
    shape: Arc<Shape>,
    t_shift: f64,
    v_shift: f64,
    cap: f64,
    zero: f64,
}

impl Boundary {
    fn from_shape(shape: Shape) -> Boundary {
        let zero = shape.level_time(0.0, 0.0);
        Boundary { shape: Arc::new(shape), t_shift: 0.0, v_shift: 0.0, cap: f64::INFINITY, zero }
    }

    /// `b ≡ c`.
    pub fn constant(c: f64) -> Result<Boundary> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("constant barrier level must be positive, got {c}")));
        }
        Ok(Boundary::from_shape(Shape::Constant(c)))
    }

    /// `b(t) = max(a0 − a1 t, 0)`.
    pub fn linear(a0: f64, a1: f64) -> Result<Boundary> {
        if !(a0 > 0.0 && a0.is_finite()) || !(a1 >= 0.0 && a1.is_finite()) {
            return Err(domain(format!("linear barrier needs a0 > 0 and a1 >= 0, got ({a0}, {a1})")));
        }
        if a1 == 0.0 {
            return Boundary::constant(a0);
        }
        Ok(Boundary::from_shape(Shape::Linear { a0, a1 }))
    }

    /// Piecewise-linear interpolation of `(t, b)` knots starting at `t = 0`,
    /// held constant after the last knot.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Boundary> {
        if knots.is_empty() {
            return Err(domain("piecewise-linear barrier needs at least one knot"));
        }
        if knots[0].0 != 0.0 {
            return Err(domain(format!("first knot must be at t = 0, got {}", knots[0].0)));
        }
        if !(knots[0].1 > 0.0) {
            return Err(domain(format!("b(0) must be positive, got {}", knots[0].1)));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain(format!("knot times must increase strictly: {} then {}", w[0].0, w[1].0)));
            }
            if !(w[1].1 <= w[0].1) || w[1].1 < 0.0 {
                return Err(domain(format!("knot values must be nonincreasing and >= 0: {} then {}", w[0].1, w[1].1)));
            }
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(domain("knots must be finite"));
        }
        let (t, b) = knots.iter().copied().unzip();
        Ok(Boundary::from_shape(Shape::Piecewise { t, b }))
    }

    /// Parses the `t,b` knot format: a header line `t,b`, then one pair per line.
    pub fn from_csv_str(text: &str) -> Result<Boundary> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.replace(' ', "") == "t,b" => {}
            other => return Err(Error::Parse(format!("expected header \"t,b\", got {other:?}"))),
        }
        let mut knots = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("line {}: expected two fields", i + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))
            };
            let t = parse(parts.next())?;
            let b = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: expected two fields", i + 2)));
            }
            knots.push((t, b));
        }
        Boundary::piecewise_linear(&knots)
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<Boundary> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Boundary::from_csv_str(&text)
    }

    /// Wraps a caller-supplied shape, checking monotonicity on a grid.
    pub fn custom(f: Arc<dyn BarrierFn>) -> Result<Boundary> {
        let b0 = f.value(0.0);
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(domain(format!("b(0) must be positive and finite, got {b0}")));
        }
        let z = f.zero_time();
        let horizon = if z.is_finite() { z } else { 100.0 };
        let mut prev = b0;
        for i in 1..=1000 {
            let v = f.value(horizon * i as f64 / 1000.0);
            if v > prev * (1.0 + 1e-12) + 1e-300 {
                return Err(domain(format!("barrier increases near t = {}", horizon * i as f64 / 1000.0)));
            }
            prev = v;
        }
        Ok(Boundary::from_shape(Shape::Custom(f)))
    }

    /// `b(t)`.
    pub fn value(&self, t: f64) -> f64 {
        if t >= self.zero {
            return 0.0;
        }
        (self.shape.value(t + self.t_shift) - self.v_shift).min(self.cap).max(0.0)
    }

    /// `b'(t)`; zero where the cap is strictly active.
    pub fn derivative(&self, t: f64) -> f64 {
        if t > self.zero {
            return 0.0;
        }
        if self.shape.value(t + self.t_shift) - self.v_shift > self.cap {
            return 0.0;
        }
        self.shape.derivative(t + self.t_shift)
    }

    /// `T_b = inf{t : b(t) = 0}`.
    pub fn zero_time(&self) -> f64 {
        self.zero
    }

    /// `b(0)`.
    pub fn initial(&self) -> f64 {
        self.value(0.0)
    }

    /// The level if the barrier is constant over `[0, ∞)`.
    pub fn constant_level(&self) -> Option<f64> {
        let level = match &*self.shape {
            Shape::Constant(c) => c - self.v_shift,
            _ => {
                if self.cap.is_finite() && self.shape.value(self.t_shift) - self.v_shift >= self.cap {
                    // capped everywhere only if the base never drops below the cap
                    let end = self.shape.level_time(self.cap + self.v_shift, self.t_shift);
                    if end.is_finite() {
                        return None;
                    }
                    self.cap
                } else {
                    return None;
                }
            }
        };
        Some(level.min(self.cap))
    }

    /// `t ↦ b(t + dt) − dv`.
    pub fn shift(&self, dt: f64, dv: f64) -> Result<Boundary> {
        if !(dt >= 0.0 && dv >= 0.0) || !dt.is_finite() || !dv.is_finite() {
            return Err(domain(format!("shift needs dt, dv >= 0, got ({dt}, {dv})")));
        }
        let b0 = self.value(dt) - dv;
        if !(b0 > 0.0) {
            return Err(domain(format!("shifted barrier starts at {b0} <= 0; crossing already occurred")));
        }
        let t_shift = self.t_shift + dt;
        let v_shift = self.v_shift + dv;
        let zero = self.shape.level_time(v_shift, t_shift) - t_shift;
        Ok(Boundary { shape: self.shape.clone(), t_shift, v_shift, cap: self.cap - dv, zero })
    }

    /// `t ↦ min(b(t), level)`.
    pub fn cap(&self, level: f64) -> Result<Boundary> {
        if !(level > 0.0) {
            return Err(domain(format!("cap level must be positive, got {level}")));
        }
        let mut out = self.clone();
        out.cap = self.cap.min(level);
        Ok(out)
    }

    /// `B(t) = t^{−1/α} b(t)`.
    pub fn scaled(&self, alpha: f64, t: f64) -> f64 {
        t.powf(-1.0 / alpha) * self.value(t)
    }

    /// `ln B(t)`.
    pub fn ln_scaled(&self, alpha: f64, t: f64) -> f64 {
        -t.ln() / alpha + self.value(t).ln()
    }

    /// Closed-form `B^{-1}(e^{ln_v})` when the barrier admits one.
    pub fn analytic_inverse_ln(&self, alpha: f64, ln_v: f64) -> Option<f64> {
        if let Some(c) = self.constant_level() {
            return Some((alpha * (c.ln() - ln_v)).exp());
        }
        if let Shape::Custom(f) = &*self.shape {
            if self.t_shift == 0.0 && self.v_shift == 0.0 && !self.cap.is_finite() {
                return f.inverse_scaled(alpha, ln_v.exp());
            }
        }
        None
    }

    /// `B^{-1}(v)`; see [`crate::rootfind::invert_boundary_b`].
    pub fn inverse_scaled(&self, alpha: f64, v: f64, precision: crate::Precision) -> Result<f64> {
        crate::rootfind::invert_boundary_b(self, alpha, v, precision)
    }
}

/// `−b'(t) / (−b'(t) + b(t)/(α t))`: the probability of creeping given `τ_b = t`.
pub fn creep_probability(boundary: &Boundary, alpha: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < boundary.zero_time()) {
        return Err(domain(format!("t in (0, T_b) required, got {t}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha in (0,1) required, got {alpha}")));
    }
    let d = -boundary.derivative(t);
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(d / (d + boundary.value(t) / (alpha * t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let c = Boundary::constant(2.0).unwrap();
        assert_eq!(c.value(5.0), 2.0);
        assert_eq!(c.derivative(5.0), 0.0);
        assert!(c.zero_time().is_infinite());
        let s = c.shift(1.0, 0.5).unwrap();
        assert_eq!(s.constant_level(), Some(1.5));
        assert_eq!(s.value(3.0), 1.5);
        assert!(c.shift(0.0, 2.0).is_err());

        let l = Boundary::linear(1.0, 0.5).unwrap();
        assert_eq!(l.zero_time(), 2.0);
        assert_eq!(l.value(1.0), 0.5);
        assert_eq!(l.value(3.0), 0.0);
        assert_eq!(l.derivative(1.0), -0.5);
        let s = l.shift(0.5, 0.25).unwrap();
        assert!((s.zero_time() - 1.0).abs() < 1e-15);
        assert!((s.value(0.2) - (1.0 - 0.35 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn shift_identity_and_composition() {
        let text = "t,b\n0,2\n1,1.5\n2,1.5\n3,0.5\n";
        let b = Boundary::from_csv_str(text).unwrap();
        let id = b.shift(0.0, 0.0).unwrap();
        let once = b.shift(0.7, 0.2).unwrap();
        let twice = b.shift(0.3, 0.05).unwrap().shift(0.4, 0.15).unwrap();
        for i in 0..500 {
            let t = i as f64 * 0.01;
            assert_eq!(id.value(t), b.value(t));
            assert!((once.value(t) - twice.value(t)).abs() < 1e-14);
        }
        assert!(b.zero_time().is_infinite());
        assert_eq!(b.derivative(1.0), -1.0);
        assert_eq!(b.derivative(1.5), 0.0);
        assert_eq!(b.derivative(2.5), -1.0);
        assert_eq!(b.derivative(4.0), 0.0);
    }

    #[test]
    fn piecewise_zero_time_is_exact() {
        let b = Boundary::piecewise_linear(&[(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)]).unwrap();
        assert_eq!(b.zero_time(), 2.0);
        let s = b.shift(0.0, 0.25).unwrap();
        assert!((s.zero_time() - 1.5).abs() < 1e-15);
        assert!(Boundary::piecewise_linear(&[(0.0, 1.0), (1.0, 1.5)]).is_err());
        assert!(Boundary::from_csv_str("x,y\n0,1\n").is_err());
    }

    #[test]
    fn cap_behaviour() {
        let c = Boundary::constant(2.0).unwrap();
        assert_eq!(c.cap(3.0).unwrap().value(1.0), 2.0);
        assert_eq!(c.cap(1.0).unwrap().constant_level(), Some(1.0));
        let l = Boundary::linear(2.0, 1.0).unwrap().cap(1.0).unwrap();
        assert_eq!(l.value(0.5), 1.0);
        assert_eq!(l.derivative(0.5), 0.0);
        assert_eq!(l.derivative(1.5), -1.0);
        assert_eq!(l.constant_level(), None);
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let t = i as f64 * 0.01;
            let b = l.scaled(0.6, t);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn creep_probability_values() {
        let l = Boundary::linear(1.0, 0.5).unwrap();
        assert!((creep_probability(&l, 0.5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c = Boundary::constant(1.0).unwrap();
        assert_eq!(creep_probability(&c, 0.5, 1.0).unwrap(), 0.0);
        assert!(creep_probability(&l, 0.5, 2.0).is_err());
    }

    struct Exp;
    impl BarrierFn for Exp {
        fn value(&self, t: f64) -> f64 {
            (-t).exp()
        }
        fn derivative(&self, t: f64) -> f64 {
            -(-t).exp()
        }
        fn zero_time(&self) -> f64 {
            f64::INFINITY
        }
    }

    #[test]
    fn custom_shape() {
        let b = Boundary::custom(Arc::new(Exp)).unwrap();
        let s = b.shift(0.0, 0.5).unwrap();
        assert!((s.zero_time() - 2f64.ln()).abs() < 1e-12);
        assert!((s.value(0.1) - ((-0.1f64).exp() - 0.5)).abs() < 1e-15);
    }
}
