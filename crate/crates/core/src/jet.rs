//! Truncated Taylor arithmetic.
//!
//! [`Jet`] carries a value and its first three derivatives in one variable, so
//! closed-form profiles get exact derivatives by composition. [`Dual`] carries
//! one derivative and is used to differentiate curvature expressions once more.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet { v, d1, d2, d3 }
    }

    pub const fn constant(c: f64) -> Self {
        Jet::new(c, 0.0, 0.0, 0.0)
    }

    /// The identity function at `r`.
    pub const fn var(r: f64) -> Self {
        Jet::new(r, 1.0, 0.0, 0.0)
    }

    /// Compose with an outer function whose derivatives at `self.v` are `f`.
    pub fn chain(self, f: [f64; 4]) -> Self {
        let (u1, u2, u3) = (self.d1, self.d2, self.d3);
        Jet {
            v: f[0],
            d1: f[1] * u1,
            d2: f[2] * u1 * u1 + f[1] * u2,
            d3: f[3] * u1 * u1 * u1 + 3.0 * f[2] * u1 * u2 + f[1] * u3,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet::new(c * self.v, c * self.d1, c * self.d2, c * self.d3)
    }

    pub fn recip(self) -> Self {
        let x = self.v;
        let r = 1.0 / x;
        self.chain([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain([c, -s, -c, s])
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain([s, c, s, c])
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain([c, s, c, s])
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let s = 1.0 - t * t;
        self.chain([t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)])
    }

    /// `sech²`, written through `tanh` so it stays accurate for large arguments.
    pub fn sech2(self) -> Self {
        let t = self.v.tanh();
        let c = self.v.cosh();
        let s = 1.0 / (c * c);
        self.chain([
            s,
            -2.0 * s * t,
            s * (4.0 * t * t - 2.0 * s),
            s * t * (16.0 * s - 8.0 * t * t),
        ])
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain([e, e, e, e])
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain([self.v.ln(), r, -r * r, 2.0 * r * r * r])
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        if p == 0.0 {
            return Jet::constant(1.0);
        }
        let f0 = x.powf(p);
        let f1 = p * x.powf(p - 1.0);
        let f2 = p * (p - 1.0) * x.powf(p - 2.0);
        let f3 = p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0);
        self.chain([f0, f1, f2, f3])
    }

    pub fn powi(self, k: i32) -> Self {
        let x = self.v;
        let p = k as f64;
        let pw = |e: i32| if k - e == 0 { 1.0 } else { x.powi(k - e) };
        let f1 = if k == 0 { 0.0 } else { p * pw(1) };
        let f2 = if k == 0 || k == 1 { 0.0 } else { p * (p - 1.0) * pw(2) };
        let f3 = if (0..=2).contains(&k) { 0.0 } else { p * (p - 1.0) * (p - 2.0) * pw(3) };
        self.chain([pw(0), f1, f2, f3])
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    /// The derivative as a jet (losing the top order, which becomes unknown `d4`).
    pub fn shifted(self, d4: f64) -> Self {
        Jet::new(self.d1, self.d2, self.d3, d4)
    }

    /// Value and first derivative as a dual number.
    pub fn dual0(self) -> Dual {
        Dual::new(self.v, self.d1)
    }

    pub fn dual1(self) -> Dual {
        Dual::new(self.d1, self.d2)
    }

    pub fn dual2(self) -> Dual {
        Dual::new(self.d2, self.d3)
    }

    pub fn is_finite(self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2, -self.d3)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.v + c, self.d1, self.d2, self.d3)
    }
}

/// First-order dual number `a + b ε`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

/// Field operations shared by `f64` and [`Dual`], so curvature kernels can be
/// evaluated either plainly or with one extra derivative.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn value(self) -> f64;

    fn sc(self, c: f64) -> Self {
        self * Self::cst(c)
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
}

impl Scalar for Dual {
    fn cst(c: f64) -> Self {
        Dual::new(c, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn fd3(f: impl Fn(f64) -> f64, x: f64) -> [f64; 3] {
        let h = 1e-3;
        let d1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let d2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h);
        let d3 = (-f(x - 2.0 * h) + 2.0 * f(x - h) - 2.0 * f(x + h) + f(x + 2.0 * h)) / (2.0 * h * h * h);
        [d1, d2, d3]
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        type F = (fn(Jet) -> Jet, fn(f64) -> f64);
        let cases: [F; 8] = [
            (|j| j.sin(), f64::sin),
            (|j| j.cosh(), f64::cosh),
            (|j| j.tanh(), f64::tanh),
            (|j| j.sech2(), |x| 1.0 / x.cosh().powi(2)),
            (|j| j.ln(), f64::ln),
            (|j| j.powf(-1.7), |x| x.powf(-1.7)),
            (|j| j.powi(5), |x| x.powi(5)),
            (|j| (j * j.exp()).recip(), |x| 1.0 / (x * x.exp())),
        ];
        for (jf, f) in cases {
            let x = 0.7;
            let j = jf(Jet::var(x));
            let d = fd3(f, x);
            assert!(close(j.v, f(x), 1e-14));
            assert!(close(j.d1, d[0], 1e-9), "{} {}", j.d1, d[0]);
            assert!(close(j.d2, d[1], 1e-7), "{} {}", j.d2, d[1]);
            assert!(close(j.d3, d[2], 1e-4), "{} {}", j.d3, d[2]);
        }
    }

    #[test]
    fn chain_rule_composes() {
        let x = Jet::var(0.3);
        let a = (x * x).sin();
        let d = fd3(|t| (t * t).sin(), 0.3);
        assert!(close(a.d3, d[2], 1e-4));
    }

    #[test]
    fn dual_quotient_rule() {
        let x = Dual::new(2.0, 1.0);
        let y = x * x / (x + Dual::cst(1.0));
        assert!(close(y.d, (4.0 * 3.0 - 4.0) / 9.0, 1e-15));
    }
}
