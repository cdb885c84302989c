//! Forward-mode dual numbers carrying up to [`LANES`] simultaneous tangent
//! directions, and the [`Scalar`] abstraction group laws are written against.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::law::GroupLaw;

/// Number of tangent directions propagated in one pass.
pub const LANES: usize = 8;

/// Scalar type a group law can be evaluated over: plain `f64` for values,
/// [`Dual`] for exact first derivatives.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn cst(c: f64) -> Self;
    fn re(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;

    /// Dispatches a multiplication through a type-erased law.
    fn law_mul(law: &dyn GroupLaw, x: &[Self], y: &[Self], out: &mut [Self]);
    /// Dispatches an inversion through a type-erased law.
    fn law_inv(law: &dyn GroupLaw, x: &[Self], out: &mut [Self]);
}

impl Scalar for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn law_mul(law: &dyn GroupLaw, x: &[f64], y: &[f64], out: &mut [f64]) {
        law.mul_f64(x, y, out)
    }
    #[inline]
    fn law_inv(law: &dyn GroupLaw, x: &[f64], out: &mut [f64]) {
        law.inv_f64(x, out)
    }
}

/// Value plus `LANES` partial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: [f64; LANES],
}

impl Dual {
    pub fn constant(re: f64) -> Self {
        Dual { re, eps: [0.0; LANES] }
    }

    /// A variable seeded along tangent direction `lane`.
    pub fn variable(re: f64, lane: usize) -> Self {
        let mut eps = [0.0; LANES];
        eps[lane] = 1.0;
        Dual { re, eps }
    }

    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= df;
        }
        Dual { re: f, eps }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: Dual) -> Dual {
        self.re += rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, rhs: Dual) -> Dual {
        self.re -= rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        let mut eps = [0.0; LANES];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Dual { re: self.re * rhs.re, eps }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.re;
        let q = self.re * inv;
        let mut eps = [0.0; LANES];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[i] - q * rhs.eps[i]) * inv;
        }
        Dual { re: q, eps }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(mut self) -> Dual {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(c: f64) -> Self {
        Dual::constant(c)
    }
    #[inline]
    fn re(&self) -> f64 {
        self.re
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), 1.0 / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(1.0);
        }
        self.chain(self.re.powi(n), n as f64 * self.re.powi(n - 1))
    }
    #[inline]
    fn law_mul(law: &dyn GroupLaw, x: &[Dual], y: &[Dual], out: &mut [Dual]) {
        law.mul_dual(x, y, out)
    }
    #[inline]
    fn law_inv(law: &dyn GroupLaw, x: &[Dual], out: &mut [Dual]) {
        law.inv_dual(x, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::variable(3.0, 0);
        let y = Dual::variable(2.0, 1);
        let p = x * y;
        assert_eq!(p.re, 6.0);
        assert_eq!(p.eps[0], 2.0);
        assert_eq!(p.eps[1], 3.0);
        let q = x / y;
        assert_eq!(q.re, 1.5);
        assert_eq!(q.eps[0], 0.5);
        assert_eq!(q.eps[1], -0.75);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let h = 1e-6;
        let x0 = 0.7;
        let cases: [(fn(Dual) -> Dual, fn(f64) -> f64); 5] = [
            (|d| d.exp(), f64::exp),
            (|d| d.ln(), f64::ln),
            (|d| d.sqrt(), f64::sqrt),
            (|d| d.sin(), f64::sin),
            (|d| d.powi(3), |v| v.powi(3)),
        ];
        for (fd, ff) in cases {
            let d = fd(Dual::variable(x0, 0));
            let fdiff = (ff(x0 + h) - ff(x0 - h)) / (2.0 * h);
            assert!((d.eps[0] - fdiff).abs() < 1e-8);
        }
    }
}
