//! Truncated univariate Taylor arithmetic.
//!
//! A `Jet<N>` holds the normalized Taylor coefficients `c[k] = f^(k)(t0) / k!`
//! of a function of one variable. Arithmetic propagates them exactly up to
//! order `N - 1`, which is how the crate gets high-order time derivatives of
//! flows and curve quantities without finite differences.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The identity jet `t0 + s` evaluated at `t0 = v`.
    pub fn variable(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_coeffs(c: [f64; N]) -> Self {
        Jet { c }
    }

    /// k-th derivative at the expansion point.
    pub fn deriv(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    /// Formal derivative; the top coefficient becomes zero.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k as f64 + 1.0) * self.c[k + 1];
        }
        Jet { c }
    }

    /// Antiderivative with constant term `c0`, truncated to order N-1.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    /// Evaluate the truncated polynomial at offset `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
    }

    pub fn recip(self) -> Self {
        Jet::constant(1.0) / self
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn powf(self, p: f64) -> Self {
        let a = &self.c;
        let mut c = [0.0; N];
        c[0] = a[0].powf(p);
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += (p * j as f64 - (k - j) as f64) * a[j] * c[k - j];
            }
            c[k] = s / (k as f64 * a[0]);
        }
        Jet { c }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet::constant(1.0);
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let a = &self.c;
        let mut s = [0.0; N];
        let mut co = [0.0; N];
        s[0] = a[0].sin();
        co[0] = a[0].cos();
        for k in 1..N {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * a[j] * co[k - j];
                cc -= j as f64 * a[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            co[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c: co })
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn exp(self) -> Self {
        let a = &self.c;
        let mut e = [0.0; N];
        e[0] = a[0].exp();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * a[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn ln(self) -> Self {
        let a = &self.c;
        let mut l = [0.0; N];
        l[0] = a[0].ln();
        for k in 1..N {
            let mut s = k as f64 * a[k];
            for j in 1..k {
                s -= a[j] * (k - j) as f64 * l[k - j];
            }
            l[k] = s / (k as f64 * a[0]);
        }
        Jet { c: l }
    }

    pub fn acos(self) -> Self {
        let one_minus = Jet::constant(1.0) - self * self;
        let d = -self.differentiate() / one_minus.sqrt();
        d.integrate(self.c[0].acos())
    }

    pub fn atan2(self, x: Self) -> Self {
        let r2 = self * self + x * x;
        let d = (x * self.differentiate() - self * x.differentiate()) / r2;
        d.integrate(self.c[0].atan2(x.c[0]))
    }

    pub fn abs(self) -> Self {
        if self.c[0] < 0.0 {
            -self
        } else {
            self
        }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Jet { c: [0.0; N] }
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for k in 0..N {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.c[j] * o.c[k - j];
            }
            c[k] = s;
        }
        Jet { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * c[k - j];
            }
            c[k] = s / o.c[0];
        }
        Jet { c }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.c[0] += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.c[0] -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        for k in 0..N {
            self.c[k] *= o;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(mut self, o: f64) -> Self {
        for k in 0..N {
            self.c[k] /= o;
        }
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

/// Numbers the geometric formulas are generic over: `f64` and `Jet<N>`.
pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn acos(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

impl<const N: usize> Scalar for Jet<N> {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn sin(self) -> Self {
        Jet::sin(self)
    }
    fn cos(self) -> Self {
        Jet::cos(self)
    }
    fn exp(self) -> Self {
        Jet::exp(self)
    }
    fn ln(self) -> Self {
        Jet::ln(self)
    }
    fn acos(self) -> Self {
        Jet::acos(self)
    }
    fn atan2(self, x: Self) -> Self {
        Jet::atan2(self, x)
    }
}

/// Small 3-vector helpers over any scalar.
pub type V3<S> = [S; 3];

pub fn dot<S: Scalar>(a: &V3<S>, b: &V3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<S: Scalar>(a: &V3<S>, b: &V3<S>) -> V3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn vsub<S: Scalar>(a: &V3<S>, b: &V3<S>) -> V3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn vadd<S: Scalar>(a: &V3<S>, b: &V3<S>) -> V3<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn vscale<S: Scalar>(a: &V3<S>, s: S) -> V3<S> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn lift<S: Scalar>(a: &[f64; 3]) -> V3<S> {
    [S::cst(a[0]), S::cst(a[1]), S::cst(a[2])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type J = Jet<7>;

    #[test]
    fn exp_series() {
        let e = J::variable(0.0).exp();
        for k in 0..7 {
            assert_relative_eq!(e.c[k], 1.0 / factorial(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn sin_cos_derivatives() {
        let t = 0.7;
        let (s, c) = J::variable(t).sin_cos();
        let want_s = [t.sin(), t.cos(), -t.sin(), -t.cos()];
        for k in 0..4 {
            assert_relative_eq!(s.deriv(k), want_s[k], epsilon = 1e-14);
            assert_relative_eq!(c.deriv(k), want_s[(k + 1) % 4], epsilon = 1e-14);
        }
    }

    #[test]
    fn powf_matches_binomial() {
        // (1 + s)^p
        let p = -1.5;
        let j = J::variable(1.0).powf(p);
        let mut want = 1.0;
        for k in 0..7 {
            assert_relative_eq!(j.c[k], want, epsilon = 1e-13);
            want *= (p - k as f64) / (k as f64 + 1.0);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = J::from_coeffs([0.3, 1.2, -0.4, 0.5, 0.1, -0.2, 0.05]);
        let y = x.exp().ln();
        for k in 0..7 {
            assert_relative_eq!(y.c[k], x.c[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn div_inverts_mul() {
        let a = J::from_coeffs([1.3, 0.2, -0.4, 0.5, 0.1, -0.2, 0.05]);
        let b = J::from_coeffs([-0.7, 1.1, 0.3, -0.2, 0.4, 0.0, 0.3]);
        let q = (a * b) / b;
        for k in 0..7 {
            assert_relative_eq!(q.c[k], a.c[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn acos_and_atan2_against_cos_sin() {
        let x = J::from_coeffs([0.4, 0.3, -0.1, 0.2, 0.0, 0.1, -0.05]);
        let back = x.cos().acos();
        let ang = x.sin().atan2(x.cos());
        for k in 0..7 {
            assert_relative_eq!(back.c[k], x.c[k], epsilon = 1e-12);
            assert_relative_eq!(ang.c[k], x.c[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn powi_matches_repeated_product() {
        let a = J::from_coeffs([1.3, 0.2, -0.4, 0.5, 0.1, -0.2, 0.05]);
        let p = a.powi(-3);
        let q = (a * a * a).recip();
        for k in 0..7 {
            assert_relative_eq!(p.c[k], q.c[k], epsilon = 1e-12);
        }
    }
}
