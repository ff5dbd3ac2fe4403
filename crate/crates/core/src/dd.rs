//! Double-double arithmetic.
//!
//! A [`Dd`] carries an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. Eigenvalues of smooth activations
//! decay geometrically in the degree, and the direct Gegenbauer integral
//! loses every significant digit to cancellation once `|eta_k|` drops below
//! about `1e-16`; running the quadrature in this type pushes that floor down
//! to about `1e-31`.
//!
//! Only what the quadrature and the activation catalog need is provided:
//! the field operations, `sqrt`, `exp`, `ln`, `ln_1p`, `sin_cos` and `atan`.

use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Unit roundoff of the double-double format.
pub const EPS: f64 = 4.930_380_657_631_324e-32; // 2^-104

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };
pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
pub const FRAC_PI_2: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123_233_995_736_766e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Multiplication by an exact power of two.
    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::ZERO } else { Dd::new(f64::NAN) };
        }
        // One Newton step on the f64 root doubles the precision.
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = (self - Dd { hi: p, lo: e }).to_f64();
        Dd::renorm(x, r / (2.0 * x))
    }

    /// `self^e` for `e` an integer or half-integer, `self >= 0`.
    pub fn pow_half_integer(self, e: f64) -> Self {
        let twice = (2.0 * e).round();
        debug_assert!((twice - 2.0 * e).abs() < 1e-12);
        let neg = twice < 0.0;
        let twice = twice.abs() as u32;
        let mut out = self.powi(twice / 2);
        if twice % 2 == 1 {
            out *= self.sqrt();
        }
        if neg {
            out.recip()
        } else {
            out
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * k).scale(1.0 / 1024.0);
        // expm1 on the reduced argument, |r| < 4e-4.
        let mut term = r;
        let mut s = r;
        for i in 2..=24 {
            term = term * r / i as f64;
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^(2^10) via s <- s (2 + s).
        for _ in 0..10 {
            s = s * (s + 2.0);
        }
        let out = s + 1.0;
        // Split the power of two so intermediate factors stay normal.
        let k = k as i32;
        let half = k / 2;
        out.scale(2f64.powi(half)).scale(2f64.powi(k - half))
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    /// `ln(1 + self)`, accurate for small arguments.
    pub fn ln_1p(self) -> Self {
        if self.hi.abs() < 1e-2 {
            let mut term = self;
            let mut s = self;
            for i in 2..=40 {
                term = -(term * self);
                let contrib = term / i as f64;
                s += contrib;
                if contrib.hi.abs() < 1e-34 * s.hi.abs() {
                    break;
                }
            }
            s
        } else {
            (self + 1.0).ln()
        }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Self, Self) {
        let n = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2 * n;
        let r2 = r.sqr();
        // Taylor series on |r| <= pi/4.
        let mut sin = r;
        let mut cos = Dd::ONE;
        let mut ts = r;
        let mut tc = Dd::ONE;
        let mut i = 1.0;
        loop {
            tc = -(tc * r2) / (i * (i + 1.0));
            ts = -(ts * r2) / ((i + 1.0) * (i + 2.0));
            cos += tc;
            sin += ts;
            i += 2.0;
            if ts.hi.abs() < 1e-36 && tc.hi.abs() < 1e-36 {
                break;
            }
        }
        match (n as i64).rem_euclid(4) {
            0 => (sin, cos),
            1 => (cos, -sin),
            2 => (-sin, -cos),
            _ => (-cos, sin),
        }
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn atan(self) -> Self {
        if !self.hi.is_finite() {
            return Dd::new(self.hi.atan());
        }
        let y0 = Dd::new(self.hi.atan());
        let (s, c) = y0.sin_cos();
        // atan(x) = y0 + atan(delta) with delta = (x cos y0 - sin y0)/(cos y0 + x sin y0).
        let delta = (self * c - s) / (c + self * s);
        y0 + delta - delta * delta.sqr() / 3.0
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        Dd::renorm(s, e + self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::renorm(p, e + self.lo * b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        Dd::renorm(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::new(b)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl AddAssign<f64> for Dd {
    #[inline]
    fn add_assign(&mut self, b: f64) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    #[inline]
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl MulAssign<f64> for Dd {
    #[inline]
    fn mul_assign(&mut self, b: f64) {
        *self = *self * b;
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Dd> for Dd {
    fn sum<I: Iterator<Item = &'a Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + *b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b) / b).abs().to_f64()
    }

    #[test]
    fn division_round_trips() {
        let a = Dd::new(1.0) / Dd::new(3.0);
        let back = a * 3.0;
        assert!((back - 1.0).abs().to_f64() < 1e-31);
    }

    #[test]
    fn sqrt_squares_back() {
        let two = Dd::new(2.0);
        let r = two.sqrt();
        assert!(rel(r * r, two) < 1e-31);
    }

    #[test]
    fn exp_ln_inverse() {
        for &x in &[-30.0, -2.2, -0.1, 0.0, 0.1, 1.0, 3.7, 50.0] {
            let x = Dd::new(x) / 3.0;
            let back = x.exp().ln();
            assert!((back - x).abs().to_f64() < 1e-30 * (1.0 + x.hi.abs()), "x = {x:?}");
        }
    }

    #[test]
    fn exp_one_matches_e() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
    }

    #[test]
    fn pythagorean_identity() {
        for &x in &[-7.3, -1.0, 0.3, 0.785, 2.0, 5.5] {
            let (s, c) = Dd::new(x).sin_cos();
            assert!((s.sqr() + c.sqr() - 1.0).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn atan_of_one_is_quarter_pi() {
        let q = Dd::ONE.atan();
        assert!(rel(q, PI.scale(0.25)) < 1e-31);
        // atan(x) + atan(1/x) = pi/2 for x > 0.
        let x = Dd::new(3.7);
        assert!(rel(x.atan() + x.recip().atan(), FRAC_PI_2) < 1e-30);
    }

    #[test]
    fn ln_1p_small_argument() {
        let u = Dd::new(1e-20);
        let v = u.ln_1p();
        assert!(rel(v, u - u.sqr().scale(0.5)) < 1e-31);
    }

    #[test]
    fn half_integer_power() {
        let x = Dd::new(0.3);
        let p = x.pow_half_integer(2.5);
        let q = (x.ln() * 2.5).exp();
        assert!(rel(p, q) < 1e-30);
        assert!(rel(x.pow_half_integer(-0.5), x.sqrt().recip()) < 1e-31);
    }
}
