//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| <= ulp(hi) / 2`, giving roughly 106 bits of significand.
//!
//! Only what the product evaluation needs is provided: the four basic
//! operations, `sin(pi * y)` on `[0, 1/2]` and the natural logarithm.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Unit roundoff used in error bounds: `2^-104`, a conservative figure for the
/// operations implemented here.
pub const UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const NEG_INFINITY: Self = Self {
        hi: f64::NEG_INFINITY,
        lo: 0.0,
    };

    /// Builds a normalized value from two arbitrary components.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        // `hi` may round up past `n`; the signed remainder is exact.
        let lo = (n as i128 - hi as i128) as f64;
        Self::new(hi, lo)
    }

    /// Rounds a 128-bit integer to double-double (about 106 significant bits).
    pub fn from_u128(n: u128) -> Self {
        let hi = n as f64;
        let rest = n as i128 - hi as u128 as i128;
        Self::new(hi, rest as f64)
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num) / Self::from_u64(den)
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplies by `2^k` exactly (barring overflow or underflow).
    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let f = f - e + self.lo;
        let q2 = (s + f) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `sin(pi * y)` for `y` in `[0, 1/2]`.
    ///
    /// The argument is folded onto `[0, 1/4]` through `sin(pi y) = cos(pi (1/2 - y))`,
    /// so the Taylor series never sees an argument above `pi / 4`.
    pub fn sin_pi(y: Self) -> Self {
        debug_assert!(y.hi >= 0.0 && y.hi <= 0.5 + f64::EPSILON);
        if y.hi <= 0.25 {
            sin_taylor(Self::PI * y)
        } else {
            let z = Self::new(0.5, 0.0) - y;
            cos_taylor(Self::PI * z)
        }
    }

    /// Natural logarithm of a positive value.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::NEG_INFINITY
            } else {
                Self { hi: f64::NAN, lo: f64::NAN }
            };
        }
        if !self.hi.is_finite() {
            return self;
        }
        // z = m * 2^e with m in [1/sqrt 2, sqrt 2)
        let mut e = self.hi.log2().floor() as i32;
        let mut m = self.ldexp(-e);
        if m.hi >= std::f64::consts::SQRT_2 {
            m = m.ldexp(-1);
            e += 1;
        } else if m.hi < std::f64::consts::FRAC_1_SQRT_2 {
            m = m.ldexp(1);
            e -= 1;
        }
        let t = (m - Self::ONE) / (m + Self::ONE);
        let t2 = t * t;
        // ln m = 2 atanh t = 2 (t + t^3/3 + t^5/5 + ...), |t| <= 0.1716
        let mut sum = t;
        let mut power = t;
        let mut k = 3.0;
        loop {
            power = power * t2;
            let term = power.div_f64(k);
            sum = sum + term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() || term.hi == 0.0 {
                break;
            }
            k += 2.0;
        }
        sum.mul_f64(2.0) + Self::LN_2.mul_f64(e as f64)
    }
}

/// Inverse factorials `1/k!` for `k = 0..=40`.
fn inverse_factorials() -> &'static [DoubleDouble; 41] {
    static TABLE: OnceLock<[DoubleDouble; 41]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [DoubleDouble::ONE; 41];
        for k in 1..41 {
            table[k] = table[k - 1].div_f64(k as f64);
        }
        table
    })
}

// Both series are truncated once the next coefficient times z^k drops below
// 2^-110 for |z| <= pi/4.
const SIN_TERMS: usize = 15;

fn sin_taylor(z: DoubleDouble) -> DoubleDouble {
    let f = inverse_factorials();
    let z2 = z * z;
    // Horner on sum_{k} (-1)^k z^{2k} / (2k+1)!
    let mut acc = DoubleDouble::ZERO;
    for k in (0..SIN_TERMS).rev() {
        let c = f[2 * k + 1];
        let c = if k % 2 == 1 { -c } else { c };
        acc = acc * z2 + c;
    }
    acc * z
}

fn cos_taylor(z: DoubleDouble) -> DoubleDouble {
    let f = inverse_factorials();
    let z2 = z * z;
    let mut acc = DoubleDouble::ZERO;
    for k in (0..SIN_TERMS).rev() {
        let c = f[2 * k];
        let c = if k % 2 == 1 { -c } else { c };
        acc = acc * z2 + c;
    }
    acc
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        if hi.is_nan() && (self.hi.is_infinite() || b.hi.is_infinite()) {
            // inf + finite keeps the infinity instead of poisoning to NaN
            return Self { hi: self.hi + b.hi, lo: 0.0 };
        }
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self { hi: q3, lo: 0.0 }
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DoubleDouble, b: DoubleDouble, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol * b.abs().to_f64().max(1e-300)
    }

    #[test]
    fn division_recovers_thirds() {
        let third = DoubleDouble::ONE / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0);
        assert!(close(back, DoubleDouble::ONE, 1e-31));
    }

    #[test]
    fn u128_conversion_keeps_low_bits() {
        let n: u128 = (1u128 << 100) + 12345;
        let d = DoubleDouble::from_u128(n);
        let back = d.hi() as i128 + d.lo() as i128;
        assert_eq!(back as u128, n);
    }

    #[test]
    fn sin_pi_of_sixth_is_half() {
        let y = DoubleDouble::from_ratio(1, 6);
        assert!(close(DoubleDouble::sin_pi(y), DoubleDouble::from(0.5), 1e-30));
        let y = DoubleDouble::from(0.5);
        assert!(close(DoubleDouble::sin_pi(y), DoubleDouble::ONE, 1e-31));
        assert_eq!(DoubleDouble::sin_pi(DoubleDouble::ZERO).to_f64(), 0.0);
    }

    #[test]
    fn ln_of_powers_of_two() {
        let l = DoubleDouble::from(1024.0).ln();
        assert!(close(l, DoubleDouble::LN_2.mul_f64(10.0), 1e-31));
        assert_eq!(DoubleDouble::ONE.ln().to_f64(), 0.0);
        assert_eq!(DoubleDouble::ZERO.ln().to_f64(), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_inverts_product() {
        let a = DoubleDouble::from_ratio(7, 3);
        let b = DoubleDouble::from_ratio(5, 11);
        let lhs = (a * b).ln();
        let rhs = a.ln() + b.ln();
        assert!((lhs - rhs).abs().to_f64() < 1e-30);
    }

    #[test]
    fn infinity_survives_addition() {
        let s = DoubleDouble::NEG_INFINITY + DoubleDouble::from(3.0);
        assert_eq!(s.to_f64(), f64::NEG_INFINITY);
    }
}
