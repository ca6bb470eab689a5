//! Numbers in `[0, 1]` carried either as exact rationals or as truncated
//! binary fractions of configurable width.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::dd::DoubleDouble;

/// `mantissa / 2^bits`. When `exact` is false the true value lies in
/// `[mantissa, mantissa + 1) / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedFrac {
    mantissa: BigUint,
    bits: u32,
    exact: bool,
}

impl FixedFrac {
    pub fn new(mantissa: BigUint, bits: u32, exact: bool) -> Self {
        debug_assert!(mantissa.bits() <= bits as u64);
        Self {
            mantissa,
            bits,
            exact,
        }
    }

    /// A 128-bit word read as an exact binary fraction.
    pub fn from_u128(word: u128) -> Self {
        Self::new(BigUint::from(word), 128, true)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn error_bound(&self) -> f64 {
        if self.exact {
            0.0
        } else {
            2f64.powi(-(self.bits as i32))
        }
    }

    fn top_bits_to_dd(value: &BigUint, bits: u32) -> DoubleDouble {
        // keep the 128 leading bits of the value, not of the word
        let len = value.bits() as u32;
        let (top, shift) = if len > 128 {
            (value >> (len - 128), len - 128)
        } else {
            (value.clone(), 0)
        };
        let word = top.to_u128().unwrap_or(u128::MAX);
        DoubleDouble::from_u128(word).ldexp(shift as i32 - bits as i32)
    }
}

#[derive(Clone, Debug)]
pub enum Point {
    /// Exact rational `p/q` with `0 <= p <= q`.
    Exact(Ratio<u64>),
    Fixed(FixedFrac),
}

impl Point {
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den > 0 && num <= den, "{num}/{den} is not in [0, 1]");
        Point::Exact(Ratio::new(num, den))
    }

    /// Converts a double in `[0, 1]`. Doubles above `2^-75` convert exactly.
    pub fn from_f64(x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x), "{x} is not in [0, 1]");
        if x == 1.0 {
            return Point::ratio(1, 1);
        }
        if x == 0.0 {
            return Point::Fixed(FixedFrac::new(BigUint::zero(), 128, true));
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        // x = m * 2^e, e < 0
        let shift = 128 + e;
        if shift >= 0 {
            Point::Fixed(FixedFrac::new(BigUint::from(m) << shift as u32, 128, true))
        } else {
            let mant = BigUint::from(m) >> (-shift) as u32;
            Point::Fixed(FixedFrac::new(mant, 128, false))
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Point::Exact(_) => true,
            Point::Fixed(f) => f.exact,
        }
    }

    /// Absolute bound on the representation error.
    pub fn error_bound(&self) -> f64 {
        match self {
            Point::Exact(_) => 0.0,
            Point::Fixed(f) => f.error_bound(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Point::Exact(r) => r.numer().is_zero(),
            Point::Fixed(f) => f.exact && f.mantissa.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Point::Exact(r) => r.is_one(),
            Point::Fixed(_) => false,
        }
    }

    pub fn to_dd(&self) -> DoubleDouble {
        match self {
            Point::Exact(r) => DoubleDouble::from_ratio(*r.numer(), *r.denom()),
            Point::Fixed(f) => FixedFrac::top_bits_to_dd(&f.mantissa, f.bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_dd().to_f64()
    }

    /// Distance to the nearest integer, `min(x, 1 - x)`, formed exactly before
    /// rounding so points near 1 keep their relative precision.
    pub fn distance_to_integer(&self) -> DoubleDouble {
        match self {
            Point::Exact(r) => {
                let (p, q) = (*r.numer(), *r.denom());
                DoubleDouble::from_ratio(p.min(q - p), q)
            }
            Point::Fixed(f) => {
                let full = BigUint::one() << f.bits;
                let upper = &full - &f.mantissa;
                let near = if upper < f.mantissa { upper } else { f.mantissa.clone() };
                FixedFrac::top_bits_to_dd(&near, f.bits)
            }
        }
    }

    /// Numerator and denominator of the represented value.
    fn as_fraction(&self) -> (BigUint, BigUint) {
        match self {
            Point::Exact(r) => (BigUint::from(*r.numer()), BigUint::from(*r.denom())),
            Point::Fixed(f) => (f.mantissa.clone(), BigUint::one() << f.bits),
        }
    }

    /// Decimal rendering with `sig` significant digits, rounded half up.
    pub fn to_decimal(&self, sig: usize) -> String {
        let (num, den) = self.as_fraction();
        decimal_string(&num, &den, sig)
    }
}

pub(crate) fn decimal_string(num: &BigUint, den: &BigUint, sig: usize) -> String {
    assert!(sig >= 1);
    if num.is_zero() {
        return "0".to_string();
    }
    let ten = BigUint::from(10u32);
    let lower = ten.pow(sig as u32 - 1);
    let upper = ten.pow(sig as u32);
    // scale so that the rounded integer has exactly `sig` digits
    let mut k: i64 = 0;
    let mut scaled_num = num.clone();
    let mut scaled_den = den.clone();
    while scaled_num < &scaled_den * &lower {
        scaled_num *= &ten;
        k += 1;
    }
    while scaled_num >= &scaled_den * &upper {
        scaled_den *= &ten;
        k -= 1;
    }
    let (q, r) = scaled_num.div_rem(&scaled_den);
    let mut digits = if (&r << 1u32) >= scaled_den { q + 1u32 } else { q };
    if digits == upper {
        digits /= &ten;
        k -= 1;
    }
    let s = digits.to_str_radix(10);
    // value = digits * 10^-k
    if k >= s.len() as i64 {
        format!("0.{}{}", "0".repeat((k - s.len() as i64) as usize), s)
    } else if k > 0 {
        let split = s.len() - k as usize;
        format!("{}.{}", &s[..split], &s[split..])
    } else {
        format!("{}{}", s, "0".repeat((-k) as usize))
    }
}

/// Exact binary value of a finite double as `(negative, numerator, denominator)`.
fn f64_fraction(x: f64) -> (bool, BigUint, BigUint) {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    if e >= 0 {
        (neg, BigUint::from(m) << e as u32, BigUint::one())
    } else {
        (neg, BigUint::from(m), BigUint::one() << (-e) as u32)
    }
}

/// Decimal rendering of a double-double with `sig` significant digits.
pub fn dd_to_decimal(x: DoubleDouble, sig: usize) -> String {
    if !x.is_finite() {
        return x.hi().to_string();
    }
    let (n1, a, b) = f64_fraction(x.hi());
    let (n2, c, d) = f64_fraction(x.lo());
    // a/b and c/d share a power-of-two denominator after scaling
    let den = if b > d { b.clone() } else { d.clone() };
    let a = a * (&den / &b);
    let c = c * (&den / &d);
    let (neg, num) = match (n1, n2) {
        (false, false) => (false, a + c),
        (true, true) => (true, a + c),
        (false, true) => if a >= c { (false, a - c) } else { (true, c - a) },
        (true, false) => if c >= a { (false, c - a) } else { (true, a - c) },
    };
    let body = decimal_string(&num, &den, sig);
    if neg && !num.is_zero() {
        format!("-{body}")
    } else {
        body
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Exact(a), Point::Exact(b)) => a.cmp(b),
            (Point::Fixed(a), Point::Fixed(b)) => {
                let width = a.bits.max(b.bits);
                let x = &a.mantissa << (width - a.bits);
                let y = &b.mantissa << (width - b.bits);
                x.cmp(&y)
            }
            _ => {
                let (an, ad) = self.as_fraction();
                let (bn, bd) = other.as_fraction();
                (an * bd).cmp(&(bn * ad))
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Exact(r) => write!(f, "{r}"),
            Point::Fixed(x) => write!(f, "{}", self.to_decimal(20).as_str().trim_end_matches('0'))
                .and_then(|_| if x.exact { Ok(()) } else { write!(f, "~") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(Point::ratio(1, 4).to_decimal(5), "0.25000");
        assert_eq!(Point::ratio(1, 3).to_decimal(4), "0.3333");
        assert_eq!(Point::ratio(2, 3).to_decimal(4), "0.6667");
        assert_eq!(Point::ratio(1, 1).to_decimal(3), "1.00");
        assert_eq!(Point::ratio(1, 1000).to_decimal(2), "0.0010");
        assert_eq!(Point::ratio(999, 1000).to_decimal(2), "1.0");
        assert_eq!(Point::ratio(0, 7).to_decimal(40), "0");
    }

    #[test]
    fn dd_decimal() {
        let third = DoubleDouble::from_ratio(1, 3);
        assert_eq!(dd_to_decimal(third, 30), format!("0.{}", "3".repeat(30)));
        assert_eq!(dd_to_decimal(-DoubleDouble::from(2.5), 3), "-2.50");
        assert_eq!(dd_to_decimal(DoubleDouble::from(1234.0), 2), "1200");
        assert_eq!(dd_to_decimal(DoubleDouble::ZERO, 5), "0");
    }

    #[test]
    fn mixed_ordering() {
        let half = Point::ratio(1, 2);
        let fixed_half = Point::from_f64(0.5);
        assert_eq!(half, fixed_half);
        assert!(Point::from_f64(0.3) < Point::ratio(1, 3));
        assert!(Point::ratio(1, 3) < Point::from_f64(0.34));
        assert!(Point::ratio(1, 1) > Point::from_f64(0.999_999));
    }

    #[test]
    fn distance_to_integer_near_one() {
        let x = Point::ratio(999_999, 1_000_000);
        let d = x.distance_to_integer().to_f64();
        assert!((d - 1e-6).abs() < 1e-22);
        let y = Point::from_f64(1.0 - 2f64.powi(-40));
        assert_eq!(y.distance_to_integer().to_f64(), 2f64.powi(-40));
    }

    #[test]
    fn from_f64_is_exact_for_normal_doubles() {
        let x = 0.1f64;
        match Point::from_f64(x) {
            Point::Fixed(f) => assert!(f.is_exact()),
            _ => unreachable!(),
        }
        assert_eq!(Point::from_f64(x).to_f64(), x);
    }
}
