//! Quadratic irrationals `(a + b sqrt d) / c` in `(0, 1)`: exact continued
//! fractions, convergents, Ostrowski digits and fractional parts `{n alpha}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use regex::Regex;

use crate::error::{out_of_range, Error, Result};
use crate::point::{FixedFrac, Point};

/// `alpha = (a + b sqrt d) / c` with `c > 0`, `b != 0`, `d` not a square and
/// `0 < alpha < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IrrationalSpec {
    a: i64,
    b: i64,
    c: i64,
    d: u64,
}

fn is_square(d: &BigUint) -> bool {
    let r = d.sqrt();
    &(&r * &r) == d
}

/// `floor((a + b sqrt d) / c)` for `c > 0` and non-square `d`.
fn surd_floor(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigUint) -> BigInt {
    let root = BigInt::from((b.magnitude() * b.magnitude() * d).sqrt());
    let s = if b.is_negative() { -root - 1 } else { root };
    (a + s).div_floor(c)
}

/// Sign of `u + v sqrt d` for non-square `d`.
fn surd_sign(u: &BigInt, v: &BigInt, d: &BigUint) -> Ordering {
    let su = u.sign();
    let sv = v.sign();
    let pos = |s: Sign| s == Sign::Plus;
    let neg = |s: Sign| s == Sign::Minus;
    if (pos(su) || su == Sign::NoSign) && (pos(sv) || sv == Sign::NoSign) {
        return if su == Sign::NoSign && sv == Sign::NoSign {
            Ordering::Equal
        } else {
            Ordering::Greater
        };
    }
    if (neg(su) || su == Sign::NoSign) && (neg(sv) || sv == Sign::NoSign) {
        return Ordering::Less;
    }
    // opposite signs: compare u^2 with v^2 d
    let u2 = u.magnitude() * u.magnitude();
    let v2d = v.magnitude() * v.magnitude() * d;
    match u2.cmp(&v2d) {
        Ordering::Greater => {
            if pos(su) {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
        Ordering::Less => {
            if pos(sv) {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
        Ordering::Equal => Ordering::Equal,
    }
}

/// Pulls square factors out of `d`, multiplying them into `b`.
fn extract_squares(b: &mut BigInt, d: &mut BigUint) {
    let mut p = 2u64;
    while p < 100_000 {
        let pp = BigUint::from(p * p);
        if &pp > d {
            break;
        }
        while (&*d % &pp).is_zero() {
            *d /= &pp;
            *b *= p;
        }
        p += 1;
    }
}

impl IrrationalSpec {
    /// Validates and reduces `(a + b sqrt d) / c` modulo 1.
    pub fn new(a: i64, b: i64, c: i64, d: u64) -> Result<Self> {
        Self::from_big(a.into(), b.into(), c.into(), d.into())
    }

    fn from_big(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: BigUint) -> Result<Self> {
        let shown = format!("({a}+{b}*sqrt({d}))/{c}");
        if d.is_zero() {
            return Err(Error::InvalidSpec(shown, "d must be positive".into()));
        }
        if is_square(&d) {
            return Err(Error::RationalInput(d.to_u64().unwrap_or(u64::MAX)));
        }
        if b.is_zero() {
            return Err(Error::InvalidSpec(shown, "b must be nonzero".into()));
        }
        if c.is_zero() {
            return Err(Error::InvalidSpec(shown, "c must be nonzero".into()));
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        extract_squares(&mut b, &mut d);
        let f = surd_floor(&a, &b, &c, &d);
        a -= &f * &c;
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        let overflow = || Error::InvalidSpec(shown.clone(), "coefficients exceed 64 bits".into());
        Ok(Self {
            a: a.to_i64().ok_or_else(overflow)?,
            b: b.to_i64().ok_or_else(overflow)?,
            c: c.to_i64().ok_or_else(overflow)?,
            d: d.to_u64().ok_or_else(overflow)?,
        })
    }

    /// `sqrt 2 - 1`, whose fractional parts coincide with those of `sqrt 2`.
    pub fn sqrt2_minus_1() -> Self {
        Self::new(-1, 1, 1, 2).expect("valid")
    }

    /// `(sqrt 5 - 1) / 2`, the reduced golden ratio.
    pub fn golden() -> Self {
        Self::new(-1, 1, 2, 5).expect("valid")
    }

    /// The number `[0; prefix, period, period, ...]`.
    pub fn from_cf(prefix: &[u64], period: &[u64]) -> Result<Self> {
        let shown = format!("cf {prefix:?} {period:?}");
        if period.is_empty() || period.iter().chain(prefix).any(|&x| x == 0) {
            return Err(Error::InvalidSpec(
                shown,
                "partial quotients must be positive and the period nonempty".into(),
            ));
        }
        // y = [period...] solves Q_k y^2 + (Q_{k-1} - P_k) y - P_{k-1} = 0
        let (pk, pk1, qk, qk1) = convergent_pair(0, period);
        let t = &pk - &qk1;
        let disc = (&t * &t + BigInt::from(4) * &qk * &pk1).to_biguint().expect("positive");
        // alpha = (h_n y + h_{n-1}) / (k_n y + k_{n-1}) with a_0 = 0
        let (hn, hn1, kn, kn1) = convergent_pair(1, prefix);
        let (u, v) = (t, BigInt::from(2) * qk);
        let n1 = &hn * &u + &hn1 * &v;
        let m1 = &kn * &u + &kn1 * &v;
        let e = BigInt::from(disc.clone());
        let a = &n1 * &m1 - &hn * &kn * &e;
        let b = &hn * &m1 - &n1 * &kn;
        let c = &m1 * &m1 - &kn * &kn * &e;
        Self::from_big(a, b, c, disc)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn to_f64(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.d as f64).sqrt()) / self.c as f64
    }

    fn big(&self) -> (BigInt, BigInt, BigInt, BigUint) {
        (self.a.into(), self.b.into(), self.c.into(), self.d.into())
    }

    /// Exact comparison of `alpha` with `num / den`, `den > 0`.
    pub fn cmp_rational(&self, num: &BigInt, den: &BigInt) -> Ordering {
        debug_assert!(den.is_positive());
        let (a, b, c, d) = self.big();
        surd_sign(&(a * den - &c * num), &(b * den), &d)
    }

    /// `floor(m * alpha)` for a nonnegative multiplier.
    pub fn floor_mul(&self, m: &BigUint) -> BigInt {
        let (a, b, c, d) = self.big();
        let m = BigInt::from(m.clone());
        surd_floor(&(a * &m), &(b * &m), &c, &d)
    }
}

/// `(P_k, P_{k-1}, Q_k, Q_{k-1})` of `[a_0; quotients]`, where `a_0 = 0` when
/// `zero_lead` is 1 and `a_0 = quotients[0]` otherwise.
fn convergent_pair(zero_lead: usize, quotients: &[u64]) -> (BigInt, BigInt, BigInt, BigInt) {
    let (mut p, mut pp) = (BigInt::one(), BigInt::zero());
    let (mut q, mut qp) = (BigInt::zero(), BigInt::one());
    let lead = if zero_lead == 1 { Some(0u64) } else { None };
    for &x in lead.iter().chain(quotients) {
        let x = BigInt::from(x);
        let np = &x * &p + &pp;
        let nq = &x * &q + &qp;
        pp = std::mem::replace(&mut p, np);
        qp = std::mem::replace(&mut q, nq);
    }
    (p, pp, q, qp)
}

impl fmt::Display for IrrationalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.b < 0 { '-' } else { '+' };
        write!(f, "({}{}{}*sqrt({}))/{}", self.a, sign, self.b.unsigned_abs(), self.d, self.c)
    }
}

fn spec_regexes() -> &'static [Regex; 2] {
    static RE: OnceLock<[Regex; 2]> = OnceLock::new();
    RE.get_or_init(|| {
        [
            // (a+b*sqrt(d))/c, a+b*sqrt(d), (a-sqrt(d))/c
            Regex::new(
                r"^\(?(?P<a>[+-]?\d+)(?P<s>[+-])(?:(?P<b>\d+)\*)?sqrt\((?P<d>\d+)\)\)?(?:/(?P<c>[+-]?\d+))?$",
            )
            .expect("regex"),
            // sqrt(d), b*sqrt(d)-a, (sqrt(d)+a)/c
            Regex::new(
                r"^\(?(?P<s>[+-])?(?:(?P<b>\d+)\*)?sqrt\((?P<d>\d+)\)(?P<a>[+-]\d+)?\)?(?:/(?P<c>[+-]?\d+))?$",
            )
            .expect("regex"),
        ]
    })
}

impl FromStr for IrrationalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.to_ascii_lowercase().as_str() {
            "sqrt2m1" | "sqrt2" => return Ok(Self::sqrt2_minus_1()),
            "golden" | "phi" => return Ok(Self::golden()),
            _ => {}
        }
        let bad = |why: &str| Error::InvalidSpec(s.to_string(), why.to_string());
        let parse = |m: Option<regex::Match>, default: i64| -> Result<i64> {
            match m {
                None => Ok(default),
                Some(m) => m.as_str().parse().map_err(|_| bad("integer out of range")),
            }
        };
        for re in spec_regexes() {
            if let Some(cap) = re.captures(&compact) {
                let a = parse(cap.name("a"), 0)?;
                let mut b = parse(cap.name("b"), 1)?;
                if cap.name("s").map(|m| m.as_str()) == Some("-") {
                    b = -b;
                }
                let c = parse(cap.name("c"), 1)?;
                let d: u64 = cap["d"].parse().map_err(|_| bad("d out of range"))?;
                return Self::new(a, b, c, d);
            }
        }
        Err(bad("expected (a+b*sqrt(d))/c, sqrt2m1 or golden"))
    }
}

/// Working precision for fractional parts and the largest multiplier it covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    bits: u32,
    n_max: u64,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: 128,
            n_max: 1 << 24,
        }
    }
}

impl Precision {
    pub fn new(bits: u32, n_max: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(out_of_range("n_max", n_max, "at least 1"));
        }
        let required = Self::required_bits(n_max);
        if bits < required {
            return Err(Error::InsufficientPrecision {
                bits,
                n_max,
                required,
            });
        }
        Ok(Self { bits, n_max })
    }

    /// The smallest admissible precision for `n_max`, at least 128 bits.
    pub fn for_n_max(n_max: u64) -> Result<Self> {
        Self::new(Self::required_bits(n_max).max(128), n_max)
    }

    /// `64 + 2 ceil(log2 n_max)`.
    pub fn required_bits(n_max: u64) -> u32 {
        let log = if n_max <= 1 {
            0
        } else {
            64 - (n_max - 1).leading_zeros()
        };
        64 + 2 * log
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }
}

/// `{n alpha}` to `bits` binary places. The true value lies in
/// `[value, value + error_bound)`.
#[derive(Clone, Debug)]
pub struct FractionalPart {
    pub value: Point,
    pub error_bound: f64,
}

/// `{n alpha}` with the working precision of `prec`.
pub fn frac_part(n: u64, alpha: &IrrationalSpec, prec: &Precision) -> Result<FractionalPart> {
    if n == 0 {
        return Err(out_of_range("n", n, "at least 1"));
    }
    if n > prec.n_max {
        return Err(Error::PrecisionBudget {
            n: n as u128,
            n_max: prec.n_max,
        });
    }
    Ok(frac_part_scaled(&BigUint::from(n), alpha, prec.bits))
}

/// `{m alpha}` to `bits` binary places for an arbitrary multiplier. The caller
/// is responsible for the precision budget.
pub fn frac_part_scaled(m: &BigUint, alpha: &IrrationalSpec, bits: u32) -> FractionalPart {
    let scaled = m << bits;
    let floor = alpha.floor_mul(&scaled);
    let modulus = BigInt::one() << bits;
    let mant = floor.mod_floor(&modulus).to_biguint().expect("nonnegative");
    FractionalPart {
        value: Point::Fixed(FixedFrac::new(mant, bits, false)),
        error_bound: 2f64.powi(-(bits as i32)),
    }
}

/// Partial quotients `a_1..a_K` with convergents `p_0/q_0 .. p_K/q_K`,
/// `p_0/q_0 = 0/1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentTable {
    partial_quotients: Vec<u64>,
    p: Vec<u128>,
    q: Vec<u128>,
}

/// Streams the partial quotients `a_1, a_2, ...` of `alpha` by the PQa
/// recursion on `(P + sqrt D) / Q`.
struct CfStream {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    root: BigInt,
}

impl CfStream {
    fn new(alpha: &IrrationalSpec) -> Self {
        let (a, b, c, d) = alpha.big();
        // (a + b sqrt d)/c = (P + sqrt D)/Q with D = b^2 d
        let sign = if b.is_negative() { -BigInt::one() } else { BigInt::one() };
        let mut p = &sign * a;
        let mut q = &sign * c;
        let mut dd = &b * &b * BigInt::from(d);
        if !(&dd - &p * &p).is_multiple_of(&q) {
            let qa = q.abs();
            p *= &qa;
            dd *= &q * &q;
            q *= &qa;
        }
        let root = BigInt::from(dd.magnitude().sqrt());
        let mut s = Self { p, q, d: dd, root };
        let a0 = s.next_quotient();
        debug_assert!(a0.is_zero());
        s
    }

    fn next_quotient(&mut self) -> BigInt {
        let x = &self.p + &self.root;
        let a = if self.q.is_positive() {
            x.div_floor(&self.q)
        } else {
            -(x.div_floor(&(-&self.q))) - 1
        };
        let p = &a * &self.q - &self.p;
        let q = (&self.d - &p * &p) / &self.q;
        self.p = p;
        self.q = q;
        a
    }
}

impl Iterator for CfStream {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        Some(self.next_quotient())
    }
}

fn expand_while(
    alpha: &IrrationalSpec,
    mut more: impl FnMut(usize, u128) -> bool,
) -> Result<ConvergentTable> {
    if is_square(&BigUint::from(alpha.d)) {
        return Err(Error::RationalInput(alpha.d));
    }
    let mut table = ConvergentTable {
        partial_quotients: Vec::new(),
        p: vec![0],
        q: vec![1],
    };
    let (mut p_prev, mut q_prev) = (1u128, 0u128);
    let mut stream = CfStream::new(alpha);
    while more(table.partial_quotients.len(), *table.q.last().expect("nonempty")) {
        let index = table.partial_quotients.len() + 1;
        let a = stream.next().expect("infinite").to_u64().ok_or(Error::TableOverflow { index })?;
        let (p, q) = (*table.p.last().unwrap(), *table.q.last().unwrap());
        let step = |x: u128, y: u128| (a as u128).checked_mul(x).and_then(|t| t.checked_add(y));
        let np = step(p, p_prev).ok_or(Error::TableOverflow { index })?;
        let nq = step(q, q_prev).ok_or(Error::TableOverflow { index })?;
        p_prev = p;
        q_prev = q;
        table.partial_quotients.push(a);
        table.p.push(np);
        table.q.push(nq);
    }
    Ok(table)
}

/// The first `k` partial quotients and the convergents up to index `k`.
pub fn cf_expand(alpha: &IrrationalSpec, k: usize) -> Result<ConvergentTable> {
    if k == 0 {
        return Err(out_of_range("K", k, "at least 1"));
    }
    expand_while(alpha, |len, _| len < k)
}

/// Expands until the last denominator exceeds `bound`.
pub fn cf_expand_until(alpha: &IrrationalSpec, bound: u128) -> Result<ConvergentTable> {
    expand_while(alpha, |len, q| len == 0 || q <= bound)
}

impl ConvergentTable {
    /// Number of partial quotients `K`.
    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    /// `a_1..a_K`.
    pub fn partial_quotients(&self) -> &[u64] {
        &self.partial_quotients
    }

    /// `a_i` for `1 <= i <= K`.
    pub fn a(&self, i: usize) -> u64 {
        self.partial_quotients[i - 1]
    }

    /// `p_0..p_K`.
    pub fn numerators(&self) -> &[u128] {
        &self.p
    }

    /// `q_0..q_K`.
    pub fn denominators(&self) -> &[u128] {
        &self.q
    }

    pub fn q(&self, i: usize) -> u128 {
        self.q[i]
    }

    pub fn p(&self, i: usize) -> u128 {
        self.p[i]
    }

    /// The largest `l` with `q_l <= n`, provided `q_{l+1}` is tabulated.
    pub fn level(&self, n: u128) -> Result<usize> {
        let largest = *self.q.last().expect("nonempty");
        if n >= largest {
            return Err(Error::TableTooShallow { n, largest });
        }
        Ok(self.q.partition_point(|&q| q <= n) - 1)
    }

    /// Checks `1/(q_i (q_i + q_{i+1})) < |alpha - p_i/q_i| < 1/(q_i q_{i+1})`
    /// by exact surd comparison, for `i < K`.
    pub fn sandwich_holds(&self, alpha: &IrrationalSpec, i: usize) -> bool {
        let p = BigInt::from(self.p[i]);
        let q = BigInt::from(self.q[i]);
        let q1 = BigInt::from(self.q[i + 1]);
        // alpha - p/q lies strictly between lo and hi, in the direction of its sign
        let side = alpha.cmp_rational(&p, &q);
        let sgn = match side {
            Ordering::Greater => BigInt::one(),
            Ordering::Less => -BigInt::one(),
            Ordering::Equal => return false,
        };
        let near_den = &q * (&q + &q1);
        let far_den = &q * &q1;
        // p/q + sgn/(q (q + q')) = (p (q + q') + sgn) / (q (q + q'))
        let near = &p * (&q + &q1) + &sgn;
        let far = &p * &q1 + &sgn;
        let inner = alpha.cmp_rational(&near, &near_den);
        let outer = alpha.cmp_rational(&far, &far_den);
        inner == side && outer == side.reverse()
    }

    /// `(i, log q_{i+1} / log q_i)` for every `i >= 1` with `q_i > 1`.
    pub fn type_exponent_profile(&self) -> Vec<(usize, f64)> {
        (1..self.len())
            .filter(|&i| self.q[i] > 1)
            .map(|i| (i, (self.q[i + 1] as f64).ln() / (self.q[i] as f64).ln()))
            .collect()
    }
}

/// Largest `log q_{i+1} / log q_i` over the upper half of the table. Early
/// indices are dominated by small-denominator effects and are left to
/// [`ConvergentTable::type_exponent_profile`]. `None` when `K < 3`.
pub fn type_exponent_estimate(table: &ConvergentTable) -> Option<f64> {
    if table.len() < 3 {
        return None;
    }
    let start = table.len() / 2;
    table
        .type_exponent_profile()
        .into_iter()
        .filter(|&(i, _)| i >= start)
        .map(|(_, r)| r)
        .reduce(f64::max)
}

/// `N = sum b_i q_i`, greedy from the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OstrowskiDigits {
    /// `b_0..b_l`.
    pub digits: Vec<u64>,
    pub n: u128,
    pub level: usize,
}

pub fn ostrowski(n: u128, table: &ConvergentTable) -> Result<OstrowskiDigits> {
    if n == 0 {
        return Err(out_of_range("N", n, "at least 1"));
    }
    let level = table.level(n)?;
    let mut digits = vec![0u64; level + 1];
    let mut rest = n;
    for i in (0..=level).rev() {
        let b = rest / table.q[i];
        rest -= b * table.q[i];
        digits[i] = b as u64;
    }
    debug_assert_eq!(rest, 0);
    Ok(OstrowskiDigits { digits, n, level })
}

impl OstrowskiDigits {
    pub fn value(&self, table: &ConvergentTable) -> u128 {
        self.digits
            .iter()
            .enumerate()
            .map(|(i, &b)| b as u128 * table.q(i))
            .sum()
    }

    /// `b_i <= a_{i+1}`, `b_0 < a_1`, and `b_i = a_{i+1}` only after `b_{i-1} = 0`.
    pub fn is_canonical(&self, table: &ConvergentTable) -> bool {
        let d = &self.digits;
        if d.first().is_some_and(|&b0| b0 >= table.a(1)) {
            return false;
        }
        (0..d.len()).all(|i| {
            let cap = table.a(i + 1);
            d[i] <= cap && (d[i] < cap || i == 0 || d[i - 1] == 0)
        })
    }
}
