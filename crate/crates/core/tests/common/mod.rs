//! Arbitrary-precision reference values computed independently of the
//! library's integer arithmetic.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;
use num_rational::Ratio;
use weyl_core::{IrrationalSpec, Point};

const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    pub p: usize,
    cc: Consts,
}

impl Oracle {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn int(&mut self, n: &BigUint) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    pub fn u64(&self, n: u64) -> BigFloat {
        BigFloat::from_u64(n, self.p)
    }

    pub fn i64(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.p)
    }

    /// `(a + b sqrt(d)) / c`.
    pub fn alpha(&mut self, s: &IrrationalSpec) -> BigFloat {
        let root = self.u64(s.d()).sqrt(self.p, RM);
        let num = self.i64(s.a()).add(&self.i64(s.b()).mul(&root, self.p, RM), self.p, RM);
        num.div(&self.i64(s.c()), self.p, RM)
    }

    /// `{m alpha}`.
    pub fn frac(&mut self, m: &BigUint, s: &IrrationalSpec) -> BigFloat {
        let a = self.alpha(s);
        let m = self.int(m);
        let x = m.mul(&a, self.p, RM);
        let f = x.fract();
        if f.is_negative() {
            f.add(&self.u64(1), self.p, RM)
        } else {
            f
        }
    }

    pub fn point(&mut self, x: &Point) -> BigFloat {
        match x {
            Point::Exact(r) => self.u64(*r.numer()).div(&self.u64(*r.denom()), self.p, RM),
            Point::Fixed(f) => {
                let m = self.int(f.mantissa());
                let scale = self.u64(2).powi(f.bits() as usize, self.p, RM);
                m.div(&scale, self.p, RM)
            }
        }
    }

    /// `log(2 sin(pi x))`.
    pub fn log_factor(&mut self, x: &BigFloat) -> BigFloat {
        let pi = self.cc.pi(self.p, RM);
        let s = x.mul(&pi, self.p, RM).sin(self.p, RM, &mut self.cc);
        s.mul(&self.u64(2), self.p, RM).abs().ln(self.p, RM, &mut self.cc)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    /// `|a - b|` as a double.
    pub fn dist(&self, a: &BigFloat, b: &BigFloat) -> f64 {
        to_f64(&a.sub(b, self.p, RM).abs())
    }

    /// Continued fraction digits by repeated floor and reciprocal.
    pub fn cf_digits(&mut self, s: &IrrationalSpec, k: usize) -> Vec<u64> {
        let mut x = self.alpha(s);
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            x = self.u64(1).div(&x, self.p, RM);
            let a = x.floor();
            out.push(to_f64(&a) as u64);
            x = x.sub(&a, self.p, RM);
        }
        out
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().expect("decimal rendering")
}

/// `sup_a |#{x < a}/N - a|` and the closed-interval variant evaluated at
/// every point and at `a = 1`.
pub fn anchor_oracle(points: &[Ratio<u128>]) -> Ratio<u128> {
    let n = points.len() as u128;
    let mut anchors: Vec<Ratio<u128>> = points.to_vec();
    anchors.push(Ratio::from_integer(1));
    let mut best = Ratio::from_integer(0);
    for a in anchors {
        let lt = points.iter().filter(|&&x| x < a).count() as u128;
        let le = points.iter().filter(|&&x| x <= a).count() as u128;
        for c in [lt, le] {
            let f = Ratio::new(c, n);
            let d = if f > a { f - a } else { a - f };
            if d > best {
                best = d;
            }
        }
    }
    best
}

