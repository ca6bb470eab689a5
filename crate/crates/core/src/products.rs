//! `log P_N = sum log(2 sin(pi x_k))` in double-double with a running
//! absolute error bound.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dd::{DoubleDouble, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::point::{dd_to_decimal, Point};
use crate::sequences::PointSet;

/// Rounding error of one `ln(2 sin(pi y))` evaluation, in units of
/// `UNIT_ROUNDOFF * (1 + |t|)`.
const TERM_ROUNDING: f64 = 16.0;

/// `log(2 sin(pi x))` computed from the distance of `x` to the nearest
/// integer; `-inf` when that distance is exactly zero.
pub fn log_factor(x: &Point) -> DoubleDouble {
    let y = x.distance_to_integer();
    if y.hi() == 0.0 {
        return DoubleDouble::NEG_INFINITY;
    }
    DoubleDouble::sin_pi(y).ln() + DoubleDouble::LN_2
}

/// Absolute error bound on [`log_factor`] given the point's own error.
fn term_error(x: &Point, t: DoubleDouble) -> f64 {
    let y = x.distance_to_integer().to_f64();
    let delta = x.error_bound();
    // |log sin(pi (y +- delta)) - log sin(pi y)| <= -log(1 - delta / y)
    let propagated = if delta == 0.0 {
        0.0
    } else if delta < y {
        -(-delta / y).ln_1p()
    } else {
        f64::INFINITY
    };
    propagated + TERM_ROUNDING * UNIT_ROUNDOFF * (1.0 + t.to_f64().abs())
}

#[derive(Clone, Debug)]
pub struct ProductTrace {
    /// `log P_1 .. log P_N`.
    pub log_values: Vec<DoubleDouble>,
    /// Absolute error bound on each prefix.
    pub error_bounds: Vec<f64>,
    /// First `N` whose factor vanishes; later prefixes are `-inf`.
    pub zero_at: Option<usize>,
}

impl ProductTrace {
    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// `log P_n` for `1 <= n <= len`.
    pub fn log_p(&self, n: usize) -> DoubleDouble {
        self.log_values[n - 1]
    }

    pub fn error_at(&self, n: usize) -> f64 {
        self.error_bounds[n - 1]
    }

    /// Bound on `log P_N` for the full length.
    pub fn error_bound(&self) -> f64 {
        self.error_bounds.last().copied().unwrap_or(0.0)
    }

    pub fn last(&self) -> Option<DoubleDouble> {
        self.log_values.last().copied()
    }
}

pub fn product_trace(ps: &PointSet) -> ProductTrace {
    product_trace_of(&ps.points)
}

pub fn product_trace_of(points: &[Point]) -> ProductTrace {
    let terms: Vec<(DoubleDouble, f64)> = points
        .par_iter()
        .map(|x| {
            let t = log_factor(x);
            let e = if t.is_finite() { term_error(x, t) } else { 0.0 };
            (t, e)
        })
        .collect();
    let mut log_values = Vec::with_capacity(terms.len());
    let mut error_bounds = Vec::with_capacity(terms.len());
    let mut zero_at = None;
    let mut sum = DoubleDouble::ZERO;
    let mut err = 0.0f64;
    for (k, (t, e)) in terms.into_iter().enumerate() {
        if zero_at.is_none() && !t.is_finite() {
            zero_at = Some(k + 1);
        }
        if zero_at.is_some() {
            log_values.push(DoubleDouble::NEG_INFINITY);
            error_bounds.push(0.0);
            continue;
        }
        sum = sum + t;
        err += e + 4.0 * UNIT_ROUNDOFF * (sum.to_f64().abs() + t.to_f64().abs());
        log_values.push(sum);
        error_bounds.push(err);
    }
    ProductTrace {
        log_values,
        error_bounds,
        zero_at,
    }
}

/// `prod_{k=1}^{N-1} 2 sin(pi k / N) = N`.
pub fn closed_form_roots_of_unity(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(crate::error::out_of_range("N", n, "at least 2"));
    }
    Ok(n)
}

/// `prod_{k=0}^{N-1} 2 sin(pi (k + x) / N) = 2 sin(pi x)`, returned in log
/// form.
pub fn closed_form_shifted(n: u64, x: &Point) -> Result<DoubleDouble> {
    if n < 1 {
        return Err(crate::error::out_of_range("N", n, "at least 1"));
    }
    if x.is_zero() || x.is_one() {
        return Err(crate::error::out_of_range("x", x, "strictly inside (0, 1)"));
    }
    Ok(log_factor(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalizer {
    None,
    OneOverN,
    OneOverNSquared,
}

impl Normalizer {
    pub fn tag(self) -> &'static str {
        match self {
            Normalizer::None => "none",
            Normalizer::OneOverN => "one_over_N",
            Normalizer::OneOverNSquared => "one_over_N_squared",
        }
    }

    /// `log norm(n)`.
    pub fn log_norm(self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match self {
            Normalizer::None => 0.0,
            Normalizer::OneOverN => ln,
            Normalizer::OneOverNSquared => 2.0 * ln,
        }
    }
}

impl FromStr for Normalizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Normalizer::None),
            "one_over_n" | "1/n" => Ok(Normalizer::OneOverN),
            "one_over_n_squared" | "one_over_n2" | "1/n^2" => Ok(Normalizer::OneOverNSquared),
            _ => Err(crate::error::out_of_range(
                "normalizer",
                s,
                "one of none, one_over_N, one_over_N_squared",
            )),
        }
    }
}

impl fmt::Display for Normalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A positive quantity kept in linear form while `|log| <= 700`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Magnitude {
    Linear(f64),
    Log(f64),
}

impl Magnitude {
    pub fn from_log(log: f64) -> Self {
        if log.abs() <= 700.0 || log == f64::NEG_INFINITY {
            Magnitude::Linear(log.exp())
        } else {
            Magnitude::Log(log)
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            Magnitude::Linear(v) => v.ln(),
            Magnitude::Log(l) => l,
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Linear(v) => write!(f, "{v:e}"),
            Magnitude::Log(l) => write!(f, "exp({l})"),
        }
    }
}

/// `P_N / norm(N)` for every prefix.
pub fn normalized_trace(trace: &ProductTrace, normalizer: Normalizer) -> Vec<Magnitude> {
    trace
        .log_values
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let log = (*l - DoubleDouble::from(normalizer.log_norm(i + 1))).to_f64();
            Magnitude::from_log(log)
        })
        .collect()
}

/// Writes a `# normalizer=...` line followed by `N,logP,P_over_norm` rows.
pub fn write_trace_csv<W: Write>(trace: &ProductTrace, normalizer: Normalizer, mut out: W) -> Result<()> {
    writeln!(out, "# normalizer={}", normalizer.tag())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "logP", "P_over_norm"])?;
    for (i, (l, m)) in trace
        .log_values
        .iter()
        .zip(normalized_trace(trace, normalizer))
        .enumerate()
    {
        w.write_record([(i + 1).to_string(), dd_to_decimal(*l, 32), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_gives_log_two() {
        let t = product_trace_of(&[Point::ratio(1, 2)]);
        assert!((t.log_p(1) - DoubleDouble::LN_2).abs().to_f64() < 1e-31);
    }

    #[test]
    fn zero_factor_is_flagged() {
        let t = product_trace_of(&[Point::ratio(1, 2), Point::ratio(1, 1), Point::ratio(1, 3)]);
        assert_eq!(t.zero_at, Some(2));
        assert_eq!(t.log_p(3).to_f64(), f64::NEG_INFINITY);
        assert!(t.log_p(1).is_finite());
    }

    #[test]
    fn roots_of_unity() {
        for n in [2u64, 5, 64, 1000] {
            let pts: Vec<Point> = (1..n).map(|k| Point::ratio(k, n)).collect();
            let t = product_trace_of(&pts);
            let want = (n as f64).ln();
            assert!((t.last().unwrap().to_f64() - want).abs() < 1e-14 * want.max(1.0));
        }
    }

    #[test]
    fn normalizer_keeps_log_form_when_huge() {
        let m = Magnitude::from_log(800.0);
        assert_eq!(m, Magnitude::Log(800.0));
        assert_eq!(Magnitude::from_log(0.0), Magnitude::Linear(1.0));
        assert_eq!("one_over_N".parse::<Normalizer>().unwrap(), Normalizer::OneOverN);
    }
}
