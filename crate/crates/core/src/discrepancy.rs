//! Star discrepancy `D_N^* = sup_a |A_N(a)/N - a|` with `A_N(a)` counting
//! points in `[0, a)`.
//!
//! For sorted points the supremum is
//! `max_i max(x_(i) - (i-1)/N, i/N - x_(i))`, which is exact under the
//! half-open convention including repeated points. Rational point sets with a
//! common denominator below `2^64` are handled in integers; everything else in
//! double-double.

use std::io::Write;

use num_integer::Integer;
use num_rational::Ratio;

use crate::dd::{DoubleDouble, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::sequences::PointSet;

#[derive(Clone, Debug)]
pub struct DiscrepancyResult {
    pub n: usize,
    pub d_star: f64,
    /// `n * d_star`.
    pub delta: f64,
    pub value: DoubleDouble,
    /// Exact value for rational point sets.
    pub exact: Option<Ratio<u128>>,
    /// `x_(i)` at which the supremum is reached.
    pub argmax_anchor: Point,
    /// The supremum is approached as `a` decreases to the anchor rather than
    /// attained at it.
    pub from_above: bool,
    pub error_bound: f64,
}

fn common_denominator(points: &[Point]) -> Option<u64> {
    let mut l = 1u64;
    for p in points {
        let Point::Exact(r) = p else { return None };
        let d = *r.denom();
        let g = l.gcd(&d);
        l = (l / g).checked_mul(d)?;
    }
    Some(l)
}

/// Sorted-order scan over integer numerators `m_i / l`. Returns the maximal
/// numerator over `n l`, its index and side.
fn scan_integer(sorted: &[u128], l: u128) -> (u128, usize, bool) {
    let n = sorted.len() as u128;
    let mut best = (0u128, 0usize, false);
    for (i, &m) in sorted.iter().enumerate() {
        let i1 = i as u128;
        let nm = n * m;
        // x_(i) - (i-1)/N and i/N - x_(i), with 1-based i
        let left = nm as i128 - (i1 * l) as i128;
        let right = ((i1 + 1) * l) as i128 - nm as i128;
        if left > best.0 as i128 {
            best = (left as u128, i, false);
        }
        if right > best.0 as i128 {
            best = (right as u128, i, true);
        }
    }
    best
}

fn scan_dd(sorted: &[DoubleDouble]) -> (DoubleDouble, usize, bool) {
    let n = sorted.len() as f64;
    let mut best = (DoubleDouble::ZERO, 0usize, false);
    for (i, &x) in sorted.iter().enumerate() {
        let nx = x.mul_f64(n);
        let left = nx - DoubleDouble::from(i as f64);
        let right = DoubleDouble::from((i + 1) as f64) - nx;
        if left > best.0 {
            best = (left, i, false);
        }
        if right > best.0 {
            best = (right, i, true);
        }
    }
    (best.0.div_f64(n), best.1, best.2)
}

fn integer_result(n: usize, l: u64, num: u128, anchor: Point, from_above: bool) -> DiscrepancyResult {
    let den = n as u128 * l as u128;
    let exact = Ratio::new(num, den);
    let value = DoubleDouble::from_u128(*exact.numer()) / DoubleDouble::from_u128(*exact.denom());
    let d_star = value.to_f64();
    DiscrepancyResult {
        n,
        d_star,
        delta: n as f64 * d_star,
        value,
        exact: Some(exact),
        argmax_anchor: anchor,
        from_above,
        error_bound: 0.0,
    }
}

fn dd_result(n: usize, value: DoubleDouble, anchor: Point, from_above: bool, point_err: f64) -> DiscrepancyResult {
    let d_star = value.to_f64();
    DiscrepancyResult {
        n,
        d_star,
        delta: n as f64 * d_star,
        value,
        exact: None,
        argmax_anchor: anchor,
        from_above,
        error_bound: point_err + 4.0 * UNIT_ROUNDOFF,
    }
}

fn numerators(points: &[Point], l: u64) -> Vec<u128> {
    points
        .iter()
        .map(|p| match p {
            Point::Exact(r) => *r.numer() as u128 * (l / *r.denom()) as u128,
            Point::Fixed(_) => unreachable!("checked by common_denominator"),
        })
        .collect()
}

fn max_error(points: &[Point]) -> f64 {
    points.iter().map(Point::error_bound).fold(0.0, f64::max)
}

pub fn star_discrepancy(ps: &PointSet) -> Result<DiscrepancyResult> {
    star_discrepancy_of(&ps.points)
}

pub fn star_discrepancy_of(points: &[Point]) -> Result<DiscrepancyResult> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let n = points.len();
    let mut sorted = points.to_vec();
    sorted.sort();
    if let Some(l) = common_denominator(&sorted) {
        let nums = numerators(&sorted, l);
        let (num, i, above) = scan_integer(&nums, l as u128);
        return Ok(integer_result(n, l, num, sorted[i].clone(), above));
    }
    let keys: Vec<DoubleDouble> = sorted.iter().map(Point::to_dd).collect();
    let (value, i, above) = scan_dd(&keys);
    Ok(dd_result(n, value, sorted[i].clone(), above, max_error(&sorted)))
}

/// `D_N^*` of every prefix `N = 1..len`. Each prefix is kept sorted by
/// insertion and rescanned, so the cost is quadratic in the length.
pub fn discrepancy_trace(ps: &PointSet) -> Result<Vec<DiscrepancyResult>> {
    let points = &ps.points;
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut out = Vec::with_capacity(points.len());
    if let Some(l) = common_denominator(points) {
        let nums = numerators(points, l);
        let mut sorted: Vec<(u128, usize)> = Vec::with_capacity(points.len());
        let mut keys: Vec<u128> = Vec::with_capacity(points.len());
        for (k, &m) in nums.iter().enumerate() {
            let at = keys.partition_point(|&x| x <= m);
            keys.insert(at, m);
            sorted.insert(at, (m, k));
            let (num, i, above) = scan_integer(&keys, l as u128);
            out.push(integer_result(k + 1, l, num, points[sorted[i].1].clone(), above));
        }
        return Ok(out);
    }
    let mut order: Vec<usize> = Vec::with_capacity(points.len());
    let mut keys: Vec<DoubleDouble> = Vec::with_capacity(points.len());
    let mut err = 0.0f64;
    for (k, p) in points.iter().enumerate() {
        let at = order.partition_point(|&j| points[j] <= *p);
        order.insert(at, k);
        keys.insert(at, p.to_dd());
        err = err.max(p.error_bound());
        let (value, i, above) = scan_dd(&keys);
        out.push(dd_result(k + 1, value, points[order[i]].clone(), above, err));
    }
    Ok(out)
}

/// Writes `N,d_star,delta` rows.
pub fn write_trace_csv<W: Write>(trace: &[DiscrepancyResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "d_star", "delta"])?;
    for r in trace {
        w.write_record([r.n.to_string(), r.d_star.to_string(), r.delta.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{uniform_grid, van_der_corput};

    #[test]
    fn single_half() {
        let r = star_discrepancy_of(&[Point::ratio(1, 2)]).unwrap();
        assert_eq!(r.exact, Some(Ratio::new(1, 2)));
        assert_eq!(r.d_star, 0.5);
    }

    #[test]
    fn grid_is_one_over_n_plus_one() {
        for n in [1usize, 2, 7, 100] {
            let r = star_discrepancy(&uniform_grid(n)).unwrap();
            assert_eq!(r.exact, Some(Ratio::new(1, n as u128 + 1)));
        }
    }

    #[test]
    fn repeated_points() {
        let pts = vec![Point::ratio(1, 2), Point::ratio(1, 2)];
        assert_eq!(star_discrepancy_of(&pts).unwrap().exact, Some(Ratio::new(1, 2)));
        let ones = vec![Point::ratio(1, 1), Point::ratio(1, 4)];
        assert_eq!(star_discrepancy_of(&ones).unwrap().exact, Some(Ratio::new(1, 2)));
    }

    #[test]
    fn trace_matches_direct() {
        let v = van_der_corput(64);
        let trace = discrepancy_trace(&v).unwrap();
        for n in 1..=64 {
            let direct = star_discrepancy(&v.prefix(n)).unwrap();
            assert_eq!(trace[n - 1].exact, direct.exact);
        }
    }

    #[test]
    fn dd_path_agrees_with_exact() {
        let pts: Vec<Point> = [0.125, 0.5, 0.75, 0.3125].iter().map(|&x| Point::from_f64(x)).collect();
        let rat = vec![Point::ratio(1, 8), Point::ratio(1, 2), Point::ratio(3, 4), Point::ratio(5, 16)];
        let a = star_discrepancy_of(&pts).unwrap();
        let b = star_discrepancy_of(&rat).unwrap();
        assert!(a.exact.is_none());
        assert_eq!(a.d_star, b.d_star);
    }
}
