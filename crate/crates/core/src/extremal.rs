//! The extremal set: for even `N` and `M = N d`, the points
//! `M/N, ..., (N/2 - 1)/N`, their mirror images `(N/2 + 1)/N, ..., (N - M)/N`
//! and `2M` copies of `1/2`. It has star discrepancy `M/N` and the largest
//! sine product among sets with that discrepancy.

use std::f64::consts::{E, PI};
use std::io::Write;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::discrepancy::star_discrepancy_of;
use crate::error::{out_of_range, Error, Result};
use crate::point::Point;
use crate::products::{log_factor, product_trace_of};
use crate::sequences::{PointSet, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtremalConfig {
    n: u64,
    m: u64,
}

impl ExtremalConfig {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n < 2 || n % 2 == 1 {
            return Err(Error::InvalidExtremal(format!("N = {n} must be even and positive")));
        }
        if m == 0 || m > n / 2 {
            return Err(Error::InvalidExtremal(format!("M = {m} must lie in 1..={}", n / 2)));
        }
        Ok(Self { n, m })
    }

    /// From a target discrepancy `d`; `N d` must be an integer.
    pub fn from_d(n: u64, d: Ratio<u64>) -> Result<Self> {
        let m = d * n;
        if !m.is_integer() {
            return Err(Error::InvalidExtremal(format!("N d = {m} is not an integer")));
        }
        Self::new(n, m.to_integer())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn d(&self) -> Ratio<u64> {
        Ratio::new(self.m, self.n)
    }

    pub fn d_f64(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// The extremal multiset in ascending order.
pub fn build_extremal(cfg: &ExtremalConfig) -> PointSet {
    let (n, m) = (cfg.n, cfg.m);
    let half = n / 2;
    let mut points = Vec::with_capacity(n as usize);
    points.extend((m..half).map(|k| Point::ratio(k, n)));
    points.extend((0..2 * m).map(|_| Point::ratio(1, 2)));
    points.extend((half + 1..=n - m).map(|k| Point::ratio(k, n)));
    let mut ps = PointSet::new(points, Provenance::Extremal);
    ps.params.insert("N".into(), n.to_string());
    ps.params.insert("M".into(), m.to_string());
    ps
}

/// `log(2N) - 2 sum_{k<M} log sin(pi k / N)`.
pub fn extremal_product_closed_form(cfg: &ExtremalConfig) -> DoubleDouble {
    let mut s = DoubleDouble::ZERO;
    for k in 1..cfg.m {
        s = s + DoubleDouble::sin_pi(DoubleDouble::from_ratio(k, cfg.n)).ln();
    }
    DoubleDouble::from_u64(2 * cfg.n).ln() - s.mul_f64(2.0)
}

fn check_d(n: u64, d: f64) -> Result<()> {
    if n == 0 {
        return Err(out_of_range("N", n, "at least 1"));
    }
    let lo = 1.0 / (2.0 * n as f64);
    if !(d >= lo * (1.0 - 1e-15) && d <= 1.0) {
        return Err(out_of_range("d", d, "within [1/(2N), 1]"));
    }
    Ok(())
}

/// `log( (2 pi^2 / e^6) (1/N) ((e/pi) / d)^(2 N d) )`.
pub fn theorem2_lower_bound(n: u64, d: f64) -> Result<f64> {
    check_d(n, d)?;
    let nf = n as f64;
    Ok((2.0 * PI * PI).ln() - 6.0 - nf.ln() + 2.0 * nf * d * (1.0 - PI.ln() - d.ln()))
}

/// `(B, log c)`: `B` is the last `M >= 2` with
/// `(M-1)^(1/M) M/(M-1) >= 1 + pi eps / (2e)`, or 1 if there is none, and
/// `c = max(2 pi^2/e^2, max_{2<=M<=B} (2 pi^2/e^2) e^(2M(M-1)) (M-1)^2 (M/(M-1))^(2M))`.
pub fn upper_bound_constant(eps: f64) -> Result<(u64, f64)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(out_of_range("epsilon", eps, "positive and finite"));
    }
    let threshold = 1.0 + PI / (2.0 * E) * eps;
    let f = |m: f64| (m - 1.0).powf(1.0 / m) * m / (m - 1.0);
    // f is decreasing from M = 5 on, so the scan stops at the first M >= 5 below the threshold
    let mut b = 1u64;
    let mut m = 2u64;
    loop {
        let v = f(m as f64);
        if v >= threshold {
            b = m;
        } else if m >= 5 {
            break;
        }
        m += 1;
    }
    let base = (2.0 * PI * PI).ln() - 2.0;
    let mut log_c = base;
    for m in 2..=b {
        let mf = m as f64;
        let term = base
            + 2.0 * mf * (mf - 1.0)
            + 2.0 * (mf - 1.0).ln()
            + 2.0 * mf * (mf / (mf - 1.0)).ln();
        log_c = log_c.max(term);
    }
    Ok((b, log_c))
}

/// `log( c(eps) (1/N) ((e/pi + eps) / d)^(2 N d) )`.
pub fn theorem2_upper_bound(n: u64, d: f64, eps: f64) -> Result<f64> {
    check_d(n, d)?;
    let (_, log_c) = upper_bound_constant(eps)?;
    let nf = n as f64;
    Ok(log_c - nf.ln() + 2.0 * nf * d * ((E / PI + eps) / d).ln())
}

/// Moves the point at `index` (which must not be `1/2`) toward `1/2` by
/// `1/(4N)`.
pub fn perturb_toward_half(cfg: &ExtremalConfig, index: usize) -> Result<PointSet> {
    let mut ps = build_extremal(cfg);
    let n = cfg.n;
    let Point::Exact(r) = ps.points[index] else {
        unreachable!("extremal points are rational")
    };
    let half = Ratio::new(1, 2);
    let shift = Ratio::new(1, 4 * n);
    let moved = match r.cmp(&half) {
        std::cmp::Ordering::Less => r + shift,
        std::cmp::Ordering::Greater => r - shift,
        std::cmp::Ordering::Equal => {
            return Err(out_of_range("index", index, "a point other than 1/2"));
        }
    };
    ps.points[index] = Point::Exact(moved);
    ps.provenance = Provenance::Manual;
    Ok(ps)
}

#[derive(Clone, Debug)]
pub struct SupSearch {
    pub samples: usize,
    /// Largest `log P_N` seen among admissible samples.
    pub best_log: f64,
    pub extremal_log: f64,
    /// Samples whose product exceeded the extremal one by more than `1e-9`.
    pub counterexamples: usize,
}

/// Random search over sets with `D_N^* <= M/N`. Each sorted point
/// `x_(i)` is drawn from `[i/N - D, (i-1)/N + D]`; sorting preserves these
/// windows because both endpoints increase with `i`.
pub fn sup_search(cfg: &ExtremalConfig, samples: usize, seed: u64) -> SupSearch {
    let n = cfg.n as usize;
    let d = cfg.d_f64();
    let extremal_log = extremal_product_closed_form(cfg).to_f64();
    let outcomes: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut xs: Vec<f64> = (1..=n)
                .map(|i| {
                    let lo = (i as f64 / n as f64 - d).max(0.0);
                    let hi = ((i - 1) as f64 / n as f64 + d).min(1.0 - f64::EPSILON);
                    rng.gen_range(lo..=hi)
                })
                .collect();
            xs.sort_by(f64::total_cmp);
            let pts: Vec<Point> = xs.into_iter().map(Point::from_f64).collect();
            let disc = star_discrepancy_of(&pts).ok()?;
            if disc.d_star > d + 1e-15 {
                return None;
            }
            let logs: f64 = pts.iter().map(|p| log_factor(p).to_f64()).sum();
            Some(logs)
        })
        .collect();
    let admissible: Vec<f64> = outcomes.into_iter().flatten().collect();
    let best_log = admissible.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let counterexamples = admissible.iter().filter(|&&l| l > extremal_log + 1e-9).count();
    SupSearch {
        samples: admissible.len(),
        best_log,
        extremal_log,
        counterexamples,
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: u64,
    pub m: u64,
    pub d: f64,
    pub log_p: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub holds_lower: bool,
    pub holds_upper: bool,
}

/// Evaluates the closed form and both bounds for every valid `(N, M)`.
pub fn sweep(configs: &[ExtremalConfig], eps: f64) -> Result<Vec<SweepRow>> {
    let (_, log_c) = upper_bound_constant(eps)?;
    configs
        .par_iter()
        .map(|cfg| {
            let d = cfg.d_f64();
            let log_p = extremal_product_closed_form(cfg).to_f64();
            let log_lower = theorem2_lower_bound(cfg.n, d)?;
            let nf = cfg.n as f64;
            let log_upper = log_c - nf.ln() + 2.0 * nf * d * ((E / PI + eps) / d).ln();
            Ok(SweepRow {
                n: cfg.n,
                m: cfg.m,
                d,
                log_p,
                log_lower,
                log_upper,
                holds_lower: log_lower <= log_p + 1e-9,
                holds_upper: log_p <= log_upper + 1e-9,
            })
        })
        .collect()
}

/// Smallest `N` in the sweep from which the upper bound holds on every row.
pub fn empirical_threshold(rows: &[SweepRow]) -> Option<u64> {
    let mut ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let last_bad = rows.iter().filter(|r| !r.holds_upper).map(|r| r.n).max();
    match last_bad {
        None => ns.first().copied(),
        Some(bad) => ns.into_iter().find(|&n| n > bad),
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "M", "d", "logP", "logLower", "logUpper", "holds_lower", "holds_upper"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.d.to_string(),
            r.log_p.to_string(),
            r.log_lower.to_string(),
            r.log_upper.to_string(),
            r.holds_lower.to_string(),
            r.holds_upper.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `log P_N` of the extremal set by direct summation.
pub fn extremal_product_direct(cfg: &ExtremalConfig) -> DoubleDouble {
    product_trace_of(&build_extremal(cfg).points)
        .last()
        .expect("nonempty")
}
