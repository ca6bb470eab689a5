//! Monte Carlo experiments for random products: i.i.d. uniform points, the
//! Rademacher-signed Kronecker sum and randomly thinned Kronecker sequences.
//!
//! Every path draws from its own ChaCha20 stream (`seed`, stream = path id),
//! so results are bit-identical for fixed parameters regardless of the
//! thread count. The LIL ratio of a path is its maximum over
//! `N in [n_lo, N_max]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{DoubleDouble, UNIT_ROUNDOFF};
use crate::error::{out_of_range, Result};
use crate::irrational::{frac_part_scaled, IrrationalSpec, Precision};
use crate::products::log_factor;

pub use crate::quadrature::variance_integral;

/// Start of the window over which each path's maximal ratio is taken.
pub const DEFAULT_N_LO: usize = 100;

/// `pi^2 / 12`.
pub const VARIANCE: f64 = PI * PI / 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Iid,
    Rademacher,
    Subsequence,
}

impl Model {
    pub fn tag(self) -> &'static str {
        match self {
            Model::Iid => "iid",
            Model::Rademacher => "rademacher",
            Model::Subsequence => "subsequence",
        }
    }

    /// Limit of the per-path ratio. The i.i.d. and Rademacher ratios are
    /// `S_N / sqrt(2 B_N log log B_N)`, the subsequence ratio is
    /// `S_N / sqrt(N log log N)`.
    pub fn constant(self) -> f64 {
        match self {
            Model::Iid | Model::Rademacher => 1.0,
            Model::Subsequence => PI / 12f64.sqrt(),
        }
    }
}

/// The row at which a path attains its maximal ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub path_id: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "S_N")]
    pub s_n: f64,
    #[serde(rename = "B_N")]
    pub b_n: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// Quantiles at 0.1, 0.25, 0.75, 0.9.
    pub quantiles: BTreeMap<String, f64>,
}

/// Mean, unbiased variance and linearly interpolated quantiles.
pub fn summarize_ratios(ratios: &[f64]) -> RatioSummary {
    let n = ratios.len();
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (n - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let quantiles = [0.1, 0.25, 0.75, 0.9]
        .iter()
        .map(|&p| (format!("{p}"), q(p)))
        .collect();
    RatioSummary {
        mean,
        variance,
        min: sorted[0],
        max: sorted[n - 1],
        median: q(0.5),
        quantiles,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStatistics {
    pub model: Model,
    pub n_paths: usize,
    #[serde(rename = "N_max")]
    pub n_max: usize,
    #[serde(rename = "N_lo")]
    pub n_lo: usize,
    pub seed: u64,
    pub lil_ratios: Vec<f64>,
    /// Mean and variance of the summands over all paths and indices.
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub total_samples: u64,
    pub theoretical_constant: f64,
    pub rows: Vec<PathRow>,
    pub diagnostics: BTreeMap<String, f64>,
    /// Per path: the decomposition identity held at every `N`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identity_holds: Vec<bool>,
    /// Per path: selected count among the first `N` stayed within
    /// `3 sqrt(N)` of `N/2` at every checkpoint.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub count_within_band: Vec<bool>,
}

impl PathStatistics {
    pub fn ratio_summary(&self) -> RatioSummary {
        summarize_ratios(&self.lil_ratios)
    }

    /// Summary for JSON output: parameters, diagnostics and ratio statistics.
    pub fn summary_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "model": self.model.tag(),
            "n_paths": self.n_paths,
            "N_max": self.n_max,
            "N_lo": self.n_lo,
            "seed": self.seed,
            "theoretical_constant": self.theoretical_constant,
            "empirical_mean": self.empirical_mean,
            "empirical_variance": self.empirical_variance,
            "total_samples": self.total_samples,
            "ratio": self.ratio_summary(),
            "diagnostics": self.diagnostics,
        });
        if !self.identity_holds.is_empty() {
            v["identity_holds_all"] = self.identity_holds.iter().all(|&b| b).into();
            v["identity_holds"] = self.identity_holds.clone().into();
        }
        if !self.count_within_band.is_empty() {
            v["count_within_band_all"] = self.count_within_band.iter().all(|&b| b).into();
        }
        v
    }

    /// `path_id,N,S_N,B_N,ratio`, one row per path at its maximal ratio.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn log_log(x: f64) -> f64 {
    x.ln().ln()
}

/// Running maximum of a ratio sequence.
struct Best {
    row: PathRow,
}

impl Best {
    fn new(path_id: u64) -> Self {
        Self {
            row: PathRow {
                path_id,
                n: 0,
                s_n: 0.0,
                b_n: 0.0,
                ratio: f64::NEG_INFINITY,
            },
        }
    }

    fn offer(&mut self, n: usize, s: f64, b: f64, ratio: f64) {
        if ratio > self.row.ratio {
            self.row = PathRow {
                path_id: self.row.path_id,
                n: n as u64,
                s_n: s,
                b_n: b,
                ratio,
            };
        }
    }
}

fn check_params(n_paths: usize, n_max: usize, n_lo: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(out_of_range("paths", n_paths, "at least 1"));
    }
    if n_lo < 16 || n_lo > n_max {
        return Err(out_of_range("N_lo", n_lo, "between 16 and N_max"));
    }
    Ok(())
}

/// `Y = log(2 sin(pi X))` for `X` uniform on the open interval, drawn as a
/// 53-bit grid point shifted by half a step.
fn iid_sample<R: Rng>(rng: &mut R) -> f64 {
    let x = ((rng.gen::<u64>() >> 11) as f64 + 0.5) * 2f64.powi(-53);
    let y = x.min(1.0 - x);
    (2.0 * (PI * y).sin()).ln()
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max < 1000 {
        return Err(out_of_range("N_max", n_max, "at least 1000"));
    }
    Ok(())
}

pub fn iid_lil_experiment(n_paths: usize, n_max: usize, seed: u64) -> Result<PathStatistics> {
    check_n_max(n_max)?;
    iid_lil_experiment_with(n_paths, n_max, DEFAULT_N_LO, seed)
}

pub fn iid_lil_experiment_with(n_paths: usize, n_max: usize, n_lo: usize, seed: u64) -> Result<PathStatistics> {
    check_params(n_paths, n_max, n_lo)?;
    let paths: Vec<(PathRow, f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut best = Best::new(p);
            let (mut s, mut sum, mut sq) = (0.0f64, 0.0f64, 0.0f64);
            for n in 1..=n_max {
                let y = iid_sample(&mut rng);
                s += y;
                sum += y;
                sq += y * y;
                if n >= n_lo {
                    let b = n as f64 * VARIANCE;
                    best.offer(n, s, b, s / (2.0 * b * log_log(b)).sqrt());
                }
            }
            (best.row, sum, sq)
        })
        .collect();
    let total = (n_paths * n_max) as f64;
    let sum: f64 = paths.iter().map(|p| p.1).sum();
    let sq: f64 = paths.iter().map(|p| p.2).sum();
    let mean = sum / total;
    let variance = (sq - total * mean * mean) / (total - 1.0);
    let rows: Vec<PathRow> = paths.iter().map(|p| p.0).collect();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("variance_rel_err".into(), (variance / VARIANCE - 1.0).abs());
    diagnostics.insert("mean_over_stderr".into(), mean.abs() / (VARIANCE / total).sqrt());
    Ok(PathStatistics {
        model: Model::Iid,
        n_paths,
        n_max,
        n_lo,
        seed,
        lil_ratios: rows.iter().map(|r| r.ratio).collect(),
        empirical_mean: mean,
        empirical_variance: variance,
        total_samples: total as u64,
        theoretical_constant: Model::Iid.constant(),
        rows,
        diagnostics,
        identity_holds: Vec::new(),
        count_within_band: Vec::new(),
    })
}

/// Deterministic weights `w_n = log(2 sin(pi n alpha))`, `n = 1..=n`, with
/// `n ||n alpha||` for the constant `c_0`.
#[derive(Clone, Debug)]
pub struct KroneckerWeights {
    pub alpha: IrrationalSpec,
    pub w: Vec<f64>,
    /// `2 n ||n alpha||`.
    pub scaled_distance: Vec<f64>,
}

impl KroneckerWeights {
    pub fn new(alpha: &IrrationalSpec, n: usize, prec: &Precision) -> Result<Self> {
        if n as u64 > prec.n_max() {
            return Err(crate::error::Error::PrecisionBudget {
                n: n as u128,
                n_max: prec.n_max(),
            });
        }
        let pairs: Vec<(f64, f64)> = (1..=n as u64)
            .into_par_iter()
            .map(|k| {
                let x = frac_part_scaled(&BigUint::from(k), alpha, prec.bits()).value;
                let d = x.distance_to_integer().to_f64();
                (log_factor(&x).to_f64(), 2.0 * k as f64 * d)
            })
            .collect();
        let (w, scaled_distance) = pairs.into_iter().unzip();
        Ok(Self {
            alpha: *alpha,
            w,
            scaled_distance,
        })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `w_n` for `1 <= n <= len`.
    pub fn weight(&self, n: usize) -> f64 {
        self.w[n - 1]
    }
}

/// `sum_{n<=N} R_n w_n` and `B_N` along one sign sequence.
pub fn rademacher_path(weights: &KroneckerWeights, mut sign: impl FnMut(u64) -> bool) -> (Vec<f64>, Vec<f64>) {
    let mut s = 0.0;
    let mut b = 0.0;
    let mut ss = Vec::with_capacity(weights.len());
    let mut bs = Vec::with_capacity(weights.len());
    for (i, &w) in weights.w.iter().enumerate() {
        s += if sign(i as u64 + 1) { w } else { -w };
        b += w * w;
        ss.push(s);
        bs.push(b);
    }
    (ss, bs)
}

fn checkpoints(n_max: usize) -> Vec<usize> {
    (0..)
        .map(|j| 1000usize << j)
        .take_while(|&n| n <= n_max)
        .collect()
}

pub fn rademacher_lil_experiment(alpha: &IrrationalSpec, n_paths: usize, n_max: usize, seed: u64) -> Result<PathStatistics> {
    check_n_max(n_max)?;
    let prec = Precision::default();
    let weights = KroneckerWeights::new(alpha, n_max, &prec)?;
    rademacher_lil_with(&weights, n_paths, DEFAULT_N_LO, seed)
}

pub fn rademacher_lil_with(weights: &KroneckerWeights, n_paths: usize, n_lo: usize, seed: u64) -> Result<PathStatistics> {
    let n_max = weights.len();
    check_params(n_paths, n_max, n_lo)?;
    let b_prefix: Vec<f64> = weights
        .w
        .iter()
        .scan(0.0, |b, w| {
            *b += w * w;
            Some(*b)
        })
        .collect();
    let paths: Vec<(PathRow, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut best = Best::new(p);
            let mut s = 0.0;
            let mut sum = 0.0;
            for n in 1..=n_max {
                let z = if rng.gen::<bool>() { weights.weight(n) } else { -weights.weight(n) };
                s += z;
                sum += z;
                if n >= n_lo {
                    let b = b_prefix[n - 1];
                    best.offer(n, s, b, s / (2.0 * b * log_log(b)).sqrt());
                }
            }
            (best.row, sum)
        })
        .collect();
    let total = (n_paths * n_max) as f64;
    let mean = paths.iter().map(|p| p.1).sum::<f64>() / total;
    // E Z_n^2 = w_n^2 for every path
    let variance = b_prefix[n_max - 1] / n_max as f64;
    let rows: Vec<PathRow> = paths.iter().map(|p| p.0).collect();
    let mut diagnostics = weight_diagnostics(weights, &b_prefix);
    diagnostics.insert("empirical_variance_rel_err".into(), (variance / VARIANCE - 1.0).abs());
    Ok(PathStatistics {
        model: Model::Rademacher,
        n_paths,
        n_max,
        n_lo,
        seed,
        lil_ratios: rows.iter().map(|r| r.ratio).collect(),
        empirical_mean: mean,
        empirical_variance: variance,
        total_samples: total as u64,
        theoretical_constant: Model::Rademacher.constant(),
        rows,
        diagnostics,
        identity_holds: Vec::new(),
        count_within_band: Vec::new(),
    })
}

/// `B_N/N`, `c_1 = max |w_n| / log n`, `c_0 = min 2 n ||n alpha||`, the
/// deterministic sum over `log^2 N`, and whether
/// `c_1 log N / sqrt(B_N / log log B_N)` decreases over the checkpoints
/// `1000 * 2^j`.
pub fn weight_diagnostics(weights: &KroneckerWeights, b_prefix: &[f64]) -> BTreeMap<String, f64> {
    let n_max = weights.len();
    let mut d = BTreeMap::new();
    let b_over_n = b_prefix[n_max - 1] / n_max as f64;
    d.insert("B_N_over_N".into(), b_over_n);
    d.insert("B_N_over_N_rel_err".into(), (b_over_n / VARIANCE - 1.0).abs());
    let c1 = (2..=n_max)
        .map(|n| weights.weight(n).abs() / (n as f64).ln())
        .fold(0.0, f64::max);
    d.insert("c1_hat".into(), c1);
    let c0 = weights.scaled_distance.iter().copied().fold(f64::INFINITY, f64::min);
    d.insert("c0_hat".into(), c0);
    let full: f64 = weights.w.iter().sum();
    d.insert("full_sum".into(), full);
    d.insert("full_sum_over_log2N".into(), full / (n_max as f64).ln().powi(2));
    let cps = checkpoints(n_max);
    let ratios: Vec<f64> = cps
        .iter()
        .map(|&n| {
            let b = b_prefix[n - 1];
            c1 * (n as f64).ln() / (b / log_log(b)).sqrt()
        })
        .collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    d.insert("lindeberg_ratio_decreasing".into(), if decreasing { 1.0 } else { 0.0 });
    if let Some(&last) = ratios.last() {
        d.insert("lindeberg_ratio_last".into(), last);
    }
    d
}

pub fn subsequence_product_experiment(alpha: &IrrationalSpec, n_paths: usize, n_terms: usize, seed: u64) -> Result<PathStatistics> {
    check_n_max(n_terms)?;
    // selected indices reach about 2 n_terms; extra weights are added on demand
    let cap = 2 * n_terms + 20 * (n_terms as f64).sqrt() as usize + 100;
    let prec = Precision::default();
    let weights = KroneckerWeights::new(alpha, cap, &prec)?;
    subsequence_with(&weights, n_paths, n_terms, DEFAULT_N_LO, seed)
}

struct SubsequencePath {
    row: PathRow,
    sum: f64,
    sq: f64,
    identity: bool,
    band: bool,
}

pub fn subsequence_with(weights: &KroneckerWeights, n_paths: usize, n_terms: usize, n_lo: usize, seed: u64) -> Result<PathStatistics> {
    check_params(n_paths, n_terms, n_lo)?;
    let prec = Precision::default();
    let alpha = weights.alpha;
    let weight = |n: usize| -> f64 {
        if n <= weights.len() {
            weights.weight(n)
        } else {
            log_factor(&frac_part_scaled(&BigUint::from(n as u64), &alpha, prec.bits()).value).to_f64()
        }
    };
    let paths: Vec<SubsequencePath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut best = Best::new(p);
            let (mut selected, mut full, mut signed) = (DoubleDouble::ZERO, DoubleDouble::ZERO, DoubleDouble::ZERO);
            let mut abs_total = 0.0f64;
            let (mut sum, mut sq) = (0.0f64, 0.0f64);
            let mut identity = true;
            let mut band = true;
            let mut k = 0usize;
            let mut n = 0usize;
            let mut next_cp = 1000usize;
            while k < n_terms {
                n += 1;
                let xi = rng.gen::<bool>();
                let w = weight(n);
                let wd = DoubleDouble::from(w);
                full = full + wd;
                signed = if xi { signed + wd } else { signed - wd };
                abs_total += w.abs();
                if xi {
                    selected = selected + wd;
                    k += 1;
                    sum += w;
                    sq += w * w;
                    if k >= n_lo {
                        let s = selected.to_f64();
                        let kf = k as f64;
                        best.offer(k, s, kf * VARIANCE / 2.0, s / (kf * log_log(kf)).sqrt());
                    }
                }
                // selected = (full + signed) / 2 up to accumulated rounding
                let gap = (selected - (full + signed).mul_f64(0.5)).abs().to_f64();
                if gap > 8.0 * UNIT_ROUNDOFF * (n as f64) * abs_total.max(1.0) {
                    identity = false;
                }
                if n == next_cp {
                    band &= (k as f64 - n as f64 / 2.0).abs() <= 3.0 * (n as f64).sqrt();
                    next_cp *= 2;
                }
            }
            band &= (k as f64 - n as f64 / 2.0).abs() <= 3.0 * (n as f64).sqrt();
            SubsequencePath {
                row: best.row,
                sum,
                sq,
                identity,
                band,
            }
        })
        .collect();
    let total = (n_paths * n_terms) as f64;
    let sum: f64 = paths.iter().map(|p| p.sum).sum();
    let sq: f64 = paths.iter().map(|p| p.sq).sum();
    let mean = sum / total;
    let variance = (sq - total * mean * mean) / (total - 1.0);
    let rows: Vec<PathRow> = paths.iter().map(|p| p.row).collect();
    let mut diagnostics = BTreeMap::new();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let median = summarize_ratios(&ratios).median;
    diagnostics.insert("median_over_constant".into(), median / Model::Subsequence.constant());
    Ok(PathStatistics {
        model: Model::Subsequence,
        n_paths,
        n_max: n_terms,
        n_lo,
        seed,
        lil_ratios: ratios,
        empirical_mean: mean,
        empirical_variance: variance,
        total_samples: total as u64,
        theoretical_constant: Model::Subsequence.constant(),
        rows,
        diagnostics,
        identity_holds: paths.iter().map(|p| p.identity).collect(),
        count_within_band: paths.iter().map(|p| p.band).collect(),
    })
}
