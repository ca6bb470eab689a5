//! Checkers for the deterministic product bounds. Every comparison is made in
//! log space with tolerance `trace error + 1e-9`; an excess inside the
//! tolerance is recorded as inconclusive rather than as a violation.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dd::DoubleDouble;
use crate::discrepancy::DiscrepancyResult;
use crate::error::{out_of_range, Error, Result};
use crate::irrational::{cf_expand_until, ostrowski, IrrationalSpec, Precision};
use crate::point::Point;
use crate::products::{log_factor, product_trace_of, ProductTrace};
use crate::sequences::radical_inverse;

/// Slack added to every trace error bound.
pub const BASE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(rename = "N")]
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: String,
    pub params: BTreeMap<String, Value>,
    pub n_range: [u64; 2],
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub inconclusive: Vec<Violation>,
    pub empirical_constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evidence: BTreeMap<String, Value>,
    /// Set for conjecture reports, which never count as failures.
    pub evidence_only: bool,
}

impl BoundReport {
    pub fn new(theorem: &str, n_range: [u64; 2]) -> Self {
        Self {
            theorem: theorem.to_string(),
            params: BTreeMap::new(),
            n_range,
            passed: true,
            violations: Vec::new(),
            inconclusive: Vec::new(),
            empirical_constants: BTreeMap::new(),
            evidence: BTreeMap::new(),
            evidence_only: false,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.empirical_constants.insert(key.to_string(), value);
    }

    /// Records `lhs <= rhs` at `n`.
    pub fn compare(&mut self, n: u64, lhs: f64, rhs: f64, tol: f64, label: Option<&str>) {
        if lhs <= rhs {
            return;
        }
        let v = Violation {
            n,
            lhs,
            rhs,
            label: label.map(str::to_string),
        };
        if lhs - rhs <= tol {
            self.inconclusive.push(v);
        } else {
            self.violations.push(v);
            self.passed = false;
        }
    }

    /// Records a condition that is either met or violated outright.
    pub fn require(&mut self, n: u64, ok: bool, lhs: f64, rhs: f64, label: &str) {
        if !ok {
            self.violations.push(Violation {
                n,
                lhs,
                rhs,
                label: Some(label.to_string()),
            });
            self.passed = false;
        }
    }
}

/// `log P_N` trace of `{n alpha}`, `n = 1..n_max`.
pub fn kronecker_trace(alpha: &IrrationalSpec, n_max: usize, prec: &Precision) -> Result<ProductTrace> {
    let ps = crate::sequences::kronecker(alpha, n_max, prec)?;
    Ok(product_trace_of(&ps.points))
}

fn tolerance(trace: &ProductTrace, n: usize) -> f64 {
    trace.error_at(n) + BASE_TOLERANCE
}

/// `log P_N <= 2 Delta_N (log N - log Delta_N)` for `N >= n_min`.
pub fn check_hlawka(trace: &ProductTrace, d_trace: &[DiscrepancyResult], n_min: usize) -> Result<BoundReport> {
    if trace.len() != d_trace.len() {
        return Err(Error::LengthMismatch(trace.len(), d_trace.len()));
    }
    let n_max = trace.len();
    let mut report = BoundReport::new("hlawka", [n_min as u64, n_max as u64]).param("N_min", n_min);
    let mut last_bad = 0usize;
    let mut min_slack = f64::INFINITY;
    let mut gamma = 0.0f64;
    for n in 1..=n_max {
        let lhs = trace.log_p(n).to_f64();
        let delta = d_trace[n - 1].value.mul_f64(n as f64);
        let rhs = (delta.mul_f64(2.0) * ((DoubleDouble::from_u64(n as u64)).ln() - delta.ln())).to_f64();
        if lhs > rhs {
            last_bad = n;
        }
        if n >= n_min {
            report.compare(n as u64, lhs, rhs, tolerance(trace, n) + d_trace[n - 1].error_bound, None);
            min_slack = min_slack.min(rhs - lhs);
            let ln = (n as f64).ln();
            if n >= 2 {
                gamma = gamma.max(rhs / (ln * ln));
            }
        }
    }
    report.constant("min_slack", min_slack);
    report.constant("threshold_N", (last_bad + 1) as f64);
    report.constant("gamma_rhs", gamma);
    Ok(report)
}

/// The grid `k/(N+1)`: `P_N = N + 1` against the bound with
/// `Delta_N = N/(N+1)`, whose value is `(N+1)^(2N/(N+1)) <= (N+1)^2`.
pub fn check_hlawka_grid(n: usize) -> Result<BoundReport> {
    if n == 0 {
        return Err(out_of_range("N", n, "at least 1"));
    }
    let grid = crate::sequences::uniform_grid(n);
    let trace = product_trace_of(&grid.points);
    let d = crate::discrepancy::star_discrepancy(&grid)?;
    let lhs = trace.last().expect("nonempty").to_f64();
    let nf = n as f64;
    let delta = d.value.mul_f64(nf);
    let rhs = (delta.mul_f64(2.0) * (DoubleDouble::from_u64(n as u64).ln() - delta.ln())).to_f64();
    let mut report = BoundReport::new("hlawka", [n as u64, n as u64]).param("gen", "grid").param("N", n);
    report.compare(n as u64, lhs, rhs, trace.error_bound() + BASE_TOLERANCE, None);
    report.constant("lhs", lhs.exp());
    report.constant("exact_lhs", nf + 1.0);
    report.constant("rhs", rhs.exp());
    report.constant("rhs_squared_form", (nf + 1.0) * (nf + 1.0));
    report.require(n as u64, (lhs - (nf + 1.0).ln()).abs() <= 1e-10 * (nf + 1.0).ln().max(1.0), lhs, (nf + 1.0).ln(), "P_N = N + 1");
    report.compare(n as u64, rhs, 2.0 * (nf + 1.0).ln(), BASE_TOLERANCE, Some("rhs <= (N+1)^2"));
    Ok(report)
}

/// `1 <= P_{q-1} <= q^2/2` for every listed denominator `q >= 2`.
pub fn check_kronecker_sandwich(alpha: &IrrationalSpec, q_list: &[u128], prec: &Precision) -> Result<BoundReport> {
    let q_max = q_list.iter().copied().max().unwrap_or(2);
    let table = cf_expand_until(alpha, q_max)?;
    for &q in q_list {
        if q < 2 {
            return Err(out_of_range("q", q, "at least 2"));
        }
        if !table.denominators().contains(&q) {
            return Err(Error::NotADenominator(q));
        }
    }
    let trace = kronecker_trace(alpha, (q_max - 1) as usize, prec)?;
    let mut report = BoundReport::new("kronecker-sandwich", [1, (q_max - 1) as u64])
        .param("alpha", alpha.to_string())
        .param("q", q_list.iter().map(|q| q.to_string()).collect::<Vec<_>>());
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_log = f64::INFINITY;
    for &q in q_list {
        let n = (q - 1) as usize;
        let log_p = trace.log_p(n).to_f64();
        let tol = tolerance(&trace, n);
        report.compare(n as u64, 0.0, log_p, tol, Some("1 <= P_{q-1}"));
        let rhs = 2.0 * (q as f64).ln() - LN_2;
        report.compare(n as u64, log_p, rhs, tol, Some("P_{q-1} <= q^2/2"));
        max_ratio = max_ratio.max(log_p - rhs);
        min_log = min_log.min(log_p);
    }
    report.constant("min_log_P", min_log);
    report.constant("max_log_ratio_to_upper", max_ratio);
    Ok(report)
}

/// Tabulated denominators `2 <= q <= q_max`.
pub fn denominators_up_to(alpha: &IrrationalSpec, q_max: u128) -> Result<Vec<u128>> {
    let table = cf_expand_until(alpha, q_max)?;
    let mut qs: Vec<u128> = table.denominators().iter().copied().filter(|&q| q >= 2 && q <= q_max).collect();
    qs.dedup();
    Ok(qs)
}

/// `log P_N <= sum_{i<=l} (b_i log 2 + 3 log q_i)` for every `N <= n_max`.
pub fn check_ostrowski_bound(alpha: &IrrationalSpec, n_max: usize, prec: &Precision) -> Result<BoundReport> {
    let table = cf_expand_until(alpha, n_max as u128)?;
    let trace = kronecker_trace(alpha, n_max, prec)?;
    let log_q: Vec<f64> = table.denominators().iter().map(|&q| (q as f64).ln()).collect();
    let mut report = BoundReport::new("ostrowski", [1, n_max as u64]).param("alpha", alpha.to_string());
    let mut min_slack = f64::INFINITY;
    let mut argmin = 0usize;
    for n in 1..=n_max {
        let digits = ostrowski(n as u128, &table)?;
        let rhs: f64 = digits
            .digits
            .iter()
            .enumerate()
            .map(|(i, &b)| b as f64 * LN_2 + 3.0 * log_q[i])
            .sum();
        let lhs = trace.log_p(n).to_f64();
        report.compare(n as u64, lhs, rhs, tolerance(&trace, n), None);
        if rhs - lhs < min_slack {
            min_slack = rhs - lhs;
            argmin = n;
        }
    }
    report.constant("min_slack", min_slack);
    report.constant("argmin_slack_N", argmin as f64);
    Ok(report)
}

/// The Cesaro bound
/// `(1/N) log P_N <= log 2 (1/q_l + l / 2^((l-3)/2)) + 3 (log q_l / q_l)(log q_l / log phi + 1)`.
pub fn check_cesaro_log_bound(alpha: &IrrationalSpec, n_max: usize, prec: &Precision) -> Result<BoundReport> {
    let table = cf_expand_until(alpha, n_max as u128)?;
    let trace = kronecker_trace(alpha, n_max, prec)?;
    let ln_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let mut report = BoundReport::new("cesaro", [1, n_max as u64]).param("alpha", alpha.to_string());
    let mut means = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let l = table.level(n as u128)?;
        let q = table.q(l) as f64;
        let lq = q.ln();
        let lf = l as f64;
        let rhs = LN_2 * (1.0 / q + lf / 2f64.powf((lf - 3.0) / 2.0)) + 3.0 * (lq / q) * (lq / ln_phi + 1.0);
        let mean = trace.log_p(n).to_f64() / n as f64;
        report.compare(n as u64, mean, rhs, tolerance(&trace, n) / n as f64, None);
        means.push(mean);
    }
    // max over the upper decade, standing in for the limsup
    let lo = (n_max / 10).max(1);
    let proxy = means[lo - 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.constant("limsup_proxy", proxy);
    report.constant("limsup_window_start", lo as f64);
    let at_q_minus_1: Vec<Value> = table
        .denominators()
        .iter()
        .filter(|&&q| q >= 2 && (q as usize) <= n_max + 1)
        .map(|&q| json!({"q": q as u64, "mean": means[q as usize - 2]}))
        .collect();
    report.evidence.insert("mean_at_q_minus_1".into(), Value::Array(at_q_minus_1));
    Ok(report)
}

/// Reports `C = sup_N log2 P_N / N^(1 - 1/t)` over `N <= n_max`.
pub fn check_type_growth(alpha: &IrrationalSpec, n_max: usize, t: f64, prec: &Precision) -> Result<BoundReport> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(out_of_range("t", t, "greater than 1"));
    }
    let trace = kronecker_trace(alpha, n_max, prec)?;
    let mut report = BoundReport::new("type-growth", [1, n_max as u64])
        .param("alpha", alpha.to_string())
        .param("t", t);
    let mut c = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for n in 1..=n_max {
        let ratio = trace.log_p(n).to_f64() / LN_2 / (n as f64).powf(1.0 - 1.0 / t);
        if ratio > c {
            c = ratio;
            arg = n;
        }
    }
    report.constant("C", c);
    report.constant("argmax_N", arg as f64);
    report.require(arg as u64, c.is_finite(), c, f64::INFINITY, "finite C");
    Ok(report)
}

/// Summary of the van der Corput product over one octave `[2^s, 2^(s+1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VdcOctave {
    pub s: u32,
    /// `log P_n` at `n = 2^(s+1) - 2`.
    pub log_p_peak: f64,
    pub log_p_start: f64,
    pub argmin: u64,
    pub log_min: f64,
    /// Position of the global maximum over `1 <= n < 2^(s+1)`.
    pub argmax_global: u64,
    pub log_max_global: f64,
    pub error_bound: f64,
}

/// Streams `log P_n` of the van der Corput sequence for `n < 2^(s_max+1)`.
pub fn vdc_octaves(s_max: u32) -> Vec<VdcOctave> {
    const CHUNK: u64 = 1 << 15;
    let end = 1u64 << (s_max + 1);
    let mut out = Vec::with_capacity(s_max as usize + 1);
    let mut sum = DoubleDouble::ZERO;
    let mut err = 0.0f64;
    let mut global = (0u64, f64::NEG_INFINITY);
    let mut octave: Option<VdcOctave> = None;
    let mut start = 1u64;
    while start < end {
        let stop = (start + CHUNK).min(end);
        let terms: Vec<DoubleDouble> = (start..stop)
            .into_par_iter()
            .map(|n| log_factor(&Point::Exact(radical_inverse(n))))
            .collect();
        for (j, t) in terms.into_iter().enumerate() {
            let n = start + j as u64;
            sum = sum + t;
            err += 20.0 * crate::dd::UNIT_ROUNDOFF * (1.0 + sum.to_f64().abs() + t.to_f64().abs());
            let v = sum.to_f64();
            if v > global.1 {
                global = (n, v);
            }
            if n.is_power_of_two() {
                if let Some(o) = octave.take() {
                    out.push(o);
                }
                octave = Some(VdcOctave {
                    s: n.trailing_zeros(),
                    log_p_peak: f64::NAN,
                    log_p_start: v,
                    argmin: n,
                    log_min: v,
                    argmax_global: 0,
                    log_max_global: f64::NEG_INFINITY,
                    error_bound: 0.0,
                });
            }
            let o = octave.as_mut().expect("started at n = 1");
            if v < o.log_min {
                o.log_min = v;
                o.argmin = n;
            }
            if n + 2 == 2 << o.s {
                o.log_p_peak = v;
            }
            if n + 1 == 2 << o.s {
                o.argmax_global = global.0;
                o.log_max_global = global.1;
                o.error_bound = err;
            }
        }
        start = stop;
    }
    if let Some(o) = octave {
        out.push(o);
    }
    out
}

/// `log(2^s / sin(pi / 2^(s+1)))`.
pub fn vdc_peak_closed_form(s: u32) -> f64 {
    let y = DoubleDouble::ONE.ldexp(-(s as i32 + 1));
    (DoubleDouble::LN_2.mul_f64(s as f64) - DoubleDouble::sin_pi(y).ln()).to_f64()
}

/// `log(2^(s+1) sin(pi / 2^(s+1)))`.
pub fn vdc_start_closed_form(s: u32) -> f64 {
    let y = DoubleDouble::ONE.ldexp(-(s as i32 + 1));
    (DoubleDouble::LN_2.mul_f64((s + 1) as f64) + DoubleDouble::sin_pi(y).ln()).to_f64()
}

/// Relative difference `|exp(a - b) - 1|` of two logarithms.
fn rel_log(a: f64, b: f64) -> f64 {
    (a - b).exp_m1().abs()
}

/// Closed forms and extremal positions of the van der Corput product for
/// `s <= s_max`:
/// (a) `P_{2^(s+1)-2} = 2^s / sin(pi/2^(s+1))` to `1e-10` relative, for `s >= 1`;
/// (b) `P_n / n^2` at that `n` within `4 * 2^-s` of `1/(2 pi)`, for `s >= 2`;
/// (c) the octave minimum sits at `2^s` with `P_{2^s} = 2^(s+1) sin(pi/2^(s+1))`,
///     within `4^-s` of `pi`;
/// (d) the maximum over `n < 2^(s+1)` is at `2^(s+1) - 2`, asserted for `s >= 2`.
pub fn check_vdc_limits(s_max: u32) -> Result<BoundReport> {
    if s_max > 24 {
        return Err(out_of_range("s_max", s_max, "at most 24"));
    }
    let octaves = vdc_octaves(s_max);
    let mut report = BoundReport::new("vdc-limits", [1, (1u64 << (s_max + 1)) - 1]).param("s_max", s_max);
    let mut table = Vec::new();
    for o in &octaves {
        let s = o.s;
        let n_peak = (2u64 << s) - 2;
        let mut row = json!({
            "s": s,
            "argmin": o.argmin,
            "argmax_global": o.argmax_global,
            "P_start_over_pi": (o.log_p_start - PI.ln()).exp(),
        });
        if s >= 1 {
            let closed = vdc_peak_closed_form(s);
            let rel = rel_log(o.log_p_peak, closed);
            report.compare(n_peak, rel, 1e-10, 0.0, Some("(a) peak closed form"));
            let ratio = o.log_p_peak - 2.0 * (n_peak as f64).ln() + (2.0 * PI).ln();
            let rel_b = ratio.exp_m1().abs();
            if s >= 2 {
                report.compare(n_peak, rel_b, 4.0 * 2f64.powi(-(s as i32)), 0.0, Some("(b) P_n/n^2 near 1/(2 pi)"));
            }
            row["peak_rel_err"] = json!(rel);
            row["peak_over_n2_times_2pi"] = json!(ratio.exp());
            if s == 18 {
                report.constant("s18_rel_err_to_1_over_2pi", rel_b);
            }
        }
        let start_closed = vdc_start_closed_form(s);
        let rel_c = rel_log(o.log_p_start, start_closed);
        report.compare(1 << s, rel_c, 1e-10, 0.0, Some("(c) P_{2^s} closed form"));
        report.compare(1 << s, o.log_p_start - o.log_min, 0.0, o.error_bound + BASE_TOLERANCE, Some("(c) octave minimum at 2^s"));
        let rel_pi = rel_log(o.log_p_start, PI.ln());
        report.compare(1 << s, rel_pi, 4f64.powi(-(s as i32)), 0.0, Some("(c) P_{2^s} near pi"));
        if s == 20 {
            report.constant("s20_rel_err_to_pi", rel_pi);
        }
        if s >= 2 {
            let peak_gap = o.log_max_global - o.log_p_peak;
            report.compare(n_peak, peak_gap, 0.0, o.error_bound + BASE_TOLERANCE, Some("(d) global maximum at 2^(s+1)-2"));
        }
        table.push(row);
    }
    if let Some(o) = octaves.iter().find(|o| o.s == s_max) {
        let n_peak = (2u64 << s_max) - 2;
        report.constant("peak_over_n2", (o.log_p_peak - 2.0 * (n_peak as f64).ln()).exp());
        report.constant("P_2s", o.log_p_start.exp());
    }
    report.evidence.insert("octaves".into(), Value::Array(table));
    Ok(report)
}

/// Evidence for the two Kronecker conjectures: the argmax of `P_N` over
/// `[q_l, q_{l+1})` is `q_{l+1} - 1`, and `P_{q-1}/q` stays bounded.
pub fn check_kronecker_conjectures(alpha: &IrrationalSpec, n_max: usize, prec: &Precision) -> Result<BoundReport> {
    let table = cf_expand_until(alpha, n_max as u128)?;
    let trace = kronecker_trace(alpha, n_max, prec)?;
    let mut report = BoundReport::new("conjectures", [1, n_max as u64]).param("alpha", alpha.to_string());
    report.evidence_only = true;
    let q = table.denominators();
    let mut argmaxes = Vec::new();
    let mut all_match = true;
    for l in 0..q.len() - 1 {
        let (lo, hi) = (q[l] as usize, q[l + 1] as usize);
        if hi > n_max || lo >= hi {
            continue;
        }
        let arg = (lo..hi)
            .max_by(|&a, &b| trace.log_p(a).partial_cmp(&trace.log_p(b)).expect("finite"))
            .expect("nonempty");
        let matches = arg == hi - 1;
        all_match &= matches;
        argmaxes.push(json!({"l": l, "q_l": lo, "q_l1": hi, "argmax": arg, "matches": matches}));
    }
    let mut running = f64::NEG_INFINITY;
    let mut ratios = Vec::new();
    for &qq in q.iter().filter(|&&x| x >= 2 && x as usize <= n_max + 1) {
        let r = trace.log_p(qq as usize - 1).to_f64().exp() / qq as f64;
        running = running.max(r);
        ratios.push(json!({"q": qq as u64, "P_over_q": r, "running_max": running}));
    }
    let max_norm = (1..=n_max)
        .map(|n| trace.log_p(n).to_f64() - (n as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    report.evidence.insert("argmax".into(), Value::Array(argmaxes));
    report.evidence.insert("P_over_q".into(), Value::Array(ratios));
    report.evidence.insert("argmax_all_match".into(), Value::Bool(all_match));
    report.constant("max_P_over_N", max_norm.exp());
    report.constant("max_P_qm1_over_q", running);
    Ok(report)
}

/// Parameters of [`check_extremal`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalCheck {
    /// Largest even `N` of the closed-form sweep.
    pub n_max: u64,
    /// Start of the "sufficiently large" range for the lower bound.
    pub n_min: u64,
    pub epsilon: f64,
    /// Random configurations for the perturbation property.
    pub perturb_configs: usize,
    /// Random sets per `(N, M)` in the small-instance sup search.
    pub sup_samples: usize,
    pub seed: u64,
}

impl Default for ExtremalCheck {
    fn default() -> Self {
        Self {
            n_max: 1024,
            n_min: 64,
            epsilon: 0.1,
            perturb_configs: 100,
            sup_samples: 100_000,
            seed: 0,
        }
    }
}

/// The extremal set against its closed form and both bounds, the
/// perturbation property and a random sup search for `N <= 12`.
pub fn check_extremal(p: &ExtremalCheck) -> Result<BoundReport> {
    use crate::extremal::{
        build_extremal, extremal_product_closed_form, perturb_toward_half, sup_search, sweep, empirical_threshold,
        ExtremalConfig,
    };
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};

    let mut report = BoundReport::new("extremal", [2, p.n_max])
        .param("N_max", p.n_max)
        .param("N_min", p.n_min)
        .param("epsilon", p.epsilon)
        .param("seed", p.seed);

    let configs: Vec<ExtremalConfig> = (8..=p.n_max)
        .step_by(2)
        .flat_map(|n| (1..=n / 8).map(move |m| ExtremalConfig::new(n, m).expect("valid grid")))
        .collect();
    let direct: Vec<(f64, f64, f64)> = configs
        .par_iter()
        .map(|cfg| {
            let trace = product_trace_of(&build_extremal(cfg).points);
            let closed = extremal_product_closed_form(cfg).to_f64();
            (trace.last().expect("nonempty").to_f64(), closed, trace.error_bound())
        })
        .collect();
    let mut worst = 0.0f64;
    for (cfg, (d, c, e)) in configs.iter().zip(&direct) {
        let rel = (d - c).abs() / c.abs().max(1.0);
        worst = worst.max(rel);
        report.compare(cfg.n(), rel, 1e-9, e / c.abs().max(1.0), Some("closed form"));
    }
    report.constant("closed_form_max_rel_err", worst);

    let rows = sweep(&configs, p.epsilon)?;
    let mut below_threshold = 0u64;
    for r in &rows {
        if r.n >= p.n_min {
            report.compare(r.n, r.log_lower, r.log_p, BASE_TOLERANCE, Some("lower bound"));
        } else if !r.holds_lower {
            below_threshold += 1;
        }
    }
    report.constant("lower_violations_below_N_min", below_threshold as f64);
    let (b, log_c) = crate::extremal::upper_bound_constant(p.epsilon)?;
    report.constant("B_epsilon", b as f64);
    report.constant("log_c_epsilon", log_c);
    if let Some(t) = empirical_threshold(&rows) {
        report.constant("upper_threshold_N", t as f64);
    }

    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(p.seed);
    let mut perturbed_ok = 0usize;
    for _ in 0..p.perturb_configs {
        let n = 2 * rng.gen_range(2u64..=128);
        let m = rng.gen_range(1..=(n / 4).max(1));
        let cfg = ExtremalConfig::new(n, m)?;
        let base = crate::discrepancy::star_discrepancy(&build_extremal(&cfg))?;
        let d = Ratio::new(m as u128, n as u128);
        report.require(n, base.exact == Some(d), base.d_star, cfg.d_f64(), "D* = M/N");
        // non-1/2 points occupy the first and last N/2 - M positions
        let k = (n / 2 - m) as usize;
        let idx = if rng.gen::<bool>() {
            rng.gen_range(0..k)
        } else {
            n as usize - 1 - rng.gen_range(0..k)
        };
        let moved = crate::discrepancy::star_discrepancy(&perturb_toward_half(&cfg, idx)?)?;
        let increased = moved.exact.map_or(moved.d_star > cfg.d_f64(), |e| e > d);
        report.require(n, increased, moved.d_star, cfg.d_f64(), "perturbation increases D*");
        perturbed_ok += increased as usize;
    }
    report.constant("perturbations_increasing", perturbed_ok as f64);

    let mut searched = 0usize;
    let mut margin = f64::NEG_INFINITY;
    for n in (4..=12u64).step_by(2) {
        for m in 1..=2u64 {
            let cfg = ExtremalConfig::new(n, m)?;
            let s = sup_search(&cfg, p.sup_samples, p.seed ^ (n << 8 | m));
            searched += s.samples;
            margin = margin.max(s.best_log - s.extremal_log);
            report.require(n, s.counterexamples == 0, s.best_log, s.extremal_log, "sup search");
        }
    }
    report.constant("sup_search_admissible", searched as f64);
    report.constant("sup_search_best_minus_extremal", margin);
    Ok(report)
}
