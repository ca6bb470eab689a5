//! `int_0^1 log^p(2 sin(pi x)) dx` for `p = 1, 2`.
//!
//! On `[0, delta]` the integrand is expanded as
//! `log(2 sin(pi x)) = log(2 pi x) + g(x)` with
//! `g(x) = -sum_j zeta(2j) x^(2j) / j` and integrated term by term. The rest
//! of the half interval is covered by Gauss-Legendre panels whose widths
//! double away from the singularity; the error estimate is the difference
//! between 30- and 20-point rules. The mirror half is handled the same way.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Width of the analytic endpoint pieces.
pub const ENDPOINT_WIDTH: f64 = 1e-3;

/// `zeta(2j)` for `j = 1..=5`.
const ZETA_EVEN: [f64; 5] = [
    1.6449340668482264,
    1.0823232337111382,
    1.017_343_061_984_449,
    1.0040773561979443,
    1.0009945751278181,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

fn log_f(x: f64) -> f64 {
    (2.0 * (PI * x).sin()).ln()
}

/// `int_0^delta log^p(2 sin(pi x)) dx` from the series.
fn endpoint_piece(p: u32, delta: f64) -> f64 {
    let l = (2.0 * PI * delta).ln();
    // g = sum_j c_j x^(2j)
    let c: Vec<f64> = ZETA_EVEN.iter().enumerate().map(|(i, z)| -z / (i + 1) as f64).collect();
    // int_0^delta x^k dx and int_0^delta x^k log(2 pi x) dx
    let mono = |k: f64| delta.powf(k + 1.0) / (k + 1.0);
    let mono_log = |k: f64| delta.powf(k + 1.0) / (k + 1.0) * (l - 1.0 / (k + 1.0));
    match p {
        1 => {
            let g: f64 = c.iter().enumerate().map(|(i, cj)| cj * mono(2.0 * (i + 1) as f64)).sum();
            delta * (l - 1.0) + g
        }
        2 => {
            let sq = delta * (l * l - 2.0 * l + 2.0);
            let cross: f64 = c.iter().enumerate().map(|(i, cj)| cj * mono_log(2.0 * (i + 1) as f64)).sum();
            let mut gg = 0.0;
            for (i, ci) in c.iter().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    gg += ci * cj * mono(2.0 * (i + j + 2) as f64);
                }
            }
            sq + 2.0 * cross + gg
        }
        _ => unreachable!("only p = 1, 2"),
    }
}

/// Panels `[delta 2^k, delta 2^(k+1)]` clipped at `1/2`.
fn panels(delta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut a = delta;
    while a < 0.5 {
        let b = (2.0 * a).min(0.5);
        out.push((a, b));
        a = b;
    }
    out
}

fn rule(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive"))
}

/// `int log^p(2 sin(pi x))` over `[0, 1/2]` when `mirror` is false, over
/// `[1/2, 1]` (integrand evaluated at the mirrored nodes) when it is true.
fn half(p: u32, mirror: bool) -> QuadResult {
    let (coarse, fine) = (rule(20), rule(30));
    let eval = |x: f64| {
        let y = if mirror { 1.0 - x } else { x };
        log_f(y).powi(p as i32)
    };
    let mut value = endpoint_piece(p, ENDPOINT_WIDTH);
    let mut err = 0.0;
    for (a, b) in panels(ENDPOINT_WIDTH) {
        let hi = fine.integrate(a, b, eval);
        let lo = coarse.integrate(a, b, eval);
        value += hi;
        err += (hi - lo).abs();
    }
    // the series is truncated after zeta(10) x^10
    err += ENDPOINT_WIDTH.powi(13);
    QuadResult {
        value,
        error_estimate: err + 16.0 * f64::EPSILON * value.abs().max(1.0),
    }
}

/// `int_0^1 log^p(2 sin(pi x)) dx`, `p` in `{1, 2}`.
pub fn log_sine_moment(p: u32) -> QuadResult {
    assert!(p == 1 || p == 2, "only p = 1, 2 are supported");
    let left = half(p, false);
    let right = half(p, true);
    QuadResult {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
    }
}

/// Twice the integral over `[0, 1/2]`.
pub fn log_sine_moment_half(p: u32) -> QuadResult {
    assert!(p == 1 || p == 2, "only p = 1, 2 are supported");
    let h = half(p, false);
    QuadResult {
        value: 2.0 * h.value,
        error_estimate: 2.0 * h.error_estimate,
    }
}

/// `int_0^1 log^2(2 sin(pi x)) dx`, which equals `pi^2 / 12`.
pub fn variance_integral() -> QuadResult {
    log_sine_moment(2)
}

/// `int_0^1 log(2 sin(pi x)) dx`, which equals 0.
pub fn log_integral() -> QuadResult {
    log_sine_moment(1)
}
