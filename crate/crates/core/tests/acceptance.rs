//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use weyl_core::bounds::{self, ExtremalCheck};
use weyl_core::discrepancy::star_discrepancy_of;
use weyl_core::products::{closed_form_roots_of_unity, closed_form_shifted, product_trace_of};
use weyl_core::quadrature::{log_integral, log_sine_moment_half, variance_integral};
use weyl_core::stochastic::{self, VARIANCE};
use weyl_core::{cf_expand, star_discrepancy, DoubleDouble, uniform_grid, IrrationalSpec, Point, Precision};

type Outcome = Result<String, String>;

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=2048u64 {
        let pts: Vec<Point> = (1..n).map(|k| Point::ratio(k, n)).collect();
        let got = product_trace_of(&pts).last().unwrap();
        let want = DoubleDouble::from_u64(closed_form_roots_of_unity(n).unwrap()).ln();
        let err = (got - want).abs().to_f64() / want.to_f64().max(1.0);
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("roots of unity N = {n}: {got} vs {want}"))?;
    }
    let mut worst_shift = 0.0f64;
    for n in (0..=9).map(|j| 1u64 << j) {
        for j in 1..=6u64 {
            let pts: Vec<Point> = (0..n).map(|k| Point::ratio(7 * k + j, 7 * n)).collect();
            let got = product_trace_of(&pts).last().unwrap();
            let want = closed_form_shifted(n, &Point::ratio(j, 7)).unwrap();
            let rel = (got - want).to_f64().exp_m1().abs();
            worst_shift = worst_shift.max(rel);
            ensure(rel <= 1e-10, || format!("shifted N = {n}, x = {j}/7: rel {rel}"))?;
        }
    }
    Ok(format!("max scaled err {worst:.2e}, shifted max rel {worst_shift:.2e}"))
}

fn convergents() -> Outcome {
    let t = cf_expand(&IrrationalSpec::sqrt2_minus_1(), 8).unwrap();
    let want: [u128; 8] = [1, 2, 5, 12, 29, 70, 169, 408];
    ensure(t.denominators()[..8] == want, || format!("{:?}", t.denominators()))?;
    Ok(format!("{:?}", &t.denominators()[..8]))
}

fn grid_discrepancy() -> Outcome {
    for n in 1..=10_000usize {
        let d = star_discrepancy(&uniform_grid(n)).unwrap();
        ensure(d.exact == Some(Ratio::new(1, n as u128 + 1)), || format!("N = {n}: {:?}", d.exact))?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let den = rng.gen_range(1..=64u64);
        let pts: Vec<Point> = (0..n).map(|_| Point::ratio(rng.gen_range(0..=den), den)).collect();
        let exact: Vec<Ratio<u128>> = pts
            .iter()
            .map(|p| match p {
                Point::Exact(r) => Ratio::new(*r.numer() as u128, *r.denom() as u128),
                _ => unreachable!(),
            })
            .collect();
        let got = star_discrepancy_of(&pts).unwrap().exact;
        let want = common::anchor_oracle(&exact);
        ensure(got == Some(want), || format!("{exact:?}: {got:?} vs {want}"))?;
    }
    Ok("grid exact for N <= 10^4; 200 multisets match the anchor oracle".into())
}

fn report_line(r: &bounds::BoundReport) -> String {
    format!(
        "violations {}, inconclusive {}, constants {:?}",
        r.violations.len(),
        r.inconclusive.len(),
        r.empirical_constants
    )
}

fn passed(r: bounds::BoundReport) -> Outcome {
    ensure(r.passed && r.violations.is_empty(), || format!("{:?}", r.violations.first()))?;
    Ok(report_line(&r))
}

fn sandwich() -> Outcome {
    let mut lines = Vec::new();
    for alpha in [IrrationalSpec::sqrt2_minus_1(), IrrationalSpec::golden()] {
        let qs = bounds::denominators_up_to(&alpha, 100_000).unwrap();
        let r = bounds::check_kronecker_sandwich(&alpha, &qs, &Precision::default()).unwrap();
        lines.push(format!("{alpha}: {} denominators, {}", qs.len(), passed(r)?));
    }
    Ok(lines.join("; "))
}

fn ostrowski() -> Outcome {
    let r = bounds::check_ostrowski_bound(&IrrationalSpec::sqrt2_minus_1(), 10_000, &Precision::default()).unwrap();
    passed(r)
}

fn hlawka() -> Outcome {
    let vdc = weyl_core::van_der_corput(10_000);
    let kr = weyl_core::kronecker(&IrrationalSpec::sqrt2_minus_1(), 10_000, &Precision::default()).unwrap();
    let mut lines = Vec::new();
    for ps in [vdc, kr] {
        let trace = weyl_core::product_trace(&ps);
        let d = weyl_core::discrepancy_trace(&ps).unwrap();
        let r = bounds::check_hlawka(&trace, &d, 16).unwrap();
        lines.push(format!("{}: {}", ps.provenance, passed(r)?));
    }
    Ok(lines.join("; "))
}

fn extremal() -> Outcome {
    let r = bounds::check_extremal(&ExtremalCheck::default()).unwrap();
    let err = r.empirical_constants["closed_form_max_rel_err"];
    ensure(err <= 1e-9, || format!("closed form error {err}"))?;
    passed(r)
}

fn vdc() -> Outcome {
    let r = bounds::check_vdc_limits(20).unwrap();
    let c = &r.empirical_constants;
    let (b, pi) = (c["s18_rel_err_to_1_over_2pi"], c["s20_rel_err_to_pi"]);
    ensure(b <= 1e-4, || format!("s = 18: {b}"))?;
    ensure(pi <= 1e-5, || format!("s = 20: {pi}"))?;
    for o in bounds::vdc_octaves(20) {
        ensure(o.argmin == 1 << o.s, || format!("octave {} minimum at {}", o.s, o.argmin))?;
    }
    passed(r)
}

fn figure() -> Outcome {
    let alpha: IrrationalSpec = "sqrt2".parse().unwrap();
    let r = bounds::check_kronecker_conjectures(&alpha, 500, &Precision::default()).unwrap();
    let spikes: Vec<u64> = r.evidence["argmax"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["argmax"].as_u64().unwrap())
        .filter(|&n| n > 1)
        .collect();
    ensure(spikes == [4, 11, 28, 69, 168, 407], || format!("argmaxes {spikes:?}"))?;
    ensure(r.evidence["argmax_all_match"] == true, || "argmax mismatch".into())?;
    Ok(format!(
        "argmaxes {spikes:?}; max P_N/N = {:.4} (reported)",
        r.empirical_constants["max_P_over_N"]
    ))
}

fn quadrature() -> Outcome {
    let v = variance_integral();
    let l = log_integral();
    let h = log_sine_moment_half(2);
    ensure((v.value - PI * PI / 12.0).abs() <= 1e-9, || format!("variance {}", v.value))?;
    ensure(l.value.abs() <= 1e-10, || format!("log integral {}", l.value))?;
    ensure(v.error_estimate <= 1e-10, || format!("error estimate {}", v.error_estimate))?;
    ensure((h.value - v.value).abs() <= 1e-12, || format!("half doubled {}", h.value))?;
    Ok(format!(
        "variance err {:.1e}, log integral {:.1e}",
        (v.value - PI * PI / 12.0).abs(),
        l.value.abs()
    ))
}

fn in_band(median: f64, constant: f64) -> bool {
    (0.4 * constant..=1.6 * constant).contains(&median)
}

fn stochastic() -> Outcome {
    let alpha = IrrationalSpec::sqrt2_minus_1();
    let iid = stochastic::iid_lil_experiment(50, 100_000, 1).unwrap();
    let var_err = (iid.empirical_variance / VARIANCE - 1.0).abs();
    ensure(iid.total_samples >= 1_000_000 && var_err <= 0.01, || format!("variance rel err {var_err}"))?;
    let mean_tol = 3.0 * VARIANCE.sqrt() / (iid.total_samples as f64).sqrt();
    ensure(iid.empirical_mean.abs() <= mean_tol, || format!("mean {}", iid.empirical_mean))?;
    let iid_med = iid.ratio_summary().median;
    ensure(in_band(iid_med, iid.theoretical_constant), || format!("iid median {iid_med}"))?;

    let rad = stochastic::rademacher_lil_experiment(&alpha, 50, 100_000, 1).unwrap();
    let b_err = rad.diagnostics["B_N_over_N_rel_err"];
    ensure(b_err <= 0.02, || format!("B_N/N rel err {b_err}"))?;
    ensure(rad.diagnostics["lindeberg_ratio_decreasing"] == 1.0, || "weight ratio not decreasing".into())?;
    let rad_med = rad.ratio_summary().median;
    ensure(in_band(rad_med, rad.theoretical_constant), || format!("rademacher median {rad_med}"))?;

    let sub = stochastic::subsequence_product_experiment(&alpha, 50, 50_000, 1).unwrap();
    ensure(sub.identity_holds.iter().all(|&b| b), || "decomposition identity failed".into())?;
    ensure(sub.count_within_band.iter().all(|&b| b), || "selected count outside 3 sqrt(N)".into())?;
    let sub_med = sub.ratio_summary().median;
    ensure(in_band(sub_med, sub.theoretical_constant), || format!("subsequence median {sub_med}"))?;
    Ok(format!(
        "var rel err {var_err:.2e}; B_N/N rel err {b_err:.2e}; medians iid {iid_med:.3}, rademacher {rad_med:.3}, subsequence {:.3} x const",
        sub_med / sub.theoretical_constant
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("closed forms", closed_forms, 5),
        ("convergents", convergents, 1),
        ("grid discrepancy", grid_discrepancy, 30),
        ("kronecker sandwich", sandwich, 60),
        ("ostrowski bound", ostrowski, 60),
        ("hlawka bound", hlawka, 60),
        ("extremal set", extremal, 120),
        ("van der corput limits", vdc, 120),
        ("figure series", figure, 10),
        ("variance integral", quadrature, 1),
        ("stochastic", stochastic, 180),
    ];
    let mut failures = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let slow = elapsed > Duration::from_secs(*budget);
        let status = match (&outcome, slow) {
            (Ok(_), false) => "PASS",
            _ => {
                failures += 1;
                "FAIL"
            }
        };
        let detail = match outcome {
            Ok(s) | Err(s) => s,
        };
        let timing = if slow {
            format!("{:.1}s, over the {budget}s budget", elapsed.as_secs_f64())
        } else {
            format!("{:.1}s", elapsed.as_secs_f64())
        };
        println!("criterion {:>2} {status} {name} ({timing}): {detail}", i + 1);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
