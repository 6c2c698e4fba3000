//! The `validate` subcommand: runs the invariant suite (normalization, mean
//! identity, oracle triangle, truncation-bound soundness, monotonicity,
//! sampler/density consistency) and prints a pass/fail table.

use clap::Parser;

use sbx_effcap::channel::{self, DerivedConstants, LinkBudget, SbxParams};
use sbx_effcap::effcap::{self, effective_capacity_exact, DelaySpec};
use sbx_effcap::oracle::{ec_monte_carlo, ec_quadrature, ergodic_capacity_mc};
use sbx_effcap::specfun::EvalControl;

use crate::{default_seed, CliError};

const M_X: [f64; 3] = [1.0, 2.0, 3.0];
const M_Y: [f64; 3] = [2.0, 5.0, 10.0];
const A_GRID: [f64; 3] = [0.5, 1.0, 5.0];
const SNR_GRID: [f64; 3] = [1.0, 10.0, 100.0];

/// 0.999 quantile of the chi-square distribution with 49 degrees of freedom
/// (50 equal-probability bins); the consistency check demands p > 0.001.
const CHI2_49_Q999: f64 = 85.3505646086;

#[derive(Parser)]
pub struct ValidateArgs {
    /// Master seed (default: SBX_EC_SEED or 47000)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo sample count per estimator (minimum 10^4)
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    shards: usize,
    /// Test hook: corrupt one tolerance so the suite must fail
    #[arg(long = "break-tolerance", default_value_t = false)]
    break_tolerance: bool,
}

struct CheckRow {
    name: &'static str,
    measured: String,
    threshold: String,
    pass: bool,
}

fn grid_channels() -> Vec<SbxParams> {
    let mut v = Vec::new();
    for mx in M_X {
        for my in M_Y {
            v.push(SbxParams::new(mx, 2.0, my, 2.0).unwrap());
        }
    }
    v
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Max |∫ f_γ − 1| across the 3x3x3 (m_x, m_y, γ̄) grid.
fn check_normalization(ctl: &EvalControl) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for p in grid_channels() {
        for g in SNR_GRID {
            let lb = LinkBudget::from_linear(g)?;
            let dc = DerivedConstants::new(&p, &lb, ctl)?;
            let rate = dc.beta * (1.0 - dc.w_frac);
            let cut = 60.0 / rate;
            let total = simpson(
                |x| channel::pdf_snr(&p, &lb, x, ctl).unwrap_or(f64::NAN),
                0.0,
                cut,
                40_000,
            );
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok(worst)
}

fn check_mean_identity(ctl: &EvalControl) -> Result<f64, CliError> {
    let mut state = 0x5DEE_CE66_D1A5_F11Bu64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = SbxParams::new(
            0.5 + 4.0 * next(),
            0.1 + 5.0 * next(),
            0.5 + 9.0 * next(),
            0.1 + 9.0 * next(),
        )?;
        let gbar = 0.05 + 120.0 * next();
        let lb = LinkBudget::from_linear(gbar)?;
        let m1 = channel::moment1(&p, &lb, ctl)?;
        worst = worst.max(((m1 - gbar) / gbar).abs());
    }
    Ok(worst)
}

pub fn run(args: &ValidateArgs) -> Result<(), CliError> {
    if args.n < 10_000 {
        return Err(CliError::config(format!(
            "validate requires n >= 10000, got {}",
            args.n
        )));
    }
    let seed = args.seed.unwrap_or_else(default_seed);
    let ctl = EvalControl::default();
    let mut rows: Vec<CheckRow> = Vec::new();

    // normalization of the SNR density
    let worst = check_normalization(&ctl)?;
    rows.push(CheckRow {
        name: "normalization_grid",
        measured: format!("max|int-1| {worst:.2e}"),
        threshold: "1e-8".into(),
        pass: worst <= 1e-8,
    });

    // closed-form mean identity
    let mean_tol = if args.break_tolerance { 1e-18 } else { 1e-12 };
    let worst = check_mean_identity(&ctl)?;
    rows.push(CheckRow {
        name: "mean_identity_random",
        measured: format!("max rel dev {worst:.2e}"),
        threshold: format!("{mean_tol:.0e}"),
        pass: worst <= mean_tol,
    });

    // oracle triangle: series vs quadrature vs Monte-Carlo on the 81 grid
    let mut worst_series: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    let mut idx = 0u64;
    for p in grid_channels() {
        for a in A_GRID {
            let ds = DelaySpec::from_constraint(a)?;
            for g in SNR_GRID {
                let lb = LinkBudget::from_linear(g)?;
                let exact = effective_capacity_exact(&p, &lb, &ds, &ctl)?.ec_bits;
                let quad = ec_quadrature(&p, &lb, &ds, &ctl)?;
                worst_series = worst_series.max(((exact - quad) / quad).abs());
                let mc = ec_monte_carlo(
                    &p,
                    &lb,
                    &ds,
                    seed.wrapping_add(idx),
                    args.n,
                    args.shards,
                    &ctl,
                )?;
                worst_mc = worst_mc.max((quad - mc.value).abs() / mc.std_err);
                idx += 1;
            }
        }
    }
    rows.push(CheckRow {
        name: "oracle_triangle_series_vs_quad",
        measured: format!("max rel dev {worst_series:.2e}"),
        threshold: "1e-6".into(),
        pass: worst_series <= 1e-6,
    });
    rows.push(CheckRow {
        name: "oracle_triangle_quad_vs_mc",
        measured: format!("max |dev|/se {worst_mc:.2}"),
        threshold: "3".into(),
        pass: worst_mc <= 3.0,
    });

    // truncation-bound soundness (certified closed form vs 500-term tails)
    let mut checks = 0u32;
    let mut violations = 0u32;
    let mut subset_checks = 0u32;
    let mut subset_violations = 0u32;
    for p in grid_channels() {
        for a in A_GRID {
            for g in SNR_GRID {
                let lb = LinkBudget::from_linear(g)?;
                let dc = DerivedConstants::new(&p, &lb, &ctl)?;
                if dc.z_arg >= 1.0 {
                    continue;
                }
                let terms: Vec<f64> = (0..521)
                    .map(|d| effcap::series_term(d, &p, &lb, a, &ctl))
                    .collect::<Result<_, _>>()?;
                for d_stop in [1usize, 2, 5, 10, 20] {
                    let tail: f64 = terms[d_stop..].iter().sum();
                    let bound = effcap::truncation_bound(d_stop, &p, &lb, a, &ctl)?;
                    checks += 1;
                    let violated = bound < tail;
                    violations += u32::from(violated);
                    if dc.beta >= 1.0 {
                        subset_checks += 1;
                        subset_violations += u32::from(violated);
                    }
                }
            }
        }
    }
    rows.push(CheckRow {
        name: "bound_soundness_full_z_lt_1",
        measured: format!("{violations}/{checks} violations"),
        threshold: "0 violations".into(),
        pass: violations == 0,
    });
    rows.push(CheckRow {
        name: "bound_soundness_beta_ge_1",
        measured: format!("{subset_violations}/{subset_checks} violations"),
        threshold: "0 violations".into(),
        pass: subset_violations == 0,
    });

    // monotonicity in A and in the average SNR, plus the Jensen ordering
    let mut mono_viol = 0u32;
    for p in grid_channels() {
        for g in SNR_GRID {
            let lb = LinkBudget::from_linear(g)?;
            let mut prev = f64::INFINITY;
            for a in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let ds = DelaySpec::from_constraint(a)?;
                let ec = effective_capacity_exact(&p, &lb, &ds, &ctl)?.ec_bits;
                mono_viol += u32::from(ec >= prev);
                prev = ec;
            }
        }
        for a in A_GRID {
            let ds = DelaySpec::from_constraint(a)?;
            let mut prev = f64::NEG_INFINITY;
            for g in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
                let lb = LinkBudget::from_linear(g)?;
                let ec = effective_capacity_exact(&p, &lb, &ds, &ctl)?.ec_bits;
                mono_viol += u32::from(ec <= prev);
                prev = ec;
            }
        }
    }
    rows.push(CheckRow {
        name: "monotonicity_a_and_snr",
        measured: format!("{mono_viol} violations"),
        threshold: "0 violations".into(),
        pass: mono_viol == 0,
    });

    let mut jensen_viol = 0u32;
    for (i, p) in grid_channels().into_iter().enumerate() {
        for g in SNR_GRID {
            let lb = LinkBudget::from_linear(g)?;
            let erg = ergodic_capacity_mc(
                &p,
                &lb,
                seed.wrapping_add(10_000 + i as u64),
                200_000,
                args.shards,
                &ctl,
            )?;
            for a in A_GRID {
                let ds = DelaySpec::from_constraint(a)?;
                let ec = effective_capacity_exact(&p, &lb, &ds, &ctl)?.ec_bits;
                jensen_viol += u32::from(ec > erg.value + 3.0 * erg.std_err);
            }
        }
    }
    rows.push(CheckRow {
        name: "jensen_vs_ergodic",
        measured: format!("{jensen_viol} violations"),
        threshold: "0 violations".into(),
        pass: jensen_viol == 0,
    });

    // sampler vs density: chi-square over 50 equal-probability bins
    let chi2 = sampler_chi2(seed.wrapping_add(99), args.n, &ctl)?;
    rows.push(CheckRow {
        name: "sampler_pdf_chi2",
        measured: format!("chi2 {chi2:.1}"),
        threshold: format!("{CHI2_49_Q999:.1} (p>0.001)"),
        pass: chi2 < CHI2_49_Q999,
    });

    println!(
        "{:<34} {:<26} {:<18} result",
        "check", "measured", "threshold"
    );
    let mut failed = 0u32;
    for r in &rows {
        println!(
            "{:<34} {:<26} {:<18} {}",
            r.name,
            r.measured,
            r.threshold,
            if r.pass { "PASS" } else { "FAIL" }
        );
        failed += u32::from(!r.pass);
    }
    println!(
        "{} of {} checks passed",
        rows.len() as u32 - failed,
        rows.len()
    );
    if failed > 0 {
        return Err(CliError {
            code: 1,
            message: format!("{failed} validation check(s) failed"),
        });
    }
    Ok(())
}

/// Chi-square statistic of the sampler against the SNR density with 50
/// equal-probability bins at the reference operating point.
fn sampler_chi2(seed: u64, n: usize, ctl: &EvalControl) -> Result<f64, CliError> {
    let p = SbxParams::new(2.0, 2.0, 10.0, 10.0)?;
    let lb = LinkBudget::from_linear(10.0)?;
    let bins = 50usize;

    let grid_n = 40_000usize;
    let hi = 400.0;
    let h = hi / grid_n as f64;
    let mut cdf = Vec::with_capacity(grid_n + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    let mut prev = channel::pdf_snr(&p, &lb, 0.0, ctl)?;
    for i in 1..=grid_n {
        let x = i as f64 * h;
        let cur = channel::pdf_snr(&p, &lb, x, ctl)?;
        acc += 0.5 * (prev + cur) * h;
        cdf.push(acc);
        prev = cur;
    }
    let total = *cdf.last().unwrap();
    let mut edges = vec![0.0f64];
    let mut j = 0usize;
    for k in 1..bins {
        let target = total * k as f64 / bins as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        edges.push((j as f64 + frac) * h);
    }
    edges.push(f64::INFINITY);

    let draws = channel::sample_snr(&p, &lb, seed, n, ctl)?;
    let mut counts = vec![0usize; bins];
    for g in &draws {
        let idx = edges.partition_point(|e| e <= g) - 1;
        counts[idx.min(bins - 1)] += 1;
    }
    let expect = n as f64 / bins as f64;
    Ok(counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expect;
            d * d / expect
        })
        .sum())
}
