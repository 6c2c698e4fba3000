//! Independent verification engines: direct numerical quadrature of the
//! effective-capacity definition against the SNR density, Monte-Carlo
//! effective capacity from channel samples, and Monte-Carlo ergodic capacity.
//!
//! These deliberately avoid the capacity series: the quadrature route goes
//! through the ₁F₁ density and adaptive Simpson integration, the Monte-Carlo
//! route through the channel sampler, so agreement between all three is a
//! genuine cross-check.

use rayon::prelude::*;

use crate::channel::{self, DerivedConstants, LinkBudget, SbxParams};
use crate::effcap::DelaySpec;
use crate::error::{Error, Result};
use crate::specfun::EvalControl;

const LN_2: f64 = std::f64::consts::LN_2;

/// Absolute tolerance on the expectation E[(1+γ)^{-A}].
const ABS_TOL_EXPECTATION: f64 = 1e-12;

/// A Monte-Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
    pub seed: u64,
    /// Number of independent sample shards merged in fixed order.
    pub shards: usize,
}

/// Fixed splitting function for per-shard seeds (splitmix64 finalizer).
pub(crate) fn shard_seed(master: u64, shard: u64) -> u64 {
    let mut z = master ^ (shard.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// adaptive Simpson quadrature
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)] // threads the shared endpoint evaluations
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    if (refined - whole).abs() <= 15.0 * tol {
        return Ok(refined + (refined - whole) / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            what: "adaptive Simpson depth exhausted",
        });
    }
    Ok(
        simpson_recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

/// Adaptive Simpson with `panels` initial uniform subdivisions; `abs_tol`
/// is distributed over the panels by width.
pub(crate) fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    panels: usize,
) -> Result<f64> {
    debug_assert!(hi > lo && panels >= 1);
    let width = (hi - lo) / panels as f64;
    let tol = abs_tol / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = lo + i as f64 * width;
        let b = a + width;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_recurse(f, a, m, b, fa, fm, fb, whole, tol, 48)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// quadrature of the EC definition
// ---------------------------------------------------------------------------

/// Effective capacity by direct quadrature of the defining expectation:
/// R(θ) = −(1/A) log₂ ∫₀^∞ (1+γ)^{-A} f_γ(γ) dγ.
///
/// The origin slice is integrated on the log axis (γ = e^u), where the
/// measure absorbs the γ^{m_x-1} power behaviour; the far tail uses the
/// exponential mapping γ = γ_cut − ln(u)/rate derived from the density's
/// closed-form decay rate β(1−w).
pub fn ec_quadrature(
    p: &SbxParams,
    lb: &LinkBudget,
    ds: &DelaySpec,
    ctl: &EvalControl,
) -> Result<f64> {
    let a = ds.a_constraint();
    let dc = DerivedConstants::new(p, lb, ctl)?;
    let m_x = p.m_x();

    // surface evaluation errors once, then let closures poison with NaN
    channel::ln_pdf_snr_with(p, &dc, lb.gamma_bar(), ctl)?;

    let ln_integrand = {
        let p = *p;
        let ctl = *ctl;
        move |gamma: f64| -> f64 {
            channel::ln_pdf_snr_with(&p, &dc, gamma, &ctl)
                .map(|l| l - a * gamma.ln_1p())
                .unwrap_or(f64::NAN)
        }
    };

    // locate the integrand's scale and the 1e-16-of-peak cut
    let gamma_scale = (m_x / dc.beta).max(lb.gamma_bar());
    let mut peak_ln = f64::NEG_INFINITY;
    for j in -40..=6 {
        let g = gamma_scale * 2f64.powi(j);
        let v = ln_integrand(g);
        if v > peak_ln {
            peak_ln = v;
        }
    }
    if !peak_ln.is_finite() {
        return Err(Error::Quadrature {
            what: "ec_quadrature peak search",
        });
    }
    let drop = 16.0 * std::f64::consts::LN_10;
    let mut gamma_cut = gamma_scale * 64.0;
    let mut guard = 0;
    while ln_integrand(gamma_cut) > peak_ln - drop {
        gamma_cut *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Quadrature {
                what: "ec_quadrature cut search",
            });
        }
    }

    let panels = (ctl.quad_nodes() / 64).clamp(4, 64);

    // near-origin slice on the log axis: with γ = e^u the measure e^u du
    // absorbs the γ^{m_x-1} power behaviour at the origin (m_x >= 1/2), and
    // the trapezoid rule converges geometrically on the exponentially
    // decaying u-integrand
    let delta = (0.01 * gamma_cut).min(1.0);
    let ln_h = move |u: f64| ln_integrand(u.exp()) + u;
    let u_hi = delta.ln();
    let mut window_peak = ln_h(u_hi);
    let mut u_lo = u_hi;
    for _ in 0..2000 {
        u_lo -= 0.5;
        let v = ln_h(u_lo);
        if v > window_peak {
            window_peak = v;
        }
        if v <= window_peak - 46.0 {
            break;
        }
    }
    let near = {
        let f = move |u: f64| ln_h(u).exp();
        adaptive_simpson(&f, u_lo, u_hi, 0.25 * ABS_TOL_EXPECTATION, panels)?
    };

    let direct = move |gamma: f64| ln_integrand(gamma).exp();
    let main = adaptive_simpson(&direct, delta, gamma_cut, 0.5 * ABS_TOL_EXPECTATION, panels)?;

    // exponential tail mapping γ = γ_cut − ln(u)/rate. The density decays
    // like γ^k e^{−β(1−w)γ}; mapping with half that rate makes the
    // transformed integrand vanish at u → 0 despite the polynomial factor.
    let rate = 0.5 * dc.beta * (1.0 - dc.w_frac);
    let tail_f = move |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let gamma = gamma_cut - u.ln() / rate;
        (ln_integrand(gamma) - (rate * u).ln()).exp()
    };
    let tail = adaptive_simpson(&tail_f, 0.0, 1.0, 0.25 * ABS_TOL_EXPECTATION, panels)?;

    let expectation = near + main + tail;
    if !expectation.is_finite() || expectation <= 0.0 {
        return Err(Error::Quadrature {
            what: "ec_quadrature expectation",
        });
    }
    Ok(-expectation.ln() / (a * LN_2))
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimators
// ---------------------------------------------------------------------------

/// Shared shard-and-merge driver: applies `f` to every SNR draw and returns
/// the sample mean with its standard error. Shards are sampled with seeds
/// derived from `(seed, shard index)` and merged in shard order, so the
/// result is bit-identical for a given `(seed, n, shards)` no matter how
/// many workers run.
fn mc_mean(
    p: &SbxParams,
    lb: &LinkBudget,
    seed: u64,
    n: usize,
    shards: usize,
    ctl: &EvalControl,
    f: impl Fn(f64) -> f64 + Sync,
) -> Result<(f64, f64)> {
    if shards == 0 {
        return Err(Error::Domain("shard count must be >= 1".into()));
    }
    let base = n / shards;
    let rem = n % shards;
    let partials: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let size = base + usize::from(i < rem);
            let draws = channel::sample_snr(p, lb, shard_seed(seed, i as u64), size, ctl)?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for g in draws {
                let v = f(g);
                sum += v;
                sum_sq += v * v;
            }
            Ok((sum, sum_sq))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (s, q) in partials {
        sum += s;
        sum_sq += q;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Monte-Carlo effective capacity: sample mean of (1+γ)^{-A}, transformed
/// as −(1/A) log₂(mean) with the standard error propagated by the delta
/// method.
pub fn ec_monte_carlo(
    p: &SbxParams,
    lb: &LinkBudget,
    ds: &DelaySpec,
    seed: u64,
    n: usize,
    shards: usize,
    ctl: &EvalControl,
) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::Domain(format!(
            "Monte-Carlo EC requires n >= 1000, got {n}"
        )));
    }
    let a = ds.a_constraint();
    let (mean, se_mean) = mc_mean(p, lb, seed, n, shards, ctl, |g| (-a * g.ln_1p()).exp())?;
    Ok(McEstimate {
        value: -mean.ln() / (a * LN_2),
        std_err: se_mean / (a * mean * LN_2),
        n,
        seed,
        shards,
    })
}

/// Monte-Carlo ergodic (Shannon) capacity: sample mean of log₂(1+γ).
pub fn ergodic_capacity_mc(
    p: &SbxParams,
    lb: &LinkBudget,
    seed: u64,
    n: usize,
    shards: usize,
    ctl: &EvalControl,
) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::Domain(format!(
            "Monte-Carlo ergodic capacity requires n >= 1000, got {n}"
        )));
    }
    let (mean, se_mean) = mc_mean(p, lb, seed, n, shards, ctl, |g| g.ln_1p() / LN_2)?;
    Ok(McEstimate {
        value: mean,
        std_err: se_mean,
        n,
        seed,
        shards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effcap;
    use approx::assert_relative_eq;

    fn ctl() -> EvalControl {
        EvalControl::default()
    }

    fn paper_params() -> SbxParams {
        SbxParams::new(2.0, 2.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn quadrature_matches_frozen_references() {
        let c = ctl();
        let cases = [
            (2.0, 2.0, 10.0, 10.0, 10.0, 1.0, 3.160_602_267_547_304),
            (1.0, 2.0, 2.0, 2.0, 1.0, 0.5, 0.8153022511233782),
            (3.0, 2.0, 10.0, 2.0, 100.0, 5.0, 4.1214286873445468),
            (2.0, 2.0, 5.0, 2.0, 10.0, 1.0, 2.898_749_971_231_875),
        ];
        for (mx, ox, my, oy, gbar, a, want) in cases {
            let p = SbxParams::new(mx, ox, my, oy).unwrap();
            let lb = LinkBudget::from_linear(gbar).unwrap();
            let ds = DelaySpec::from_constraint(a).unwrap();
            let got = ec_quadrature(&p, &lb, &ds, &c).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    /// The underlying expectation lies in (0, 1], so the returned capacity
    /// is finite and nonnegative across the operating range.
    #[test]
    fn quadrature_stays_in_physical_range() {
        let c = ctl();
        let p = paper_params();
        for g in [1.0, 100.0] {
            let lb = LinkBudget::from_linear(g).unwrap();
            for a in [1e-4, 1.0, 8.0] {
                let ds = DelaySpec::from_constraint(a).unwrap();
                let ec = ec_quadrature(&p, &lb, &ds, &c).unwrap();
                assert!(ec.is_finite() && ec >= -1e-9, "A={a} snr={g}: ec={ec}");
            }
        }
    }

    #[test]
    fn quadrature_refinement_stability() {
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let ds = DelaySpec::from_constraint(1.0).unwrap();
        let coarse =
            ec_quadrature(&p, &lb, &ds, &EvalControl::new(1e-12, 10_000, 512).unwrap()).unwrap();
        let fine = ec_quadrature(
            &p,
            &lb,
            &ds,
            &EvalControl::new(1e-12, 10_000, 1024).unwrap(),
        )
        .unwrap();
        assert!(
            ((coarse - fine) / fine).abs() < 1e-9,
            "coarse {coarse} vs fine {fine}"
        );
    }

    #[test]
    fn quadrature_near_zero_constraint_hits_ergodic() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let ds = DelaySpec::from_constraint(1e-4).unwrap();
        let ec0 = ec_quadrature(&p, &lb, &ds, &c).unwrap();
        let erg = ergodic_capacity_mc(&p, &lb, 99, 1_000_000, 4, &c).unwrap();
        assert!(
            ((ec0 - erg.value) / erg.value).abs() < 0.005,
            "EC(A→0) {ec0} vs ergodic {}",
            erg.value
        );
        // frozen cross-check of the ergodic-capacity scale
        assert_relative_eq!(erg.value, 3.3208938441266732, epsilon = 4.0 * erg.std_err);
    }

    #[test]
    fn monte_carlo_consistent_with_quadrature() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let ds = DelaySpec::from_constraint(1.0).unwrap();
        let quad = ec_quadrature(&p, &lb, &ds, &c).unwrap();
        let mc = ec_monte_carlo(&p, &lb, &ds, 2024, 200_000, 4, &c).unwrap();
        assert!(
            (quad - mc.value).abs() <= 3.0 * mc.std_err,
            "quad {quad} vs mc {} (se {})",
            mc.value,
            mc.std_err
        );
    }

    #[test]
    fn monte_carlo_standard_error_scaling() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let ds = DelaySpec::from_constraint(1.0).unwrap();
        let small = ec_monte_carlo(&p, &lb, &ds, 5, 100_000, 1, &c).unwrap();
        let large = ec_monte_carlo(&p, &lb, &ds, 5, 200_000, 1, &c).unwrap();
        let ratio = small.std_err / large.std_err;
        assert!(
            (ratio - 2f64.sqrt()).abs() < 0.1 * 2f64.sqrt(),
            "se ratio {ratio}"
        );
    }

    #[test]
    fn monte_carlo_determinism_and_domain() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let ds = DelaySpec::from_constraint(1.0).unwrap();
        let a = ec_monte_carlo(&p, &lb, &ds, 31, 50_000, 4, &c).unwrap();
        let b = ec_monte_carlo(&p, &lb, &ds, 31, 50_000, 4, &c).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        assert_eq!(a.shards, 4);
        assert!(ec_monte_carlo(&p, &lb, &ds, 31, 999, 1, &c).is_err());
        assert!(ergodic_capacity_mc(&p, &lb, 31, 999, 1, &c).is_err());
    }

    /// Jensen ordering: delay-constrained throughput never exceeds the
    /// ergodic capacity.
    #[test]
    fn ergodic_upper_bounds_effective_capacity() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let erg = ergodic_capacity_mc(&p, &lb, 404, 200_000, 4, &c).unwrap();
        for a in [0.5, 1.0, 5.0] {
            let ds = DelaySpec::from_constraint(a).unwrap();
            let ec = ec_quadrature(&p, &lb, &ds, &c).unwrap();
            assert!(
                ec <= erg.value + 3.0 * erg.std_err,
                "A={a}: EC {ec} above ergodic {}",
                erg.value
            );
        }
        // upper bound from concavity: ergodic <= log2(1 + gamma_bar)
        assert!(erg.value <= (1.0f64 + 10.0).log2() + 3.0 * erg.std_err);
    }

    /// Quadrature, series, and Monte-Carlo all agree simultaneously.
    #[test]
    fn oracle_triangle_spot_check() {
        let c = ctl();
        let p = SbxParams::new(3.0, 2.0, 5.0, 2.0).unwrap();
        let lb = LinkBudget::from_linear(10.0).unwrap();
        let ds = DelaySpec::from_constraint(0.5).unwrap();
        let quad = ec_quadrature(&p, &lb, &ds, &c).unwrap();
        let series = effcap::effective_capacity_exact(&p, &lb, &ds, &c)
            .unwrap()
            .ec_bits;
        let mc = ec_monte_carlo(&p, &lb, &ds, 8, 200_000, 2, &c).unwrap();
        assert!(((quad - series) / quad).abs() <= 1e-6);
        assert!((quad - mc.value).abs() <= 3.0 * mc.std_err);
    }

    #[test]
    fn shard_seeds_are_spread() {
        let s: Vec<u64> = (0..8).map(|i| shard_seed(42, i)).collect();
        for i in 0..8 {
            for j in (i + 1)..8 {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_ne!(shard_seed(42, 0), shard_seed(43, 0));
    }
}
