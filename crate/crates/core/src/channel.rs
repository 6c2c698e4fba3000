//! The shadowed Beaulieu-Xie (SBX) channel model.
//!
//! A Beaulieu-Xie multipath envelope (a normalized noncentral-chi law with
//! fading parameter `m_x` and spread `omega_x`) whose dominant-component
//! amplitude is itself Nakagami-m distributed (shadowing parameters `m_y`,
//! `omega_y`). This module provides parameter validation, the power
//! normalization constant `C`, the envelope and SNR densities, the first two
//! SNR moments in closed form, and a seeded sampler used by the Monte-Carlo
//! oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::specfun::{self, EvalControl};

/// The four SBX channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbxParams {
    m_x: f64,
    omega_x: f64,
    m_y: f64,
    omega_y: f64,
}

impl SbxParams {
    /// Validates and constructs the parameter set: `m_x >= 0.5`, `m_y >= 0.5`
    /// (chi-family validity) and both spreads strictly positive.
    pub fn new(m_x: f64, omega_x: f64, m_y: f64, omega_y: f64) -> Result<Self> {
        if m_x < 0.5 || !m_x.is_finite() {
            return Err(Error::Domain(format!(
                "multipath fading parameter m_x must be >= 0.5, got {m_x}"
            )));
        }
        if m_y < 0.5 || !m_y.is_finite() {
            return Err(Error::Domain(format!(
                "shadowing fading parameter m_y must be >= 0.5, got {m_y}"
            )));
        }
        if omega_x <= 0.0 || !omega_x.is_finite() {
            return Err(Error::Domain(format!(
                "multipath spread omega_x must be > 0, got {omega_x}"
            )));
        }
        if omega_y <= 0.0 || !omega_y.is_finite() {
            return Err(Error::Domain(format!(
                "shadowing spread omega_y must be > 0, got {omega_y}"
            )));
        }
        Ok(Self {
            m_x,
            omega_x,
            m_y,
            omega_y,
        })
    }

    pub fn m_x(&self) -> f64 {
        self.m_x
    }

    pub fn omega_x(&self) -> f64 {
        self.omega_x
    }

    pub fn m_y(&self) -> f64 {
        self.m_y
    }

    pub fn omega_y(&self) -> f64 {
        self.omega_y
    }
}

/// Average received SNR, linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    gamma_bar: f64,
}

impl LinkBudget {
    pub fn from_linear(gamma_bar: f64) -> Result<Self> {
        if gamma_bar <= 0.0 || !gamma_bar.is_finite() {
            return Err(Error::Domain(format!(
                "average SNR gamma_bar must be > 0, got {gamma_bar}"
            )));
        }
        Ok(Self { gamma_bar })
    }

    /// dB convention: `gamma_bar = 10^(snr_db / 10)`.
    pub fn from_db(snr_db: f64) -> Result<Self> {
        Self::from_linear(10f64.powf(snr_db / 10.0))
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }
}

/// Constants derived from a parameter set and a link budget, shared by the
/// density, the capacity series, and the truncation bound.
#[derive(Debug, Clone, Copy)]
pub struct DerivedConstants {
    /// Power normalization constant C (the mean-square envelope).
    pub c_norm: f64,
    /// Exponential rate of the SNR density: m_x C / (gamma_bar omega_x).
    pub beta: f64,
    /// m_x omega_y / (m_x omega_y + m_y omega_x), strictly inside (0, 1).
    pub w_frac: f64,
    /// Series argument z = beta * w_frac.
    pub z_arg: f64,
    /// m_y * ln(1 - w_frac), the log of the shadowing prefactor.
    pub prefactor_log: f64,
}

impl DerivedConstants {
    pub fn new(p: &SbxParams, lb: &LinkBudget, ctl: &EvalControl) -> Result<Self> {
        let c_norm = normalization_c(p, ctl)?;
        let beta = p.m_x() * c_norm / (lb.gamma_bar() * p.omega_x());
        let w_frac = w_frac(p);
        Ok(Self {
            c_norm,
            beta,
            w_frac,
            z_arg: beta * w_frac,
            prefactor_log: p.m_y() * (1.0 - w_frac).ln(),
        })
    }
}

fn w_frac(p: &SbxParams) -> f64 {
    let s = p.m_x() * p.omega_y() + p.m_y() * p.omega_x();
    p.m_x() * p.omega_y() / s
}

/// Power normalization constant
/// C = Ω_x (1-w)^{m_y} ₂F₁(m_x+1, m_y; m_x; w), w = m_xΩ_y/(m_xΩ_y+m_yΩ_x),
/// using the Γ(m_x+1)/Γ(m_x) = m_x cancellation. C equals the mean-square
/// envelope, which is what pins the mean of the SNR density at gamma_bar.
pub fn normalization_c(p: &SbxParams, ctl: &EvalControl) -> Result<f64> {
    let w = w_frac(p);
    let f = specfun::gauss_2f1(p.m_x() + 1.0, p.m_y(), p.m_x(), w, ctl)?;
    Ok(p.omega_x() * (1.0 - w).powf(p.m_y()) * f)
}

/// Composite envelope density f_R(r).
///
/// At r = 0 the analytic limit is returned: 0 while the power exponent
/// 2 m_x - 1 is positive, the finite prefactor at m_x = 1/2.
pub fn pdf_envelope(p: &SbxParams, r: f64, ctl: &EvalControl) -> Result<f64> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!("envelope r must be >= 0, got {r}")));
    }
    let w = w_frac(p);
    let rate = p.m_x() / p.omega_x();
    let power = 2.0 * p.m_x() - 1.0;
    if r == 0.0 {
        return Ok(if power > 0.0 {
            0.0
        } else {
            // m_x = 1/2 exactly: r^0 = 1 and the 1F1 factor is 1
            (2f64.ln() - specfun::ln_gamma_pos(p.m_x())
                + p.m_y() * (1.0 - w).ln()
                + p.m_x() * rate.ln())
            .exp()
        });
    }
    let arg = rate * w * r * r;
    let ln_1f1 = ln_kummer_pos(p.m_y(), p.m_x(), arg, ctl)?;
    let ln_f = 2f64.ln() - specfun::ln_gamma_pos(p.m_x())
        + p.m_y() * (1.0 - w).ln()
        + p.m_x() * rate.ln()
        + power * r.ln()
        - rate * r * r
        + ln_1f1;
    Ok(ln_f.exp())
}

/// Instantaneous-SNR density f_γ(γ).
///
/// The e^{-βγ} ₁F₁(m_y; m_x; zγ) product is assembled in the log domain,
/// which is the Kummer-transformed evaluation
/// e^{-(β-z)γ} ₁F₁(m_x-m_y; m_x; -zγ) in exact arithmetic; the series itself
/// is summed at the positive argument where every term is positive.
pub fn pdf_snr(p: &SbxParams, lb: &LinkBudget, gamma: f64, ctl: &EvalControl) -> Result<f64> {
    let dc = DerivedConstants::new(p, lb, ctl)?;
    pdf_snr_with(p, &dc, gamma, ctl)
}

/// `pdf_snr` against precomputed constants (hot path for quadrature).
pub(crate) fn pdf_snr_with(
    p: &SbxParams,
    dc: &DerivedConstants,
    gamma: f64,
    ctl: &EvalControl,
) -> Result<f64> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "SNR gamma must be >= 0, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        let power = p.m_x() - 1.0;
        return Ok(if power > 0.0 {
            0.0
        } else if power == 0.0 {
            (dc.prefactor_log + dc.beta.ln() - specfun::ln_gamma_pos(p.m_x())).exp()
        } else {
            // m_x in [0.5, 1): the density diverges (integrably) at the origin
            f64::INFINITY
        });
    }
    let ln_f = ln_pdf_snr_with(p, dc, gamma, ctl)?;
    Ok(ln_f.exp())
}

/// ln f_γ(γ) for γ > 0 against precomputed constants.
pub(crate) fn ln_pdf_snr_with(
    p: &SbxParams,
    dc: &DerivedConstants,
    gamma: f64,
    ctl: &EvalControl,
) -> Result<f64> {
    debug_assert!(gamma > 0.0);
    let arg = dc.z_arg * gamma;
    let ln_1f1 = ln_kummer_pos(p.m_y(), p.m_x(), arg, ctl)?;
    Ok(-specfun::ln_gamma_pos(p.m_x())
        + dc.prefactor_log
        + p.m_x() * dc.beta.ln()
        + (p.m_x() - 1.0) * gamma.ln()
        - dc.beta * gamma
        + ln_1f1)
}

/// ln ₁F₁ at a nonnegative argument: plain series below the overflow guard,
/// full log-domain accumulation above it or whenever the value itself
/// (≈ eˣ x^{a-b}) leaves the f64 range before the argument does.
fn ln_kummer_pos(a: f64, b: f64, x: f64, ctl: &EvalControl) -> Result<f64> {
    if x <= 700.0 {
        let v = specfun::kummer_1f1(a, b, x, ctl)?;
        if v.is_finite() {
            return Ok(v.ln());
        }
    }
    specfun::ln_kummer_1f1(a, b, x, ctl)
}

/// First SNR moment E[γ] (closed form). Equals gamma_bar exactly: the ₂F₁
/// factor cancels against the one inside C by argument symmetry.
pub fn moment1(p: &SbxParams, lb: &LinkBudget, ctl: &EvalControl) -> Result<f64> {
    let c = normalization_c(p, ctl)?;
    let w = w_frac(p);
    let f = specfun::gauss_2f1(p.m_y(), p.m_x() + 1.0, p.m_x(), w, ctl)?;
    Ok((1.0 - w).powf(p.m_y()) * (lb.gamma_bar() * p.omega_x() / c) * f)
}

/// Second SNR moment E[γ²] (closed form).
pub fn moment2(p: &SbxParams, lb: &LinkBudget, ctl: &EvalControl) -> Result<f64> {
    let c = normalization_c(p, ctl)?;
    let w = w_frac(p);
    let f = specfun::gauss_2f1(p.m_y(), p.m_x() + 2.0, p.m_x(), w, ctl)?;
    let scale = lb.gamma_bar() * p.omega_x() / c;
    Ok((p.m_x() + 1.0) / p.m_x() * (1.0 - w).powf(p.m_y()) * scale * scale * f)
}

/// Seeded SNR sampler.
///
/// Construction: Y² ~ Gamma(m_y, Ω_y/m_y) is the squared Nakagami shadowing
/// amplitude; given y, the squared envelope is σ²·X with σ² = Ω_x/(2 m_x)
/// and X noncentral chi-square with ν = 2 m_x degrees of freedom and
/// noncentrality λ = y²/σ², drawn as Gamma(ν/2 + K, 2) with K ~ Poisson(λ/2).
/// The Poisson-mixture route is exact for non-integer 2 m_x, where a
/// sum-of-Gaussians construction is unavailable. Finally γ = γ̄ R²/C.
///
/// A sampler instance is a value-type generator: create independent
/// instances with distinct seeds for concurrent use.
#[derive(Debug, Clone)]
pub struct SnrSampler {
    rng: ChaCha8Rng,
    shadow: Gamma<f64>,
    sigma2: f64,
    half_dof: f64,
    snr_scale: f64,
}

impl SnrSampler {
    pub fn new(p: &SbxParams, lb: &LinkBudget, seed: u64, ctl: &EvalControl) -> Result<Self> {
        let c = normalization_c(p, ctl)?;
        let shadow = Gamma::new(p.m_y(), p.omega_y() / p.m_y())
            .map_err(|e| Error::Domain(format!("shadowing gamma setup: {e}")))?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            shadow,
            sigma2: p.omega_x() / (2.0 * p.m_x()),
            half_dof: p.m_x(),
            snr_scale: lb.gamma_bar() / c,
        })
    }

    /// One instantaneous-SNR draw.
    pub fn draw(&mut self) -> f64 {
        let y2 = self.shadow.sample(&mut self.rng);
        let lambda_half = y2 / (2.0 * self.sigma2);
        let k = if lambda_half > 1e-300 {
            Poisson::new(lambda_half)
                .expect("positive finite Poisson mean")
                .sample(&mut self.rng)
        } else {
            0.0
        };
        let x = Gamma::new(self.half_dof + k, 2.0)
            .expect("positive gamma shape")
            .sample(&mut self.rng);
        self.snr_scale * self.sigma2 * x
    }
}

/// `n` independent SNR draws; deterministic for fixed `(seed, n)`.
pub fn sample_snr(
    p: &SbxParams,
    lb: &LinkBudget,
    seed: u64,
    n: usize,
    ctl: &EvalControl,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("sample count n must be >= 1".into()));
    }
    let mut s = SnrSampler::new(p, lb, seed, ctl)?;
    Ok((0..n).map(|_| s.draw()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctl() -> EvalControl {
        EvalControl::default()
    }

    fn paper_params() -> SbxParams {
        SbxParams::new(2.0, 2.0, 10.0, 10.0).unwrap()
    }

    /// Plain composite Simpson oracle used by the density tests.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        assert!(n.is_multiple_of(2));
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn params_validation() {
        assert!(SbxParams::new(2.0, 2.0, 10.0, 10.0).is_ok());
        assert!(SbxParams::new(0.5, 1.0, 0.5, 1.0).is_ok());
        assert!(SbxParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SbxParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(SbxParams::new(1.0, 1.0, 0.4, 1.0).is_err());
        assert!(SbxParams::new(1.0, 1.0, 1.0, -2.0).is_err());
        assert!(LinkBudget::from_linear(0.0).is_err());
        assert!(LinkBudget::from_db(10.0).is_ok());
        assert_relative_eq!(LinkBudget::from_db(10.0).unwrap().gamma_bar(), 10.0);
    }

    #[test]
    fn derived_constants_consistency() {
        let p = paper_params();
        let lb = LinkBudget::from_db(10.0).unwrap();
        let dc = DerivedConstants::new(&p, &lb, &ctl()).unwrap();
        assert!(dc.w_frac > 0.0 && dc.w_frac < 1.0);
        assert!(dc.beta > 0.0);
        assert_relative_eq!(dc.z_arg, dc.beta * dc.w_frac);
        assert!(dc.z_arg < dc.beta);
        assert!(dc.c_norm > 0.0);
    }

    /// The 2F1 route for C collapses to the mean-square envelope Ω_x + Ω_y.
    #[test]
    fn normalization_equals_mean_square_envelope() {
        let c = ctl();
        for (mx, ox, my, oy) in [
            (2.0, 2.0, 10.0, 10.0),
            (0.5, 1.0, 0.5, 1.0),
            (3.3, 0.7, 1.2, 5.0),
            (1.0, 1.0, 10_000.0, 1.0),
        ] {
            let p = SbxParams::new(mx, ox, my, oy).unwrap();
            let got = normalization_c(&p, &c).unwrap();
            assert_relative_eq!(got, ox + oy, max_relative = 1e-10);
        }
    }

    /// Sampler mean of R² agrees with C within 3 standard errors (the
    /// Monte-Carlo oracle for the normalization constant).
    #[test]
    fn normalization_against_sampler_moment() {
        let p = paper_params();
        let lb = LinkBudget::from_linear(1.0).unwrap();
        let c = normalization_c(&p, &ctl()).unwrap();
        // with gamma_bar = 1, R² = C·γ
        let draws = sample_snr(&p, &lb, 20_240_601, 1_000_000, &ctl()).unwrap();
        let n = draws.len() as f64;
        let mean_r2: f64 = draws.iter().map(|g| g * c).sum::<f64>() / n;
        let var: f64 = draws
            .iter()
            .map(|g| {
                let d = g * c - mean_r2;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean_r2 - c).abs() < 3.0 * se,
            "MC mean {mean_r2} vs C {c} (se {se})"
        );
    }

    #[test]
    fn envelope_density_origin_and_normalization() {
        let c = ctl();
        let p1 = SbxParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(pdf_envelope(&p1, 0.0, &c).unwrap(), 0.0);
        let p_half = SbxParams::new(0.5, 1.0, 2.0, 1.0).unwrap();
        let at0 = pdf_envelope(&p_half, 0.0, &c).unwrap();
        assert!(at0.is_finite() && at0 > 0.0);

        let p = paper_params();
        let total = simpson(|r| pdf_envelope(&p, r, &c).unwrap(), 0.0, 30.0, 20_000);
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
    }

    /// Envelope density vs a histogram of 10^6 sampler draws, 50 bins,
    /// each bin within 3 sigma of its expected count.
    #[test]
    fn envelope_density_matches_sampler_histogram() {
        let p = paper_params();
        let lb = LinkBudget::from_linear(1.0).unwrap();
        let c = ctl();
        let c_norm = normalization_c(&p, &c).unwrap();
        let n = 1_000_000usize;
        let draws = sample_snr(&p, &lb, 2024, n, &c).unwrap();
        // envelopes: r = sqrt(C·γ) at gamma_bar = 1
        let radii: Vec<f64> = draws.iter().map(|g| (g * c_norm).sqrt()).collect();
        let (lo, hi, bins) = (0.0, 10.0, 50usize);
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut outside = 0usize;
        for r in &radii {
            let idx = ((r - lo) / width) as usize;
            if *r >= lo && idx < bins {
                counts[idx] += 1;
            } else {
                outside += 1;
            }
        }
        assert!(outside < n / 100, "too many draws beyond the histogram");
        for (i, &obs) in counts.iter().enumerate() {
            let a = lo + i as f64 * width;
            let prob = simpson(|r| pdf_envelope(&p, r, &c).unwrap(), a, a + width, 64);
            let expect = prob * n as f64;
            let sigma = (expect * (1.0 - prob)).sqrt().max(1.0);
            assert!(
                (obs as f64 - expect).abs() <= 3.0 * sigma + 3.0,
                "bin {i}: observed {obs}, expected {expect:.1} (sigma {sigma:.1})"
            );
        }
    }

    #[test]
    fn snr_density_origin_and_normalization() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_linear(10.0).unwrap();
        assert_eq!(pdf_snr(&p, &lb, 0.0, &c).unwrap(), 0.0);

        let p1 = SbxParams::new(1.0, 2.0, 5.0, 1.0).unwrap();
        let at0 = pdf_snr(&p1, &lb, 0.0, &c).unwrap();
        assert!(at0.is_finite() && at0 > 0.0);

        let p_half = SbxParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(pdf_snr(&p_half, &lb, 0.0, &c).unwrap().is_infinite());

        let total = simpson(|g| pdf_snr(&p, &lb, g, &c).unwrap(), 0.0, 400.0, 40_000);
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
        let mean = simpson(|g| g * pdf_snr(&p, &lb, g, &c).unwrap(), 0.0, 500.0, 50_000);
        assert_relative_eq!(mean, 10.0, max_relative = 1e-8);
    }

    /// E[γ] = γ̄ to 1e-12 relative (closed-form cancellation) across
    /// 20 pseudo-random parameter sets.
    #[test]
    fn moment1_is_mean_snr_identity() {
        let c = ctl();
        // simple deterministic parameter scrambler
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let p = SbxParams::new(
                0.5 + 4.0 * next(),
                0.1 + 5.0 * next(),
                0.5 + 9.0 * next(),
                0.1 + 9.0 * next(),
            )
            .unwrap();
            let gbar = 0.05 + 120.0 * next();
            let lb = LinkBudget::from_linear(gbar).unwrap();
            let m1 = moment1(&p, &lb, &c).unwrap();
            assert_relative_eq!(m1, gbar, max_relative = 1e-12);
        }
    }

    /// E[γ²] at the reference parameters: quadrature oracle and the
    /// noncentral-chi-square moment algebra both give 11/9 at γ̄ = 1.
    #[test]
    fn moment2_reference_and_quadrature() {
        let c = ctl();
        let p = paper_params();
        let lb = LinkBudget::from_linear(1.0).unwrap();
        let m2 = moment2(&p, &lb, &c).unwrap();
        let by_quad = simpson(
            |g| g * g * pdf_snr(&p, &lb, g, &c).unwrap(),
            0.0,
            60.0,
            60_000,
        );
        assert_relative_eq!(m2, by_quad, max_relative = 1e-6);
        assert_relative_eq!(m2, 11.0 / 9.0, max_relative = 1e-10);
        // Jensen
        let m1 = moment1(&p, &lb, &c).unwrap();
        assert!(m2 >= m1 * m1);
    }

    /// Degenerate shadowing with m_x = 1 collapses to Rayleigh:
    /// E[γ²] → 2 γ̄² within 1%.
    #[test]
    fn moment2_rayleigh_limit() {
        let c = ctl();
        let p = SbxParams::new(1.0, 1.0, 10_000.0, 1e-9).unwrap();
        let lb = LinkBudget::from_linear(3.0).unwrap();
        let m2 = moment2(&p, &lb, &c).unwrap();
        assert_relative_eq!(m2, 2.0 * 9.0, max_relative = 0.01);
    }

    #[test]
    fn sampler_mean_and_determinism() {
        let p = paper_params();
        let lb = LinkBudget::from_linear(10.0).unwrap();
        let c = ctl();
        let a = sample_snr(&p, &lb, 42, 100_000, &c).unwrap();
        let b = sample_snr(&p, &lb, 42, 100_000, &c).unwrap();
        assert_eq!(a, b);
        let other = sample_snr(&p, &lb, 43, 100_000, &c).unwrap();
        assert_ne!(a, other);

        let n = 1_000_000usize;
        let draws = sample_snr(&p, &lb, 7, n, &c).unwrap();
        let mean: f64 = draws.iter().sum::<f64>() / n as f64;
        let var: f64 = draws.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 10.0).abs() < 3.0 * se,
            "sampler mean {mean} vs 10 (se {se})"
        );
    }

    /// Degenerate shadowing, m_x = 1: the SNR is exponential. Empirical CDF
    /// vs the exponential CDF, Kolmogorov-Smirnov statistic < 0.002 at 10^6.
    #[test]
    fn sampler_rayleigh_limit_ks() {
        let p = SbxParams::new(1.0, 1.0, 10_000.0, 1e-12).unwrap();
        let lb = LinkBudget::from_linear(1.0).unwrap();
        let n = 1_000_000usize;
        let mut draws = sample_snr(&p, &lb, 11, n, &ctl()).unwrap();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, g) in draws.iter().enumerate() {
            let cdf = 1.0 - (-g).exp();
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            ks = ks.max((cdf - emp_lo).abs()).max((cdf - emp_hi).abs());
        }
        assert!(ks < 0.002, "KS statistic {ks}");
    }

    /// Two-sample consistency: sampler histogram vs pdf_snr over 50
    /// equal-probability bins, chi-square p-value > 0.001.
    #[test]
    fn sampler_pdf_chi_square_consistency() {
        let p = paper_params();
        let lb = LinkBudget::from_linear(10.0).unwrap();
        let c = ctl();
        let n = 1_000_000usize;
        let bins = 50usize;

        // equal-probability bin edges from a fine CDF grid
        let grid_n = 40_000usize;
        let hi = 400.0;
        let h = hi / grid_n as f64;
        let mut cdf = Vec::with_capacity(grid_n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        let mut prev = pdf_snr(&p, &lb, 0.0, &c).unwrap();
        for i in 1..=grid_n {
            let x = i as f64 * h;
            let cur = pdf_snr(&p, &lb, x, &c).unwrap();
            acc += 0.5 * (prev + cur) * h;
            cdf.push(acc);
            prev = cur;
        }
        let total = *cdf.last().unwrap();
        assert!(total > 1.0 - 1e-6);
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

        let draws = sample_snr(&p, &lb, 123, n, &c).unwrap();
        let mut counts = vec![0usize; bins];
        for g in &draws {
            let idx = edges.partition_point(|e| e <= g) - 1;
            counts[idx.min(bins - 1)] += 1;
        }
        let expect = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&o| {
                let d = o as f64 - expect;
                d * d / expect
            })
            .sum();
        // 0.999 quantile of chi-square with 49 degrees of freedom
        assert!(chi2 < 85.3505646086, "chi2 statistic {chi2}");
    }
}
