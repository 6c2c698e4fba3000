//! Special-function kernel: log-gamma, Pochhammer symbols, Kummer's
//! confluent hypergeometric ₁F₁, Tricomi's U, and Gauss's ₂F₁.
//!
//! Everything is plain `f64`, restricted to the parameter regimes the SNR
//! density and the capacity series actually visit: `a > 0`, `z > 0` for U
//! and `|w| < 1` for ₂F₁. Series switch to log-domain accumulation whenever
//! an intermediate would leave the representable range, and U is evaluated
//! through its real integral representation, which stays well-conditioned
//! when the second parameter sits near an integer.

use crate::error::{Error, Result};

/// Magnitude at which linear series accumulation hands over to the log domain.
const OVERFLOW_LINEAR: f64 = 1e300;

/// Parameters snap to an exact nonpositive integer within this distance.
const INT_SNAP: f64 = 1e-12;

/// Maximum refinement of the U quadrature, as a multiple of `quad_nodes`.
const QUAD_REFINE_MAX: usize = 8;

/// Tolerances and budgets for series summation and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalControl {
    rel_tol: f64,
    max_terms: usize,
    quad_nodes: usize,
}

impl EvalControl {
    pub fn new(rel_tol: f64, max_terms: usize, quad_nodes: usize) -> Result<Self> {
        if rel_tol <= 0.0 || rel_tol >= 1.0 || rel_tol.is_nan() {
            return Err(Error::Domain(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be at least 1".into()));
        }
        if quad_nodes == 0 {
            return Err(Error::Domain("quad_nodes must be at least 1".into()));
        }
        Ok(Self {
            rel_tol,
            max_terms,
            quad_nodes,
        })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn quad_nodes(&self) -> usize {
        self.quad_nodes
    }
}

impl Default for EvalControl {
    /// `rel_tol = 1e-12`, `max_terms = 10_000`, `quad_nodes = 512`
    /// (refined by doubling up to 4096).
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
            quad_nodes: 512,
        }
    }
}

/// Streaming log-sum-exp accumulator for sums of positive terms given by
/// their natural logs. The running sum is kept as `scaled * exp(max_ln)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum {
    max_ln: f64,
    scaled: f64,
}

impl LogSum {
    pub(crate) fn new() -> Self {
        Self {
            max_ln: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub(crate) fn add_ln(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.max_ln {
            self.scaled += (ln_term - self.max_ln).exp();
        } else {
            self.scaled = self.scaled * (self.max_ln - ln_term).exp() + 1.0;
            self.max_ln = ln_term;
        }
    }

    /// Natural log of the accumulated sum; `-inf` while empty.
    pub(crate) fn ln_value(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max_ln + self.scaled.ln()
        }
    }
}

/// Snap `v` to a nonpositive integer if it sits within `INT_SNAP` of one.
fn nonpositive_int(v: f64) -> Option<i64> {
    let r = v.round();
    if (v - r).abs() <= INT_SNAP && r <= 0.0 {
        Some(r as i64)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// log-gamma
// ---------------------------------------------------------------------------

/// Lanczos coefficients for g = 10.900511, after Pugh (2004).
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

const LANCZOS_G: f64 = 10.900511;

/// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 = 0.6207822376352452223455184457816472122;

/// ln Γ(x) for x > 0, without the domain check.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut s = LANCZOS_DK[0];
    for (k, dk) in LANCZOS_DK.iter().enumerate().skip(1) {
        s += dk / (x + k as f64 - 1.0);
    }
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / std::f64::consts::E).ln()
}

/// Natural log of the gamma function, ln Γ(x), for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

// ---------------------------------------------------------------------------
// Pochhammer symbol
// ---------------------------------------------------------------------------

/// Rising factorial (a)_n = a (a+1) ⋯ (a+n-1), with (a)_0 = 1.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for k in 0..n {
        acc *= a + k as f64;
    }
    acc
}

// ---------------------------------------------------------------------------
// Kummer's confluent hypergeometric function 1F1
// ---------------------------------------------------------------------------

/// Kummer's confluent hypergeometric function ₁F₁(a; b; x).
///
/// `b` must not be a nonpositive integer. Nonpositive-integer `a` yields the
/// exact terminating polynomial. Negative arguments go through the Kummer
/// transformation ₁F₁(a;b;x) = eˣ ₁F₁(b−a;b;−x) so that the series is always
/// summed at a nonnegative argument; magnitudes beyond the `f64` range fall
/// back to log-domain accumulation.
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctl: &EvalControl) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!(
            "kummer_1f1 requires finite arguments, got a={a} b={b} x={x}"
        )));
    }
    if nonpositive_int(b).is_some() {
        return Err(Error::Domain(format!(
            "kummer_1f1: b must not be a nonpositive integer, got b={b}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if let Some(n) = nonpositive_int(a) {
        return Ok(poly_1f1((-n) as usize, b, x));
    }
    if x < 0.0 {
        let ap = b - a;
        if nonpositive_int(ap).is_none() && ap > 0.0 && b > 0.0 && -x > 700.0 {
            // exp(x) and the transformed series would over/underflow separately
            let ln = ln_series_1f1_pos(ap, b, -x, ctl)?;
            return Ok((x + ln).exp());
        }
        let y = kummer_1f1(ap, b, -x, ctl)?;
        return Ok(x.exp() * y);
    }
    series_1f1(a, b, x, ctl)
}

/// ln ₁F₁(a; b; x) for a > 0, b > 0, x ≥ 0 (all series terms positive).
pub fn ln_kummer_1f1(a: f64, b: f64, x: f64, ctl: &EvalControl) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 || x < 0.0 || (a + b + x).is_nan() {
        return Err(Error::Domain(format!(
            "ln_kummer_1f1 requires a > 0, b > 0, x >= 0, got a={a} b={b} x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    ln_series_1f1_pos(a, b, x, ctl)
}

/// Terminating ₁F₁ with a = -n (exact polynomial of degree n).
fn poly_1f1(n: usize, b: f64, x: f64) -> f64 {
    let a = -(n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
    }
    sum
}

/// Direct series for x > 0, with the log-domain handover on overflow.
fn series_1f1(a: f64, b: f64, x: f64, ctl: &EvalControl) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small = 0u32;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term.abs() > OVERFLOW_LINEAR || sum.abs() > OVERFLOW_LINEAR {
            if a > 0.0 && b > 0.0 {
                return Ok(ln_series_1f1_pos(a, b, x, ctl)?.exp());
            }
            return Err(Error::NonConvergence {
                what: "kummer_1f1 (magnitude outside f64 range)",
                max_terms: ctl.max_terms,
            });
        }
        if term.abs() <= ctl.rel_tol * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "kummer_1f1",
        max_terms: ctl.max_terms,
    })
}

/// Positive-term ₁F₁ series accumulated in the log domain. The running term
/// is carried as m · 2^e2 so its log stays accurate over thousands of terms.
fn ln_series_1f1_pos(a: f64, b: f64, x: f64, ctl: &EvalControl) -> Result<f64> {
    debug_assert!(a > 0.0 && b > 0.0 && x > 0.0);
    const SCALE: f64 = 1.3407807929942597e154; // 2^512
    let mut m = 1.0f64;
    let mut e2: i64 = 0;
    let mut acc = LogSum::new();
    acc.add_ln(0.0);
    let mut small = 0u32;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        m *= (a + kf) / (b + kf) * x / (kf + 1.0);
        if m > SCALE {
            m /= SCALE;
            e2 += 512;
        } else if m < 1.0 / SCALE {
            m *= SCALE;
            e2 -= 512;
        }
        let ln_term = m.ln() + e2 as f64 * std::f64::consts::LN_2;
        acc.add_ln(ln_term);
        if ln_term <= acc.ln_value() + ctl.rel_tol.ln() {
            small += 1;
            if small >= 2 {
                return Ok(acc.ln_value());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "ln_kummer_1f1",
        max_terms: ctl.max_terms,
    })
}

// ---------------------------------------------------------------------------
// Tricomi's function U
// ---------------------------------------------------------------------------

/// Tricomi's confluent hypergeometric function U(a; b; z) for a > 0, z > 0.
///
/// Computed through the integral representation
/// U(a,b,z) = Γ(a)⁻¹ ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt,
/// which is uniformly valid for a > 0, z > 0 and any real b.
pub fn tricomi_u(a: f64, b: f64, z: f64, ctl: &EvalControl) -> Result<f64> {
    Ok(ln_tricomi_u(a, b, z, ctl)?.exp())
}

/// ln U(a; b; z) for a > 0, z > 0. U is strictly positive on this domain,
/// and capacity-series terms combine this log with log-gamma factors before
/// exponentiating, so deep series indices cannot underflow prematurely.
pub fn ln_tricomi_u(a: f64, b: f64, z: f64, ctl: &EvalControl) -> Result<f64> {
    if a <= 0.0 || !a.is_finite() || z <= 0.0 || !z.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "tricomi_u requires a > 0 and z > 0, got a={a} b={b} z={z}"
        )));
    }
    // Substituting s = z t and then s = e^u turns the integral into
    //   z^{-a} Γ(a)^{-1} ∫ exp(-e^u + a u + p ln(1 + e^u / z)) du,  p = b-a-1,
    // whose integrand decays double-exponentially on the right and like
    // e^{a u} on the left; the trapezoid rule on u converges geometrically.
    let p = b - a - 1.0;
    let ln_h = move |u: f64| -> f64 {
        let ex = u.exp();
        if ex > 1e306 {
            return f64::NEG_INFINITY;
        }
        -ex + a * u + p * (ex / z).ln_1p()
    };

    // Interior maximum of ln_h: the positive root of x² + (z-a-p)x - az = 0.
    let q = a + p - z;
    let disc = (q * q + 4.0 * a * z).sqrt();
    let x_peak = if q >= 0.0 {
        0.5 * (q + disc)
    } else {
        2.0 * a * z / (disc - q)
    };
    let u_peak = x_peak.ln();
    let peak = ln_h(u_peak);
    let drop = 46.0f64.max(-ctl.rel_tol.ln() + 16.0);

    let step = 0.5;
    let mut u_lo = u_peak;
    let mut u_hi = u_peak;
    for _ in 0..200_000 {
        u_lo -= step;
        if ln_h(u_lo) <= peak - drop {
            break;
        }
    }
    for _ in 0..200_000 {
        u_hi += step;
        if ln_h(u_hi) <= peak - drop {
            break;
        }
    }
    if ln_h(u_lo) > peak - drop || ln_h(u_hi) > peak - drop {
        return Err(Error::Quadrature {
            what: "tricomi_u window search",
        });
    }

    let n_cap = ctl.quad_nodes * QUAD_REFINE_MAX;
    let mut n = ctl.quad_nodes.max(8);
    let mut prev = trapezoid_ln(&ln_h, u_lo, u_hi, n);
    let ln_integral = loop {
        n *= 2;
        let cur = trapezoid_ln(&ln_h, u_lo, u_hi, n);
        if (cur - prev).abs() <= ctl.rel_tol {
            break cur;
        }
        if n >= n_cap {
            return Err(Error::Quadrature {
                what: "tricomi_u refinement",
            });
        }
        prev = cur;
    };
    Ok(ln_integral - a * z.ln() - ln_gamma_pos(a))
}

/// Log of the trapezoid sum of exp(ln_f) over [lo, hi] with n panels.
fn trapezoid_ln(ln_f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = LogSum::new();
    for i in 0..=n {
        let l = ln_f(lo + i as f64 * h);
        if i == 0 || i == n {
            acc.add_ln(l - std::f64::consts::LN_2);
        } else {
            acc.add_ln(l);
        }
    }
    acc.ln_value() + h.ln()
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function 2F1
// ---------------------------------------------------------------------------

/// Gauss hypergeometric function ₂F₁(a, b; c; w) by direct series, |w| < 1.
///
/// The numerator parameters are put in a canonical order first, so swapping
/// `a` and `b` returns the bit-identical value. Nonpositive-integer numerator
/// parameters (within 1e-12 of an integer) are snapped exactly, making the
/// series terminate as the polynomial it analytically is.
pub fn gauss_2f1(a: f64, b: f64, c: f64, w: f64, ctl: &EvalControl) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || !c.is_finite() || !w.is_finite() {
        return Err(Error::Domain(format!(
            "gauss_2f1 requires finite arguments, got a={a} b={b} c={c} w={w}"
        )));
    }
    if c <= 0.0 {
        return Err(Error::Domain(format!(
            "gauss_2f1 requires c > 0, got c={c}"
        )));
    }
    if w.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "gauss_2f1 series requires |w| < 1, got w={w}"
        )));
    }
    let (a, b) = if b < a { (b, a) } else { (a, b) };
    let a = nonpositive_int(a).map_or(a, |n| n as f64);
    let b = nonpositive_int(b).map_or(b, |n| n as f64);
    if w == 0.0 {
        return Ok(1.0);
    }

    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small = 0u32;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * w;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonConvergence {
                what: "gauss_2f1 (magnitude outside f64 range)",
                max_terms: ctl.max_terms,
            });
        }
        if term.abs() <= ctl.rel_tol * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "gauss_2f1",
        max_terms: ctl.max_terms,
    })
}
