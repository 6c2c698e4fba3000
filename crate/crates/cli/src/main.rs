//! Command-line front end: point evaluation, parameter sweeps, figure
//! presets, and the validation suite.
//!
//! Exit codes: 0 success, 1 failed validation checks, 2 parameter/config
//! errors, 3 numerical non-convergence.

mod figure;
mod sweep;
mod validate;

use clap::{Parser, Subcommand, ValueEnum};
use std::process::ExitCode;

use sbx_effcap::channel::{LinkBudget, SbxParams};
use sbx_effcap::effcap::{
    ec_low_snr_approx, effective_capacity_exact, effective_capacity_high_snr,
    low_snr_characterization, DelaySpec,
};
use sbx_effcap::oracle::{ec_monte_carlo, ec_quadrature};
use sbx_effcap::specfun::EvalControl;
use sbx_effcap::Error as LibError;

/// Default master seed when neither `--seed` nor `SBX_EC_SEED` is given.
const DEFAULT_SEED: u64 = 47_000;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        let code = match &e {
            LibError::Domain(_)
            | LibError::BoundInapplicable { .. }
            | LibError::AsymptoteInvalid { .. }
            | LibError::DegenerateLowSnr(_) => 2,
            LibError::NonConvergence { .. } | LibError::Quadrature { .. } => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 2,
            message: format!("i/o error: {e}"),
        }
    }
}

/// Format a float with 15 significant digits (the CSV/stdout convention).
pub fn g15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Deterministic derivation of a per-task seed from the master seed
/// (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn default_seed() -> u64 {
    std::env::var("SBX_EC_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Parser)]
#[command(
    name = "sbx-effcap",
    version,
    about = "Effective capacity of the shadowed Beaulieu-Xie composite fading channel"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the effective capacity at a single operating point.
    Eval(EvalArgs),
    /// Sweep one axis and write a CSV.
    Sweep(sweep::SweepArgs),
    /// Run a preset figure sweep (1-5) and write CSVs plus a claims report.
    Figure(figure::FigureArgs),
    /// Run the full invariant suite and print a pass/fail table.
    Validate(validate::ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Quadrature,
    #[value(name = "high-snr")]
    HighSnr,
    Mc,
}

#[derive(Parser)]
#[command(allow_negative_numbers = true)]
struct EvalArgs {
    /// Multipath fading parameter m_x (>= 0.5)
    #[arg(long)]
    mx: f64,
    /// Multipath spread omega_x (> 0)
    #[arg(long = "omega-x")]
    omega_x: f64,
    /// Shadowing fading parameter m_y (>= 0.5)
    #[arg(long)]
    my: f64,
    /// Shadowing spread omega_y (> 0)
    #[arg(long = "omega-y")]
    omega_y: f64,
    /// Average SNR in dB (linear gamma_bar = 10^(dB/10))
    #[arg(long = "snr-db")]
    snr_db: f64,
    /// Delay constraint A = theta*T*B/ln 2, given directly
    #[arg(long = "A", conflicts_with_all = ["theta", "block_t", "bandwidth_b"])]
    a: Option<f64>,
    /// Delay exponent theta (requires --T and --B)
    #[arg(long)]
    theta: Option<f64>,
    /// Block length T
    #[arg(long = "T")]
    block_t: Option<f64>,
    /// Bandwidth B
    #[arg(long = "B")]
    bandwidth_b: Option<f64>,
    /// Relative tolerance for series and quadrature
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Master seed for Monte-Carlo (default: SBX_EC_SEED or 47000)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo sample count
    #[arg(long = "mc-samples", default_value_t = 1_000_000)]
    mc_samples: usize,
    /// Monte-Carlo shard count (fixed-order merge)
    #[arg(long, default_value_t = 4)]
    shards: usize,
    /// Methods to evaluate (default: exact and quadrature)
    #[arg(long = "method", value_enum)]
    methods: Vec<Method>,
}

/// Resolve the delay specification from either --A or --theta/--T/--B.
fn delay_from(
    a: Option<f64>,
    theta: Option<f64>,
    block_t: Option<f64>,
    bandwidth_b: Option<f64>,
) -> Result<DelaySpec, CliError> {
    match (a, theta) {
        (Some(a), None) => Ok(DelaySpec::from_constraint(a)?),
        (None, Some(th)) => {
            let (t, b) = match (block_t, bandwidth_b) {
                (Some(t), Some(b)) => (t, b),
                _ => {
                    return Err(CliError::config(
                        "--theta requires both --T and --B (or pass --A directly)",
                    ))
                }
            };
            Ok(DelaySpec::from_theta(th, t, b)?)
        }
        (None, None) => Err(CliError::config(
            "one of --A or --theta/--T/--B is required",
        )),
        (Some(_), Some(_)) => unreachable!("clap conflict rules"),
    }
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    let p = SbxParams::new(args.mx, args.omega_x, args.my, args.omega_y)?;
    let lb = LinkBudget::from_db(args.snr_db)?;
    let ds = delay_from(args.a, args.theta, args.block_t, args.bandwidth_b)?;
    let ctl = EvalControl::new(args.tol, 10_000, 512)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let methods = if args.methods.is_empty() {
        vec![Method::Exact, Method::Quadrature]
    } else {
        args.methods.clone()
    };
    for m in methods {
        match m {
            Method::Exact => {
                let r = effective_capacity_exact(&p, &lb, &ds, &ctl)?;
                println!(
                    "exact {} terms_used={} trunc_bound={:.6e} certified={}",
                    g15(r.ec_bits),
                    r.terms_used,
                    r.trunc_bound,
                    r.bound_certified
                );
            }
            Method::Quadrature => {
                let v = ec_quadrature(&p, &lb, &ds, &ctl)?;
                println!("quadrature {} terms_used=- trunc_bound=-", g15(v));
            }
            Method::HighSnr => {
                let v = effective_capacity_high_snr(&p, &lb, &ds, &ctl)?;
                println!("high-snr {} terms_used=- trunc_bound=-", g15(v));
            }
            Method::Mc => {
                let r = ec_monte_carlo(&p, &lb, &ds, seed, args.mc_samples, args.shards, &ctl)?;
                println!(
                    "mc {} terms_used=- trunc_bound=- std_err={:.6e} n={} shards={}",
                    g15(r.value),
                    r.std_err,
                    r.n,
                    r.shards
                );
            }
        }
    }
    Ok(())
}

/// Low-SNR effective capacity at an Eb/N0 point, shared by sweep and figure.
pub fn low_snr_point(
    p: &SbxParams,
    ds: &DelaySpec,
    ebn0_db: f64,
    ctl: &EvalControl,
) -> Result<f64, CliError> {
    let ch = low_snr_characterization(p, ds, ctl)?;
    Ok(ec_low_snr_approx(&ch, 10f64.powf(ebn0_db / 10.0))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Eval(args) => run_eval(args),
        Cmd::Sweep(args) => sweep::run(args),
        Cmd::Figure(args) => figure::run(args),
        Cmd::Validate(args) => validate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_derivation_is_stable_and_spread() {
        let a = derive_seed(47_000, 0);
        let b = derive_seed(47_000, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(47_000, 0));
    }

    #[test]
    fn g15_gives_15_significant_digits() {
        assert_eq!(g15(1.0), "1.00000000000000e0");
        assert_eq!(g15(3.160_602_267_547_304), "3.16060226754730e0");
    }
}
