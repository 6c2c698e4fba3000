//! Axis sweeps: declarative configuration (flags or a flat key=value file),
//! deterministic CSV output, and the optional plot-script emission.

use clap::Parser;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sbx_effcap::channel::{LinkBudget, SbxParams};
use sbx_effcap::effcap::{effective_capacity_exact, effective_capacity_high_snr, DelaySpec};
use sbx_effcap::oracle::{ec_monte_carlo, ec_quadrature};
use sbx_effcap::specfun::EvalControl;
use sbx_effcap::Error as LibError;

use crate::{derive_seed, g15, low_snr_point, CliError};

const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SnrDb,
    Theta,
    AConstraint,
    Ebn0Db,
}

impl Axis {
    pub fn column(&self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Theta => "theta",
            Axis::AConstraint => "a_constraint",
            Axis::Ebn0Db => "ebn0_db",
        }
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "snr_db" => Ok(Axis::SnrDb),
            "theta" => Ok(Axis::Theta),
            "a_constraint" => Ok(Axis::AConstraint),
            "ebn0_db" => Ok(Axis::Ebn0Db),
            other => Err(format!(
                "unknown axis '{other}' (expected snr_db, theta, a_constraint or ebn0_db)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Exact,
    Quadrature,
    HighSnr,
    Mc,
    LowSnr,
}

impl Output {
    fn columns(&self) -> Vec<&'static str> {
        match self {
            Output::Exact => vec!["ec_exact_bits_per_s_per_hz"],
            Output::Quadrature => vec!["ec_quadrature_bits_per_s_per_hz"],
            Output::HighSnr => vec!["ec_high_snr_bits_per_s_per_hz"],
            Output::Mc => vec!["ec_mc_bits_per_s_per_hz", "ec_mc_std_err"],
            Output::LowSnr => vec!["ec_low_snr_bits_per_s_per_hz"],
        }
    }
}

impl FromStr for Output {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Output::Exact),
            "quadrature" => Ok(Output::Quadrature),
            "high_snr" => Ok(Output::HighSnr),
            "mc" => Ok(Output::Mc),
            "low_snr" => Ok(Output::LowSnr),
            other => Err(format!(
                "unknown output '{other}' (expected exact, quadrature, high_snr, mc or low_snr)"
            )),
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Output::Exact => "exact",
            Output::Quadrature => "quadrature",
            Output::HighSnr => "high_snr",
            Output::Mc => "mc",
            Output::LowSnr => "low_snr",
        };
        f.write_str(s)
    }
}

/// A fully resolved sweep: one axis, everything else pinned.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub channel: SbxParams,
    /// Fixed link budget (required unless the axis is snr_db).
    pub snr_db: Option<f64>,
    /// Fixed delay constraint (required unless the axis is theta/a_constraint).
    pub delay: Option<DelaySpec>,
    /// Block length and bandwidth used when the axis is theta.
    pub tb: (f64, f64),
    pub outputs: Vec<Output>,
    pub seed: u64,
    pub n_samples: usize,
    pub shards: usize,
    pub tol: f64,
}

impl SweepSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step).floor() as usize + 1;
        (0..n).map(|i| self.from + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.from >= self.to || self.from.is_nan() || self.to.is_nan() {
            return Err(CliError::config(format!(
                "empty sweep range: from={} to={}",
                self.from, self.to
            )));
        }
        if self.step <= 0.0 {
            return Err(CliError::config(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        let n = ((self.to - self.from) / self.step).floor() as usize + 1;
        if n > MAX_POINTS {
            return Err(CliError::config(format!(
                "sweep has {n} points, the limit is {MAX_POINTS}"
            )));
        }
        if self.outputs.is_empty() {
            return Err(CliError::config("at least one output is required"));
        }
        for o in &self.outputs {
            let ok = match self.axis {
                Axis::Ebn0Db => *o == Output::LowSnr,
                _ => *o != Output::LowSnr,
            };
            if !ok {
                return Err(CliError::config(format!(
                    "output '{o}' is not valid for axis '{}'",
                    self.axis.column()
                )));
            }
        }
        if self.axis != Axis::SnrDb && self.axis != Axis::Ebn0Db && self.snr_db.is_none() {
            return Err(CliError::config("fixed snr_db is required for this axis"));
        }
        if matches!(self.axis, Axis::SnrDb | Axis::Ebn0Db) && self.delay.is_none() {
            return Err(CliError::config(
                "a fixed delay constraint (a or theta) is required for this axis",
            ));
        }
        Ok(())
    }

    /// Render the CSV body (header + rows) for an explicit list of axis
    /// points. Rows are computed in parallel and emitted in axis order.
    pub fn render_csv_at(&self, points: &[f64]) -> Result<String, CliError> {
        self.validate()?;
        let ctl = EvalControl::new(self.tol, 10_000, 512)?;
        let mut header = vec![self.axis.column().to_string()];
        for o in &self.outputs {
            for c in o.columns() {
                header.push(c.to_string());
            }
        }

        let rows: Vec<Result<String, CliError>> = points
            .par_iter()
            .enumerate()
            .map(|(idx, &x)| self.render_row(idx, x, &ctl))
            .collect();

        let mut out = String::from("# sbx-effcap v1\n");
        out.push_str(&header.join(","));
        out.push('\n');
        for r in rows {
            out.push_str(&r?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn render_csv(&self) -> Result<String, CliError> {
        self.validate()?;
        self.render_csv_at(&self.points())
    }

    fn render_row(&self, idx: usize, x: f64, ctl: &EvalControl) -> Result<String, CliError> {
        let p = self.channel;
        let lb = match self.axis {
            Axis::SnrDb => LinkBudget::from_db(x)?,
            Axis::Ebn0Db => LinkBudget::from_linear(1.0)?, // unused by low_snr
            _ => LinkBudget::from_db(self.snr_db.expect("validated"))?,
        };
        let ds = match self.axis {
            Axis::Theta => DelaySpec::from_theta(x, self.tb.0, self.tb.1)?,
            Axis::AConstraint => DelaySpec::from_constraint(x)?,
            _ => self.delay.expect("validated"),
        };
        let mut cells = vec![g15(x)];
        for o in &self.outputs {
            match o {
                Output::Exact => {
                    let r = effective_capacity_exact(&p, &lb, &ds, ctl)?;
                    cells.push(g15(r.ec_bits));
                }
                Output::Quadrature => {
                    cells.push(g15(ec_quadrature(&p, &lb, &ds, ctl)?));
                }
                Output::HighSnr => match effective_capacity_high_snr(&p, &lb, &ds, ctl) {
                    Ok(v) => cells.push(g15(v)),
                    Err(LibError::AsymptoteInvalid { .. }) => cells.push("NA".into()),
                    Err(e) => return Err(e.into()),
                },
                Output::Mc => {
                    let r = ec_monte_carlo(
                        &p,
                        &lb,
                        &ds,
                        derive_seed(self.seed, idx as u64),
                        self.n_samples,
                        self.shards,
                        ctl,
                    )?;
                    cells.push(g15(r.value));
                    cells.push(g15(r.std_err));
                }
                Output::LowSnr => {
                    cells.push(g15(low_snr_point(&p, &ds, x, ctl)?));
                }
            }
        }
        Ok(cells.join(","))
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse()
}

#[derive(Parser)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// Flat key=value config file (flags override its entries)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Axis to sweep: snr_db, theta, a_constraint or ebn0_db
    #[arg(long, value_parser = parse_axis)]
    axis: Option<Axis>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    mx: Option<f64>,
    #[arg(long = "omega-x")]
    omega_x: Option<f64>,
    #[arg(long)]
    my: Option<f64>,
    #[arg(long = "omega-y")]
    omega_y: Option<f64>,
    /// Fixed average SNR in dB (when the axis is not snr_db)
    #[arg(long = "snr-db")]
    snr_db: Option<f64>,
    /// Fixed delay constraint A
    #[arg(long = "A")]
    a: Option<f64>,
    /// Fixed delay exponent theta
    #[arg(long)]
    theta: Option<f64>,
    /// Block length T (default 1; used with theta)
    #[arg(long = "T")]
    block_t: Option<f64>,
    /// Bandwidth B (default 1; used with theta)
    #[arg(long = "B")]
    bandwidth_b: Option<f64>,
    /// Comma-separated outputs: exact,quadrature,high_snr,mc,low_snr
    #[arg(long)]
    outputs: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    #[arg(long)]
    shards: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Also write a plot script next to the CSV
    #[arg(long = "emit-plot", default_value_t = false)]
    emit_plot: bool,
}

/// Parse the flat key=value config format ('#' starts a comment line).
fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("config line {}: expected key=value", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::config(format!("config key '{key}': bad number '{v}'")))
        })
        .transpose()
}

impl SweepArgs {
    fn resolve(&self) -> Result<SweepSpec, CliError> {
        let map = match &self.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        let axis = match (&self.axis, map.get("axis")) {
            (Some(a), _) => *a,
            (None, Some(s)) => s.parse().map_err(CliError::config)?,
            (None, None) => return Err(CliError::config("axis is required")),
        };
        let need = |flag: Option<f64>, key: &str| -> Result<f64, CliError> {
            match flag {
                Some(v) => Ok(v),
                None => get_f64(&map, key)?
                    .ok_or_else(|| CliError::config(format!("'{key}' is required"))),
            }
        };
        let opt = |flag: Option<f64>, key: &str| -> Result<Option<f64>, CliError> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => get_f64(&map, key),
            }
        };
        let channel = SbxParams::new(
            need(self.mx, "mx")?,
            need(self.omega_x, "omega_x")?,
            need(self.my, "my")?,
            need(self.omega_y, "omega_y")?,
        )?;
        let tb = (
            opt(self.block_t, "block_t")?.unwrap_or(1.0),
            opt(self.bandwidth_b, "bandwidth_b")?.unwrap_or(1.0),
        );
        let a = opt(self.a, "a")?;
        let theta = opt(self.theta, "theta")?;
        let delay = match (a, theta) {
            (Some(a), None) => Some(DelaySpec::from_constraint(a)?),
            (None, Some(th)) => Some(DelaySpec::from_theta(th, tb.0, tb.1)?),
            (None, None) => None,
            (Some(_), Some(_)) => {
                return Err(CliError::config("give either 'a' or 'theta', not both"))
            }
        };
        let outputs_str = match &self.outputs {
            Some(s) => s.clone(),
            None => map
                .get("outputs")
                .cloned()
                .unwrap_or_else(|| "exact".into()),
        };
        let outputs = outputs_str
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Output>, _>>()
            .map_err(CliError::config)?;
        let seed = match self.seed {
            Some(s) => s,
            None => map
                .get("seed")
                .map(|v| {
                    v.parse()
                        .map_err(|_| CliError::config("config key 'seed': bad integer"))
                })
                .transpose()?
                .unwrap_or_else(crate::default_seed),
        };
        let n_samples = match self.n_samples {
            Some(n) => n,
            None => map
                .get("n_samples")
                .map(|v| {
                    v.parse()
                        .map_err(|_| CliError::config("config key 'n_samples': bad integer"))
                })
                .transpose()?
                .unwrap_or(100_000),
        };
        let shards = match self.shards {
            Some(n) => n,
            None => map
                .get("shards")
                .map(|v| {
                    v.parse()
                        .map_err(|_| CliError::config("config key 'shards': bad integer"))
                })
                .transpose()?
                .unwrap_or(1),
        };
        Ok(SweepSpec {
            axis,
            from: need(self.from, "from")?,
            to: need(self.to, "to")?,
            step: need(self.step, "step")?,
            channel,
            snr_db: opt(self.snr_db, "snr_db")?,
            delay,
            tb,
            outputs,
            seed,
            n_samples,
            shards,
            tol: opt(self.tol, "tol")?.unwrap_or(1e-12),
        })
    }
}

/// Write `content` to `path` only when fully rendered, so failures leave no
/// partial file behind.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Minimal plot script referencing the CSVs (no plotting engine embedded).
pub fn plot_script(csvs: &[String], title: &str, xlabel: &str, png: &str) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str(&format!("# plot script for: {title}\n"));
    s.push_str("import csv\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("files = {csvs:?}\n"));
    s.push_str(
        "for f in files:\n\
         \x20   with open(f) as fh:\n\
         \x20       rows = [r for r in csv.reader(fh) if r and not r[0].startswith('#')]\n\
         \x20   head, data = rows[0], rows[1:]\n\
         \x20   xs = [float(r[0]) for r in data]\n\
         \x20   for j, name in enumerate(head[1:], start=1):\n\
         \x20       ys = [float(r[j]) if r[j] != 'NA' else float('nan') for r in data]\n\
         \x20       plt.plot(xs, ys, label=f'{f}:{name}')\n",
    );
    s.push_str(&format!(
        "plt.xlabel('{xlabel}')\nplt.ylabel('EC (bits/s/Hz)')\nplt.legend(fontsize=6)\n"
    ));
    s.push_str(&format!("plt.savefig('{png}', dpi=150)\n"));
    s
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let spec = args.resolve()?;
    let csv = spec.render_csv()?;
    write_atomic(&args.out, &csv)?;
    if args.emit_plot {
        let stem = args
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sweep".into());
        let script = plot_script(
            &[args.out.display().to_string()],
            &format!("sweep over {}", spec.axis.column()),
            spec.axis.column(),
            &format!("{stem}.png"),
        );
        write_atomic(&args.out.with_extension("plot.py"), &script)?;
    }
    Ok(())
}
