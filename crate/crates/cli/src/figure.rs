//! Preset figure sweeps. Each preset writes one CSV per curve plus a
//! `figN_claims.txt` report that puts the measured throughput deltas next to
//! their reference values, together with every assumed parameter (several
//! curve settings are not fully pinned down anywhere, so the report is the
//! contract).

use clap::Parser;
use std::path::PathBuf;

use sbx_effcap::channel::{LinkBudget, SbxParams};
use sbx_effcap::effcap::{effective_capacity_exact, low_snr_characterization, DelaySpec};
use sbx_effcap::specfun::EvalControl;

use crate::sweep::{plot_script, write_atomic, Axis, Output, SweepSpec};
use crate::{default_seed, low_snr_point, CliError};

#[derive(Parser)]
pub struct FigureArgs {
    /// Figure id (1-5)
    #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
    id: u8,
    /// Output directory for the CSVs and the claims report
    #[arg(long)]
    out: PathBuf,
    /// Product T*B used to map theta to A in figure 3
    #[arg(long, default_value_t = 1.0)]
    tb: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per point for mc columns
    #[arg(long = "n-samples", default_value_t = 100_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Also write a plot script referencing the CSVs
    #[arg(long = "emit-plot", default_value_t = false)]
    emit_plot: bool,
}

fn ctl() -> EvalControl {
    EvalControl::default()
}

/// Exact EC at a dB operating point.
fn ec_at(p: &SbxParams, snr_db: f64, ds: &DelaySpec) -> Result<f64, CliError> {
    let lb = LinkBudget::from_db(snr_db)?;
    Ok(effective_capacity_exact(p, &lb, ds, &ctl())?.ec_bits)
}

fn pct(new: f64, old: f64) -> f64 {
    (new / old - 1.0) * 100.0
}

struct FigureOutput {
    csvs: Vec<String>,
    claims: String,
}

fn base_spec(channel: SbxParams, outputs: Vec<Output>, seed: u64, args: &FigureArgs) -> SweepSpec {
    SweepSpec {
        axis: Axis::SnrDb,
        from: 0.0,
        to: 30.0,
        step: 1.0,
        channel,
        snr_db: None,
        delay: Some(DelaySpec::from_constraint(1.0).expect("A=1")),
        tb: (1.0, 1.0),
        outputs,
        seed,
        n_samples: args.n_samples,
        shards: args.shards,
        tol: 1e-12,
    }
}

/// EC vs average SNR across multipath parameters (m_x, omega_x),
/// fixed m_y = 10, omega_y = 10, A = 1.
fn figure_1(args: &FigureArgs, seed: u64) -> Result<FigureOutput, CliError> {
    let curves = [(1.0, 2.0), (2.0, 2.0), (3.0, 2.0), (2.0, 1.0)];
    let mut csvs = Vec::new();
    for (i, (mx, ox)) in curves.into_iter().enumerate() {
        let p = SbxParams::new(mx, ox, 10.0, 10.0)?;
        let spec = base_spec(
            p,
            vec![Output::Exact, Output::HighSnr, Output::Mc],
            crate::derive_seed(seed, i as u64),
            args,
        );
        let name = format!("fig1_mx{mx}_ox{ox}.csv");
        write_atomic(&args.out.join(&name), &spec.render_csv()?)?;
        csvs.push(name);
    }

    let ds = DelaySpec::from_constraint(1.0)?;
    let p1 = SbxParams::new(1.0, 2.0, 10.0, 10.0)?;
    let p3 = SbxParams::new(3.0, 2.0, 10.0, 10.0)?;
    let p2w = SbxParams::new(2.0, 2.0, 10.0, 10.0)?;
    let p2n = SbxParams::new(2.0, 1.0, 10.0, 10.0)?;
    let mut claims = String::from("# sbx-effcap v1 claims — figure 1\n");
    claims.push_str("settings: m_y=10 omega_y=10 A=1, snr_db swept 0..30\n");
    claims.push_str(&format!(
        "claim: throughput increases with m_x — EC(30 dB) m_x 1 -> 3: {:.4} -> {:.4} bits/s/Hz ({:+.2}%)\n",
        ec_at(&p1, 30.0, &ds)?,
        ec_at(&p3, 30.0, &ds)?,
        pct(ec_at(&p3, 30.0, &ds)?, ec_at(&p1, 30.0, &ds)?),
    ));
    claims.push_str(&format!(
        "claim: throughput improves as omega_x decreases — EC(30 dB) omega_x 2 -> 1: {:.4} -> {:.4} bits/s/Hz ({:+.2}%)\n",
        ec_at(&p2w, 30.0, &ds)?,
        ec_at(&p2n, 30.0, &ds)?,
        pct(ec_at(&p2n, 30.0, &ds)?, ec_at(&p2w, 30.0, &ds)?),
    ));
    claims.push_str(&format!(
        "claim: parameter disparity grows with SNR — EC gap m_x 1 -> 3 at 5 dB: {:.4}, at 25 dB: {:.4} bits/s/Hz\n",
        ec_at(&p3, 5.0, &ds)? - ec_at(&p1, 5.0, &ds)?,
        ec_at(&p3, 25.0, &ds)? - ec_at(&p1, 25.0, &ds)?,
    ));
    Ok(FigureOutput { csvs, claims })
}

/// EC vs average SNR across shadowing parameters (m_y, omega_y),
/// fixed m_x = 2, omega_x = 2, A = 1.
fn figure_2(args: &FigureArgs, seed: u64) -> Result<FigureOutput, CliError> {
    let curves = [(2.0, 10.0), (5.0, 10.0), (10.0, 10.0), (10.0, 5.0)];
    let mut csvs = Vec::new();
    for (i, (my, oy)) in curves.into_iter().enumerate() {
        let p = SbxParams::new(2.0, 2.0, my, oy)?;
        let spec = base_spec(
            p,
            vec![Output::Exact, Output::HighSnr, Output::Mc],
            crate::derive_seed(seed, 100 + i as u64),
            args,
        );
        let name = format!("fig2_my{my}_oy{oy}.csv");
        write_atomic(&args.out.join(&name), &spec.render_csv()?)?;
        csvs.push(name);
    }

    let ds = DelaySpec::from_constraint(1.0)?;
    let p_my2 = SbxParams::new(2.0, 2.0, 2.0, 10.0)?;
    let p_my10 = SbxParams::new(2.0, 2.0, 10.0, 10.0)?;
    let p_oy5 = SbxParams::new(2.0, 2.0, 10.0, 5.0)?;
    let mut claims = String::from("# sbx-effcap v1 claims — figure 2\n");
    claims.push_str("settings: m_x=2 omega_x=2 A=1, snr_db swept 0..30\n");
    claims.push_str(&format!(
        "claim: throughput improves with m_y — EC(30 dB) m_y 2 -> 10: {:.4} -> {:.4} bits/s/Hz ({:+.2}%)\n",
        ec_at(&p_my2, 30.0, &ds)?,
        ec_at(&p_my10, 30.0, &ds)?,
        pct(ec_at(&p_my10, 30.0, &ds)?, ec_at(&p_my2, 30.0, &ds)?),
    ));
    claims.push_str(&format!(
        "claim: throughput improves with omega_y — EC(30 dB) omega_y 5 -> 10: {:.4} -> {:.4} bits/s/Hz ({:+.2}%)\n",
        ec_at(&p_oy5, 30.0, &ds)?,
        ec_at(&p_my10, 30.0, &ds)?,
        pct(ec_at(&p_my10, 30.0, &ds)?, ec_at(&p_oy5, 30.0, &ds)?),
    ));
    claims.push_str(&format!(
        "claim: parameter disparity grows with SNR — EC gap m_y 2 -> 10 at 5 dB: {:.4}, at 25 dB: {:.4} bits/s/Hz\n",
        ec_at(&p_my10, 5.0, &ds)? - ec_at(&p_my2, 5.0, &ds)?,
        ec_at(&p_my10, 25.0, &ds)? - ec_at(&p_my2, 25.0, &ds)?,
    ));
    Ok(FigureOutput { csvs, claims })
}

/// EC vs theta (log-spaced 1e-3..1) for gamma_bar in {5, 10, 15} dB,
/// channel (2, 2, 10, 10), A = theta*T*B/ln 2.
fn figure_3(args: &FigureArgs, _seed: u64) -> Result<FigureOutput, CliError> {
    let p = SbxParams::new(2.0, 2.0, 10.0, 10.0)?;
    let thetas: Vec<f64> = (0..=30)
        .map(|i| 10f64.powf(-3.0 + i as f64 / 10.0))
        .collect();
    let mut csvs = Vec::new();
    for snr_db in [5.0, 10.0, 15.0] {
        let spec = SweepSpec {
            axis: Axis::Theta,
            from: 1e-3,
            to: 1.0,
            step: 1.0, // unused: points are supplied explicitly
            channel: p,
            snr_db: Some(snr_db),
            delay: None,
            tb: (args.tb, 1.0),
            outputs: vec![Output::Exact, Output::Quadrature],
            seed: 0,
            n_samples: args.n_samples,
            shards: args.shards,
            tol: 1e-12,
        };
        let name = format!("fig3_snr{snr_db}db.csv");
        write_atomic(&args.out.join(&name), &spec.render_csv_at(&thetas)?)?;
        csvs.push(name);
    }

    let ec_theta = |theta: f64, snr_db: f64, tb: f64| -> Result<f64, CliError> {
        let ds = DelaySpec::from_theta(theta, tb, 1.0)?;
        ec_at(&p, snr_db, &ds)
    };
    let mut claims = String::from("# sbx-effcap v1 claims — figure 3\n");
    claims.push_str(&format!(
        "settings: m_x=2 omega_x=2 m_y=10 omega_y=10, T*B={}\n",
        args.tb
    ));
    let mut misses = false;
    for (theta, target) in [(0.1, 35.0), (0.001, 150.0)] {
        let e5 = ec_theta(theta, 5.0, args.tb)?;
        let e15 = ec_theta(theta, 15.0, args.tb)?;
        let measured = pct(e15, e5);
        let hit = (measured - target).abs() <= 10.0;
        if !hit {
            misses = true;
        }
        claims.push_str(&format!(
            "claim: EC(15 dB)/EC(5 dB) - 1 at theta={theta}: reference {target:.0}%, measured {measured:.2}% -> {}\n",
            if hit { "HIT (within 10 pp)" } else { "MISS" },
        ));
    }
    if misses {
        claims.push_str("T*B sensitivity (the product is not pinned by the reference curves):\n");
        claims.push_str("  T*B        theta=0.1    theta=0.001\n");
        for tb in [1.0, 10.0, 100.0, 1000.0] {
            let r1 = pct(ec_theta(0.1, 15.0, tb)?, ec_theta(0.1, 5.0, tb)?);
            let r2 = pct(ec_theta(0.001, 15.0, tb)?, ec_theta(0.001, 5.0, tb)?);
            claims.push_str(&format!("  {tb:<9} {r1:>9.2}%   {r2:>9.2}%\n"));
        }
        claims.push_str(
            "note: both reference deltas are reproduced simultaneously near T*B = 1000\n",
        );
    }
    Ok(FigureOutput { csvs, claims })
}

/// EC vs the delay constraint A for (m_x, m_y) combinations,
/// omega_x = 2, omega_y = 10, gamma_bar = 0 dB (assumed; not pinned by the
/// reference curves).
fn figure_4(args: &FigureArgs, _seed: u64) -> Result<FigureOutput, CliError> {
    let curves = [(1.0, 5.0), (2.0, 5.0), (3.0, 5.0), (3.0, 10.0)];
    let mut csvs = Vec::new();
    for (mx, my) in curves {
        let p = SbxParams::new(mx, 2.0, my, 10.0)?;
        let spec = SweepSpec {
            axis: Axis::AConstraint,
            from: 1.0,
            to: 10.0,
            step: 0.5,
            channel: p,
            snr_db: Some(0.0),
            delay: None,
            tb: (1.0, 1.0),
            outputs: vec![Output::Exact, Output::Quadrature],
            seed: 0,
            n_samples: args.n_samples,
            shards: args.shards,
            tol: 1e-12,
        };
        let name = format!("fig4_mx{mx}_my{my}.csv");
        write_atomic(&args.out.join(&name), &spec.render_csv()?)?;
        csvs.push(name);
    }

    let ec4 = |mx: f64, my: f64, a: f64| -> Result<f64, CliError> {
        let p = SbxParams::new(mx, 2.0, my, 10.0)?;
        ec_at(&p, 0.0, &DelaySpec::from_constraint(a)?)
    };
    let mut claims = String::from("# sbx-effcap v1 claims — figure 4\n");
    claims.push_str("settings: omega_x=2 omega_y=10 snr_db=0 (assumed), A swept 1..10\n");
    for (a, target) in [(1.0, 9.0), (10.0, 48.0)] {
        let measured = pct(ec4(3.0, 5.0, a)?, ec4(1.0, 5.0, a)?);
        claims.push_str(&format!(
            "claim: EC increase for m_x 1 -> 3 at m_y=5, A={a}: reference {target:.0}%, measured {measured:.2}%\n"
        ));
    }
    for (a, target) in [(1.0, 3.0), (10.0, 12.0)] {
        let measured = pct(ec4(3.0, 10.0, a)?, ec4(3.0, 5.0, a)?);
        claims.push_str(&format!(
            "claim: EC increase for m_y 5 -> 10 at m_x=3, A={a}: reference {target:.0}%, measured {measured:.2}%\n"
        ));
    }
    Ok(FigureOutput { csvs, claims })
}

/// Low-SNR EC vs Eb/N0 for A in {1, 2, 5}, channel (2, 2, 10, 10).
fn figure_5(args: &FigureArgs, _seed: u64) -> Result<FigureOutput, CliError> {
    let p = SbxParams::new(2.0, 2.0, 10.0, 10.0)?;
    let mut csvs = Vec::new();
    for a in [1.0, 2.0, 5.0] {
        let spec = SweepSpec {
            axis: Axis::Ebn0Db,
            from: -1.5,
            to: 10.0,
            step: 0.25,
            channel: p,
            snr_db: None,
            delay: Some(DelaySpec::from_constraint(a)?),
            tb: (1.0, 1.0),
            outputs: vec![Output::LowSnr],
            seed: 0,
            n_samples: args.n_samples,
            shards: args.shards,
            tol: 1e-12,
        };
        let name = format!("fig5_A{a}.csv");
        write_atomic(&args.out.join(&name), &spec.render_csv()?)?;
        csvs.push(name);
    }

    let c = ctl();
    let ds1 = DelaySpec::from_constraint(1.0)?;
    let ds5 = DelaySpec::from_constraint(5.0)?;
    let e1 = low_snr_point(&p, &ds1, 0.0, &c)?;
    let e5 = low_snr_point(&p, &ds5, 0.0, &c)?;
    let ch1 = low_snr_characterization(&p, &ds1, &c)?;
    let ch5 = low_snr_characterization(&p, &ds5, &c)?;
    let mut claims = String::from("# sbx-effcap v1 claims — figure 5\n");
    claims.push_str("settings: m_x=2 omega_x=2 m_y=10 omega_y=10, Eb/N0 swept -1.5..10 dB\n");
    claims.push_str(&format!(
        "claim: EC reduction for A 1 -> 5 at Eb/N0 = 0 dB: reference 39%, measured {:.2}% ({:.4} -> {:.4} bits/s/Hz)\n",
        (1.0 - e5 / e1) * 100.0,
        e1,
        e5,
    ));
    claims.push_str(&format!(
        "claim: minimum energy per bit unaffected by A: (Eb/N0)min = {:.4} dB at A=1 and {:.4} dB at A=5 (reference -6.7 dB)\n",
        ch1.ebn0_min_db(),
        ch5.ebn0_min_db(),
    ));
    claims.push_str(
        "note: the mean identity E[snr] = snr_bar pins (Eb/N0)min at ln 2 = -1.59 dB for every \
         channel under this model; the -6.7 dB reference value is reported alongside, not \
         reproduced\n",
    );
    Ok(FigureOutput { csvs, claims })
}

pub fn run(args: &FigureArgs) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or_else(default_seed);
    std::fs::create_dir_all(&args.out)?;
    let out = match args.id {
        1 => figure_1(args, seed)?,
        2 => figure_2(args, seed)?,
        3 => figure_3(args, seed)?,
        4 => figure_4(args, seed)?,
        5 => figure_5(args, seed)?,
        _ => unreachable!("clap range"),
    };
    write_atomic(
        &args.out.join(format!("fig{}_claims.txt", args.id)),
        &out.claims,
    )?;
    if args.emit_plot {
        let xlabel = match args.id {
            3 => "theta",
            4 => "a_constraint",
            5 => "ebn0_db",
            _ => "snr_db",
        };
        let script = plot_script(
            &out.csvs,
            &format!("figure {}", args.id),
            xlabel,
            &format!("fig{}.png", args.id),
        );
        write_atomic(&args.out.join(format!("fig{}.plot.py", args.id)), &script)?;
    }
    Ok(())
}
