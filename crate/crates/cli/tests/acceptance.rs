//! Acceptance suite, CLI half: the figure-claims reports (criteria 8 and 9)
//! and byte-level determinism (criterion 10). Each test prints a PASS/FAIL
//! line; run with `--nocapture` to see them all.

use std::process::Command;

use sbx_effcap::channel::{LinkBudget, SbxParams};
use sbx_effcap::effcap::{low_snr_characterization, DelaySpec};
use sbx_effcap::oracle::{ec_monte_carlo, ergodic_capacity_mc};
use sbx_effcap::specfun::EvalControl;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbx-effcap"))
}

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} ({name}): {status} — {detail}");
    assert!(pass, "criterion {n} ({name}): {detail}");
}

/// Extract "measured X%" from a claims line.
fn measured_pct(line: &str) -> f64 {
    let tail = line.split("measured ").nth(1).expect("measured field");
    tail.trim_start()
        .split('%')
        .next()
        .unwrap()
        .parse()
        .expect("measured percentage")
}

/// Criterion 8: the figure-3 claims report states the measured
/// EC(15 dB)/EC(5 dB) deltas at θ = 0.1 and θ = 0.001 next to the 35% and
/// 150% targets; any claim outside ±10 pp must come with the T·B
/// sensitivity table.
#[test]
fn criterion_8_fig3_claims_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["figure", "3", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let claims = std::fs::read_to_string(dir.path().join("fig3_claims.txt")).unwrap();

    let mut pass = true;
    let mut detail = String::new();
    let mut any_miss = false;
    for (theta, target) in [("theta=0.1", 35.0), ("theta=0.001", 150.0)] {
        let line = claims.lines().find(|l| l.contains(theta));
        match line {
            Some(l) => {
                let measured = measured_pct(l);
                let hit = (measured - target).abs() <= 10.0;
                any_miss |= !hit;
                detail.push_str(&format!(
                    "{theta}: target {target}% measured {measured:.2}% ({}); ",
                    if hit { "hit" } else { "miss" }
                ));
            }
            None => {
                pass = false;
                detail = format!("claims report lacks the {theta} line");
            }
        }
    }
    if any_miss && !claims.contains("T*B sensitivity") {
        pass = false;
        detail.push_str("missed target without a T*B sensitivity table");
    } else if any_miss {
        detail.push_str("sensitivity table emitted for the missed target");
    }
    // three curve CSVs back the report
    for f in ["fig3_snr5db.csv", "fig3_snr10db.csv", "fig3_snr15db.csv"] {
        if !dir.path().join(f).exists() {
            pass = false;
            detail.push_str(&format!(" missing {f}"));
        }
    }
    report(8, "figure-3 claims report", pass, &detail);
}

/// Criterion 9: the figure-5 report states the A 1→5 reduction at 0 dB next
/// to the 39% reference and the computed (Eb/N0)min beside the −6.7 dB
/// reference; the criterion requires the report plus A-invariance of
/// (Eb/N0)min (not a match to −6.7 dB).
#[test]
fn criterion_9_fig5_claims_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["figure", "5", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let claims = std::fs::read_to_string(dir.path().join("fig5_claims.txt")).unwrap();

    let mut pass = true;
    let mut detail = String::new();
    let reduction = claims
        .lines()
        .find(|l| l.contains("reference 39%"))
        .map(measured_pct);
    match reduction {
        Some(r) => detail.push_str(&format!("A 1→5 reduction measured {r:.2}% vs 39%; ")),
        None => {
            pass = false;
            detail.push_str("missing the 39%-reference reduction line; ");
        }
    }
    if !claims.contains("-6.7") {
        pass = false;
        detail.push_str("missing the -6.7 dB reference; ");
    }

    // A-invariance of the minimum energy per bit, at full precision
    let ctl = EvalControl::default();
    let p = SbxParams::new(2.0, 2.0, 10.0, 10.0).unwrap();
    let e1 = low_snr_characterization(&p, &DelaySpec::from_constraint(1.0).unwrap(), &ctl)
        .unwrap()
        .ebn0_min;
    let e5 = low_snr_characterization(&p, &DelaySpec::from_constraint(5.0).unwrap(), &ctl)
        .unwrap()
        .ebn0_min;
    let inv = ((e1 - e5) / e1).abs();
    if inv > 1e-12 {
        pass = false;
    }
    detail.push_str(&format!(
        "(Eb/N0)min = {:.6} dB, A-invariance dev {inv:.2e}",
        10.0 * e1.log10()
    ));
    report(9, "figure-5 claims report", pass, &detail);
}

/// Criterion 10: sweeps and the Monte-Carlo estimators are byte-identical
/// across two runs with the same seed and shard count.
#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "sweep",
        "--axis",
        "snr_db",
        "--from",
        "0",
        "--to",
        "10",
        "--step",
        "1",
        "--mx",
        "2",
        "--omega-x",
        "2",
        "--my",
        "10",
        "--omega-y",
        "10",
        "--A",
        "1",
        "--outputs",
        "exact,quadrature,mc",
        "--n-samples",
        "50000",
        "--seed",
        "31415",
        "--shards",
        "4",
    ];
    for path in [&a, &b] {
        let out = bin()
            .args(common)
            .args(["--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let bytes_equal = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();

    let ctl = EvalControl::default();
    let p = SbxParams::new(2.0, 2.0, 10.0, 10.0).unwrap();
    let lb = LinkBudget::from_db(10.0).unwrap();
    let ds = DelaySpec::from_constraint(1.0).unwrap();
    let m1 = ec_monte_carlo(&p, &lb, &ds, 7, 100_000, 4, &ctl).unwrap();
    let m2 = ec_monte_carlo(&p, &lb, &ds, 7, 100_000, 4, &ctl).unwrap();
    let g1 = ergodic_capacity_mc(&p, &lb, 7, 100_000, 4, &ctl).unwrap();
    let g2 = ergodic_capacity_mc(&p, &lb, 7, 100_000, 4, &ctl).unwrap();
    let estimators_equal = m1.value.to_bits() == m2.value.to_bits()
        && m1.std_err.to_bits() == m2.std_err.to_bits()
        && g1.value.to_bits() == g2.value.to_bits()
        && g1.std_err.to_bits() == g2.std_err.to_bits();

    report(
        10,
        "determinism",
        bytes_equal && estimators_equal,
        &format!("sweep bytes identical: {bytes_equal}; estimator bits identical: {estimators_equal} (seed 31415/7, 4 shards)"),
    );
}
