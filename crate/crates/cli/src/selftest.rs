//! Built-in invariant suite for the `selftest` subcommand: fast
//! checks of the factorization identities, the determinant identity
//! on a fixed batch of 100 random channels, and the clustering
//! degeneracies. Prints one PASS/FAIL line per check.
//!
//! Setting `LINKSIM_SELFTEST_FAULT` (to any non-empty value) flips
//! the sign of the computed diagonal product inside the determinant
//! check, which must make the suite fail; harnesses use this to
//! prove the suite can actually detect a broken build.

use std::process::ExitCode;

use linksim_core::channel::Channel;
use linksim_core::decomp::{decompose_eigen, decompose_joint};
use linksim_core::feedback::{clusterize, ClusterPlan, FeedbackReport, SchemeId};
use linksim_core::sim::{run_trial, SimConfig};
use linksim_core::substream;

const NUM_SUBCARRIERS: usize = 16;
const DETERMINANT_CHANNELS: usize = 100;

fn fault_sign() -> f64 {
    match std::env::var_os("LINKSIM_SELFTEST_FAULT") {
        Some(v) if !v.is_empty() => -1.0,
        _ => 1.0,
    }
}

/// Prints one report line, dying quietly with the conventional
/// SIGPIPE status when a downstream pager closes the pipe early.
fn emit(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(141);
    }
}

struct Tally {
    passed: usize,
    failed: usize,
}

impl Tally {
    fn check(&mut self, name: &str, ok: bool, detail: &str) {
        if ok {
            emit(format_args!("PASS {name}"));
            self.passed += 1;
        } else {
            emit(format_args!("FAIL {name}: {detail}"));
            self.failed += 1;
        }
    }
}

pub fn run() -> ExitCode {
    let mut tally = Tally {
        passed: 0,
        failed: 0,
    };
    decomposition_checks(&mut tally);
    determinant_checks(&mut tally);
    clustering_checks(&mut tally);
    emit(format_args!(
        "selftest: {} passed, {} failed",
        tally.passed, tally.failed
    ));
    if tally.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Per-subcarrier reconstruction from the joint factorization must
/// match the directly computed frequency response.
fn decomposition_checks(tally: &mut Tally) {
    let mut rng = substream(0x11D5, 0, 0, 0);
    for i in 0..20 {
        let ch = Channel::draw(2, 2, 8, &mut rng);
        let jf = decompose_joint(&ch);
        let mut worst = 0.0f64;
        for q in 0..NUM_SUBCARRIERS {
            let g = ch.frequency_response(q, NUM_SUBCARRIERS);
            let rel = (jf.reconstruct(q, NUM_SUBCARRIERS) - &g).norm() / g.norm();
            worst = worst.max(rel);
        }
        tally.check(
            &format!("decomposition-identity {i:02}"),
            worst < 1e-9,
            &format!("worst relative residual {worst:.3e}"),
        );
    }
}

/// The product of triangular diagonal magnitudes must equal the
/// product of per-subcarrier singular values, channel by channel.
fn determinant_checks(tally: &mut Tally) {
    let mut rng = substream(0xDE7A, 0, 0, 0);
    for i in 0..DETERMINANT_CHANNELS {
        let ch = Channel::draw(2, 2, 8, &mut rng);
        let jf = decompose_joint(&ch);
        let mut worst = 0.0f64;
        for q in 0..NUM_SUBCARRIERS {
            let g = ch.frequency_response(q, NUM_SUBCARRIERS);
            let svals = decompose_eigen(&g).singular_values;
            if *svals.last().expect("at least one stream") <= 1e-8 {
                continue;
            }
            let sval_prod: f64 = svals.iter().product();
            let diag_prod: f64 = fault_sign()
                * jf.subcarrier_factors(q, NUM_SUBCARRIERS)
                    .diag_magnitudes()
                    .iter()
                    .product::<f64>();
            worst = worst.max((diag_prod - sval_prod).abs() / sval_prod);
        }
        tally.check(
            &format!("determinant-identity {i:03}"),
            worst <= 1e-9,
            &format!("worst relative error {worst:.3e}"),
        );
    }
}

/// Per-trial gap between each clustered scheme and its
/// per-subcarrier parent; zero whenever clustering cannot matter.
fn scheme_collapse_gap(cfg: &SimConfig) -> f64 {
    let codebook = cfg.codebook().expect("valid selftest config");
    let pos = |s: SchemeId| {
        cfg.schemes
            .iter()
            .position(|&x| x == s)
            .expect("scheme present")
    };
    let mut worst = 0.0f64;
    for trial in 0..cfg.trials {
        let tputs = run_trial(cfg, &codebook, trial as u64).expect("selftest trial");
        worst = worst.max((tputs[pos(SchemeId::PsRfOs)] - tputs[pos(SchemeId::PcRfOs)]).abs());
        worst = worst.max((tputs[pos(SchemeId::PsEbOs)] - tputs[pos(SchemeId::PcEbOs)]).abs());
    }
    worst
}

fn clustering_checks(tally: &mut Tally) {
    let base = SimConfig {
        num_subcarriers: NUM_SUBCARRIERS,
        num_mts: 2,
        codebook_bits: Some(3),
        trials: 5,
        ..SimConfig::default()
    };

    let singleton = SimConfig {
        num_clusters: NUM_SUBCARRIERS,
        ..base.clone()
    };
    let gap = scheme_collapse_gap(&singleton);
    tally.check(
        "clustering-degeneracy single-subcarrier-clusters",
        gap < 1e-12,
        &format!("clustered and per-subcarrier schemes differ by {gap:.3e}"),
    );

    for clusters in [2usize, 4, 8] {
        let flat = SimConfig {
            num_taps: 1,
            num_clusters: clusters,
            ..base.clone()
        };
        let gap = scheme_collapse_gap(&flat);
        tally.check(
            &format!("clustering-degeneracy flat-channel G={clusters}"),
            gap < 1e-12,
            &format!("clustered and per-subcarrier schemes differ by {gap:.3e}"),
        );
    }

    let throughputs: Vec<f64> = (0..12).map(|i| 0.5 + 0.25 * i as f64).collect();
    let mean_before = throughputs.iter().sum::<f64>() / throughputs.len() as f64;
    let report = FeedbackReport {
        mt_id: 0,
        scheme: SchemeId::PsRfOs,
        bfm_indices: vec![0],
        throughputs,
        rho: 10.0,
    };
    let plan = ClusterPlan::new(12, 3).expect("12 splits into 3 clusters");
    let clustered = clusterize(&report, &plan).expect("selftest clusterize");
    let mean_after = clustered.throughputs.iter().sum::<f64>() / clustered.throughputs.len() as f64;
    tally.check(
        "clustering-degeneracy cluster-mean",
        (mean_before - mean_after).abs() < 1e-9,
        &format!("cluster means drifted: {mean_before} vs {mean_after}"),
    );
}
