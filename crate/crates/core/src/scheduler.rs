//! Base-station resource allocation and feedback accounting.
//!
//! Scheduling is pure opportunistic max-throughput: each resource
//! (subcarrier or cluster, depending on the scheme) goes to the
//! terminal reporting the highest supportable throughput, with ties
//! resolved to the lowest terminal id so the outcome never depends on
//! report order. The module also prices each scheme's uplink feedback
//! load, counting index bits and real-valued scalars separately.

use crate::feedback::{FeedbackReport, SchemeId};
use crate::{Error, Result};

/// Outcome of scheduling one slot: per resource, who won and at what
/// reported throughput.
#[derive(Debug, Clone)]
pub struct AllocationMap {
    /// Winning terminal id per resource.
    pub winners: Vec<usize>,
    /// The winner's reported throughput per resource (bits/s/Hz).
    pub scheduled: Vec<f64>,
}

/// Assigns every resource to the terminal with the highest reported
/// throughput. All reports must share one scheme and resource count.
pub fn allocate(reports: &[FeedbackReport]) -> Result<AllocationMap> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidConfig("allocation needs at least one report".into()))?;
    let num_resources = first.throughputs.len();
    for r in reports {
        if r.scheme != first.scheme {
            return Err(Error::InvalidConfig(format!(
                "mixed schemes in allocation: {} vs {}",
                r.scheme, first.scheme
            )));
        }
        if r.throughputs.len() != num_resources {
            return Err(Error::InvalidConfig(format!(
                "terminal {} reports {} resources, expected {num_resources}",
                r.mt_id,
                r.throughputs.len()
            )));
        }
    }
    let mut winners = Vec::with_capacity(num_resources);
    let mut scheduled = Vec::with_capacity(num_resources);
    for res in 0..num_resources {
        let mut best_mt = first.mt_id;
        let mut best_tput = first.throughputs[res];
        for r in &reports[1..] {
            let t = r.throughputs[res];
            if t > best_tput || (t == best_tput && r.mt_id < best_mt) {
                best_tput = t;
                best_mt = r.mt_id;
            }
        }
        winners.push(best_mt);
        scheduled.push(best_tput);
    }
    Ok(AllocationMap { winners, scheduled })
}

/// System throughput of an allocation: the mean scheduled throughput
/// over resources (bits/s/Hz).
pub fn system_throughput(alloc: &AllocationMap) -> f64 {
    alloc.scheduled.iter().sum::<f64>() / alloc.scheduled.len() as f64
}

/// Uplink feedback cost of one terminal for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackBudget {
    /// Total bits spent on codebook indices.
    pub index_bits: u64,
    /// Count of real-valued throughput scalars.
    pub real_scalars: u64,
}

/// Feedback cost per terminal per slot for each scheme, given `Q`
/// subcarriers, `G` clusters, and `B`-bit codebook indices.
pub fn feedback_budget(
    scheme: SchemeId,
    num_subcarriers: usize,
    num_clusters: usize,
    bits: u32,
) -> FeedbackBudget {
    let q = num_subcarriers as u64;
    let g = num_clusters as u64;
    let b = bits as u64;
    let (index_bits, real_scalars) = match scheme {
        SchemeId::PsRfOs => (b, q),
        SchemeId::PsEbOs => (q * b, q),
        SchemeId::PcRfOs => (b, g),
        SchemeId::PcEbOs => (g * b, g),
    };
    FeedbackBudget {
        index_bits,
        real_scalars,
    }
}

/// Feedback cost in scalar counts, treating each index as one scalar:
/// the convention under which the per-subcarrier eigen baseline costs
/// about twice the reduced-feedback scheme.
pub fn scalar_count(scheme: SchemeId, num_subcarriers: usize, num_clusters: usize) -> u64 {
    let q = num_subcarriers as u64;
    let g = num_clusters as u64;
    match scheme {
        SchemeId::PsRfOs => 1 + q,
        SchemeId::PsEbOs => q + q,
        SchemeId::PcRfOs => 1 + g,
        SchemeId::PcEbOs => g + g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(mt_id: usize, throughputs: Vec<f64>) -> FeedbackReport {
        FeedbackReport {
            mt_id,
            scheme: SchemeId::PsRfOs,
            bfm_indices: vec![0],
            throughputs,
            rho: 10.0,
        }
    }

    #[test]
    fn single_terminal_wins_everything() {
        let alloc = allocate(&[report(4, vec![1.0, 2.0, 0.5])]).unwrap();
        assert_eq!(alloc.winners, vec![4, 4, 4]);
        assert_eq!(alloc.scheduled, vec![1.0, 2.0, 0.5]);
    }

    #[test]
    fn dominant_terminal_takes_all_resources() {
        let alloc = allocate(&[report(0, vec![1.0, 1.0]), report(1, vec![2.0, 3.0])]).unwrap();
        assert_eq!(alloc.winners, vec![1, 1]);
        assert_eq!(alloc.scheduled, vec![2.0, 3.0]);
    }

    #[test]
    fn allocation_matches_brute_force_argmax() {
        let num_mts = 10;
        let num_resources = 128;
        let reports: Vec<FeedbackReport> = (0..num_mts)
            .map(|mt| {
                let tputs = (0..num_resources)
                    .map(|r| (((mt * 37 + r * 13) % 101) as f64) * 0.1)
                    .collect();
                report(mt, tputs)
            })
            .collect();
        let alloc = allocate(&reports).unwrap();
        for res in 0..num_resources {
            let oracle = reports
                .iter()
                .map(|r| r.throughputs[res])
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(alloc.scheduled[res], oracle, "resource {res}");
            assert_eq!(
                reports[alloc.winners[res]].throughputs[res], oracle,
                "winner does not hold the max at resource {res}"
            );
        }
    }

    #[test]
    fn ties_go_to_the_lowest_terminal_id() {
        let alloc = allocate(&[
            report(5, vec![2.0, 1.0]),
            report(2, vec![2.0, 1.0]),
            report(7, vec![2.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(alloc.winners, vec![2, 2]);
    }

    #[test]
    fn adding_a_terminal_never_hurts() {
        let base = vec![report(0, vec![1.0, 4.0]), report(1, vec![3.0, 2.0])];
        let before = allocate(&base).unwrap();
        let mut extended = base.clone();
        extended.push(report(2, vec![2.0, 5.0]));
        let after = allocate(&extended).unwrap();
        for res in 0..2 {
            assert!(after.scheduled[res] >= before.scheduled[res]);
        }
    }

    #[test]
    fn inconsistent_reports_are_rejected() {
        assert!(allocate(&[]).is_err());
        let mut odd = report(1, vec![1.0]);
        odd.scheme = SchemeId::PsEbOs;
        assert!(allocate(&[report(0, vec![1.0]), odd]).is_err());
        assert!(allocate(&[report(0, vec![1.0]), report(1, vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn system_throughput_is_the_resource_mean() {
        let alloc = AllocationMap {
            winners: vec![0, 0],
            scheduled: vec![1.0, 3.0],
        };
        assert_eq!(system_throughput(&alloc), 2.0);
        let constant = AllocationMap {
            winners: vec![0; 5],
            scheduled: vec![0.75; 5],
        };
        assert!((system_throughput(&constant) - 0.75).abs() < 1e-15);
        let values: Vec<f64> = (0..17).map(|i| (i as f64).sin().abs()).collect();
        let oracle = values.iter().sum::<f64>() / 17.0;
        let random = AllocationMap {
            winners: vec![0; 17],
            scheduled: values,
        };
        assert!((system_throughput(&random) - oracle).abs() < 1e-12);
    }

    #[test]
    fn budgets_match_the_four_schemes() {
        let q = 128;
        let g = 8;
        let b = 8;
        assert_eq!(
            feedback_budget(SchemeId::PsRfOs, q, g, b),
            FeedbackBudget {
                index_bits: 8,
                real_scalars: 128
            }
        );
        assert_eq!(
            feedback_budget(SchemeId::PsEbOs, q, g, b),
            FeedbackBudget {
                index_bits: 1024,
                real_scalars: 128
            }
        );
        assert_eq!(
            feedback_budget(SchemeId::PcRfOs, q, g, b),
            FeedbackBudget {
                index_bits: 8,
                real_scalars: 8
            }
        );
        assert_eq!(
            feedback_budget(SchemeId::PcEbOs, q, g, b),
            FeedbackBudget {
                index_bits: 64,
                real_scalars: 8
            }
        );
    }

    #[test]
    fn scalar_counts_give_the_factor_of_two() {
        assert_eq!(scalar_count(SchemeId::PsRfOs, 128, 8), 129);
        assert_eq!(scalar_count(SchemeId::PsEbOs, 128, 8), 256);
        assert_eq!(scalar_count(SchemeId::PcRfOs, 128, 8), 9);
        assert_eq!(scalar_count(SchemeId::PcEbOs, 128, 8), 16);
        let ratio = scalar_count(SchemeId::PsEbOs, 128, 8) as f64
            / scalar_count(SchemeId::PsRfOs, 128, 8) as f64;
        assert!((ratio - 256.0 / 129.0).abs() < 1e-12);
    }
}
