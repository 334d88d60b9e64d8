//! Terminal-side feedback computation for the four scheduling schemes.
//!
//! Every scheme boils down to the same report shape: which codebook
//! entries the terminal wants the base station to use, and what
//! throughput each resource (subcarrier or cluster) could support under
//! that choice. The four schemes differ along two axes:
//!
//! * **RF vs EB** — the joint factorization needs a single beamforming
//!   matrix for all subcarriers (one index), the eigen baseline one per
//!   subcarrier.
//! * **PS vs PC** — per-subcarrier reports carry one value per
//!   subcarrier; per-cluster reports average over `U` adjacent
//!   subcarriers and carry one value (and for EB one index) per cluster.
//!
//! Supportable throughput per subcarrier is the sum over spatial
//! streams of `log2(1 + rho * gain^2 * alignment)`, where the gain is a
//! triangular-factor diagonal magnitude (RF) or a singular value (EB)
//! and the alignment factor is the diagonal entry of the quantized
//! beamformer's alignment product (exactly one in exact mode).

use crate::channel::Channel;
use crate::codebook::{diag_alignment_gains, BfmChoice, Codebook};
use crate::decomp::{decompose_eigen, decompose_joint, EigenFactors, JointFactors};
use crate::{CMatrix, Error, Result};

/// The four feedback/scheduling schemes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum SchemeId {
    /// Per-subcarrier reduced feedback: one index, `Q` throughputs.
    #[serde(rename = "PS-RF-OS")]
    PsRfOs,
    /// Per-cluster reduced feedback: one index, `G` throughputs.
    #[serde(rename = "PC-RF-OS")]
    PcRfOs,
    /// Per-subcarrier eigen-beamforming: `Q` indices, `Q` throughputs.
    #[serde(rename = "PS-EB-OS")]
    PsEbOs,
    /// Per-cluster eigen-beamforming: `G` indices, `G` throughputs.
    #[serde(rename = "PC-EB-OS")]
    PcEbOs,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::PsRfOs,
        SchemeId::PcRfOs,
        SchemeId::PsEbOs,
        SchemeId::PcEbOs,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SchemeId::PsRfOs => "PS-RF-OS",
            SchemeId::PcRfOs => "PC-RF-OS",
            SchemeId::PsEbOs => "PS-EB-OS",
            SchemeId::PcEbOs => "PC-EB-OS",
        }
    }

    /// Whether feedback is aggregated over clusters.
    pub fn is_clustered(&self) -> bool {
        matches!(self, SchemeId::PcRfOs | SchemeId::PcEbOs)
    }

    /// Whether the scheme uses the joint (reduced-feedback)
    /// factorization rather than per-subcarrier eigen-beamforming.
    pub fn is_reduced_feedback(&self) -> bool {
        matches!(self, SchemeId::PsRfOs | SchemeId::PcRfOs)
    }
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        SchemeId::ALL
            .into_iter()
            .find(|scheme| scheme.label() == norm)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown scheme {s:?} (expected one of PS-RF-OS, PC-RF-OS, PS-EB-OS, PC-EB-OS)"
                ))
            })
    }
}

/// Partition of `Q` subcarriers into `G` contiguous clusters of `U`
/// adjacent subcarriers each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterPlan {
    pub num_subcarriers: usize,
    pub num_clusters: usize,
    pub cluster_size: usize,
}

impl ClusterPlan {
    /// Builds the plan, rejecting cluster counts that do not divide the
    /// subcarrier count evenly.
    pub fn new(num_subcarriers: usize, num_clusters: usize) -> Result<Self> {
        if num_subcarriers == 0 || num_clusters == 0 {
            return Err(Error::InvalidConfig(
                "subcarrier and cluster counts must be positive".into(),
            ));
        }
        if !num_subcarriers.is_multiple_of(num_clusters) {
            return Err(Error::InvalidConfig(format!(
                "cluster count {num_clusters} does not divide {num_subcarriers} subcarriers"
            )));
        }
        Ok(ClusterPlan {
            num_subcarriers,
            num_clusters,
            cluster_size: num_subcarriers / num_clusters,
        })
    }

    /// Subcarrier index range of cluster `g`.
    pub fn range(&self, g: usize) -> std::ops::Range<usize> {
        let start = g * self.cluster_size;
        start..start + self.cluster_size
    }
}

/// One terminal's feedback for one channel realization.
#[derive(Debug, Clone)]
pub struct FeedbackReport {
    pub mt_id: usize,
    pub scheme: SchemeId,
    /// Codebook indices: one for RF schemes, `Q` for PS-EB, `G` for
    /// PC-EB.
    pub bfm_indices: Vec<usize>,
    /// Supportable throughput in bits/s/Hz per resource (`Q` values for
    /// per-subcarrier schemes, `G` for per-cluster schemes).
    pub throughputs: Vec<f64>,
    /// Linear SNR the throughputs were evaluated at.
    pub rho: f64,
}

fn stream_rate(rho: f64, gain_sq: f64, alignment: f64) -> f64 {
    (1.0 + rho * gain_sq * alignment).log2()
}

fn quantized_gains(codebook: &Codebook, v_exact: &CMatrix, choice: &BfmChoice) -> Vec<f64> {
    if codebook.exact_mode {
        vec![1.0; v_exact.ncols()]
    } else {
        diag_alignment_gains(v_exact, &choice.matrix)
    }
}

/// Per-subcarrier reduced-feedback report: quantizes the single shared
/// beamforming matrix once and prices every subcarrier with the
/// triangular factor's diagonal.
pub fn rf_throughputs(
    joint: &JointFactors,
    num_subcarriers: usize,
    codebook: &Codebook,
    rho: f64,
    mt_id: usize,
) -> FeedbackReport {
    assert!(rho > 0.0, "linear SNR must be positive");
    let choice = codebook.select(&joint.bs_bfm);
    let gains = quantized_gains(codebook, &joint.bs_bfm, &choice);
    let throughputs = (0..num_subcarriers)
        .map(|q| {
            let diag = joint
                .subcarrier_factors(q, num_subcarriers)
                .diag_magnitudes();
            diag.iter()
                .zip(&gains)
                .map(|(&r, &g)| stream_rate(rho, r * r, g))
                .sum()
        })
        .collect();
    FeedbackReport {
        mt_id,
        scheme: SchemeId::PsRfOs,
        bfm_indices: vec![choice.index],
        throughputs,
        rho,
    }
}

/// Per-subcarrier eigen-beamforming report: quantizes each subcarrier's
/// beamforming matrix independently and prices it with the subcarrier's
/// singular values.
pub fn eb_throughputs(
    eigen: &[EigenFactors],
    codebook: &Codebook,
    rho: f64,
    mt_id: usize,
) -> FeedbackReport {
    assert!(rho > 0.0, "linear SNR must be positive");
    let mut bfm_indices = Vec::with_capacity(eigen.len());
    let mut throughputs = Vec::with_capacity(eigen.len());
    for ef in eigen {
        let choice = codebook.select(&ef.bs_bfm);
        let gains = quantized_gains(codebook, &ef.bs_bfm, &choice);
        let tput = ef
            .singular_values
            .iter()
            .zip(&gains)
            .map(|(&s, &g)| stream_rate(rho, s * s, g))
            .sum();
        bfm_indices.push(choice.index);
        throughputs.push(tput);
    }
    FeedbackReport {
        mt_id,
        scheme: SchemeId::PsEbOs,
        bfm_indices,
        throughputs,
        rho,
    }
}

/// Collapses a per-subcarrier report to per-cluster resolution by
/// arithmetic-averaging each cluster's throughputs. Codebook indices
/// are kept as-is, so this is the per-cluster variant for RF reports
/// (which carry a single subcarrier-independent index).
pub fn clusterize(report: &FeedbackReport, plan: &ClusterPlan) -> Result<FeedbackReport> {
    if report.scheme.is_clustered() {
        return Err(Error::InvalidConfig(
            "report is already at cluster resolution".into(),
        ));
    }
    if report.throughputs.len() != plan.num_subcarriers {
        return Err(Error::InvalidConfig(format!(
            "report covers {} subcarriers but the plan expects {}",
            report.throughputs.len(),
            plan.num_subcarriers
        )));
    }
    let throughputs = (0..plan.num_clusters)
        .map(|g| {
            let sum: f64 = report.throughputs[plan.range(g)].iter().sum();
            sum / plan.cluster_size as f64
        })
        .collect();
    let scheme = match report.scheme {
        SchemeId::PsRfOs => SchemeId::PcRfOs,
        SchemeId::PsEbOs => SchemeId::PcEbOs,
        other => other,
    };
    Ok(FeedbackReport {
        mt_id: report.mt_id,
        scheme,
        bfm_indices: report.bfm_indices.clone(),
        throughputs,
        rho: report.rho,
    })
}

/// Per-cluster eigen-beamforming report: each cluster picks one common
/// codebook entry (best summed alignment over its subcarriers), every
/// subcarrier in the cluster is re-priced under that common choice, and
/// the cluster reports the average.
pub fn pc_eb_throughputs(
    eigen: &[EigenFactors],
    codebook: &Codebook,
    plan: &ClusterPlan,
    rho: f64,
    mt_id: usize,
) -> Result<FeedbackReport> {
    assert!(rho > 0.0, "linear SNR must be positive");
    if eigen.len() != plan.num_subcarriers {
        return Err(Error::InvalidConfig(format!(
            "{} subcarrier factorizations for a {}-subcarrier plan",
            eigen.len(),
            plan.num_subcarriers
        )));
    }
    let mut bfm_indices = Vec::with_capacity(plan.num_clusters);
    let mut throughputs = Vec::with_capacity(plan.num_clusters);
    for g in 0..plan.num_clusters {
        let range = plan.range(g);
        let ideals: Vec<CMatrix> = eigen[range.clone()]
            .iter()
            .map(|ef| ef.bs_bfm.clone())
            .collect();
        let choice = codebook.select_for_cluster(&ideals);
        let mut acc = 0.0;
        for ef in &eigen[range] {
            let gains = diag_alignment_gains(&ef.bs_bfm, &choice.matrix);
            acc += ef
                .singular_values
                .iter()
                .zip(&gains)
                .map(|(&s, &g)| stream_rate(rho, s * s, g))
                .sum::<f64>();
        }
        bfm_indices.push(choice.index);
        throughputs.push(acc / plan.cluster_size as f64);
    }
    Ok(FeedbackReport {
        mt_id,
        scheme: SchemeId::PcEbOs,
        bfm_indices,
        throughputs,
        rho,
    })
}

/// Computes one terminal's feedback for one channel realization under
/// the given scheme — the single entry point the simulator uses.
pub fn compute_feedback(
    ch: &Channel,
    num_subcarriers: usize,
    codebook: &Codebook,
    scheme: SchemeId,
    plan: &ClusterPlan,
    rho: f64,
    mt_id: usize,
) -> Result<FeedbackReport> {
    if scheme.is_clustered() && plan.num_subcarriers != num_subcarriers {
        return Err(Error::InvalidConfig(format!(
            "cluster plan covers {} subcarriers, channel has {}",
            plan.num_subcarriers, num_subcarriers
        )));
    }
    match scheme {
        SchemeId::PsRfOs => Ok(rf_throughputs(
            &decompose_joint(ch),
            num_subcarriers,
            codebook,
            rho,
            mt_id,
        )),
        SchemeId::PcRfOs => clusterize(
            &rf_throughputs(&decompose_joint(ch), num_subcarriers, codebook, rho, mt_id),
            plan,
        ),
        SchemeId::PsEbOs => {
            let eigen = eigen_all(ch, num_subcarriers);
            Ok(eb_throughputs(&eigen, codebook, rho, mt_id))
        }
        SchemeId::PcEbOs => {
            let eigen = eigen_all(ch, num_subcarriers);
            pc_eb_throughputs(&eigen, codebook, plan, rho, mt_id)
        }
    }
}

fn eigen_all(ch: &Channel, num_subcarriers: usize) -> Vec<EigenFactors> {
    (0..num_subcarriers)
        .map(|q| decompose_eigen(&ch.frequency_response(q, num_subcarriers)))
        .collect()
}
