//! Seeded Monte Carlo campaigns over the four schemes.
//!
//! A campaign fixes a [`SimConfig`] and sweeps one parameter (terminal
//! count, codebook bits, cluster count, or SNR). Randomness is carved
//! into independent substreams keyed by `(seed, domain, trial, mt)`, so
//! every sweep point that shares a seed sees the *same* channel
//! realizations: growing `K` adds terminals without redrawing the
//! existing ones, growing `B` extends the codebook without moving its
//! prefix, and changing `G` or the SNR is a pure re-pricing. That
//! common-randomness coupling is what makes desk-scale trend checks
//! statistically sharp. All four schemes inside a trial score identical
//! channels and share one codebook.
//!
//! Everything is single-threaded and accumulation happens in trial
//! order, so a `(config, seed)` pair fully determines every output bit.

use crate::channel::Channel;
use crate::codebook::{Codebook, MAX_BITS};
use crate::decomp::{decompose_eigen, decompose_joint, EigenFactors};
use crate::feedback::{
    clusterize, eb_throughputs, pc_eb_throughputs, rf_throughputs, ClusterPlan, FeedbackReport,
    SchemeId,
};
use crate::scheduler::{allocate, system_throughput, AllocationMap};
use crate::{substream, CMatrix, Error, Result, C64};

const DOMAIN_CHANNEL: u64 = 0x0C11A22E1;

/// Where trial channels come from: random Rayleigh draws, or a fixed
/// unit flat channel (first tap one, rest zero) for closed-form checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelSource {
    #[default]
    Rayleigh,
    UnitFlat,
}

/// Full description of one simulation campaign.
///
/// Serialized field names follow the conventional symbols: `Q`
/// subcarriers, `M`/`N` transmit/receive antennas, `L` taps, `N_g`
/// cyclic prefix length (documentation only — the frequency-domain
/// model never consumes it), `K` terminals, `B` codebook bits (or the
/// string `"inf"` for exact mode), `G` clusters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    #[serde(rename = "Q")]
    pub num_subcarriers: usize,
    #[serde(rename = "M")]
    pub num_tx: usize,
    #[serde(rename = "N")]
    pub num_rx: usize,
    #[serde(rename = "L")]
    pub num_taps: usize,
    #[serde(rename = "N_g")]
    pub cp_len: usize,
    #[serde(rename = "K")]
    pub num_mts: usize,
    #[serde(rename = "B", with = "bits_serde")]
    pub codebook_bits: Option<u32>,
    #[serde(rename = "G")]
    pub num_clusters: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeId>,
    #[serde(skip)]
    pub channel_source: ChannelSource,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_subcarriers: 128,
            num_tx: 2,
            num_rx: 2,
            num_taps: 8,
            cp_len: 8,
            num_mts: 10,
            codebook_bits: Some(8),
            num_clusters: 8,
            snr_db: 10.0,
            trials: 200,
            seed: 1,
            schemes: SchemeId::ALL.to_vec(),
            channel_source: ChannelSource::Rayleigh,
        }
    }
}

impl SimConfig {
    /// Checks the cross-field invariants; every campaign entry point
    /// calls this before doing any work.
    pub fn validate(&self) -> Result<()> {
        if self.num_tx == 0 || self.num_rx == 0 {
            return Err(Error::InvalidConfig("M and N must be positive".into()));
        }
        if self.num_tx > self.num_rx {
            return Err(Error::InvalidConfig(format!(
                "M = {} transmit antennas must not exceed N = {} receive antennas",
                self.num_tx, self.num_rx
            )));
        }
        if self.num_subcarriers == 0 {
            return Err(Error::InvalidConfig("Q must be positive".into()));
        }
        if self.num_taps == 0 || self.num_taps > self.num_subcarriers {
            return Err(Error::InvalidConfig(format!(
                "L = {} must be in 1..=Q = {}",
                self.num_taps, self.num_subcarriers
            )));
        }
        if self.num_clusters == 0 || !self.num_subcarriers.is_multiple_of(self.num_clusters) {
            return Err(Error::InvalidConfig(format!(
                "G = {} must evenly divide Q = {}",
                self.num_clusters, self.num_subcarriers
            )));
        }
        if self.num_mts == 0 {
            return Err(Error::InvalidConfig("K must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let Some(bits) = self.codebook_bits {
            if bits > MAX_BITS {
                return Err(Error::InvalidConfig(format!(
                    "B = {bits} exceeds the supported maximum {MAX_BITS}"
                )));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("schemes must be nonempty".into()));
        }
        Ok(())
    }

    /// Linear SNR `rho = 10^(snr_db / 10)`.
    pub fn rho(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn plan(&self) -> Result<ClusterPlan> {
        ClusterPlan::new(self.num_subcarriers, self.num_clusters)
    }

    /// Builds the campaign's shared codebook (exact mode when `B` is
    /// absent).
    pub fn codebook(&self) -> Result<Codebook> {
        match self.codebook_bits {
            Some(bits) => Codebook::generate(bits, self.num_tx, self.seed),
            None => Ok(Codebook::exact(self.num_tx)),
        }
    }
}

mod bits_serde {
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<u32>, ser: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(bits) => ser.serialize_u32(*bits),
            None => ser.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<u32>, D::Error> {
        struct BitsVisitor;

        impl de::Visitor<'_> for BitsVisitor {
            type Value = Option<u32>;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a nonnegative integer or the string \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                u32::try_from(v)
                    .map(Some)
                    .map_err(|_| E::custom(format!("codebook bits {v} out of range")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                if v < 0 {
                    return Err(E::custom("codebook bits must be nonnegative"));
                }
                self.visit_u64(v as u64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("exact") {
                    Ok(None)
                } else {
                    Err(E::custom(format!(
                        "expected an integer or \"inf\" for codebook bits, got {v:?}"
                    )))
                }
            }
        }

        de.deserialize_any(BitsVisitor)
    }
}

fn draw_channel(cfg: &SimConfig, trial_id: u64, mt: usize) -> Channel {
    match cfg.channel_source {
        ChannelSource::Rayleigh => {
            let mut rng = substream(cfg.seed, DOMAIN_CHANNEL, trial_id, mt as u64);
            Channel::draw(cfg.num_rx, cfg.num_tx, cfg.num_taps, &mut rng)
        }
        ChannelSource::UnitFlat => {
            let mut taps = CMatrix::zeros(cfg.num_rx * cfg.num_taps, cfg.num_tx);
            for n in 0..cfg.num_rx {
                for m in 0..cfg.num_tx {
                    taps[(n * cfg.num_taps, m)] = C64::new(1.0, 0.0);
                }
            }
            Channel {
                taps,
                num_rx: cfg.num_rx,
                num_tx: cfg.num_tx,
                num_taps: cfg.num_taps,
            }
        }
    }
}

struct MtPrecomp {
    ps_rf: Option<FeedbackReport>,
    ps_eb: Option<FeedbackReport>,
    eigen: Option<Vec<EigenFactors>>,
}

/// Runs one slot: draws every terminal's channel, computes feedback for
/// each configured scheme (all schemes see the same realizations), and
/// schedules. Returns one allocation per scheme, in `cfg.schemes`
/// order.
pub fn trial_allocations(
    cfg: &SimConfig,
    codebook: &Codebook,
    trial_id: u64,
) -> Result<Vec<AllocationMap>> {
    let plan = cfg.plan()?;
    let rho = cfg.rho();
    let q = cfg.num_subcarriers;
    let want_rf = cfg.schemes.iter().any(|s| s.is_reduced_feedback());
    let want_ps_eb = cfg.schemes.contains(&SchemeId::PsEbOs);
    let want_pc_eb = cfg.schemes.contains(&SchemeId::PcEbOs);

    let mut per_mt = Vec::with_capacity(cfg.num_mts);
    for mt in 0..cfg.num_mts {
        let ch = draw_channel(cfg, trial_id, mt);
        let eigen = (want_ps_eb || want_pc_eb).then(|| {
            (0..q)
                .map(|sc| decompose_eigen(&ch.frequency_response(sc, q)))
                .collect::<Vec<_>>()
        });
        per_mt.push(MtPrecomp {
            ps_rf: want_rf.then(|| rf_throughputs(&decompose_joint(&ch), q, codebook, rho, mt)),
            ps_eb: eigen
                .as_ref()
                .filter(|_| want_ps_eb)
                .map(|e| eb_throughputs(e, codebook, rho, mt)),
            eigen: eigen.filter(|_| want_pc_eb),
        });
    }

    let mut out = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let mut reports = Vec::with_capacity(cfg.num_mts);
        for (mt, pre) in per_mt.iter().enumerate() {
            let report = match scheme {
                SchemeId::PsRfOs => pre.ps_rf.clone().expect("precomputed"),
                SchemeId::PcRfOs => clusterize(pre.ps_rf.as_ref().expect("precomputed"), &plan)?,
                SchemeId::PsEbOs => pre.ps_eb.clone().expect("precomputed"),
                SchemeId::PcEbOs => pc_eb_throughputs(
                    pre.eigen.as_ref().expect("precomputed"),
                    codebook,
                    &plan,
                    rho,
                    mt,
                )?,
            };
            reports.push(report);
        }
        out.push(allocate(&reports)?);
    }
    Ok(out)
}

/// System throughput of one trial for each configured scheme, in
/// `cfg.schemes` order.
pub fn run_trial(cfg: &SimConfig, codebook: &Codebook, trial_id: u64) -> Result<Vec<f64>> {
    Ok(trial_allocations(cfg, codebook, trial_id)?
        .iter()
        .map(system_throughput)
        .collect())
}

/// The swept parameter of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Single point at the base configuration.
    None,
    /// Terminal counts (`K`).
    MtCount(Vec<usize>),
    /// Codebook exponents (`B`); `None` entries are exact mode.
    CodebookBits(Vec<Option<u32>>),
    /// Cluster counts (`G`).
    ClusterCount(Vec<usize>),
    /// SNR points in dB.
    SnrDb(Vec<f64>),
}

impl Sweep {
    pub fn param_name(&self) -> &'static str {
        match self {
            Sweep::None => "none",
            Sweep::MtCount(_) => "K",
            Sweep::CodebookBits(_) => "B",
            Sweep::ClusterCount(_) => "G",
            Sweep::SnrDb(_) => "snr_db",
        }
    }

    /// Resolves the sweep into `(sweep_value, config)` points. Exact
    /// mode appears as an infinite sweep value.
    pub fn points(&self, base: &SimConfig) -> Vec<(f64, SimConfig)> {
        let with = |f: &dyn Fn(&mut SimConfig)| {
            let mut cfg = base.clone();
            f(&mut cfg);
            cfg
        };
        match self {
            Sweep::None => vec![(0.0, base.clone())],
            Sweep::MtCount(ks) => ks
                .iter()
                .map(|&k| (k as f64, with(&|c| c.num_mts = k)))
                .collect(),
            Sweep::CodebookBits(bs) => bs
                .iter()
                .map(|&b| {
                    let value = b.map_or(f64::INFINITY, |x| x as f64);
                    (value, with(&|c| c.codebook_bits = b))
                })
                .collect(),
            Sweep::ClusterCount(gs) => gs
                .iter()
                .map(|&g| (g as f64, with(&|c| c.num_clusters = g)))
                .collect(),
            Sweep::SnrDb(snrs) => snrs.iter().map(|&s| (s, with(&|c| c.snr_db = s))).collect(),
        }
    }
}

/// Aggregated result for one scheme at one sweep point.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub scheme: SchemeId,
    pub sweep_param: String,
    /// Swept value (infinite for exact-mode codebook points).
    pub sweep_value: f64,
    pub mean_tput_bps_hz: f64,
    /// Sample standard deviation across trials (zero for one trial).
    pub std_tput: f64,
    /// Normal-approximation 95% confidence half-width.
    pub ci95_halfwidth: f64,
    /// The fully resolved configuration this row was computed under.
    pub config: SimConfig,
}

/// All rows of a campaign, sorted by `(scheme label, sweep value)`.
#[derive(Debug, Clone)]
pub struct ThroughputSummary {
    pub rows: Vec<SummaryRow>,
}

impl ThroughputSummary {
    /// Rows for one scheme, in sweep-value order.
    pub fn scheme_rows(&self, scheme: SchemeId) -> Vec<&SummaryRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }
}

fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    (mean, std, 1.96 * std / (n as f64).sqrt())
}

/// Runs a full campaign: every sweep point is validated up front (no
/// partial results), then simulated trial by trial in index order.
pub fn run_campaign(base: &SimConfig, sweep: &Sweep) -> Result<ThroughputSummary> {
    let points = sweep.points(base);
    if points.is_empty() {
        return Err(Error::InvalidConfig("sweep contains no points".into()));
    }
    for (_, cfg) in &points {
        cfg.validate()?;
    }
    let mut rows = Vec::with_capacity(points.len() * base.schemes.len());
    for (value, cfg) in &points {
        let codebook = cfg.codebook()?;
        let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.trials); cfg.schemes.len()];
        for trial in 0..cfg.trials {
            let tputs = run_trial(cfg, &codebook, trial as u64)?;
            for (i, t) in tputs.into_iter().enumerate() {
                series[i].push(t);
            }
        }
        for (i, &scheme) in cfg.schemes.iter().enumerate() {
            let (mean, std, ci) = summarize(&series[i]);
            rows.push(SummaryRow {
                scheme,
                sweep_param: sweep.param_name().to_string(),
                sweep_value: *value,
                mean_tput_bps_hz: mean,
                std_tput: std,
                ci95_halfwidth: ci,
                config: cfg.clone(),
            });
        }
    }
    rows.sort_by(|a, b| {
        a.scheme
            .label()
            .cmp(b.scheme.label())
            .then(a.sweep_value.total_cmp(&b.sweep_value))
    });
    Ok(ThroughputSummary { rows })
}

/// Distribution summary of the high-SNR throughput ratio at one SNR.
#[derive(Debug, Clone)]
pub struct AsymptoticPoint {
    pub rho: f64,
    /// Subcarrier samples that passed the conditioning filter.
    pub samples: usize,
    /// Median of `|ratio - 1|` where ratio is joint over eigen
    /// throughput, both in exact mode.
    pub median_abs_err: f64,
    pub p90_abs_err: f64,
    pub mean_abs_err: f64,
}

/// Minimum smallest-singular-value for a subcarrier to enter the
/// asymptotic comparison (ill-conditioned subcarriers need
/// astronomically large SNR to reach the asymptote).
pub const ASYMPTOTIC_SVAL_FLOOR: f64 = 0.1;

/// Compares the two exact-mode throughput formulas across random
/// channels at each requested linear SNR, on a common channel set.
/// The ratio per subcarrier tends to one as the SNR grows.
pub fn asymptotic_experiment(cfg: &SimConfig, rho_list: &[f64]) -> Result<Vec<AsymptoticPoint>> {
    cfg.validate()?;
    if rho_list.is_empty() {
        return Err(Error::InvalidConfig("no SNR points requested".into()));
    }
    let q = cfg.num_subcarriers;
    let mut abs_errs: Vec<Vec<f64>> = vec![Vec::new(); rho_list.len()];
    for trial in 0..cfg.trials {
        let ch = draw_channel(cfg, trial as u64, 0);
        let joint = decompose_joint(&ch);
        for sc in 0..q {
            let eigen = decompose_eigen(&ch.frequency_response(sc, q));
            let min_sval = *eigen.singular_values.last().expect("at least one stream");
            if min_sval < ASYMPTOTIC_SVAL_FLOOR {
                continue;
            }
            let diag = joint.subcarrier_factors(sc, q).diag_magnitudes();
            for (k, &rho) in rho_list.iter().enumerate() {
                let joint_tput: f64 = diag.iter().map(|&r| (1.0 + rho * r * r).log2()).sum();
                let eigen_tput: f64 = eigen
                    .singular_values
                    .iter()
                    .map(|&s| (1.0 + rho * s * s).log2())
                    .sum();
                abs_errs[k].push((joint_tput / eigen_tput - 1.0).abs());
            }
        }
    }
    Ok(rho_list
        .iter()
        .zip(abs_errs)
        .map(|(&rho, mut errs)| {
            errs.sort_by(f64::total_cmp);
            AsymptoticPoint {
                rho,
                samples: errs.len(),
                median_abs_err: percentile(&errs, 0.5),
                p90_abs_err: percentile(&errs, 0.9),
                mean_abs_err: if errs.is_empty() {
                    f64::NAN
                } else {
                    errs.iter().sum::<f64>() / errs.len() as f64
                },
            }
        })
        .collect())
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}
