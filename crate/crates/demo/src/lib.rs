//! Browser-facing wrappers around the simulator core. Each function
//! takes plain scalars, clamps them to ranges a browser tab can
//! compute interactively, and returns a JSON string ready for
//! plotting. Results are fully determined by the arguments, so the
//! page can cache and compare runs.

use linksim_core::channel::Channel;
use linksim_core::codebook::Codebook;
use linksim_core::decomp::{decompose_eigen, decompose_joint, EigenFactors};
use linksim_core::feedback::{eb_throughputs, rf_throughputs, SchemeId};
use linksim_core::sim::{run_campaign, SimConfig, Sweep};
use linksim_core::substream;
use serde_json::json;
use wasm_bindgen::prelude::*;

const PROFILE_SUBCARRIERS: usize = 64;
const SWEEP_SUBCARRIERS: usize = 32;
/// Substream domain reserved for demo channel draws, distinct from
/// the engine's own domains.
const DOMAIN_DEMO: u64 = 0xDE30;
/// All demo panels share one quantization codebook seed so curves
/// are comparable across panels.
const DEMO_CODEBOOK_SEED: u64 = 0x0DB0;

/// Per-subcarrier supportable throughput across one random
/// frequency-selective channel: reduced feedback quantized with `bits`
/// bits, reduced feedback in exact mode, and per-subcarrier
/// eigen-beamforming in exact mode.
#[wasm_bindgen]
pub fn subcarrier_profile(seed: u32, snr_db: f64, bits: u32) -> String {
    let bits = bits.clamp(1, 10);
    let snr_db = snr_db.clamp(-10.0, 30.0);
    let rho = 10f64.powf(snr_db / 10.0);
    let mut rng = substream(seed as u64, DOMAIN_DEMO, 1, 0);
    let ch = Channel::draw(2, 2, 8, &mut rng);
    let jf = decompose_joint(&ch);
    let quantized = Codebook::generate(bits, 2, DEMO_CODEBOOK_SEED).expect("bits within cap");
    let exact = Codebook::exact(2);
    let eigen: Vec<EigenFactors> = (0..PROFILE_SUBCARRIERS)
        .map(|q| decompose_eigen(&ch.frequency_response(q, PROFILE_SUBCARRIERS)))
        .collect();
    let rf_quantized = rf_throughputs(&jf, PROFILE_SUBCARRIERS, &quantized, rho, 0);
    let rf_exact = rf_throughputs(&jf, PROFILE_SUBCARRIERS, &exact, rho, 0);
    let eb_exact = eb_throughputs(&eigen, &exact, rho, 0);
    json!({
        "snr_db": snr_db,
        "bits": bits,
        "rf_quantized": rf_quantized.throughputs,
        "rf_exact": rf_exact.throughputs,
        "eb_exact": eb_exact.throughputs,
    })
    .to_string()
}

/// Mean system throughput of all four schemes as terminals join,
/// showing the multiuser diversity gain and the scheme ordering.
#[wasm_bindgen]
pub fn user_sweep(seed: u32, max_mts: u32, trials: u32, bits: u32) -> String {
    let max_mts = max_mts.clamp(2, 10) as usize;
    let trials = trials.clamp(1, 40) as usize;
    let bits = bits.clamp(1, 8);
    let base = SimConfig {
        num_subcarriers: SWEEP_SUBCARRIERS,
        num_clusters: 8,
        num_mts: max_mts,
        codebook_bits: Some(bits),
        trials,
        seed: seed as u64,
        ..SimConfig::default()
    };
    let summary = run_campaign(&base, &Sweep::MtCount((1..=max_mts).collect()))
        .expect("clamped demo config is valid");
    let mut schemes = serde_json::Map::new();
    for scheme in SchemeId::ALL {
        let means: Vec<f64> = summary
            .scheme_rows(scheme)
            .iter()
            .map(|r| r.mean_tput_bps_hz)
            .collect();
        schemes.insert(scheme.label().to_string(), json!(means));
    }
    json!({
        "k": (1..=max_mts).collect::<Vec<usize>>(),
        "trials": trials,
        "bits": bits,
        "schemes": schemes,
    })
    .to_string()
}

/// Mean throughput of the reduced-feedback scheme as the codebook
/// grows, against the exact-mode ceiling it converges to.
#[wasm_bindgen]
pub fn bits_sweep(seed: u32, trials: u32) -> String {
    let trials = trials.clamp(1, 40) as usize;
    let base = SimConfig {
        num_subcarriers: SWEEP_SUBCARRIERS,
        num_clusters: 8,
        num_mts: 4,
        trials,
        seed: seed as u64,
        schemes: vec![SchemeId::PsRfOs],
        ..SimConfig::default()
    };
    let mut points: Vec<Option<u32>> = (1..=8).map(Some).collect();
    points.push(None);
    let summary =
        run_campaign(&base, &Sweep::CodebookBits(points)).expect("clamped demo config is valid");
    let means: Vec<f64> = summary
        .scheme_rows(SchemeId::PsRfOs)
        .iter()
        .map(|r| r.mean_tput_bps_hz)
        .collect();
    let (quantized, exact) = means.split_at(8);
    json!({
        "bits": (1..=8).collect::<Vec<u32>>(),
        "quantized": quantized,
        "exact": exact[0],
        "trials": trials,
    })
    .to_string()
}
