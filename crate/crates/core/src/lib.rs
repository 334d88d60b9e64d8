//! Link-level simulation library for MIMO-OFDMA downlink opportunistic
//! scheduling and beamforming with reduced feedback.
//!
//! The library models a downlink in which a base station with `M` transmit
//! antennas serves `K` mobile terminals, each with `N` receive antennas,
//! over `Q` OFDMA subcarriers of a frequency-selective channel. Two rival
//! beamforming strategies are implemented end to end:
//!
//! * **Joint BS/MT beamforming** (`RF` schemes): the stacked time-domain
//!   channel is singular-value decomposed once, yielding a single
//!   subcarrier-independent beamforming matrix for the base station; each
//!   terminal finishes the per-subcarrier beamforming locally through a
//!   QR rotation and detects streams with a V-BLAST back-substitution.
//!   One codebook index covers all subcarriers.
//! * **Per-subcarrier eigen-beamforming** (`EB` schemes): the classical
//!   baseline that decomposes every subcarrier channel separately and
//!   feeds back one codebook index per subcarrier (or per cluster).
//!
//! Both come in per-subcarrier (`PS`) and per-cluster (`PC`) feedback
//! variants, giving the four schemes scheduled by [`sim`]. The modules
//! mirror the processing chain:
//!
//! * [`channel`] — frequency-selective Rayleigh channel generation and the
//!   partial-DFT view of each subcarrier.
//! * [`decomp`] — the two channel factorizations and their matrix kernels.
//! * [`codebook`] — shared unitary codebooks, alignment scoring, selection.
//! * [`feedback`] — per-terminal supportable-throughput reports for the
//!   four schemes.
//! * [`scheduler`] — base-station resource allocation and feedback
//!   accounting.
//! * [`vblast`] — precoding, receive rotation, and layered detection.
//! * [`sim`] — seeded Monte Carlo campaigns and parameter sweeps.

pub mod channel;
pub mod codebook;
pub mod decomp;
mod error;
pub mod feedback;
pub mod scheduler;
pub mod sim;
pub mod vblast;

pub use error::{Error, Result};

/// Complex scalar used throughout the library.
pub type C64 = nalgebra::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Derives an independent, reproducible random stream from a campaign
/// seed, a domain tag, and two index words.
///
/// Every consumer of randomness (channel draws, codebook entries, noise,
/// data symbols) gets its own stream keyed this way, so adding trials or
/// reordering work never perturbs other streams.
pub fn substream(seed: u64, domain: u64, a: u64, b: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    rand_chacha::ChaCha8Rng::from_seed(key)
}
