//! Frequency-selective MIMO channel generation.
//!
//! Each transmit/receive antenna pair sees an independent tapped delay
//! line with `L` taps and an exponentially decaying power profile,
//! normalized so the expected total channel energy is one. The taps for
//! one terminal are held in a single stacked matrix of shape
//! `(N·L) × M` — receive antennas outermost, delays innermost — so that
//! multiplying from the left by a per-subcarrier DFT selector produces
//! the `N × M` frequency response of that subcarrier. Everything
//! downstream (factorizations, feedback, detection) works off this one
//! realization.

use crate::{CMatrix, CVector, C64};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;

/// Per-tap variances of the exponential power delay profile.
///
/// Tap `l` has variance `lambda * exp(-l)` with `lambda` chosen so the
/// variances sum to one over `num_taps` taps.
pub fn tap_variances(num_taps: usize) -> Vec<f64> {
    let lambda = (1.0 - (-1.0f64).exp()) / (1.0 - (-(num_taps as f64)).exp());
    (0..num_taps)
        .map(|l| lambda * (-(l as f64)).exp())
        .collect()
}

/// Row vector of DFT coefficients `exp(-j 2 pi q l / Q)` for `l` in
/// `0..num_taps`, evaluated at subcarrier `q` of `num_subcarriers`.
pub fn dft_row(q: usize, num_subcarriers: usize, num_taps: usize) -> CVector {
    CVector::from_fn(num_taps, |l, _| {
        let angle = -TAU * (q as f64) * (l as f64) / (num_subcarriers as f64);
        C64::from_polar(1.0, angle)
    })
}

/// The `N × (N·L)` selector `I_N (kron) e_q^T` that maps a stacked tap
/// matrix to the frequency response of subcarrier `q`.
pub fn subcarrier_selector(
    q: usize,
    num_subcarriers: usize,
    num_rx: usize,
    num_taps: usize,
) -> CMatrix {
    let e = dft_row(q, num_subcarriers, num_taps);
    let mut sel = CMatrix::zeros(num_rx, num_rx * num_taps);
    for n in 0..num_rx {
        for l in 0..num_taps {
            sel[(n, n * num_taps + l)] = e[l];
        }
    }
    sel
}

/// One realization of the time-domain channel between the base station
/// and a single terminal.
#[derive(Debug, Clone)]
pub struct Channel {
    /// Stacked taps, shape `(N·L) × M`; row `n·L + l` holds tap `l` of
    /// receive antenna `n`.
    pub taps: CMatrix,
    pub num_rx: usize,
    pub num_tx: usize,
    pub num_taps: usize,
}

impl Channel {
    /// Draws an independent Rayleigh realization: tap `l` of every
    /// antenna pair is circularly symmetric complex Gaussian with
    /// variance [`tap_variances`]`[l]` (real and imaginary parts each
    /// normal with half that variance).
    ///
    /// Entries are consumed from `rng` in a fixed order (rows of the
    /// stacked matrix outermost, transmit antennas innermost, real part
    /// before imaginary), so a seeded generator reproduces the same
    /// realization.
    pub fn draw<R: Rng + ?Sized>(
        num_rx: usize,
        num_tx: usize,
        num_taps: usize,
        rng: &mut R,
    ) -> Self {
        let variances = tap_variances(num_taps);
        let normals: Vec<Normal<f64>> = variances
            .iter()
            .map(|&p| Normal::new(0.0, (p / 2.0).sqrt()).expect("valid std dev"))
            .collect();
        let mut taps = CMatrix::zeros(num_rx * num_taps, num_tx);
        for n in 0..num_rx {
            for l in 0..num_taps {
                for m in 0..num_tx {
                    let re = normals[l].sample(rng);
                    let im = normals[l].sample(rng);
                    taps[(n * num_taps + l, m)] = C64::new(re, im);
                }
            }
        }
        Channel {
            taps,
            num_rx,
            num_tx,
            num_taps,
        }
    }

    /// Frequency response `G_q` of subcarrier `q`, shape `N × M`,
    /// computed as the explicit DFT sum over taps.
    pub fn frequency_response(&self, q: usize, num_subcarriers: usize) -> CMatrix {
        let mut g = CMatrix::zeros(self.num_rx, self.num_tx);
        for n in 0..self.num_rx {
            for m in 0..self.num_tx {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..self.num_taps {
                    let angle = -TAU * (q as f64) * (l as f64) / (num_subcarriers as f64);
                    acc += self.taps[(n * self.num_taps + l, m)] * C64::from_polar(1.0, angle);
                }
                g[(n, m)] = acc;
            }
        }
        g
    }

    /// Frequency responses of all `num_subcarriers` subcarriers.
    pub fn all_frequency_responses(&self, num_subcarriers: usize) -> Vec<CMatrix> {
        (0..num_subcarriers)
            .map(|q| self.frequency_response(q, num_subcarriers))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn tap_variances_sum_to_one() {
        for num_taps in [1, 2, 3, 8, 16] {
            let p = tap_variances(num_taps);
            assert_eq!(p.len(), num_taps);
            let total: f64 = p.iter().sum();
            assert!((total - 1.0).abs() < TOL, "L={num_taps}: sum {total}");
        }
    }

    #[test]
    fn tap_variances_match_closed_form() {
        // Leading coefficients of the normalized exponential profile,
        // frozen from the geometric-sum closed form.
        let p8 = tap_variances(8);
        assert!((p8[0] - 0.6323326828120425).abs() < TOL);
        let p2 = tap_variances(2);
        assert!((p2[0] - 0.7310585786300049).abs() < TOL);
        // Successive taps decay by exactly e^-1.
        for w in p8.windows(2) {
            assert!((w[1] / w[0] - (-1.0f64).exp()).abs() < TOL);
        }
    }

    #[test]
    fn draw_is_deterministic_for_a_fixed_seed() {
        let mut rng_a = ChaCha8Rng::seed_from_u64(7);
        let mut rng_b = ChaCha8Rng::seed_from_u64(7);
        let ch_a = Channel::draw(2, 2, 8, &mut rng_a);
        let ch_b = Channel::draw(2, 2, 8, &mut rng_b);
        assert_eq!(ch_a.taps, ch_b.taps);
        let mut rng_c = ChaCha8Rng::seed_from_u64(8);
        let ch_c = Channel::draw(2, 2, 8, &mut rng_c);
        assert_ne!(ch_a.taps, ch_c.taps);
    }

    #[test]
    fn frequency_response_matches_selector_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = Channel::draw(2, 2, 8, &mut rng);
        for q in [0, 1, 63, 127] {
            let direct = ch.frequency_response(q, 128);
            let via_selector = subcarrier_selector(q, 128, 2, 8) * &ch.taps;
            assert_eq!(direct.shape(), (2, 2));
            let err = (&direct - &via_selector).norm();
            assert!(err < 1e-10, "q={q}: selector mismatch {err}");
        }
    }

    #[test]
    fn subcarrier_average_energy_equals_tap_energy() {
        // DFT energy identity: averaging |G_q|^2 over all subcarriers
        // recovers the tap energy exactly for each realization.
        let num_subcarriers = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = Channel::draw(2, 2, 8, &mut rng);
        let tap_energy = ch.taps.norm_squared();
        let mut freq_energy = 0.0;
        for q in 0..num_subcarriers {
            freq_energy += ch.frequency_response(q, num_subcarriers).norm_squared();
        }
        freq_energy /= num_subcarriers as f64;
        assert!(
            (freq_energy - tap_energy).abs() < 1e-9 * tap_energy,
            "freq {freq_energy} vs taps {tap_energy}"
        );
    }

    #[test]
    fn empirical_tap_statistics_match_profile() {
        let num_trials = 20_000;
        let variances = tap_variances(2);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut sum = [C64::new(0.0, 0.0); 2];
        let mut sum_sq = [0.0f64; 2];
        let mut sum_re_sq = [0.0f64; 2];
        for _ in 0..num_trials {
            let ch = Channel::draw(1, 1, 2, &mut rng);
            for l in 0..2 {
                let h = ch.taps[(l, 0)];
                sum[l] += h;
                sum_sq[l] += h.norm_sqr();
                sum_re_sq[l] += h.re * h.re;
            }
        }
        for l in 0..2 {
            let mean = sum[l] / num_trials as f64;
            let var = sum_sq[l] / num_trials as f64;
            let re_var = sum_re_sq[l] / num_trials as f64;
            assert!(mean.norm() < 0.02, "tap {l} mean {mean}");
            assert!(
                (var - variances[l]).abs() < 0.05 * variances[l],
                "tap {l} var {var} expected {}",
                variances[l]
            );
            assert!(
                (re_var - variances[l] / 2.0).abs() < 0.05 * variances[l],
                "tap {l} real-part var {re_var}"
            );
        }
    }

    #[test]
    fn distinct_taps_are_uncorrelated() {
        let num_trials = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut cross = C64::new(0.0, 0.0);
        for _ in 0..num_trials {
            let ch = Channel::draw(1, 2, 2, &mut rng);
            cross += ch.taps[(0, 0)] * ch.taps[(1, 1)].conj();
        }
        assert!((cross / num_trials as f64).norm() < 0.02);
    }

    #[test]
    fn dft_row_is_unit_modulus_and_starts_at_one() {
        let e = dft_row(5, 128, 8);
        assert_eq!(e.len(), 8);
        assert!((e[0] - C64::new(1.0, 0.0)).norm() < TOL);
        for l in 0..8 {
            assert!((e[l].norm() - 1.0).abs() < TOL);
        }
        // Subcarrier zero sees the plain sum of taps.
        let e0 = dft_row(0, 128, 8);
        for l in 0..8 {
            assert!((e0[l] - C64::new(1.0, 0.0)).norm() < TOL);
        }
    }
}
