//! Shared unitary codebooks and beamforming-matrix quantization.
//!
//! Base station and terminals hold the same codebook of `2^bits` random
//! unitary matrices, generated deterministically from a seed so both
//! ends can rebuild it without any exchange. Entry `d` depends only on
//! `(seed, d)`, never on the codebook size, so books of different bit
//! widths are nested prefixes of one another — growing the feedback
//! budget can only improve the best match.
//!
//! A terminal quantizes its ideal beamforming matrix `V` by scoring
//! every entry: the score rewards energy on the diagonal of the
//! alignment product `V^H · entry` and penalizes the off-diagonal
//! leakage of each row. An entry that leaves no measurable leakage in
//! any row is a perfect match and ranks above every finite score. A
//! codebook can also run in exact mode (no entries, emulating an
//! infinite-resolution book), where selection returns the ideal matrix
//! itself.

use crate::decomp::thin_qr;
use crate::{substream, CMatrix, Error, Result, C64};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

/// Largest supported codebook exponent (entries are capped at `2^20`).
pub const MAX_BITS: u32 = 20;

/// Row leakage below this floor counts as none at all.
pub const LEAKAGE_FLOOR: f64 = 1e-12;

/// Stand-in value for a perfect score inside cluster sums.
pub const PERFECT_SCORE_VALUE: f64 = 1e12;

const DOMAIN_CODEBOOK: u64 = 0xC0DEB00C;

/// Alignment quality of one codebook entry against an ideal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    /// Sum over rows of diagonal gain divided by off-diagonal row mass.
    Finite(f64),
    /// Every row's off-diagonal mass is below [`LEAKAGE_FLOOR`].
    Perfect,
}

impl Score {
    /// Strict "better than": perfect beats finite, finite compares by
    /// value, equal scores do not beat each other (so a scan in index
    /// order keeps the lowest index on ties).
    pub fn beats(&self, other: &Score) -> bool {
        match (self, other) {
            (Score::Perfect, Score::Perfect) => false,
            (Score::Perfect, Score::Finite(_)) => true,
            (Score::Finite(_), Score::Perfect) => false,
            (Score::Finite(a), Score::Finite(b)) => a > b,
        }
    }

    /// Value this score contributes to a cluster-wide sum.
    pub fn cluster_term(&self) -> f64 {
        match self {
            Score::Finite(x) => *x,
            Score::Perfect => PERFECT_SCORE_VALUE,
        }
    }
}

/// Element-wise squared magnitudes of the alignment product
/// `v_exact^H · candidate`.
///
/// For unitary inputs every row and column sums to one; the diagonal
/// entries are the per-stream gains a quantized beamformer retains.
pub fn alignment_gains(v_exact: &CMatrix, candidate: &CMatrix) -> DMatrix<f64> {
    let prod = v_exact.adjoint() * candidate;
    DMatrix::from_fn(prod.nrows(), prod.ncols(), |i, j| prod[(i, j)].norm_sqr())
}

/// Diagonal of [`alignment_gains`].
pub fn diag_alignment_gains(v_exact: &CMatrix, candidate: &CMatrix) -> Vec<f64> {
    let g = alignment_gains(v_exact, candidate);
    (0..g.nrows().min(g.ncols())).map(|i| g[(i, i)]).collect()
}

/// Scores a candidate entry against the ideal matrix.
///
/// Each row contributes its diagonal gain divided by its off-diagonal
/// mass (floored at [`LEAKAGE_FLOOR`]); if every row's mass is under
/// the floor the result is [`Score::Perfect`]. Panics if the inputs are
/// not unitary (gain rows must sum to one within `1e-6`).
pub fn alignment_score(v_exact: &CMatrix, candidate: &CMatrix) -> Score {
    let g = alignment_gains(v_exact, candidate);
    let mut total = 0.0;
    let mut all_clean = true;
    for i in 0..g.nrows() {
        let mut leak = 0.0f64;
        for j in 0..g.ncols() {
            if j != i {
                leak += g[(i, j)];
            }
        }
        let row_sum = leak + g[(i, i)];
        assert!(
            (row_sum - 1.0).abs() < 1e-6,
            "alignment inputs must be unitary (row {i} mass {row_sum})"
        );
        if leak >= LEAKAGE_FLOOR {
            all_clean = false;
        }
        total += g[(i, i)] / leak.max(LEAKAGE_FLOOR);
    }
    if all_clean {
        Score::Perfect
    } else {
        Score::Finite(total)
    }
}

/// A quantization decision: the entry index to feed back and the matrix
/// both ends will use.
#[derive(Debug, Clone)]
pub struct BfmChoice {
    pub index: usize,
    pub matrix: CMatrix,
}

/// Deterministic codebook of `2^bits` Haar-random unitary matrices, or
/// an exact-mode stand-in for an infinite-resolution book.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub bits: u32,
    pub dim: usize,
    pub seed: u64,
    pub exact_mode: bool,
    entries: Vec<CMatrix>,
}

impl Codebook {
    /// Builds the codebook for the given exponent, matrix dimension,
    /// and seed. Fails if `bits` exceeds [`MAX_BITS`] or `dim` is zero.
    pub fn generate(bits: u32, dim: usize, seed: u64) -> Result<Self> {
        if bits > MAX_BITS {
            return Err(Error::InvalidConfig(format!(
                "codebook bits {bits} exceeds the supported maximum {MAX_BITS}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "codebook matrix dimension must be positive".into(),
            ));
        }
        let entries = (0..1usize << bits)
            .map(|d| haar_unitary(dim, seed, d as u64))
            .collect();
        Ok(Codebook {
            bits,
            dim,
            seed,
            exact_mode: false,
            entries,
        })
    }

    /// Exact-mode book: selection hands back the ideal matrix itself,
    /// emulating unquantized feedback.
    pub fn exact(dim: usize) -> Self {
        Codebook {
            bits: 0,
            dim,
            seed: 0,
            exact_mode: true,
            entries: Vec::new(),
        }
    }

    /// Rebuilds a codebook from explicit entries (used by file import
    /// and by synthetic test books). Checks the entry count against
    /// `bits`, the matrix shapes, and unitarity within `1e-10`.
    pub fn from_parts(bits: u32, dim: usize, seed: u64, entries: Vec<CMatrix>) -> Result<Self> {
        if bits > MAX_BITS {
            return Err(Error::InvalidConfig(format!(
                "codebook bits {bits} exceeds the supported maximum {MAX_BITS}"
            )));
        }
        if entries.len() != 1usize << bits {
            return Err(Error::InvalidConfig(format!(
                "expected {} entries for a {bits}-bit codebook, found {}",
                1usize << bits,
                entries.len()
            )));
        }
        for (d, e) in entries.iter().enumerate() {
            if e.shape() != (dim, dim) {
                return Err(Error::InvalidConfig(format!(
                    "entry {d} has shape {:?}, expected ({dim}, {dim})",
                    e.shape()
                )));
            }
            let residual = (e.adjoint() * e - CMatrix::identity(dim, dim)).norm();
            if residual > 1e-10 {
                return Err(Error::InvalidConfig(format!(
                    "entry {d} is not unitary (residual {residual:.3e})"
                )));
            }
        }
        Ok(Codebook {
            bits,
            dim,
            seed,
            exact_mode: false,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, d: usize) -> &CMatrix {
        &self.entries[d]
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    /// Picks the best-scoring entry for one ideal matrix (lowest index
    /// on ties). In exact mode the ideal matrix itself is returned
    /// under a virtual index of zero.
    pub fn select(&self, v_exact: &CMatrix) -> BfmChoice {
        if self.exact_mode {
            return BfmChoice {
                index: 0,
                matrix: v_exact.clone(),
            };
        }
        let mut best_index = 0;
        let mut best = alignment_score(v_exact, &self.entries[0]);
        for d in 1..self.entries.len() {
            let score = alignment_score(v_exact, &self.entries[d]);
            if score.beats(&best) {
                best = score;
                best_index = d;
            }
        }
        BfmChoice {
            index: best_index,
            matrix: self.entries[best_index].clone(),
        }
    }

    /// Picks one entry for a whole cluster by maximizing the summed
    /// score over the cluster's ideal matrices (lowest index on ties).
    /// In exact mode the cluster adopts the first subcarrier's ideal
    /// matrix.
    pub fn select_for_cluster(&self, v_exacts: &[CMatrix]) -> BfmChoice {
        assert!(!v_exacts.is_empty(), "cluster must contain subcarriers");
        if self.exact_mode {
            return BfmChoice {
                index: 0,
                matrix: v_exacts[0].clone(),
            };
        }
        let mut best_index = 0;
        let mut best_total = f64::NEG_INFINITY;
        for (d, entry) in self.entries.iter().enumerate() {
            let total: f64 = v_exacts
                .iter()
                .map(|v| alignment_score(v, entry).cluster_term())
                .sum();
            if total > best_total {
                best_total = total;
                best_index = d;
            }
        }
        BfmChoice {
            index: best_index,
            matrix: self.entries[best_index].clone(),
        }
    }
}

fn haar_unitary(dim: usize, seed: u64, index: u64) -> CMatrix {
    let mut rng = substream(seed, DOMAIN_CODEBOOK, index, 0);
    let mut a = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            a[(i, j)] = C64::new(re, im);
        }
    }
    thin_qr(&a).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_unitary(m: &CMatrix, tol: f64) {
        let eye = CMatrix::identity(m.nrows(), m.ncols());
        let err = (m.adjoint() * m - &eye).norm();
        assert!(err < tol, "not unitary: residual {err}");
    }

    #[test]
    fn generated_entries_are_unitary_and_counted() {
        let cb = Codebook::generate(4, 2, 99).unwrap();
        assert_eq!(cb.len(), 16);
        assert!(!cb.exact_mode);
        for d in 0..cb.len() {
            assert_unitary(cb.entry(d), 1e-10);
        }
        assert_eq!(Codebook::generate(0, 2, 99).unwrap().len(), 1);
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let a = Codebook::generate(3, 2, 5).unwrap();
        let b = Codebook::generate(3, 2, 5).unwrap();
        let c = Codebook::generate(3, 2, 6).unwrap();
        for d in 0..a.len() {
            assert_eq!(a.entry(d), b.entry(d));
        }
        assert_ne!(a.entry(0), c.entry(0));
    }

    #[test]
    fn smaller_books_are_prefixes_of_larger_ones() {
        let small = Codebook::generate(3, 2, 7).unwrap();
        let large = Codebook::generate(5, 2, 7).unwrap();
        for d in 0..small.len() {
            assert_eq!(small.entry(d), large.entry(d), "entry {d} differs");
        }
    }

    #[test]
    fn oversized_exponent_is_rejected() {
        assert!(Codebook::generate(MAX_BITS, 1, 0).is_ok());
        assert!(Codebook::generate(MAX_BITS + 1, 2, 0).is_err());
        assert!(Codebook::generate(0, 0, 0).is_err());
    }

    #[test]
    fn alignment_gains_are_doubly_stochastic_and_bounded() {
        let cb = Codebook::generate(2, 3, 11).unwrap();
        let g = alignment_gains(cb.entry(0), cb.entry(3));
        for i in 0..3 {
            let row: f64 = (0..3).map(|j| g[(i, j)]).sum();
            let col: f64 = (0..3).map(|j| g[(j, i)]).sum();
            assert!((row - 1.0).abs() < 1e-10, "row {i} sums to {row}");
            assert!((col - 1.0).abs() < 1e-10, "col {i} sums to {col}");
            for j in 0..3 {
                assert!((0.0..=1.0 + 1e-12).contains(&g[(i, j)]));
            }
        }
    }

    #[test]
    fn score_matches_direct_evaluation() {
        let cb = Codebook::generate(3, 2, 13).unwrap();
        let v = cb.entry(1);
        let cand = cb.entry(6);
        let g = alignment_gains(v, cand);
        let mut expected = 0.0;
        for m in 0..2 {
            let off: f64 = (0..2).filter(|&j| j != m).map(|j| g[(m, j)]).sum();
            expected += g[(m, m)] / off.max(LEAKAGE_FLOOR);
        }
        match alignment_score(v, cand) {
            Score::Finite(x) => assert!(
                (x - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "score {x} vs direct {expected}"
            ),
            Score::Perfect => panic!("independent Haar draws should not align perfectly"),
        }
    }

    #[test]
    fn matrix_scores_perfect_against_itself() {
        let cb = Codebook::generate(2, 2, 3).unwrap();
        assert_eq!(alignment_score(cb.entry(1), cb.entry(1)), Score::Perfect);
    }

    #[test]
    fn fully_misaligned_pair_scores_zero() {
        let v = CMatrix::identity(2, 2);
        let mut swap = CMatrix::zeros(2, 2);
        swap[(0, 1)] = C64::new(1.0, 0.0);
        swap[(1, 0)] = C64::new(1.0, 0.0);
        assert_eq!(alignment_score(&v, &swap), Score::Finite(0.0));
    }

    #[test]
    #[should_panic(expected = "unitary")]
    fn non_unitary_input_is_rejected() {
        let v = CMatrix::identity(2, 2);
        let bad = &v * C64::new(2.0, 0.0);
        alignment_score(&v, &bad);
    }

    #[test]
    fn select_finds_an_exact_member() {
        let cb = Codebook::generate(4, 2, 21).unwrap();
        for d in [0, 7, 15] {
            let choice = cb.select(cb.entry(d));
            assert_eq!(choice.index, d);
            assert_eq!(&choice.matrix, cb.entry(d));
        }
    }

    #[test]
    fn select_matches_exhaustive_argmax() {
        let cb = Codebook::generate(4, 2, 33).unwrap();
        let target = Codebook::generate(0, 2, 77).unwrap().entry(0).clone();
        let choice = cb.select(&target);
        let mut best = (0, alignment_score(&target, cb.entry(0)));
        for d in 1..cb.len() {
            let s = alignment_score(&target, cb.entry(d));
            if s.beats(&best.1) {
                best = (d, s);
            }
        }
        assert_eq!(choice.index, best.0);
    }

    #[test]
    fn cluster_selection_matches_exhaustive_sum_score() {
        let cb = Codebook::generate(3, 2, 41).unwrap();
        let vs: Vec<CMatrix> = (0..4)
            .map(|i| Codebook::generate(2, 2, 100 + i).unwrap().entry(0).clone())
            .collect();
        let choice = cb.select_for_cluster(&vs);
        let mut best_d = 0;
        let mut best_total = f64::NEG_INFINITY;
        for d in 0..cb.len() {
            let total: f64 = vs
                .iter()
                .map(|v| alignment_score(v, cb.entry(d)).cluster_term())
                .sum();
            if total > best_total {
                best_total = total;
                best_d = d;
            }
        }
        assert_eq!(choice.index, best_d);
        // A one-subcarrier cluster degenerates to plain selection.
        let single = cb.select_for_cluster(&vs[..1]);
        assert_eq!(single.index, cb.select(&vs[0]).index);
    }

    #[test]
    fn ties_resolve_to_the_lowest_index() {
        let shared = Codebook::generate(0, 2, 1).unwrap().entry(0).clone();
        let cb = Codebook {
            bits: 1,
            dim: 2,
            seed: 1,
            exact_mode: false,
            entries: vec![shared.clone(), shared.clone()],
        };
        assert_eq!(cb.select(&shared).index, 0);
        assert_eq!(cb.select_for_cluster(&[shared.clone(), shared]).index, 0);
    }

    #[test]
    fn score_ordering_prefers_perfect() {
        assert!(Score::Perfect.beats(&Score::Finite(1e300)));
        assert!(!Score::Finite(1e300).beats(&Score::Perfect));
        assert!(!Score::Perfect.beats(&Score::Perfect));
        assert!(Score::Finite(2.0).beats(&Score::Finite(1.0)));
        assert!(!Score::Finite(1.0).beats(&Score::Finite(1.0)));
        assert_eq!(Score::Perfect.cluster_term(), PERFECT_SCORE_VALUE);
    }

    #[test]
    fn exact_mode_hands_back_the_ideal_matrix() {
        let cb = Codebook::exact(2);
        assert!(cb.exact_mode);
        assert_eq!(cb.len(), 0);
        let v = Codebook::generate(0, 2, 9).unwrap().entry(0).clone();
        let choice = cb.select(&v);
        assert_eq!(choice.index, 0);
        assert_eq!(choice.matrix, v);
        let w = Codebook::generate(0, 2, 10).unwrap().entry(0).clone();
        let cluster = cb.select_for_cluster(&[v.clone(), w]);
        assert_eq!(cluster.matrix, v);
    }

    #[test]
    fn growing_the_book_never_lowers_the_best_score() {
        let target = Codebook::generate(0, 2, 31_000).unwrap().entry(0).clone();
        let mut prev = f64::NEG_INFINITY;
        for bits in 0..=6 {
            let cb = Codebook::generate(bits, 2, 31).unwrap();
            let choice = cb.select(&target);
            let score = alignment_score(&target, &choice.matrix).cluster_term();
            assert!(
                score >= prev,
                "bits {bits}: best score {score} dropped below {prev}"
            );
            prev = score;
        }
    }
}
