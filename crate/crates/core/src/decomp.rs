//! Channel factorizations for the two beamforming strategies.
//!
//! The joint strategy factors the *stacked time-domain* channel once:
//! a thin SVD of the `(N·L) × M` tap matrix yields a right factor `V`
//! that serves as the base-station beamforming matrix for **every**
//! subcarrier, while the left part is finished per subcarrier with a
//! cheap QR step at the terminal. The baseline strategy instead runs a
//! thin SVD independently on each `N × M` subcarrier response.
//!
//! Both factorizations are made deterministic by fixing the inherent
//! phase ambiguity: SVD right-factor columns are rotated so their
//! largest-modulus entry is real positive, and QR triangular factors
//! carry a real nonnegative diagonal. This keeps seeded simulations and
//! codebook lookups bit-reproducible.

use crate::channel::{subcarrier_selector, Channel};
use crate::{CMatrix, C64};

/// Thin singular value decomposition `A = U · diag(s) · V^H`.
///
/// For an `r × c` input with `k = min(r, c)`, returns `U` (`r × k`,
/// orthonormal columns), the singular values in descending order, and
/// `V` (`c × k`, orthonormal columns). Each column of `V` is rotated by
/// a unit phase so its largest-modulus entry is real positive, with the
/// matching column of `U` counter-rotated, which pins down an otherwise
/// arbitrary per-column phase.
pub fn thin_svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = a.clone().svd(true, true);
    let mut u = svd.u.expect("u requested");
    let mut v = svd.v_t.expect("v_t requested").adjoint();
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    for j in 0..v.ncols() {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..v.nrows() {
            let mag = v[(i, j)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let rot = (v[(best, j)] / best_mag).conj();
            for i in 0..v.nrows() {
                v[(i, j)] *= rot;
            }
            for i in 0..u.nrows() {
                u[(i, j)] *= rot;
            }
            v[(best, j)] = C64::new(best_mag, 0.0);
        }
    }
    (u, singular_values, v)
}

/// Thin QR decomposition `A = Q · R` for `r × c` with `r >= c`.
///
/// `Q` is `r × c` with orthonormal columns and `R` is `c × c` upper
/// triangular. The unit-phase ambiguity per column is resolved by
/// making the diagonal of `R` real and nonnegative.
pub fn thin_qr(a: &CMatrix) -> (CMatrix, CMatrix) {
    assert!(a.nrows() >= a.ncols(), "thin QR needs rows >= cols");
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..r.nrows() {
        let mag = r[(j, j)].norm();
        if mag > 0.0 {
            let phase = r[(j, j)] / mag;
            let rot = phase.conj();
            for c in j..r.ncols() {
                r[(j, c)] *= rot;
            }
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
            r[(j, j)] = C64::new(mag, 0.0);
        }
    }
    (q, r)
}

/// Output of the joint factorization of one terminal's stacked channel.
///
/// The stacked tap matrix decomposes as `taps = U · diag(s) · V^H`;
/// `bs_bfm = V` is the subcarrier-independent base-station beamforming
/// matrix and `stacked_left = U · diag(s)` is everything the terminal
/// needs to finish each subcarrier locally.
#[derive(Debug, Clone)]
pub struct JointFactors {
    /// `U · diag(s)`, shape `(N·L) × M`.
    pub stacked_left: CMatrix,
    /// Right singular factor `V`, an `M × M` unitary matrix.
    pub bs_bfm: CMatrix,
    /// Singular values of the stacked channel, descending.
    pub singular_values: Vec<f64>,
    pub num_rx: usize,
    pub num_taps: usize,
}

/// Per-subcarrier remainder of the joint factorization.
#[derive(Debug, Clone)]
pub struct SubcarrierFactors {
    /// `N × M` receive rotation with orthonormal columns.
    pub rotation: CMatrix,
    /// `M × M` upper triangular factor with real nonnegative diagonal.
    pub triangular: CMatrix,
}

impl SubcarrierFactors {
    /// Magnitudes of the triangular factor's diagonal, one per stream.
    pub fn diag_magnitudes(&self) -> Vec<f64> {
        (0..self.triangular.nrows())
            .map(|m| self.triangular[(m, m)].norm())
            .collect()
    }
}

/// Runs the joint factorization on a channel realization.
pub fn decompose_joint(ch: &Channel) -> JointFactors {
    let (u, singular_values, v) = thin_svd(&ch.taps);
    let mut stacked_left = u;
    for (j, &s) in singular_values.iter().enumerate() {
        for i in 0..stacked_left.nrows() {
            stacked_left[(i, j)] *= C64::new(s, 0.0);
        }
    }
    JointFactors {
        stacked_left,
        bs_bfm: v,
        singular_values,
        num_rx: ch.num_rx,
        num_taps: ch.num_taps,
    }
}

impl JointFactors {
    /// Finishes the factorization for subcarrier `q`: projects the
    /// stacked left factor onto the subcarrier's DFT row and QR-splits
    /// the result into the receive rotation and the triangular factor.
    pub fn subcarrier_factors(&self, q: usize, num_subcarriers: usize) -> SubcarrierFactors {
        let sel = subcarrier_selector(q, num_subcarriers, self.num_rx, self.num_taps);
        let projected = sel * &self.stacked_left;
        let (rotation, triangular) = thin_qr(&projected);
        SubcarrierFactors {
            rotation,
            triangular,
        }
    }

    /// Rebuilds the subcarrier frequency response from the factors:
    /// `rotation · triangular · bs_bfm^H`.
    pub fn reconstruct(&self, q: usize, num_subcarriers: usize) -> CMatrix {
        let f = self.subcarrier_factors(q, num_subcarriers);
        f.rotation * f.triangular * self.bs_bfm.adjoint()
    }
}

/// Output of the per-subcarrier eigen factorization `G = U·diag(s)·V^H`.
#[derive(Debug, Clone)]
pub struct EigenFactors {
    /// Left factor `U`, shape `N × M`, orthonormal columns.
    pub left: CMatrix,
    /// Singular values of the subcarrier response, descending.
    pub singular_values: Vec<f64>,
    /// Right factor `V`, an `M × M` unitary beamforming matrix.
    pub bs_bfm: CMatrix,
}

/// Runs the eigen factorization on one `N × M` subcarrier response.
pub fn decompose_eigen(g: &CMatrix) -> EigenFactors {
    let (left, singular_values, bs_bfm) = thin_svd(g);
    EigenFactors {
        left,
        singular_values,
        bs_bfm,
    }
}
