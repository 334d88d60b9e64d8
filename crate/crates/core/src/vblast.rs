//! Precoding, receive rotation, and layered detection.
//!
//! This is the terminal-side signal path that justifies treating the
//! link as parallel scalar channels: the base station precodes the
//! symbol vector with the (quantized) beamforming matrix, the terminal
//! rotates its observation with the orthonormal left factor of its
//! channel factorization, and the resulting triangular system is solved
//! stream by stream with hard-decision back-substitution, last stream
//! first. Detection is a validation path — throughput numbers always
//! come from the analytic formulas, never from counting symbol errors.

use crate::{CMatrix, CVector, Error, Result, C64};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A unit-mean-energy symbol alphabet.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub name: String,
    points: Vec<C64>,
}

impl Constellation {
    /// QPSK: the four symbols `(±1 ± j)/√2`, each of unit energy.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Constellation {
            name: "QPSK".to_string(),
            points: vec![
                C64::new(a, a),
                C64::new(-a, a),
                C64::new(-a, -a),
                C64::new(a, -a),
            ],
        }
    }

    /// Builds a custom alphabet; the mean symbol energy must be one.
    pub fn new(name: impl Into<String>, points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("constellation has no points".into()));
        }
        let mean_energy: f64 =
            points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (mean_energy - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "constellation mean energy {mean_energy} is not 1"
            )));
        }
        Ok(Constellation {
            name: name.into(),
            points,
        })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Index of the point nearest to `z` (lowest index on ties).
    pub fn nearest(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Hard decisions for one subcarrier.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Detected constellation index per stream.
    pub symbol_indices: Vec<usize>,
    /// The rotated observation the decisions were made on.
    pub observation: CVector,
}

/// Applies the beamforming matrix to a symbol vector: `x = Vd · s`.
pub fn precode(s: &CVector, vd: &CMatrix) -> CVector {
    vd * s
}

/// Receive rotation for the joint factorization: `r = Qf^H · y`.
pub fn rf_receive(y: &CVector, rotation: &CMatrix) -> CVector {
    rotation.adjoint() * y
}

/// Receive rotation for the eigen factorization: `r' = U^H · y`.
pub fn eb_receive(y: &CVector, left: &CMatrix) -> CVector {
    left.adjoint() * y
}

/// Layered detection on a triangular effective channel: for stream
/// `m = M..1`, cancel already-decided streams, divide by the diagonal
/// gain, and slice to the nearest constellation point.
pub fn vblast_detect(
    r: &CVector,
    triangular: &CMatrix,
    constellation: &Constellation,
) -> Result<DetectionResult> {
    let num_streams = triangular.nrows();
    assert_eq!(
        triangular.ncols(),
        num_streams,
        "triangular factor must be square"
    );
    assert_eq!(
        r.len(),
        num_streams,
        "observation length must match stream count"
    );
    let mut symbol_indices = vec![0usize; num_streams];
    let mut decided = vec![C64::new(0.0, 0.0); num_streams];
    for m in (0..num_streams).rev() {
        let diag = triangular[(m, m)];
        if diag.norm() == 0.0 {
            return Err(Error::SingularStream(m));
        }
        let mut z = r[m];
        for j in m + 1..num_streams {
            z -= triangular[(m, j)] * decided[j];
        }
        z /= diag;
        let idx = constellation.nearest(z);
        symbol_indices[m] = idx;
        decided[m] = constellation.points[idx];
    }
    Ok(DetectionResult {
        symbol_indices,
        observation: r.clone(),
    })
}

/// Draws a circularly symmetric complex Gaussian vector with unit
/// per-entry variance (real and imaginary parts each `N(0, 1/2)`).
pub fn complex_awgn<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    let half = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std dev");
    CVector::from_fn(len, |_, _| C64::new(half.sample(rng), half.sample(rng)))
}
