//! Numerical spectra of the truncated model.

mod discover;
mod eigen;
mod joint;
mod scan;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::block::{symbolic_hamiltonian, BlockOp};
use crate::scalar::Coeff;

pub use discover::{
    discover_symmetry, fit_jsquared_poly, CoeffLabel, DiscoveryResult, FitResult, SVD_GAP, SVD_THRESHOLD,
};
pub use eigen::{eigensolve, eigenvalues, Eigen, OFF_DIAGONAL_TOL, SYMMETRY_TOL};
pub use joint::{joint_eigen_check, JointLevel, JointReport};
pub use scan::{crossing_scan, PairGap, ScanConfig, ScanResult};

/// Extra Fock levels used by the convergence certificate.
pub const CERTIFICATE_EXTRA: usize = 10;

/// Relative agreement required between the two truncations.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Floating-point model parameters (`ω = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericParams {
    pub g: f64,
    pub delta: f64,
    pub eps: f64,
}

impl NumericParams {
    pub fn new(g: f64, delta: f64, eps: f64) -> Self {
        Self { g, delta, eps }
    }
}

/// An operator restricted to Fock levels `0..=n` in both qubit blocks.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub n: usize,
    pub matrix: DMatrix<f64>,
}

impl TruncatedOperator {
    pub fn from_block<C: Coeff>(op: &BlockOp<C>, p: &NumericParams, n: usize) -> Self {
        Self { n, matrix: op.fock_matrix_at(n, p.g, p.delta, p.eps) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row and column indices with Fock level at most `level`.
    pub fn interior_indices(&self, level: usize) -> Vec<usize> {
        interior_indices(self.n, level)
    }
}

pub(crate) fn interior_indices(n: usize, level: usize) -> Vec<usize> {
    let level = level.min(n);
    (0..2).flat_map(|q| (0..=level).map(move |k| q * (n + 1) + k)).collect()
}

pub(crate) fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// `H` on Fock levels `0..=n`, dimension `2(n+1)`.
pub fn truncated_hamiltonian(p: &NumericParams, n: usize) -> TruncatedOperator {
    TruncatedOperator::from_block(&symbolic_hamiltonian(), p, n)
}

/// Lowest `levels` eigenvalues of the truncated Hamiltonian.
pub fn low_spectrum(p: &NumericParams, n: usize, levels: usize) -> crate::Result<Vec<f64>> {
    let mut e = eigenvalues(&truncated_hamiltonian(p, n).matrix)?;
    e.truncate(levels);
    Ok(e)
}

fn certified(a: f64, b: f64) -> bool {
    (a - b).abs() < CERTIFICATE_TOL * (1.0 + a.abs())
}

/// Whether each of the lowest `levels` eigenvalues agrees between
/// truncations `n` and `n + 10`.
pub fn convergence_certificate(p: &NumericParams, n: usize, levels: usize) -> crate::Result<Vec<bool>> {
    let lo = low_spectrum(p, n, levels)?;
    let hi = low_spectrum(p, n + CERTIFICATE_EXTRA, levels)?;
    Ok(lo.iter().zip(&hi).map(|(a, b)| certified(*a, *b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_spectrum() {
        // g = 0, ε = 0: levels k ± Δ
        let p = NumericParams::new(0.0, 0.3, 0.0);
        let e = low_spectrum(&p, 10, 4).unwrap();
        let want = [-0.3, 0.3, 0.7, 1.3];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn displaced_oscillator_limit() {
        // Δ = 0, ε = 0: E = k - g² in each σ_x sector
        let g = 0.6;
        let e = low_spectrum(&NumericParams::new(g, 0.0, 0.0), 60, 4).unwrap();
        let want = [-g * g, -g * g, 1.0 - g * g, 1.0 - g * g];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn certificate_flags_short_truncations() {
        let p = NumericParams::new(1.0, 0.7, 0.5);
        assert!(convergence_certificate(&p, 60, 8).unwrap().iter().all(|&c| c));
        assert!(!convergence_certificate(&p, 3, 4).unwrap().iter().all(|&c| c));
    }

    #[test]
    fn interior_indices_cover_both_blocks() {
        assert_eq!(interior_indices(4, 1), vec![0, 1, 5, 6]);
    }
}
