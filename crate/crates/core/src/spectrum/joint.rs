use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    certified, eigensolve, low_spectrum, truncated_hamiltonian, NumericParams, TruncatedOperator, CERTIFICATE_EXTRA,
};
use crate::block::{j_catalog, jsquared_polynomial, Basis, ModelParams};
use crate::error::Result;
use crate::scalar::{rational_to_f64, Coeff, Rational};

/// Eigenvalue residual bound relative to `‖J‖_∞`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Relative tolerance of `μ² = Σ α_i E^i`.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Levels closer than this (relative) are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLevel {
    pub level: usize,
    pub energy: f64,
    pub mu: f64,
    /// `Σ α_i E^i`, which `μ²` should equal.
    pub predicted: f64,
    pub residual: f64,
    pub certified: bool,
    /// Size of the degenerate cluster the level belongs to.
    pub cluster: usize,
}

impl JointLevel {
    pub fn identity_holds(&self) -> bool {
        (self.mu * self.mu - self.predicted).abs() <= IDENTITY_TOL * (1.0 + self.predicted.abs())
    }

    pub fn negative_prediction(&self) -> bool {
        self.predicted < 0.0
    }

    pub fn sign(&self) -> i8 {
        if self.mu >= 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointReport {
    pub params: NumericParams,
    pub n: usize,
    pub j_norm: f64,
    pub levels: Vec<JointLevel>,
}

impl JointReport {
    pub fn residuals_ok(&self) -> bool {
        self.levels.iter().all(|l| l.residual <= RESIDUAL_TOL * self.j_norm)
    }

    pub fn identity_ok(&self) -> bool {
        self.levels.iter().all(JointLevel::identity_holds)
    }

    /// Level indices with `μ > 0` and `μ < 0`.
    pub fn sectors(&self) -> (Vec<usize>, Vec<usize>) {
        let (pos, neg): (Vec<&JointLevel>, Vec<&JointLevel>) = self.levels.iter().partition(|l| l.sign() > 0);
        (pos.iter().map(|l| l.level).collect(), neg.iter().map(|l| l.level).collect())
    }

    pub fn all_certified(&self) -> bool {
        self.levels.iter().all(|l| l.certified)
    }

    pub fn passed(&self) -> bool {
        let (pos, neg) = self.sectors();
        self.residuals_ok() && self.identity_ok() && self.all_certified() && !pos.is_empty() && !neg.is_empty()
    }
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Diagonalizes `H` and the catalog `J` at bias `eps` together on the lowest
/// `levels` eigenstates. Degenerate clusters are resolved by diagonalizing
/// `J` inside the cluster.
pub fn joint_eigen_check(g: f64, delta: f64, eps: &Rational, n: usize, levels: usize) -> Result<JointReport> {
    let p = NumericParams::new(g, delta, rational_to_f64(eps));
    let symbolic = ModelParams::symbolic(eps.clone());
    let j = TruncatedOperator::from_block(&j_catalog(&symbolic, Basis::Original)?, &p, n).matrix;
    let alphas: Vec<f64> = jsquared_polynomial(&symbolic)?.iter().map(|a| a.eval_f64(g, delta, p.eps)).collect();
    let h = truncated_hamiltonian(&p, n).matrix;
    let eig = eigensolve(&h)?;
    let levels = levels.min(eig.values.len());
    let reference = low_spectrum(&p, n + CERTIFICATE_EXTRA, levels)?;
    let j_norm = inf_norm(&j);

    let mut out = Vec::with_capacity(levels);
    let mut start = 0;
    while start < levels {
        let mut end = start + 1;
        while end < eig.values.len()
            && eig.values[end] - eig.values[end - 1] < DEGENERACY_TOL * (1.0 + eig.values[end].abs())
        {
            end += 1;
        }
        let v = eig.vectors.columns(start, end - start).into_owned();
        let restricted = v.transpose() * &j * &v;
        let inner = eigensolve(&((&restricted + restricted.transpose()) * 0.5))?;
        for (c, &mu) in inner.values.iter().enumerate() {
            let level = start + c;
            if level >= levels {
                break;
            }
            let w = &v * inner.vector(c);
            let residual = (&j * &w - &w * mu).norm();
            let energy = eig.values[level];
            let predicted = alphas.iter().rev().fold(0.0, |acc, a| acc * energy + a);
            out.push(JointLevel {
                level,
                energy,
                mu,
                predicted,
                residual,
                certified: certified(energy, reference[level]),
                cluster: end - start,
            });
        }
        start = end;
    }
    Ok(JointReport { params: p, n, j_norm, levels: out })
}
