use nalgebra::{DMatrix, DVector, SVD};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{interior_indices, submatrix, truncated_hamiltonian, NumericParams, TruncatedOperator};
use crate::block::{build_hamiltonian, j_catalog, recurrence_check, symbolic_hamiltonian, Basis, BlockOp, ModelParams};
use crate::boson::{GradedOp, NormalOp};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, EpsScalar, Rational, Scalar};

/// Singular values below this fraction of the largest span the nullspace.
pub const SVD_THRESHOLD: f64 = 1e-9;

/// Required ratio between the smallest kept and largest discarded singular value.
pub const SVD_GAP: f64 = 1e3;

/// Relative agreement required for a catalog match.
const CATALOG_TOL: f64 = 1e-9;

/// Largest denominator tried when rounding coefficients.
const MAX_DENOMINATOR: i64 = 100_000;

/// Rounding window relative to the largest coefficient. About `tol · Q²`
/// fractions with denominator below `Q` fall in any window, so this must stay
/// far below `1 / MAX_DENOMINATOR²`.
const ROUNDING_TOL: f64 = 1e-12;

/// Coefficient of `P (a†)^m a^n` in entry `(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffLabel {
    pub row: usize,
    pub col: usize,
    pub m: u32,
    pub n: u32,
}

impl CoeffLabel {
    fn basis_op<C: Coeff>(&self) -> BlockOp<C> {
        let mut e = [GradedOp::zero(), GradedOp::zero(), GradedOp::zero(), GradedOp::zero()];
        e[2 * self.row + self.col] = GradedOp::odd(NormalOp::monomial(self.m, self.n, C::one()));
        let [a, b, c, d] = e;
        BlockOp::new(a, b, c, d)
    }
}

fn labels(degree: u32) -> Vec<CoeffLabel> {
    let mut out = Vec::new();
    for row in 0..2 {
        for col in 0..2 {
            for total in 0..=degree {
                for m in (0..=total).rev() {
                    out.push(CoeffLabel { row, col, m, n: total - m });
                }
            }
        }
    }
    out
}

fn assemble(labels: &[CoeffLabel], coeffs: &[Rational]) -> BlockOp<Scalar> {
    labels
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .fold(BlockOp::zero(), |acc, (l, c)| acc.plus(&l.basis_op::<Scalar>().scale_rational(c)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscoveryResult {
    pub params: NumericParams,
    pub degree: u32,
    pub n: usize,
    /// Highest Fock level kept in the constraint block.
    pub interior: usize,
    pub labels: Vec<CoeffLabel>,
    /// Ascending.
    pub singular_values: Vec<f64>,
    pub nullspace_dimension: usize,
    /// Smallest kept over largest discarded singular value.
    pub gap_ratio: f64,
    /// The gap check failed; the dimension is not trustworthy.
    pub ambiguous: bool,
    /// Nullspace vectors, each scaled to unit largest magnitude.
    pub vectors: Vec<Vec<f64>>,
    /// Distance of the catalog operator from the nullspace, relative.
    pub catalog_deviation: Option<f64>,
    /// Exact commutator and recurrence check of rounded coefficients, when
    /// every parameter and coefficient is a small rational.
    pub exact_verified: Option<bool>,
    pub exact_operator: Option<BlockOp<Scalar>>,
}

impl DiscoveryResult {
    /// Nullspace vector `k` as an operator; coefficients are the exact
    /// binary values of the floats.
    pub fn operator(&self, k: usize) -> BlockOp<Scalar> {
        let coeffs: Vec<Rational> =
            self.vectors[k].iter().map(|&x| Rational::from_float(x).unwrap_or_else(Rational::zero)).collect();
        assemble(&self.labels, &coeffs)
    }

    /// The single nullspace vector rescaled by the least-squares factor that
    /// best matches the catalog operator.
    pub fn catalog_normalized(&self) -> Option<Vec<f64>> {
        let [v] = self.vectors.as_slice() else { return None };
        let c = catalog_coefficients(&self.params, &self.labels)?;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let alpha = dot(v, &c) / dot(v, v);
        Some(v.iter().map(|x| alpha * x).collect())
    }

    /// `‖α v - c‖ / ‖c‖` for the catalog-normalized vector `α v`.
    pub fn catalog_relative_error(&self) -> Option<f64> {
        let v = self.catalog_normalized()?;
        let c = catalog_coefficients(&self.params, &self.labels)?;
        let norm = |x: &mut dyn Iterator<Item = f64>| x.map(|t| t * t).sum::<f64>().sqrt();
        Some(norm(&mut v.iter().zip(&c).map(|(a, b)| a - b)) / norm(&mut c.iter().copied()))
    }

    pub fn matches_catalog(&self) -> bool {
        self.catalog_deviation.is_some_and(|d| d <= CATALOG_TOL)
    }
}

/// Smallest truncation accepted for an ansatz of the given degree.
pub fn minimum_truncation(degree: u32) -> usize {
    3 * degree as usize + 4
}

/// Numerically finds every operator `P X` with `X` a 2×2 matrix of normal
/// ordered polynomials of degree at most `degree` that commutes with `H`.
///
/// The commutator of each basis element with `H` is formed exactly and
/// evaluated on Fock levels `0..=n - degree - 2`, where truncation does not
/// reach. The nullspace of the stacked matrix is read off its SVD.
pub fn discover_symmetry(p: &NumericParams, degree: u32, n: usize) -> Result<DiscoveryResult> {
    let min = minimum_truncation(degree);
    if n < min {
        return Err(Error::TruncationTooSmall { n, degree: degree as usize, min });
    }
    let interior = n - degree as usize - 2;
    let labels = labels(degree);
    let h = symbolic_hamiltonian();
    let idx = interior_indices(n, interior);
    let blocks: Vec<DMatrix<f64>> = labels
        .iter()
        .map(|l| {
            let c = l.basis_op::<EpsScalar>().commutator(&h);
            submatrix(&c.fock_matrix_at(n, p.g, p.delta, p.eps), &idx)
        })
        .collect();
    let rows = idx.len() * idx.len();
    let mut a = DMatrix::<f64>::zeros(rows, labels.len());
    let mut scale = vec![1.0; labels.len()];
    for (c, b) in blocks.iter().enumerate() {
        let norm = b.norm();
        scale[c] = if norm > 0.0 { norm } else { 1.0 };
        for (r, x) in b.iter().enumerate() {
            a[(r, c)] = x / scale[c];
        }
    }
    let svd = SVD::new(a, false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    // columns beyond the row count are automatically null
    let extra = labels.len().saturating_sub(sv.len());
    let smax = sv.last().copied().unwrap_or(0.0);
    let null: Vec<usize> = order.iter().copied().filter(|&i| svd.singular_values[i] < SVD_THRESHOLD * smax).collect();
    let dim = null.len() + extra;
    let kept_min = sv.get(null.len()).copied().unwrap_or(f64::INFINITY);
    let discarded_max = if null.is_empty() { SVD_THRESHOLD * smax } else { sv[null.len() - 1] };
    let gap_ratio = kept_min / discarded_max.max(f64::MIN_POSITIVE);

    let scaled: Vec<DVector<f64>> = null.iter().map(|&i| v_t.row(i).transpose()).collect();
    let vectors: Vec<Vec<f64>> = scaled
        .iter()
        .map(|v| {
            let raw: Vec<f64> = v.iter().zip(&scale).map(|(x, s)| x / s).collect();
            let big = raw.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            raw.iter().map(|x| x / big).collect()
        })
        .collect();

    let catalog_deviation = catalog_deviation(p, &labels, &scaled, &scale);
    let (exact_verified, exact_operator) = match vectors.as_slice() {
        [v] => verify_exact(p, &labels, v, degree),
        _ => (None, None),
    };
    Ok(DiscoveryResult {
        params: *p,
        degree,
        n,
        interior,
        labels,
        singular_values: sv,
        nullspace_dimension: dim,
        gap_ratio,
        ambiguous: gap_ratio < SVD_GAP,
        vectors,
        catalog_deviation,
        exact_verified,
        exact_operator,
    })
}

fn catalog_bias(eps: f64) -> Option<Rational> {
    crate::block::catalog_biases().into_iter().find(|r| (crate::scalar::rational_to_f64(r) - eps).abs() < 1e-12)
}

/// Catalog coefficients in the order of `labels`, if the bias has an entry.
fn catalog_coefficients(p: &NumericParams, labels: &[CoeffLabel]) -> Option<Vec<f64>> {
    let eps = catalog_bias(p.eps)?;
    let j = j_catalog(&ModelParams::symbolic(eps), Basis::Original).ok()?;
    Some(
        labels
            .iter()
            .map(|l| {
                let e = j.entry(l.row, l.col);
                if e.grade().bit() == 1 {
                    e.body().coeff(l.m, l.n).map_or(0.0, |x| x.eval_f64(p.g, p.delta, p.eps))
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// `‖c - Π c‖ / ‖c‖` in the column-scaled coordinates, `Π` the orthogonal
/// projector onto the nullspace.
fn catalog_deviation(p: &NumericParams, labels: &[CoeffLabel], null: &[DVector<f64>], scale: &[f64]) -> Option<f64> {
    let c = catalog_coefficients(p, labels)?;
    let c = DVector::from_iterator(labels.len(), c.iter().zip(scale).map(|(v, s)| v * s));
    let mut r = c.clone();
    for v in null {
        r -= v * v.dot(&c);
    }
    Some(r.norm() / c.norm())
}

/// Continued-fraction approximation with bounded denominator.
fn small_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Rounds a single nullspace vector to small rationals and checks the
/// result exactly. Each coefficient is tried as the unit normalizer.
fn verify_exact(
    p: &NumericParams,
    labels: &[CoeffLabel],
    v: &[f64],
    degree: u32,
) -> (Option<bool>, Option<BlockOp<Scalar>>) {
    let param = |x: f64| small_rational(x, 1000, 1e-14 * x.abs().max(1.0));
    let (Some(g), Some(d), Some(e)) = (param(p.g), param(p.delta), param(p.eps)) else {
        return (None, None);
    };
    let model = ModelParams::numeric(g, d, e);
    let h = build_hamiltonian(&model);
    let mut rounded_any = false;
    for &pivot in v.iter().filter(|x| x.abs() > 1e-6) {
        let ratios: Vec<f64> = v.iter().map(|x| x / pivot).collect();
        let tol = ROUNDING_TOL * ratios.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let coeffs: Option<Vec<Rational>> = ratios
            .iter()
            .map(|&x| if x.abs() <= tol { Some(Rational::zero()) } else { small_rational(x, MAX_DENOMINATOR, tol) })
            .collect();
        let Some(coeffs) = coeffs else { continue };
        rounded_any = true;
        let mut j = assemble(labels, &coeffs);
        if coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
            j = j.negated();
        }
        if j.commutator(&h).is_zero() && recurrence_check(&j, &model, degree + 4).is_empty() {
            return (Some(true), Some(j));
        }
    }
    (rounded_any.then_some(false), None)
}

/// Least-squares fit of `J² ≈ Σ_{i ≤ degree} α_i H^i` on Fock levels
/// unaffected by truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub alphas: Vec<f64>,
    /// `‖J² - Σ α_i H^i‖_F / ‖J²‖_F` on the interior block.
    pub relative_residual: f64,
    /// Ratio of extreme singular values of the column-scaled design matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
    pub interior: usize,
}

pub fn fit_jsquared_poly(p: &NumericParams, j: &BlockOp<Scalar>, n: usize, degree: usize) -> Result<FitResult> {
    let margin = (j.reach() as usize).max(degree) + 2;
    if n < margin + degree + 1 {
        return Err(Error::TruncationTooSmall { n, degree, min: margin + degree + 1 });
    }
    let interior = n - margin;
    let idx = interior_indices(n, interior);
    let jm = TruncatedOperator::from_block(j, p, n).matrix;
    let target = submatrix(&(&jm * &jm), &idx);
    let h = truncated_hamiltonian(p, n).matrix;
    let dim = h.nrows();
    let mut power = DMatrix::<f64>::identity(dim, dim);
    let rows = idx.len() * idx.len();
    let mut design = DMatrix::<f64>::zeros(rows, degree + 1);
    let mut scale = vec![1.0; degree + 1];
    for i in 0..=degree {
        let block = submatrix(&power, &idx);
        scale[i] = block.norm();
        for (r, x) in block.iter().enumerate() {
            design[(r, i)] = x / scale[i];
        }
        power = &power * &h;
    }
    let b = DVector::from_iterator(rows, target.iter().copied());
    let svd = SVD::new(design.clone(), true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd.solve(&b, 1e-15 * smax).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let residual = (&design * &x - &b).norm() / b.norm();
    Ok(FitResult {
        alphas: x.iter().zip(&scale).map(|(a, s)| a / s).collect(),
        relative_residual: residual,
        condition,
        ill_conditioned: condition > 1e12,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::jsquared_polynomial;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn continued_fractions() {
        assert_eq!(small_rational(0.8, 1000, 1e-14), Some(rat(4, 5)));
        assert_eq!(small_rational(-2.475, 1000, 1e-14), Some(rat(-99, 40)));
        assert_eq!(small_rational(std::f64::consts::PI, 1000, 1e-12), None);
    }

    #[test]
    fn rejects_small_truncation() {
        let p = NumericParams::new(0.8, 0.7, 0.5);
        assert!(matches!(discover_symmetry(&p, 2, 9), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn recovers_half_bias_operator() {
        let p = NumericParams::new(0.8, 0.7, 0.5);
        let r = discover_symmetry(&p, 1, 30).unwrap();
        assert_eq!(r.nullspace_dimension, 1);
        assert!(!r.ambiguous);
        assert!(r.matches_catalog(), "{:?}", r.catalog_deviation);
        assert!(r.catalog_relative_error().unwrap() < 1e-9);
        assert_eq!(r.exact_verified, Some(true));
        let exact = r.exact_operator.unwrap();
        let cat = j_catalog(&ModelParams::numeric(rat(4, 5), rat(7, 10), rat(1, 2)), Basis::Original).unwrap();
        assert!(exact.is_proportional_to(&cat));
    }

    #[test]
    fn cubic_operator_is_exact() {
        let p = NumericParams::new(0.8, 0.7, 1.5);
        let r = discover_symmetry(&p, 3, 20).unwrap();
        assert_eq!(r.nullspace_dimension, 1);
        assert_eq!(r.exact_verified, Some(true));
        assert_eq!(r.exact_operator.unwrap().degree(), 3);
    }

    #[test]
    fn generic_bias_has_no_symmetry() {
        let p = NumericParams::new(0.8, 0.7, 0.3);
        let r = discover_symmetry(&p, 1, 30).unwrap();
        assert_eq!(r.nullspace_dimension, 0);
        assert!(!r.ambiguous);
        assert!(r.exact_verified.is_none());
    }

    #[test]
    fn fit_reproduces_catalog_polynomial() {
        for eps in [rat(1, 2), rat_int(1)] {
            let p = NumericParams::new(0.8, 0.7, crate::scalar::rational_to_f64(&eps));
            let j = j_catalog(&ModelParams::symbolic(eps.clone()), Basis::Original)
                .unwrap()
                .substitute(Some(&rat(4, 5)), Some(&rat(7, 10)))
                .unwrap();
            let want: Vec<f64> = jsquared_polynomial(&ModelParams::symbolic(eps))
                .unwrap()
                .iter()
                .map(|a| a.eval_f64(0.8, 0.7, 0.0))
                .collect();
            let fit = fit_jsquared_poly(&p, &j, 40, want.len() - 1).unwrap();
            assert!(fit.relative_residual < 1e-12, "{}", fit.relative_residual);
            for (a, b) in fit.alphas.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{} vs {}", a, b);
            }
        }
    }
}
