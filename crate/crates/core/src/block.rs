//! 2×2 block operators on `ℂ² ⊗ Fock`.
//!
//! Houses the biased Rabi Hamiltonian, the qubit basis change, the catalog of
//! explicit symmetry operators `J`, and the exact identity checks built on
//! them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::boson::{op_arith, GradedOp, NormalOp};
use crate::error::{Error, Result};
use crate::scalar::{rat, rat_int, Coeff, EpsScalar, Rational, Scalar};

/// `[[X11, X12], [X21, X22]]` with entries in the graded boson algebra.
#[derive(Clone, PartialEq)]
pub struct BlockOp<C = Scalar> {
    entries: [[GradedOp<C>; 2]; 2],
}

impl<C: Coeff> Default for BlockOp<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> BlockOp<C> {
    pub fn new(x11: GradedOp<C>, x12: GradedOp<C>, x21: GradedOp<C>, x22: GradedOp<C>) -> Self {
        Self { entries: [[x11, x12], [x21, x22]] }
    }

    pub fn zero() -> Self {
        Self::new(GradedOp::zero(), GradedOp::zero(), GradedOp::zero(), GradedOp::zero())
    }

    pub fn identity() -> Self {
        Self::new(GradedOp::identity(), GradedOp::zero(), GradedOp::zero(), GradedOp::identity())
    }

    /// Scalar multiple of the identity.
    pub fn scalar(c: C) -> Self {
        let d = GradedOp::even(NormalOp::scalar(c));
        Self::new(d.clone(), GradedOp::zero(), GradedOp::zero(), d)
    }

    /// `𝒫 · [[x11, x12], [x21, x22]]`
    pub fn parity_times(x11: NormalOp<C>, x12: NormalOp<C>, x21: NormalOp<C>, x22: NormalOp<C>) -> Self {
        Self::new(GradedOp::odd(x11), GradedOp::odd(x12), GradedOp::odd(x21), GradedOp::odd(x22))
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> &GradedOp<C> {
        &self.entries[row][col]
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &GradedOp<C>)> {
        (0..2).flat_map(move |i| (0..2).map(move |j| ((i, j), &self.entries[i][j])))
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|(_, e)| e.is_zero())
    }

    pub fn map_entries<D: Coeff>(&self, f: impl Fn(&GradedOp<C>) -> GradedOp<D>) -> BlockOp<D> {
        BlockOp::new(f(&self.entries[0][0]), f(&self.entries[0][1]), f(&self.entries[1][0]), f(&self.entries[1][1]))
    }

    pub fn try_map_entries<D: Coeff>(&self, f: impl Fn(&GradedOp<C>) -> Result<GradedOp<D>>) -> Result<BlockOp<D>> {
        Ok(BlockOp::new(
            f(&self.entries[0][0])?,
            f(&self.entries[0][1])?,
            f(&self.entries[1][0])?,
            f(&self.entries[1][1])?,
        ))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> BlockOp<D> {
        self.map_entries(|e| e.map_coeffs(f))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let e = |i: usize, j: usize| self.entries[i][j].plus(&other.entries[i][j]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn minus(&self, other: &Self) -> Self {
        let e = |i: usize, j: usize| self.entries[i][j].minus(&other.entries[i][j]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn negated(&self) -> Self {
        self.map_entries(|e| e.negated())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map_entries(|e| e.scale(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_entries(|e| e.scale_rational(r))
    }

    pub fn product(&self, other: &Self) -> Self {
        let e = |i: usize, j: usize| {
            let a = self.entries[i][0].product(&other.entries[0][j]);
            let b = self.entries[i][1].product(&other.entries[1][j]);
            a.plus(&b)
        };
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc.product(self))
    }

    /// `XY - YX`
    pub fn commutator(&self, other: &Self) -> Self {
        self.product(other).minus(&other.product(self))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let e = |i: usize, j: usize| self.entries[j][i].adjoint();
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// `σ_x X σ_x`: swaps both rows and columns.
    pub fn sigma_x_conjugate(&self) -> Self {
        let e = |i: usize, j: usize| self.entries[1 - i][1 - j].clone();
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// `σ_z X σ_z`: negates the off-diagonal entries.
    pub fn sigma_z_conjugate(&self) -> Self {
        Self::new(
            self.entries[0][0].clone(),
            self.entries[0][1].negated(),
            self.entries[1][0].negated(),
            self.entries[1][1].clone(),
        )
    }

    /// Conjugation by `σ_z ⊗ 𝒫`, which maps `H(g, ε)` to `H(g, -ε)`.
    pub fn bias_reflection(&self) -> Self {
        self.map_entries(|e| e.sigma_flip()).sigma_z_conjugate()
    }

    /// `Δ ↦ -Δ` in every coefficient.
    pub fn negate_delta(&self) -> Self {
        self.map_entries(|e| e.negate_delta())
    }

    /// `U X U⁻¹` with `U = [[1, 1], [1, -1]]/√2`. Involutive.
    pub fn transform_basis(&self) -> Self {
        let [[a, b], [c, d]] = &self.entries;
        let half = rat(1, 2);
        let s = |x: GradedOp<C>| x.scale_rational(&half);
        Self::new(
            s(a.plus(b).plus(c).plus(d)),
            s(a.minus(b).plus(c).minus(d)),
            s(a.plus(b).minus(c).minus(d)),
            s(a.minus(b).minus(c).plus(d)),
        )
    }

    /// True when `self · c = other · d` for nonzero coefficients `c`, `d`.
    pub fn is_proportional_to(&self, other: &Self) -> bool {
        let first =
            |x: &Self| x.entries().flat_map(|(_, e)| e.body().terms().map(|(_, _, c)| c.clone()).take(1)).next();
        match (first(self), first(other)) {
            (Some(c), Some(d)) => self.scale(&d) == other.scale(&c),
            (None, None) => true,
            _ => false,
        }
    }

    /// Largest Fock-space reach `|m - n|` over all entries.
    pub fn reach(&self) -> u32 {
        self.entries().map(|(_, e)| e.body().reach()).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.entries().map(|(_, e)| e.body().degree()).max().unwrap_or(0)
    }

    /// Dense `2(n+1) × 2(n+1)` matrix, qubit index major.
    pub fn fock_matrix_at(&self, n: usize, g: f64, delta: f64, eps: f64) -> DMatrix<f64> {
        let dim = n + 1;
        let mut out = DMatrix::zeros(2 * dim, 2 * dim);
        for ((i, j), e) in self.entries() {
            e.add_fock_block(&mut out, i * dim, j * dim, n, |c| c.eval_f64(g, delta, eps));
        }
        out
    }

    /// Dense matrix; every coefficient must already be numeric.
    pub fn fock_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        for (_, e) in self.entries() {
            for (_, _, c) in e.body().terms() {
                if c.constant().is_none() {
                    return Err(Error::SymbolicCoefficient(c.to_string()));
                }
            }
        }
        Ok(self.fock_matrix_at(n, f64::NAN, f64::NAN, f64::NAN))
    }
}

impl BlockOp<Scalar> {
    /// Exact substitution of numeric `g`, `Δ`.
    pub fn substitute(&self, g: Option<&Rational>, delta: Option<&Rational>) -> Result<Self> {
        self.try_map_entries(|e| e.try_map_coeffs(|c| c.substitute(g, delta)))
    }

    pub fn to_eps(&self) -> BlockOp<EpsScalar> {
        self.map_coeffs(|c| EpsScalar::from(c))
    }
}

impl BlockOp<EpsScalar> {
    pub fn substitute_eps(&self, eps: &Rational) -> Self {
        self.map_coeffs(|c| c.substitute_eps(eps))
    }

    pub fn to_scalar(&self) -> Option<BlockOp<Scalar>> {
        self.try_map_entries(|e| {
            e.try_map_coeffs(|c| c.to_scalar().ok_or_else(|| Error::SymbolicCoefficient(c.to_string())))
        })
        .ok()
    }
}

op_arith!(BlockOp);

impl<C: Coeff> fmt::Display for BlockOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((i, j), e) in self.entries() {
            writeln!(f, "[{}{}] {}", i + 1, j + 1, e)?;
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for BlockOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockOp{{\n{}}}", self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "C: Coeff + Serialize", deserialize = "C: Coeff + Deserialize<'de>"))]
struct BlockOpJson<C> {
    #[serde(rename = "11")]
    x11: GradedOp<C>,
    #[serde(rename = "12")]
    x12: GradedOp<C>,
    #[serde(rename = "21")]
    x21: GradedOp<C>,
    #[serde(rename = "22")]
    x22: GradedOp<C>,
}

impl<C: Coeff + Serialize> Serialize for BlockOp<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let [[a, b], [c, d]] = self.entries.clone();
        BlockOpJson { x11: a, x12: b, x21: c, x22: d }.serialize(s)
    }
}

impl<'de, C: Coeff + Deserialize<'de>> Deserialize<'de> for BlockOp<C> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BlockOpJson::<C>::deserialize(d)?;
        Ok(BlockOp::new(j.x11, j.x12, j.x21, j.x22))
    }
}

/// Model parameters with `ω = 1`. `g` and `Δ` may be symbolic; the bias is
/// always an exact rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub g: Scalar,
    pub delta: Scalar,
    pub epsilon: Rational,
}

impl ModelParams {
    /// Symbolic `g`, `Δ` at the given bias.
    pub fn symbolic(epsilon: Rational) -> Self {
        Self { g: Scalar::g(), delta: Scalar::delta(), epsilon }
    }

    pub fn numeric(g: Rational, delta: Rational, epsilon: Rational) -> Self {
        Self { g: Scalar::constant(g), delta: Scalar::constant(delta), epsilon }
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Self {
        Self { epsilon, ..self.clone() }
    }

    pub fn eps_scalar(&self) -> Scalar {
        Scalar::constant(self.epsilon.clone())
    }
}

/// Generic Hamiltonian
/// `[[a†a + Δ, g(a + a†) + ε], [g(a + a†) + ε, a†a - Δ]]`.
pub fn hamiltonian<C: Coeff>(g: &C, delta: &C, eps: &C) -> BlockOp<C> {
    let n = NormalOp::<C>::number();
    let coupling = NormalOp::from_terms([(0, 1, g.clone()), (1, 0, g.clone()), (0, 0, eps.clone())]);
    BlockOp::new(
        GradedOp::even(n.plus(&NormalOp::scalar(delta.clone()))),
        GradedOp::even(coupling.clone()),
        GradedOp::even(coupling),
        GradedOp::even(n.minus(&NormalOp::scalar(delta.clone()))),
    )
}

pub fn build_hamiltonian(p: &ModelParams) -> BlockOp<Scalar> {
    hamiltonian(&p.g, &p.delta, &p.eps_scalar())
}

/// Hamiltonian with `g`, `Δ` and `ε` all symbolic.
pub fn symbolic_hamiltonian() -> BlockOp<EpsScalar> {
    hamiltonian(&EpsScalar::g(), &EpsScalar::delta(), &EpsScalar::eps())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `σ_z` diagonal.
    #[default]
    Original,
    /// `σ_x` diagonal, reached with `U`.
    Transformed,
}

/// Biases with an explicit symmetry operator in the catalog.
pub fn catalog_biases() -> Vec<Rational> {
    vec![rat_int(0), rat(1, 2), rat(-1, 2), rat_int(1), rat_int(-1)]
}

fn catalog_order(eps: &Rational) -> Option<u32> {
    let twice = eps * rat_int(2);
    if !twice.is_integer() {
        return None;
    }
    let m = twice.abs().to_integer();
    (m <= num_bigint::BigInt::from(2)).then(|| num_traits::ToPrimitive::to_u32(&m).unwrap())
}

/// Normalization convention of each catalog entry.
pub fn catalog_normalization(eps: &Rational) -> &'static str {
    match catalog_order(eps) {
        Some(0) => "J = diag(P, -P); the generating-function solution divided by Δ (and sign)",
        Some(1) => "overall factor Δ removed; diagonal constant Δ/g",
        Some(2) => "leading (a†)² coefficient 2g² in the 11 entry",
        _ => "none",
    }
}

/// The explicit symmetry operator `J` commuting with `H` at the bias of `p`.
pub fn j_catalog(p: &ModelParams, basis: Basis) -> Result<BlockOp<Scalar>> {
    let eps = &p.epsilon;
    let order = catalog_order(eps).ok_or_else(|| Error::CatalogMiss { eps: eps.clone() })?;
    let positive = eps.is_positive();
    let j = match order {
        0 => BlockOp::parity_times(
            NormalOp::identity(),
            NormalOp::zero(),
            NormalOp::zero(),
            NormalOp::scalar(Scalar::from(-1)),
        ),
        1 => {
            // Written for either sign of ε; agrees with reflecting the ε = 1/2 form.
            let g_inv =
                p.g.inverse()
                    .ok_or_else(|| Error::SingularParameter("ε = ±1/2 needs invertible g (the Δ/g term)".into()))?;
            let two_eps = Scalar::constant(eps * rat_int(2));
            let ad_minus_a = NormalOp::from_terms([(1, 0, Scalar::one()), (0, 1, Scalar::from(-1))]);
            let ad_plus_a = NormalOp::from_terms([(1, 0, Scalar::one()), (0, 1, Scalar::one())]);
            let shift = &p.g.scale_rational(&rat_int(2));
            let d_over_g = &p.delta * &g_inv;
            let x11 = ad_minus_a.scale(&two_eps).plus(&NormalOp::scalar(shift + &d_over_g));
            let x22 = ad_minus_a.scale(&-&two_eps).plus(&NormalOp::scalar(&d_over_g - shift));
            BlockOp::parity_times(x11, ad_plus_a.clone(), ad_plus_a.negated(), x22)
        }
        2 => {
            let j1 = j_eps_one(&p.g, &p.delta);
            if positive {
                j1
            } else {
                j1.bias_reflection()
            }
        }
        _ => unreachable!(),
    };
    Ok(match basis {
        Basis::Original => j,
        Basis::Transformed => j.transform_basis(),
    })
}

trait ScaleRational {
    fn scale_rational(&self, r: &Rational) -> Self;
}

impl ScaleRational for Scalar {
    fn scale_rational(&self, r: &Rational) -> Self {
        Coeff::scaled(self, r)
    }
}

/// `J` at `ε = 1`, entries as polynomials in `a†`, `a` behind a common `𝒫`.
fn j_eps_one(g: &Scalar, delta: &Scalar) -> BlockOp<Scalar> {
    let g2 = g.pow(2);
    let g3 = g.pow(3);
    let two_g2 = g2.scale_rational(&rat_int(2));
    let four_g3 = g3.scale_rational(&rat_int(4));
    let s_plus = &two_g2 + delta; // 2g² + Δ
    let s_minus = &two_g2 - delta; // 2g² - Δ
    let t = |m: u32, n: u32, c: Scalar| (m, n, c);
    let x11 = NormalOp::from_terms([
        t(2, 0, two_g2.clone()),
        t(0, 2, two_g2.clone()),
        t(1, 0, (g * &s_plus).scale_rational(&rat_int(2))),
        t(0, 1, (g * &s_plus).scale_rational(&rat_int(-2))),
        t(0, 0, s_plus.pow(2)),
    ]);
    let x12 = NormalOp::from_terms([
        t(2, 0, two_g2.clone()),
        t(0, 2, -&two_g2),
        t(1, 0, four_g3.clone()),
        t(0, 1, four_g3.clone()),
        t(0, 0, delta.clone()),
    ]);
    let x21 = NormalOp::from_terms([
        t(0, 2, two_g2.clone()),
        t(2, 0, -&two_g2),
        t(1, 0, -&four_g3),
        t(0, 1, -&four_g3),
        t(0, 0, delta.clone()),
    ]);
    let x22 = NormalOp::from_terms([
        t(2, 0, -&two_g2),
        t(0, 2, -&two_g2),
        t(1, 0, (g * &s_minus).scale_rational(&rat_int(-2))),
        t(0, 1, (g * &s_minus).scale_rational(&rat_int(2))),
        t(0, 0, -s_minus.pow(2)),
    ]);
    BlockOp::parity_times(x11, x12, x21, x22)
}

/// Result of checking an exact operator identity.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub claim: String,
    pub residual: BlockOp<Scalar>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }

    /// `"0"` for an exact identity, otherwise the residual terms.
    pub fn residual_norm(&self) -> serde_json::Value {
        if self.holds() {
            serde_json::Value::String("0".into())
        } else {
            serde_json::to_value(&self.residual).expect("serializable")
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "claim": self.claim, "residual_norm": self.residual_norm() })
    }
}

/// The polynomial `J²` is claimed to equal, as coefficients of `H^0, H^1, ...`.
pub fn jsquared_polynomial(p: &ModelParams) -> Result<Vec<Scalar>> {
    let order = catalog_order(&p.epsilon).ok_or_else(|| Error::CatalogMiss { eps: p.epsilon.clone() })?;
    let g = &p.g;
    let d = &p.delta;
    Ok(match order {
        0 => vec![Scalar::one()],
        1 => {
            let g_inv = g.inverse().ok_or_else(|| Error::SingularParameter("λ contains Δ²/g²".into()))?;
            // λ = 4g² + Δ²/g² + 2
            let lambda = &(&g.pow(2).scale_rational(&rat_int(4)) + &(&d.pow(2) * &g_inv.pow(2))) + &Scalar::from(2);
            vec![lambda, Scalar::from(4)]
        }
        2 => {
            let g2 = g.pow(2);
            let g4 = g.pow(4);
            let g6 = g.pow(6);
            let d2 = d.pow(2);
            let a2 = g4.scale_rational(&rat_int(16));
            let inner = &(&g4.scale_rational(&rat_int(4)) + &g2.scale_rational(&rat_int(2))) + &d2;
            let a1 = &g2.scale_rational(&rat_int(8)) * &inner;
            let a0 = &(&(&g6.scale_rational(&rat_int(16)) * &(&g2 + &Scalar::one()))
                + &(&d2 * &(&(&g4.scale_rational(&rat_int(8)) + &g2.scale_rational(&rat_int(4))) + &Scalar::one())))
                + &d2.pow(2);
            vec![a0, a1, a2]
        }
        _ => unreachable!(),
    })
}

/// Computes `J² - Σ α_i H^i` exactly for the catalog operator.
pub fn verify_jsquared(p: &ModelParams) -> Result<IdentityReport> {
    let j = j_catalog(p, Basis::Original)?;
    let h = build_hamiltonian(p);
    let alphas = jsquared_polynomial(p)?;
    let mut rhs = BlockOp::zero();
    let mut hp = BlockOp::identity();
    for a in &alphas {
        rhs = rhs.plus(&hp.scale(a));
        hp = hp.product(&h);
    }
    let claim = match alphas.len() {
        1 => "J^2 = 1".to_string(),
        2 => "J^2 = 4H + λ, λ = 4g^2 + Δ^2/g^2 + 2".to_string(),
        _ => "J^2 = 16g^4 H^2 + 8g^2(4g^4 + 2g^2 + Δ^2) H + 16g^6(g^2 + 1) + Δ^2(8g^4 + 4g^2 + 1) + Δ^4".to_string(),
    };
    Ok(IdentityReport { claim, residual: j.product(&j).minus(&rhs) })
}

/// `σ_x X(Δ) σ_x = sign · X(-Δ)` as an exact identity.
pub fn check_delta_flip<C: Coeff>(x: &BlockOp<C>, sign: i32) -> bool {
    let lhs = x.sigma_x_conjugate();
    let rhs = x.negate_delta();
    if sign >= 0 {
        lhs == rhs
    } else {
        lhs == rhs.negated()
    }
}

/// One nonzero entry of the commutator recurrences.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceResidual {
    /// Which of the four relations (1 to 4, rows 11, 22, 12, 21).
    pub relation: u8,
    pub m: u32,
    pub n: u32,
    pub value: Scalar,
}

/// Evaluates the four coefficient recurrences of `[H, J] = 0` for
/// `0 <= m, n <= bound` and returns the nonzero residuals.
///
/// Odd-grade entries are first expanded with the parity series, which is
/// exact for every index the recurrences touch.
pub fn recurrence_check(j: &BlockOp<Scalar>, p: &ModelParams, bound: u32) -> Vec<RecurrenceResidual> {
    let reach = bound + 1;
    let plain = |i: usize, k: usize| j.entry(i, k).expand_parity(reach);
    let (a, b, c, d) = (plain(0, 0), plain(0, 1), plain(1, 0), plain(1, 1));
    let coef = |x: &NormalOp<Scalar>, m: i64, n: i64| -> Scalar {
        if m < 0 || n < 0 {
            return Scalar::zero();
        }
        x.coeff(m as u32, n as u32).cloned().unwrap_or_else(Scalar::zero)
    };
    let eps = p.eps_scalar();
    let g = &p.g;
    let two_delta = p.delta.scale_rational(&rat_int(2));
    // g((m+1) y_{m+1,n} + y_{m-1,n} + y_{m,n-1} - (n+1) x_{m,n+1} - x_{m,n-1} - x_{m-1,n})
    let hop = |y: &NormalOp<Scalar>, x: &NormalOp<Scalar>, m: i64, n: i64| -> Scalar {
        let up = &(&coef(y, m - 1, n) + &coef(y, m, n - 1)) + &coef(y, m + 1, n).scale_rational(&rat_int(m + 1));
        let down = &(&coef(x, m, n - 1) + &coef(x, m - 1, n)) + &coef(x, m, n + 1).scale_rational(&rat_int(n + 1));
        g * &(&up - &down)
    };
    let mut out = Vec::new();
    for m in 0..=bound as i64 {
        for n in 0..=bound as i64 {
            let mn = Scalar::from(m - n);
            let r1 = &(&(&mn * &coef(&a, m, n)) + &(&eps * &(&coef(&c, m, n) - &coef(&b, m, n)))) + &hop(&c, &b, m, n);
            let r2 = &(&(&mn * &coef(&d, m, n)) + &(&eps * &(&coef(&b, m, n) - &coef(&c, m, n)))) + &hop(&b, &c, m, n);
            let r3 = &(&(&(&mn + &two_delta) * &coef(&b, m, n)) + &(&eps * &(&coef(&d, m, n) - &coef(&a, m, n))))
                + &hop(&d, &a, m, n);
            let r4 = &(&(&(&mn - &two_delta) * &coef(&c, m, n)) + &(&eps * &(&coef(&a, m, n) - &coef(&d, m, n))))
                + &hop(&a, &d, m, n);
            for (rel, v) in [(1u8, r1), (2, r2), (3, r3), (4, r4)] {
                if !v.is_zero() {
                    out.push(RecurrenceResidual { relation: rel, m: m as u32, n: n as u32, value: v });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(eps: Rational) -> ModelParams {
        ModelParams::symbolic(eps)
    }

    #[test]
    fn decoupled_hamiltonian() {
        let h = build_hamiltonian(&ModelParams { g: Scalar::zero(), delta: Scalar::delta(), epsilon: rat_int(0) });
        assert!(h.entry(0, 1).is_zero());
        assert!(h.entry(1, 0).is_zero());
        let n = NormalOp::<Scalar>::number();
        assert_eq!(h.entry(0, 0), &GradedOp::even(n.plus(&NormalOp::scalar(Scalar::delta()))));
    }

    #[test]
    fn hamiltonian_is_self_adjoint() {
        let h = build_hamiltonian(&sym(rat(1, 3)));
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn transformed_hamiltonian() {
        let p = sym(rat(2, 5));
        let ht = build_hamiltonian(&p).transform_basis();
        let n = NormalOp::<Scalar>::number();
        let v = NormalOp::from_terms([(1, 0, Scalar::g()), (0, 1, Scalar::g()), (0, 0, p.eps_scalar())]);
        let expect = BlockOp::new(
            GradedOp::even(n.plus(&v)),
            GradedOp::even(NormalOp::scalar(Scalar::delta())),
            GradedOp::even(NormalOp::scalar(Scalar::delta())),
            GradedOp::even(n.minus(&v)),
        );
        assert_eq!(ht, expect);
        assert_eq!(ht.transform_basis(), build_hamiltonian(&p));
    }

    #[test]
    fn transformed_j_at_zero_bias() {
        let jt = j_catalog(&sym(rat_int(0)), Basis::Transformed).unwrap();
        let expect = BlockOp::new(GradedOp::zero(), GradedOp::parity(), GradedOp::parity(), GradedOp::zero());
        assert_eq!(jt, expect);
    }

    #[test]
    fn transformed_j_at_half() {
        let jt = j_catalog(&sym(rat(1, 2)), Basis::Transformed).unwrap();
        // 2𝒫 [[Δ/2g, g - a], [g + a†, Δ/2g]]
        let dg = Scalar::term(-1, 1, rat_int(1));
        let two_g = Scalar::term(1, 0, rat_int(2));
        let expect = BlockOp::parity_times(
            NormalOp::scalar(dg.clone()),
            NormalOp::from_terms([(0, 0, two_g.clone()), (0, 1, Scalar::from(-2))]),
            NormalOp::from_terms([(0, 0, two_g), (1, 0, Scalar::from(2))]),
            NormalOp::scalar(dg),
        );
        assert_eq!(jt, expect);
    }

    #[test]
    fn transformed_j_at_one() {
        let jt = j_catalog(&sym(rat_int(1)), Basis::Transformed).unwrap();
        let g = Scalar::g();
        let d = Scalar::delta();
        let g2 = g.pow(2);
        let four_g2 = g2.scale_rational(&rat_int(4));
        let ad = NormalOp::<Scalar>::create();
        let a = NormalOp::<Scalar>::annihilate();
        let c = |s: Scalar| NormalOp::scalar(s);
        let ad_minus_a = ad.minus(&a);
        // (4g² ± 1)Δ + 2gΔ(a† - a)
        let diag = |sign: i64| {
            c(&(&four_g2 + &Scalar::from(sign)) * &d).plus(&ad_minus_a.scale(&(&g * &d).scale_rational(&rat_int(2))))
        };
        let g_minus_a = c(g.clone()).minus(&a);
        let g_plus_ad = c(g.clone()).plus(&ad);
        let off12 = c(d.pow(2)).plus(&g_minus_a.pow(2).scale(&four_g2));
        let off21 = c(d.pow(2)).plus(&g_plus_ad.pow(2).scale(&four_g2));
        let expect = BlockOp::parity_times(diag(1), off12, off21, diag(-1));
        assert_eq!(jt, expect);
    }

    #[test]
    fn catalog_commutes_and_is_self_adjoint() {
        for eps in catalog_biases() {
            let p = sym(eps.clone());
            let j = j_catalog(&p, Basis::Original).unwrap();
            let h = build_hamiltonian(&p);
            assert!(j.commutator(&h).is_zero(), "ε = {}", eps);
            assert_eq!(j.adjoint(), j, "ε = {}", eps);
        }
    }

    #[test]
    fn negative_half_agrees_with_reflection() {
        let plus = j_catalog(&sym(rat(1, 2)), Basis::Original).unwrap();
        let minus = j_catalog(&sym(rat(-1, 2)), Basis::Original).unwrap();
        assert_eq!(plus.bias_reflection(), minus);
        let h = build_hamiltonian(&sym(rat(1, 2)));
        assert_eq!(h.bias_reflection(), build_hamiltonian(&sym(rat(-1, 2))));
    }

    #[test]
    fn half_j_off_lattice_fails() {
        let j = j_catalog(&sym(rat(1, 2)), Basis::Original).unwrap();
        let h = build_hamiltonian(&sym(rat(3, 10)));
        let c = j.commutator(&h);
        assert!(!c.is_zero());
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(j_catalog(&sym(rat(1, 3)), Basis::Original), Err(Error::CatalogMiss { .. })));
        let p = ModelParams { g: Scalar::zero(), delta: Scalar::delta(), epsilon: rat(1, 2) };
        assert!(matches!(j_catalog(&p, Basis::Original), Err(Error::SingularParameter(_))));
    }

    #[test]
    fn jsquared_identities() {
        for eps in catalog_biases() {
            let r = verify_jsquared(&sym(eps.clone())).unwrap();
            assert!(r.holds(), "ε = {}: {}", eps, r.residual);
            assert_eq!(r.to_json()["residual_norm"], "0");
        }
    }

    #[test]
    fn delta_flip() {
        let h = build_hamiltonian(&sym(rat(1, 2)));
        assert!(check_delta_flip(&h, 1));
        assert!(!check_delta_flip(&h, -1));
        let j = j_catalog(&sym(rat(1, 2)), Basis::Original).unwrap();
        assert!(check_delta_flip(&j, -1));
        let j1 = j_catalog(&sym(rat_int(1)), Basis::Original).unwrap();
        assert!(check_delta_flip(&j1, -1));
        let z = BlockOp::<Scalar>::zero();
        assert!(check_delta_flip(&z, 1) && check_delta_flip(&z, -1));
    }

    #[test]
    fn recurrences_trivial_cases() {
        let p = sym(rat(2, 7));
        assert!(recurrence_check(&BlockOp::identity(), &p, 6).is_empty());
        assert!(recurrence_check(&build_hamiltonian(&p), &p, 6).is_empty());
    }

    #[test]
    fn recurrences_agree_with_commutator() {
        let p = sym(rat(1, 2));
        let j = j_catalog(&p, Basis::Original).unwrap();
        assert!(recurrence_check(&j, &p, 8).is_empty());
        let off = p.with_epsilon(rat(3, 10));
        assert!(!recurrence_check(&j, &off, 8).is_empty());
        let j1 = j_catalog(&sym(rat_int(1)), Basis::Original).unwrap();
        assert!(recurrence_check(&j1, &sym(rat_int(1)), 6).is_empty());
    }

    #[test]
    fn json_labels() {
        let h = build_hamiltonian(&ModelParams::numeric(rat(4, 5), rat(7, 10), rat(1, 2)));
        let v = serde_json::to_value(&h).unwrap();
        for k in ["11", "12", "21", "22"] {
            assert!(v.get(k).is_some());
        }
        let back: BlockOp<Scalar> = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }
}
