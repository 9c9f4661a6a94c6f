//! Normal-ordered single-mode boson operators with a formal parity grade.
//!
//! A [`NormalOp`] is a finite sum `Σ c_{m,n} (a†)^m a^n`. The parity operator
//! `𝒫 = :exp(-2 a†a):` is not expanded as a series; instead a [`GradedOp`]
//! carries a grade bit and represents `𝒫^s · X`. Products stay finite because
//! `𝒫 a† 𝒫 = -a†` and `𝒫 a 𝒫 = -a`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{rat_int, Coeff, Rational, Scalar};

/// Size of the precomputed factorial and binomial tables.
pub const TABLE_DEGREE: usize = 64;

fn factorial_table() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_DEGREE + 1);
        t.push(BigInt::one());
        for k in 1..=TABLE_DEGREE {
            let prev = t[k - 1].clone();
            t.push(prev * k);
        }
        t
    })
}

pub fn factorial(n: usize) -> BigInt {
    if n <= TABLE_DEGREE {
        return factorial_table()[n].clone();
    }
    (TABLE_DEGREE + 1..=n).fold(factorial_table()[TABLE_DEGREE].clone(), |acc, k| acc * k)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `n! / (n-k)!`
fn falling(n: usize, k: usize) -> BigInt {
    ((n - k + 1)..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Normal-ordered operator `Σ c_{m,n} (a†)^m a^n`.
#[derive(Clone, PartialEq)]
pub struct NormalOp<C = Scalar> {
    coeffs: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> Default for NormalOp<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> NormalOp<C> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::scalar(C::one())
    }

    pub fn scalar(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c · (a†)^m a^n`
    pub fn monomial(m: u32, n: u32, c: C) -> Self {
        let mut op = Self::zero();
        op.add_term(m, n, c);
        op
    }

    /// `a†`
    pub fn create() -> Self {
        Self::monomial(1, 0, C::one())
    }

    /// `a`
    pub fn annihilate() -> Self {
        Self::monomial(0, 1, C::one())
    }

    /// `a†a`
    pub fn number() -> Self {
        Self::monomial(1, 1, C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, C)>>(it: I) -> Self {
        let mut op = Self::zero();
        for (m, n, c) in it {
            op.add_term(m, n, c);
        }
        op
    }

    pub fn add_term(&mut self, m: u32, n: u32, c: C) {
        if c.is_zero() {
            return;
        }
        let remove = match self.coeffs.get_mut(&(m, n)) {
            Some(v) => {
                *v = v.plus(&c);
                v.is_zero()
            }
            None => {
                self.coeffs.insert((m, n), c);
                false
            }
        };
        if remove {
            self.coeffs.remove(&(m, n));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, m: u32, n: u32) -> Option<&C> {
        self.coeffs.get(&(m, n))
    }

    /// Terms in ascending `(m, n)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &C)> {
        self.coeffs.iter().map(|(&(m, n), c)| (m, n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn creation_degree(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn annihilation_degree(&self) -> u32 {
        self.coeffs.keys().map(|k| k.1).max().unwrap_or(0)
    }

    /// Largest `m + n` over stored terms.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0 + k.1).max().unwrap_or(0)
    }

    /// Largest `|m - n|`, the reach of the operator in the Fock basis.
    pub fn reach(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0.abs_diff(k.1)).max().unwrap_or(0)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> NormalOp<D> {
        let mut out = NormalOp::zero();
        for (&(m, n), c) in &self.coeffs {
            out.add_term(m, n, f(c));
        }
        out
    }

    pub fn try_map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<NormalOp<D>> {
        let mut out = NormalOp::zero();
        for (&(m, n), c) in &self.coeffs {
            out.add_term(m, n, f(c)?);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map_coeffs(|x| x.times(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_coeffs(|x| x.scaled(r))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(m, n), c) in &other.coeffs {
            out.add_term(m, n, c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(m, n), c) in &other.coeffs {
            out.add_term(m, n, c.negated());
        }
        out
    }

    pub fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }

    /// Normal-ordered product, using
    /// `(a†)^m a^n (a†)^p a^q = Σ_k k! C(n,k) C(p,k) (a†)^{m+p-k} a^{n+q-k}`.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(m, n), x) in &self.coeffs {
            for (&(p, q), y) in &other.coeffs {
                let xy = x.times(y);
                for k in 0..=n.min(p) {
                    let w = factorial(k as usize) * binomial(n as usize, k as usize) * binomial(p as usize, k as usize);
                    out.add_term(m + p - k, n + q - k, xy.scaled(&Rational::from_integer(w)));
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc.product(self))
    }

    /// `𝒫 X 𝒫⁻¹`: multiplies `c_{m,n}` by `(-1)^{m+n}`.
    pub fn sigma_flip(&self) -> Self {
        let mut out = Self::zero();
        for (&(m, n), c) in &self.coeffs {
            let c = if (m + n) % 2 == 1 { c.negated() } else { c.clone() };
            out.add_term(m, n, c);
        }
        out
    }

    /// Hermitian adjoint for real coefficients: `(a†)^m a^n ↦ (a†)^n a^m`.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zero();
        for (&(m, n), c) in &self.coeffs {
            out.add_term(n, m, c.clone());
        }
        out
    }

    /// Keeps only terms with `m <= max_m` and `n <= max_n`.
    pub fn truncate(&self, max_m: u32, max_n: u32) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(m, n), _)| m <= max_m && n <= max_n)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn negate_delta(&self) -> Self {
        self.map_coeffs(|c| c.negate_delta())
    }
}

/// `:exp(μ a†a):` truncated after `(a†)^order a^order`.
pub fn normal_exponential<C: Coeff>(mu: &Rational, order: u32) -> NormalOp<C> {
    let mut op = NormalOp::zero();
    let mut c = Rational::one();
    for k in 0..=order {
        if k > 0 {
            c = c * mu / rat_int(k as i64);
        }
        op.add_term(k, k, C::from_rational(c.clone()));
    }
    op
}

/// The parity series `:exp(-2a†a):` up to order `order`.
pub fn parity_series<C: Coeff>(order: u32) -> NormalOp<C> {
    normal_exponential(&rat_int(-2), order)
}

impl<C: Coeff> fmt::Display for NormalOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&(m, n), c)| {
                let mut s = format!("({})", c);
                match m {
                    0 => {}
                    1 => s.push_str("·a†"),
                    _ => s.push_str(&format!("·a†^{}", m)),
                }
                match n {
                    0 => {}
                    1 => s.push_str("·a"),
                    _ => s.push_str(&format!("·a^{}", n)),
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<C: Coeff> fmt::Debug for NormalOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormalOp[{}]", self)
    }
}

macro_rules! op_arith {
    ($ty:ident) => {
        impl<'a, C: Coeff> Add<&'a $ty<C>> for &'a $ty<C> {
            type Output = $ty<C>;
            fn add(self, rhs: &$ty<C>) -> $ty<C> {
                self.plus(rhs)
            }
        }
        impl<C: Coeff> Add for $ty<C> {
            type Output = $ty<C>;
            fn add(self, rhs: $ty<C>) -> $ty<C> {
                self.plus(&rhs)
            }
        }
        impl<'a, C: Coeff> Sub<&'a $ty<C>> for &'a $ty<C> {
            type Output = $ty<C>;
            fn sub(self, rhs: &$ty<C>) -> $ty<C> {
                self.minus(rhs)
            }
        }
        impl<C: Coeff> Sub for $ty<C> {
            type Output = $ty<C>;
            fn sub(self, rhs: $ty<C>) -> $ty<C> {
                self.minus(&rhs)
            }
        }
        impl<'a, C: Coeff> Mul<&'a $ty<C>> for &'a $ty<C> {
            type Output = $ty<C>;
            fn mul(self, rhs: &$ty<C>) -> $ty<C> {
                self.product(rhs)
            }
        }
        impl<C: Coeff> Mul for $ty<C> {
            type Output = $ty<C>;
            fn mul(self, rhs: $ty<C>) -> $ty<C> {
                self.product(&rhs)
            }
        }
        impl<'a, C: Coeff> Neg for &'a $ty<C> {
            type Output = $ty<C>;
            fn neg(self) -> $ty<C> {
                self.negated()
            }
        }
        impl<C: Coeff> Neg for $ty<C> {
            type Output = $ty<C>;
            fn neg(self) -> $ty<C> {
                self.negated()
            }
        }
    };
}

pub(crate) use op_arith;

op_arith!(NormalOp);

/// Parity grade `s` in `𝒫^s · X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Grade {
    #[default]
    Even,
    Odd,
}

impl Grade {
    pub fn from_bit(s: u8) -> Result<Self> {
        match s {
            0 => Ok(Grade::Even),
            1 => Ok(Grade::Odd),
            _ => Err(Error::InvalidInput(format!("grade must be 0 or 1, got {}", s))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Grade::Even => 0,
            Grade::Odd => 1,
        }
    }

    pub fn xor(self, other: Grade) -> Grade {
        if self == other {
            Grade::Even
        } else {
            Grade::Odd
        }
    }
}

/// `𝒫^grade · body`. The zero operator is stored with even grade.
#[derive(Clone, PartialEq)]
pub struct GradedOp<C = Scalar> {
    grade: Grade,
    body: NormalOp<C>,
}

impl<C: Coeff> Default for GradedOp<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> GradedOp<C> {
    pub fn new(grade: Grade, body: NormalOp<C>) -> Self {
        let grade = if body.is_zero() { Grade::Even } else { grade };
        Self { grade, body }
    }

    pub fn even(body: NormalOp<C>) -> Self {
        Self::new(Grade::Even, body)
    }

    /// `𝒫 · body`
    pub fn odd(body: NormalOp<C>) -> Self {
        Self::new(Grade::Odd, body)
    }

    pub fn zero() -> Self {
        Self { grade: Grade::Even, body: NormalOp::zero() }
    }

    pub fn identity() -> Self {
        Self::even(NormalOp::identity())
    }

    pub fn parity() -> Self {
        Self::odd(NormalOp::identity())
    }

    pub fn grade(&self) -> Grade {
        self.grade
    }

    pub fn body(&self) -> &NormalOp<C> {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// `(s₁, X)(s₂, Y) = (s₁ ⊕ s₂, flip^{s₂}(X) · Y)`.
    pub fn product(&self, other: &Self) -> Self {
        let left = match other.grade {
            Grade::Even => self.body.product(&other.body),
            Grade::Odd => self.body.sigma_flip().product(&other.body),
        };
        Self::new(self.grade.xor(other.grade), left)
    }

    /// Sum of two operators of the same grade; `None` when both are nonzero
    /// with different grades.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        (self.grade == other.grade).then(|| Self::new(self.grade, self.body.plus(&other.body)))
    }

    /// # Panics
    /// On nonzero operands of different grades.
    pub fn plus(&self, other: &Self) -> Self {
        self.checked_add(other).unwrap_or_else(|| panic!("cannot add operators of different parity grades"))
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        Self { grade: self.grade, body: self.body.negated() }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.grade, self.body.scale(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        Self::new(self.grade, self.body.scale_rational(r))
    }

    /// `𝒫 (𝒫^s X) 𝒫⁻¹ = 𝒫^s flip(X)`.
    pub fn sigma_flip(&self) -> Self {
        Self::new(self.grade, self.body.sigma_flip())
    }

    /// `(𝒫^s X)† = X† 𝒫^s = 𝒫^s flip^s(X†)`.
    pub fn adjoint(&self) -> Self {
        let d = self.body.dagger();
        let body = match self.grade {
            Grade::Even => d,
            Grade::Odd => d.sigma_flip(),
        };
        Self::new(self.grade, body)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc.product(self))
    }

    pub fn negate_delta(&self) -> Self {
        Self::new(self.grade, self.body.negate_delta())
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GradedOp<D> {
        GradedOp::new(self.grade, self.body.map_coeffs(f))
    }

    pub fn try_map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<GradedOp<D>> {
        Ok(GradedOp::new(self.grade, self.body.try_map_coeffs(f)?))
    }

    /// Ungraded coefficients `𝒫^s X` with the parity series expanded, exact for
    /// all `(m, n)` with `m, n <= bound`.
    pub fn expand_parity(&self, bound: u32) -> NormalOp<C> {
        match self.grade {
            Grade::Even => self.body.clone(),
            Grade::Odd => parity_series::<C>(bound).product(&self.body).truncate(bound, bound),
        }
    }

    /// Floating-point matrix `⟨j| 𝒫^s X |k⟩`, `0 <= j, k <= n`, with
    /// coefficients evaluated at the given parameters.
    pub fn fock_matrix_at(&self, n: usize, g: f64, delta: f64, eps: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n + 1, n + 1);
        self.add_fock_block(&mut out, 0, 0, n, |c| c.eval_f64(g, delta, eps));
        out
    }

    /// Floating-point Fock matrix; every coefficient must already be numeric.
    pub fn fock_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        let vals = self.numeric_coeffs()?;
        let mut out = DMatrix::zeros(n + 1, n + 1);
        let mut it = vals.into_iter();
        self.add_fock_block(&mut out, 0, 0, n, |_| it.next().unwrap());
        Ok(out)
    }

    fn numeric_coeffs(&self) -> Result<Vec<f64>> {
        self.body
            .terms()
            .map(|(_, _, c)| {
                c.constant()
                    .map(|r| crate::scalar::rational_to_f64(&r))
                    .ok_or_else(|| Error::SymbolicCoefficient(c.to_string()))
            })
            .collect()
    }

    /// Adds the Fock matrix of this operator into `out` at the given offset.
    /// `value` is called once per stored term, in term order.
    pub(crate) fn add_fock_block(
        &self,
        out: &mut DMatrix<f64>,
        row0: usize,
        col0: usize,
        n: usize,
        mut value: impl FnMut(&C) -> f64,
    ) {
        for (m, a, c) in self.body.terms() {
            let c = value(c);
            if c == 0.0 {
                continue;
            }
            let (m, a) = (m as usize, a as usize);
            for k in a..=n {
                let j = k - a + m;
                if j > n {
                    break;
                }
                // sqrt(k!/(k-a)!) · sqrt(j!/(k-a)!); the shared factors are exact.
                let lo = k - a + 1;
                let mid = k.min(j);
                let common: f64 = (lo..=mid).map(|i| i as f64).product();
                let rest: f64 = (mid + 1..=k.max(j)).map(|i| i as f64).product();
                let w = common * rest.sqrt();
                let sign = if self.grade == Grade::Odd && j % 2 == 1 { -1.0 } else { 1.0 };
                out[(row0 + j, col0 + k)] += sign * c * w;
            }
        }
    }

    /// Exact Fock matrix in reduced form, see [`ReducedFockMatrix`].
    pub fn fock_matrix_exact(&self, n: usize) -> Result<ReducedFockMatrix> {
        let mut out = ReducedFockMatrix::zeros(n + 1);
        for (m, a, c) in self.body.terms() {
            let c = c.constant().ok_or_else(|| Error::SymbolicCoefficient(c.to_string()))?;
            let (m, a) = (m as usize, a as usize);
            for k in a..=n {
                let j = k - a + m;
                if j > n {
                    break;
                }
                // ⟨j|(a†)^m a^a|k⟩ = sqrt(j! k!) / (k-a)!
                let mut r = &c / Rational::from_integer(factorial(k - a));
                if self.grade == Grade::Odd && j % 2 == 1 {
                    r = -r;
                }
                out.add(j, k, &r);
            }
        }
        Ok(out)
    }
}

impl<C: Coeff> fmt::Display for GradedOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.grade {
            Grade::Even => write!(f, "{}", self.body),
            Grade::Odd => write!(f, "𝒫·[{}]", self.body),
        }
    }
}

impl<C: Coeff> fmt::Debug for GradedOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedOp({})", self)
    }
}

op_arith!(GradedOp);

/// Exact truncated Fock matrix stored as `R` with entry `(j,k) = R_{jk} · sqrt(j! k!)`.
///
/// All matrix elements of normal-ordered operators have this form, so
/// products and comparisons stay rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedFockMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl ReducedFockMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Rational::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn reduced(&self, j: usize, k: usize) -> &Rational {
        &self.entries[j * self.dim + k]
    }

    fn add(&mut self, j: usize, k: usize, r: &Rational) {
        self.entries[j * self.dim + k] += r;
    }

    /// Signed square of the true entry: `sign(R)·R²·j!·k!`.
    pub fn signed_square(&self, j: usize, k: usize) -> Rational {
        let r = self.reduced(j, k);
        let sq = r * r * Rational::from_integer(factorial(j) * factorial(k));
        if r < &Rational::zero() {
            -sq
        } else {
            sq
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |j, k| {
            let w = (1..=j).chain(1..=k).fold(1.0f64, |acc, i| acc * (i as f64).sqrt());
            crate::scalar::rational_to_f64(self.reduced(j, k)) * w
        })
    }

    /// Truncated matrix product, exact in reduced form:
    /// `(AB)_{jk} = sqrt(j! k!) Σ_l A_{jl} B_{lk} l!`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for l in 0..n {
            let lf = Rational::from_integer(factorial(l));
            for j in 0..n {
                let a = self.reduced(j, l);
                if a.is_zero() {
                    continue;
                }
                let al = a * &lf;
                for k in 0..n {
                    let b = other.reduced(l, k);
                    if !b.is_zero() {
                        out.entries[j * n + k] += &al * b;
                    }
                }
            }
        }
        out
    }
}

/// Eigenvalue of the truncated `:exp(μ a†a):` on `|n⟩`, computed from the
/// operator's exact matrix element.
pub fn normal_exp_check(mu: &Rational, n: usize) -> Rational {
    let op: GradedOp<Scalar> = GradedOp::even(normal_exponential(mu, n as u32));
    let m = op.fock_matrix_exact(n).expect("rational coefficients");
    m.reduced(n, n) * Rational::from_integer(factorial(n))
}

/// `⟨n| (a†)^k a^k |n⟩ = n!/(n-k)!`; used by tests as a closed-form reference.
pub fn number_moment(n: usize, k: usize) -> BigInt {
    if k > n {
        BigInt::zero()
    } else {
        falling(n, k)
    }
}

#[derive(Serialize, Deserialize)]
struct GradedOpJson<C> {
    grade: u8,
    terms: Vec<(u32, u32, C)>,
}

impl<C: Coeff + Serialize> Serialize for GradedOp<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<(u32, u32, C)> = self.body.terms().map(|(m, n, c)| (m, n, c.clone())).collect();
        GradedOpJson { grade: self.grade.bit(), terms }.serialize(s)
    }
}

impl<'de, C: Coeff + Deserialize<'de>> Deserialize<'de> for GradedOp<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j: GradedOpJson<C> = GradedOpJson::deserialize(d)?;
        let grade = Grade::from_bit(j.grade).map_err(D::Error::custom)?;
        Ok(GradedOp::new(grade, NormalOp::from_terms(j.terms)))
    }
}
