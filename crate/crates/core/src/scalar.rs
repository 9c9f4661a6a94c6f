//! Exact coefficient rings.
//!
//! Every symbolic identity in this crate is checked over big rationals, either
//! directly or through sparse Laurent polynomials in the model parameters:
//!
//! * [`Scalar`]: polynomials in `g` (Laurent) and `Δ` (nonnegative powers),
//! * [`EpsScalar`]: the same with an additional polynomial variable `ε`, used
//!   where the bias has to stay symbolic (gauge solutions, the derivation
//!   engine).
//!
//! Both are thin wrappers around [`MPoly`], a sparse map from exponent vectors
//! to rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for `n/d` as a big rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected so that exact
/// commands never see a float in disguise.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::ParseRational(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"num/den"` form used in all JSON output.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator beyond f64 range; scale down first
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn rational_pow(r: &Rational, e: i32) -> Option<Rational> {
    if e >= 0 {
        Some(num_traits::pow(r.clone(), e as usize))
    } else if r.is_zero() {
        None
    } else {
        Some(num_traits::pow(r.recip(), (-e) as usize))
    }
}

/// Sparse multivariate Laurent polynomial with rational coefficients.
///
/// Exponent vectors are ordered lexicographically; the last entry of the map
/// is the leading term.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MPoly<const N: usize> {
    terms: BTreeMap<[i32; N], Rational>,
}

impl<const N: usize> MPoly<N> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn monomial(exp: [i32; N], c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// The `i`-th variable.
    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ([i32; N], Rational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32; N], &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i32; N]) -> Option<&Rational> {
        self.terms.get(exp)
    }

    pub fn add_term(&mut self, exp: [i32; N], c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading(&self) -> Option<(&[i32; N], &Rational)> {
        self.terms.iter().next_back()
    }

    /// Value when the polynomial is a constant (including zero).
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                (e.iter().all(|&x| x == 0)).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<([i32; N], Rational)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((*e, c.clone()))
        } else {
            None
        }
    }

    /// Inverse of a monomial (a unit of the Laurent ring).
    pub fn monomial_inverse(&self) -> Option<Self> {
        let (e, c) = self.as_monomial()?;
        let mut ne = [0; N];
        for i in 0..N {
            ne[i] = -e[i];
        }
        Some(Self::monomial(ne, c.recip()))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * r)).collect() }
    }

    pub fn mul_monomial(&self, exp: &[i32; N], r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = *e;
                    for i in 0..N {
                        ne[i] += exp[i];
                    }
                    (ne, c * r)
                })
                .collect(),
        }
    }

    pub fn min_exponent(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).min()
    }

    pub fn max_exponent(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] != 0)
    }

    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().map(|x| x.abs()).sum::<i32>()).max().unwrap_or(0)
    }

    /// Substitutes `var = value`, leaving the exponent slot at zero.
    /// Fails when a negative power of a zero value would be required.
    pub fn substitute(&self, var: usize, value: &Rational) -> Option<Self> {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let f = rational_pow(value, e[var])?;
            let mut ne = *e;
            ne[var] = 0;
            out.add_term(ne, c * f);
        }
        Some(out)
    }

    /// Multiplies the coefficient of every term by `(-1)^{e[var]}`.
    pub fn negate_var(&self, var: usize) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, if e[var] % 2 != 0 { -c } else { c.clone() })).collect() }
    }

    pub fn eval(&self, vals: &[Rational; N]) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..N {
                t *= rational_pow(&vals[i], e[i])?;
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, vals: &[f64; N]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = rational_to_f64(c);
                for i in 0..N {
                    t *= vals[i].powi(e[i]);
                }
                t
            })
            .sum()
    }

    /// Exact division in the Laurent ring. Returns `None` when `d` does not
    /// divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if let Some(inv) = d.monomial_inverse() {
            return Some(self * &inv);
        }
        let (dl, dc) = d.leading().map(|(e, c)| (*e, c.clone()))?;
        let mut rem = self.clone();
        let mut q = Self::zero();
        // each step fixes one quotient term; an exact quotient has finitely many
        let cap = 4 * (self.len() + 1) * (d.len() + 1) + 64;
        for _ in 0..cap {
            let Some((rl, rc)) = rem.leading().map(|(e, c)| (*e, c.clone())) else {
                return Some(q);
            };
            let mut te = [0; N];
            for i in 0..N {
                te[i] = rl[i] - dl[i];
            }
            let tc = rc / &dc;
            rem = &rem - &d.mul_monomial(&te, &tc);
            q.add_term(te, tc);
        }
        None
    }

    /// Human-readable form with the given variable names.
    pub fn fmt_with(&self, names: [&str; N]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let is_const = e.iter().all(|&x| x == 0);
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || is_const {
                if a.is_integer() {
                    factors.push(a.numer().to_string());
                } else {
                    factors.push(format!("({})", a));
                }
            }
            for i in 0..N {
                match e[i] {
                    0 => {}
                    1 => factors.push(names[i].to_string()),
                    k => factors.push(format!("{}^{}", names[i], k)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl<const N: usize> fmt::Debug for MPoly<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(e, c)| (e, c.to_string()))).finish()
    }
}

impl<'a, const N: usize> Add<&'a MPoly<N>> for &'a MPoly<N> {
    type Output = MPoly<N>;
    fn add(self, rhs: &MPoly<N>) -> MPoly<N> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<const N: usize> AddAssign<&MPoly<N>> for MPoly<N> {
    fn add_assign(&mut self, rhs: &MPoly<N>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl<const N: usize> SubAssign<&MPoly<N>> for MPoly<N> {
    fn sub_assign(&mut self, rhs: &MPoly<N>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c);
        }
    }
}

impl<'a, const N: usize> Sub<&'a MPoly<N>> for &'a MPoly<N> {
    type Output = MPoly<N>;
    fn sub(self, rhs: &MPoly<N>) -> MPoly<N> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a, const N: usize> Mul<&'a MPoly<N>> for &'a MPoly<N> {
    type Output = MPoly<N>;
    fn mul(self, rhs: &MPoly<N>) -> MPoly<N> {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = *ea;
                for i in 0..N {
                    e[i] += eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl<const N: usize> Neg for &MPoly<N> {
    type Output = MPoly<N>;
    fn neg(self) -> MPoly<N> {
        MPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

/// Operations every coefficient ring of the operator algebra provides.
///
/// Method names avoid clashing with the `std::ops` traits the concrete types
/// also implement.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: Rational) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, r: &Rational) -> Self;
    /// Coupling `g` as an element of the ring.
    fn g() -> Self;
    /// Level splitting `Δ` as an element of the ring.
    fn delta() -> Self;
    /// Image under `Δ ↦ -Δ`.
    fn negate_delta(&self) -> Self;
    /// Floating-point value at the given parameters; the bias is ignored by
    /// rings that do not carry it.
    fn eval_f64(&self, g: f64, delta: f64, eps: f64) -> f64;
    /// The value if the element is a rational constant.
    fn constant(&self) -> Option<Rational>;
    fn from_int(n: i64) -> Self {
        Self::from_rational(rat_int(n))
    }
}

macro_rules! wrapper_ops {
    ($ty:ident) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                $ty(&self.0 + &rhs.0)
            }
        }
        impl<'a> Add<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                $ty(&self.0 + &rhs.0)
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                $ty(&self.0 - &rhs.0)
            }
        }
        impl<'a> Sub<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                $ty(&self.0 - &rhs.0)
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                $ty(&self.0 * &rhs.0)
            }
        }
        impl<'a> Mul<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                $ty(&self.0 * &rhs.0)
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-&self.0)
            }
        }
        impl<'a> Neg for &'a $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-&self.0)
            }
        }
        impl AddAssign<&$ty> for $ty {
            fn add_assign(&mut self, rhs: &$ty) {
                self.0 += &rhs.0;
            }
        }
        impl SubAssign<&$ty> for $ty {
            fn sub_assign(&mut self, rhs: &$ty) {
                self.0 -= &rhs.0;
            }
        }
        impl Zero for $ty {
            fn zero() -> Self {
                $ty(MPoly::zero())
            }
            fn is_zero(&self) -> bool {
                self.0.is_zero()
            }
        }
        impl One for $ty {
            fn one() -> Self {
                $ty(MPoly::one())
            }
        }
        impl From<Rational> for $ty {
            fn from(r: Rational) -> Self {
                $ty(MPoly::constant(r))
            }
        }
        impl From<i64> for $ty {
            fn from(n: i64) -> Self {
                $ty(MPoly::constant(rat_int(n)))
            }
        }
    };
}

/// Laurent polynomial in `g` with polynomial dependence on `Δ`.
///
/// Exponent layout is `[g, Δ]`; `Δ` exponents are never negative.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar(MPoly<2>);

wrapper_ops!(Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(MPoly::<2>::zero())
    }

    pub fn one() -> Self {
        Scalar(MPoly::<2>::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn g() -> Self {
        Scalar(MPoly::var(0))
    }

    pub fn delta() -> Self {
        Scalar(MPoly::var(1))
    }

    pub fn constant(r: Rational) -> Self {
        Scalar(MPoly::constant(r))
    }

    /// `c · g^g_exp · Δ^delta_exp`.
    pub fn term(g_exp: i32, delta_exp: u32, c: Rational) -> Self {
        Scalar(MPoly::monomial([g_exp, delta_exp as i32], c))
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, u32, Rational)>>(it: I) -> Self {
        Scalar(MPoly::from_terms(it.into_iter().map(|(a, b, c)| ([a, b as i32], c))))
    }

    pub fn poly(&self) -> &MPoly<2> {
        &self.0
    }

    /// Terms as `(g exponent, Δ exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i32, u32, &Rational)> {
        self.0.terms().map(|(e, c)| (e[0], e[1] as u32, c))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse, available for monomials only.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.0.monomial_inverse()?;
        (inv.min_exponent(1).unwrap_or(0) >= 0).then_some(Scalar(inv))
    }

    /// Exact substitution of numeric `g` and `Δ`.
    pub fn eval(&self, g: &Rational, delta: &Rational) -> Result<Rational> {
        self.0.eval(&[g.clone(), delta.clone()]).ok_or_else(|| Error::DivisionByZero(format!("{} at g = 0", self)))
    }

    /// Substitutes numeric values for `g` and/or `Δ`, keeping the other symbolic.
    pub fn substitute(&self, g: Option<&Rational>, delta: Option<&Rational>) -> Result<Self> {
        let mut p = self.0.clone();
        if let Some(gv) = g {
            p = p.substitute(0, gv).ok_or_else(|| Error::DivisionByZero(format!("{} at g = 0", self)))?;
        }
        if let Some(dv) = delta {
            p = p.substitute(1, dv).expect("Δ exponents are nonnegative");
        }
        Ok(Scalar(p))
    }
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn from_rational(r: Rational) -> Self {
        Scalar::constant(r)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, r: &Rational) -> Self {
        Scalar(self.0.scale(r))
    }
    fn g() -> Self {
        Scalar::g()
    }
    fn delta() -> Self {
        Scalar::delta()
    }
    fn negate_delta(&self) -> Self {
        Scalar(self.0.negate_var(1))
    }
    fn eval_f64(&self, g: f64, delta: f64, _eps: f64) -> f64 {
        self.0.eval_f64(&[g, delta])
    }
    fn constant(&self) -> Option<Rational> {
        self.0.constant_value()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.fmt_with(["g", "Δ"]))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(i32, u32, String)> = self.terms().map(|(a, b, c)| (a, b, format_rational(c))).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<(i32, i32, String)> = Vec::deserialize(d)?;
        let mut p = MPoly::zero();
        for (a, b, c) in v {
            if b < 0 {
                return Err(D::Error::custom("negative Δ exponent"));
            }
            let r = parse_rational(&c).map_err(D::Error::custom)?;
            p.add_term([a, b], r);
        }
        Ok(Scalar(p))
    }
}

/// Scalar extended by a symbolic bias `ε`. Exponent layout `[g, Δ, ε]`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EpsScalar(MPoly<3>);

wrapper_ops!(EpsScalar);

impl EpsScalar {
    pub fn zero() -> Self {
        EpsScalar(MPoly::<3>::zero())
    }

    pub fn one() -> Self {
        EpsScalar(MPoly::<3>::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn g() -> Self {
        EpsScalar(MPoly::var(0))
    }

    pub fn delta() -> Self {
        EpsScalar(MPoly::var(1))
    }

    pub fn eps() -> Self {
        EpsScalar(MPoly::var(2))
    }

    pub fn constant(r: Rational) -> Self {
        EpsScalar(MPoly::constant(r))
    }

    pub fn term(g_exp: i32, delta_exp: u32, eps_exp: u32, c: Rational) -> Self {
        EpsScalar(MPoly::monomial([g_exp, delta_exp as i32, eps_exp as i32], c))
    }

    pub fn from_poly(p: MPoly<3>) -> Result<Self> {
        if p.min_exponent(1).unwrap_or(0) < 0 || p.min_exponent(2).unwrap_or(0) < 0 {
            return Err(Error::InvalidInput(format!("negative Δ or ε power in {}", p.fmt_with(["g", "Δ", "ε"]))));
        }
        Ok(EpsScalar(p))
    }

    pub fn poly(&self) -> &MPoly<3> {
        &self.0
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = EpsScalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn has_eps(&self) -> bool {
        self.0.depends_on(2)
    }

    pub fn substitute_eps(&self, eps: &Rational) -> Self {
        EpsScalar(self.0.substitute(2, eps).expect("ε exponents are nonnegative"))
    }

    /// Drops to [`Scalar`] when the bias does not appear.
    pub fn to_scalar(&self) -> Option<Scalar> {
        if self.has_eps() {
            return None;
        }
        Some(Scalar(MPoly::from_terms(self.0.terms().map(|(e, c)| ([e[0], e[1]], c.clone())))))
    }

    /// Exact division by a monomial in `g` only, used for normalizations.
    pub fn div_g_power(&self, k: i32) -> Self {
        EpsScalar(self.0.mul_monomial(&[-k, 0, 0], &Rational::one()))
    }
}

impl From<&Scalar> for EpsScalar {
    fn from(s: &Scalar) -> Self {
        EpsScalar(MPoly::from_terms(s.0.terms().map(|(e, c)| ([e[0], e[1], 0], c.clone()))))
    }
}

impl Coeff for EpsScalar {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn from_rational(r: Rational) -> Self {
        EpsScalar::constant(r)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, r: &Rational) -> Self {
        EpsScalar(self.0.scale(r))
    }
    fn g() -> Self {
        EpsScalar::g()
    }
    fn delta() -> Self {
        EpsScalar::delta()
    }
    fn negate_delta(&self) -> Self {
        EpsScalar(self.0.negate_var(1))
    }
    fn eval_f64(&self, g: f64, delta: f64, eps: f64) -> f64 {
        self.0.eval_f64(&[g, delta, eps])
    }
    fn constant(&self) -> Option<Rational> {
        self.0.constant_value()
    }
}

impl fmt::Display for EpsScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.fmt_with(["g", "Δ", "ε"]))
    }
}

impl fmt::Debug for EpsScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EpsScalar({})", self)
    }
}

/// ε-free values serialize exactly like [`Scalar`]; symbolic bias adds a
/// third exponent to each entry.
impl Serialize for EpsScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if let Some(sc) = self.to_scalar() {
            return sc.serialize(s);
        }
        let v: Vec<(i32, i32, i32, String)> =
            self.0.terms().map(|(e, c)| (e[0], e[1], e[2], format_rational(c))).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpsScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        let mut p = MPoly::zero();
        for entry in v {
            let (exps, c) = entry.split_at(entry.len().saturating_sub(1));
            let c = c.first().and_then(|x| x.as_str()).ok_or_else(|| D::Error::custom("missing coefficient"))?;
            let mut e = [0i32; 3];
            if exps.len() != 2 && exps.len() != 3 {
                return Err(D::Error::custom("expected 2 or 3 exponents"));
            }
            for (i, x) in exps.iter().enumerate() {
                e[i] = x.as_i64().ok_or_else(|| D::Error::custom("bad exponent"))? as i32;
            }
            p.add_term(e, parse_rational(c).map_err(D::Error::custom)?);
        }
        EpsScalar::from_poly(p).map_err(D::Error::custom)
    }
}
