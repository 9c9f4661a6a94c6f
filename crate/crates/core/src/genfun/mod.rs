//! Generating functions of block-operator coefficients.
//!
//! A coefficient map `c_{m,n}` becomes `Σ c_{m,n} x^m y^n`; in symmetric
//! variables `u = xy`, `v = x + y` the commutation condition with `H` turns
//! into four linear PDEs for `d±(u, v)`, `b±(u, v)`. Functions live in the
//! span of polynomials and polynomials times `e^{-2u}`; the latter is the
//! generating function of a parity-graded operator.

mod derive;
mod elim;
pub mod upoly;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::block::{hamiltonian, BlockOp};
use crate::boson::{Grade, GradedOp, NormalOp};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rat, rat_int, Coeff, EpsScalar, Rational};

pub use derive::{derive_symmetry, ConditionKind, DerivationReport, DerivedSolution, EpsilonCondition};
pub use upoly::UPoly;

/// Polynomial in two commuting variables, read as `(u, v)` or `(x, y)`
/// depending on context.
#[derive(Clone, PartialEq, Default)]
pub struct Poly2<C = EpsScalar> {
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> Poly2<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    /// First variable.
    pub fn first() -> Self {
        Self::monomial(1, 0, C::one())
    }

    /// Second variable.
    pub fn second() -> Self {
        Self::monomial(0, 1, C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, C)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (i, j, c) in it {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(i, j)) {
            Some(old) => {
                let s = old.plus(&c);
                if s.is_zero() {
                    self.terms.remove(&(i, j));
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert((i, j), c);
            }
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Option<&C> {
        self.terms.get(&(i, j))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &C)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
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

    pub fn degree(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| if var == 0 { i } else { j }).max()
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly2<D> {
        Poly2::from_terms(self.terms().map(|(i, j, c)| (i, j, f(c))))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, c) in other.terms() {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map_coeffs(|x| x.times(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_coeffs(|x| x.scaled(r))
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                out.add_term(i + k, j + l, a.times(b));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(C::one()), |acc, _| acc.product(self))
    }

    /// Multiplies by `first^a · second^b`.
    pub fn shift(&self, a: u32, b: u32) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (i + a, j + b, c.clone())))
    }

    pub fn deriv(&self, var: usize) -> Self {
        Self::from_terms(self.terms().filter_map(|(i, j, c)| {
            let e = if var == 0 { i } else { j };
            (e > 0).then(|| {
                let c = c.scaled(&rat_int(e as i64));
                if var == 0 {
                    (i - 1, j, c)
                } else {
                    (i, j - 1, c)
                }
            })
        }))
    }

    /// Antiderivative in the second variable vanishing at zero.
    pub fn integrate_second(&self) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (i, j + 1, c.scaled(&rat(1, j as i64 + 1)))))
    }

    pub fn swap(&self) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (j, i, c.clone())))
    }

    /// `p(-first, second)`
    pub fn negate_first(&self) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (i, j, if i % 2 == 1 { c.negated() } else { c.clone() })))
    }
}

impl Poly2<EpsScalar> {
    pub fn substitute_eps(&self, eps: &Rational) -> Self {
        self.map_coeffs(|c| c.substitute_eps(eps))
    }
}

impl<C: Coeff> fmt::Display for Poly2<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_vars(f, "u", "v")
    }
}

impl<C: Coeff> fmt::Debug for Poly2<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({})", self)
    }
}

impl<C: Coeff> Poly2<C> {
    fn fmt_vars(&self, f: &mut fmt::Formatter<'_>, a: &str, b: &str) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let pw = |n: &str, e: u32| match e {
            0 => String::new(),
            1 => n.to_string(),
            _ => format!("{}^{}", n, e),
        };
        for (k, (i, j, c)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono = [pw(a, i), pw(b, j)].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join("·");
            if mono.is_empty() {
                write!(f, "({})", c)?;
            } else {
                write!(f, "({})·{}", c, mono)?;
            }
        }
        Ok(())
    }
}

/// `p(xy, x + y)` as a polynomial in `(x, y)`.
pub fn back_substitute<C: Coeff>(p: &Poly2<C>) -> Poly2<C> {
    let u = Poly2::<C>::monomial(1, 1, C::one());
    let v = Poly2::<C>::from_terms([(1, 0, C::one()), (0, 1, C::one())]);
    let mut out = Poly2::zero();
    for (i, j, c) in p.terms() {
        out = out.plus(&u.pow(i).product(&v.pow(j)).scale(c));
    }
    out
}

/// Rewrites a symmetric polynomial in `(x, y)` through `u = xy`, `v = x + y`.
pub fn symmetrize<C: Coeff>(p: &Poly2<C>) -> Result<Poly2<C>> {
    if p.swap() != *p {
        return Err(Error::InconsistentInput(format!("polynomial is not symmetric in x, y: {}", p)));
    }
    let mut rest = p.clone();
    let mut out = Poly2::zero();
    // lex-largest term x^a y^b (a >= b) is the leading term of u^b v^(a-b)
    while let Some((&(a, b), c)) = rest.terms.iter().next_back() {
        let c = c.clone();
        let piece = Poly2::monomial(b, a - b, c);
        rest = rest.minus(&back_substitute(&piece));
        out = out.plus(&piece);
    }
    Ok(out)
}

/// `p / (x - y)` for antisymmetric `p`.
pub fn divide_antisymmetric<C: Coeff>(p: &Poly2<C>) -> Result<Poly2<C>> {
    if p.swap() != p.negated() {
        return Err(Error::InconsistentInput(format!("polynomial is not antisymmetric in x, y: {}", p)));
    }
    let mut out = Poly2::zero();
    for (a, b, c) in p.terms() {
        if a <= b {
            continue;
        }
        // (x^a y^b - x^b y^a)/(x - y) = (xy)^b Σ_i x^i y^(a-b-1-i)
        for i in 0..(a - b) {
            out.add_term(b + i, b + (a - b - 1 - i), c.clone());
        }
    }
    Ok(out)
}

/// `poly + exp · e^{-2u}` (or `e^{-2xy}` in the `(x, y)` reading).
#[derive(Clone, PartialEq, Default)]
pub struct GenFun {
    pub poly: Poly2,
    pub exp: Poly2,
}

impl GenFun {
    pub fn new(poly: Poly2, exp: Poly2) -> Self {
        Self { poly, exp }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn poly(p: Poly2) -> Self {
        Self { poly: p, exp: Poly2::zero() }
    }

    pub fn exp(p: Poly2) -> Self {
        Self { poly: Poly2::zero(), exp: p }
    }

    pub fn constant(c: EpsScalar) -> Self {
        Self::poly(Poly2::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() && self.exp.is_zero()
    }

    fn lift(&self, f: impl Fn(&Poly2) -> Poly2) -> Self {
        Self { poly: f(&self.poly), exp: f(&self.exp) }
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self { poly: self.poly.plus(&o.poly), exp: self.exp.plus(&o.exp) }
    }

    pub fn minus(&self, o: &Self) -> Self {
        Self { poly: self.poly.minus(&o.poly), exp: self.exp.minus(&o.exp) }
    }

    pub fn negated(&self) -> Self {
        self.lift(|p| p.negated())
    }

    pub fn scale(&self, c: &EpsScalar) -> Self {
        self.lift(|p| p.scale(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.lift(|p| p.scale_rational(r))
    }

    /// Multiplication by a polynomial in `(u, v)`.
    pub fn mul_poly(&self, p: &Poly2) -> Self {
        self.lift(|q| q.product(p))
    }

    /// `∂u`, using `∂u(q e^{-2u}) = (∂u q - 2q) e^{-2u}`.
    pub fn d_u(&self) -> Self {
        Self { poly: self.poly.deriv(0), exp: self.exp.deriv(0).minus(&self.exp.scale_rational(&rat_int(2))) }
    }

    pub fn d_v(&self) -> Self {
        self.lift(|p| p.deriv(1))
    }

    /// `∫_0^v`
    pub fn integrate_v(&self) -> Self {
        self.lift(|p| p.integrate_second())
    }

    pub fn substitute_eps(&self, eps: &Rational) -> Self {
        self.lift(|p| p.substitute_eps(eps))
    }

    pub fn map_coeffs(&self, f: impl Fn(&EpsScalar) -> EpsScalar + Copy) -> Self {
        self.lift(|p| p.map_coeffs(f))
    }
}

impl fmt::Display for GenFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.poly.is_zero(), self.exp.is_zero()) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.poly),
            (true, false) => write!(f, "[{}]·e^(-2u)", self.exp),
            (false, false) => write!(f, "{} + [{}]·e^(-2u)", self.poly, self.exp),
        }
    }
}

impl fmt::Debug for GenFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenFun({})", self)
    }
}

/// The bias a solution tuple is attached to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bias {
    /// Coefficients may contain `ε`.
    Symbolic,
    Value(Rational),
}

impl Bias {
    /// `ε` as a coefficient.
    pub fn scalar(&self) -> EpsScalar {
        match self {
            Bias::Symbolic => EpsScalar::eps(),
            Bias::Value(r) => EpsScalar::constant(r.clone()),
        }
    }
}

/// `(d+, d-, b+, b-)` in symmetric variables, with `B-(x,y) = (x - y)·b-(xy, x+y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSolution {
    pub d_plus: GenFun,
    pub d_minus: GenFun,
    pub b_plus: GenFun,
    pub b_minus: GenFun,
    pub epsilon: Bias,
}

impl QuadSolution {
    pub fn new(d_plus: GenFun, d_minus: GenFun, b_plus: GenFun, b_minus: GenFun, epsilon: Bias) -> Self {
        Self { d_plus, d_minus, b_plus, b_minus, epsilon }
    }

    pub fn parts(&self) -> [&GenFun; 4] {
        [&self.d_plus, &self.d_minus, &self.b_plus, &self.b_minus]
    }

    pub fn is_zero(&self) -> bool {
        self.parts().iter().all(|p| p.is_zero())
    }

    fn map(&self, f: impl Fn(&GenFun) -> GenFun) -> Self {
        Self {
            d_plus: f(&self.d_plus),
            d_minus: f(&self.d_minus),
            b_plus: f(&self.b_plus),
            b_minus: f(&self.b_minus),
            epsilon: self.epsilon.clone(),
        }
    }

    pub fn scale(&self, c: &EpsScalar) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self {
            d_plus: self.d_plus.plus(&o.d_plus),
            d_minus: self.d_minus.plus(&o.d_minus),
            b_plus: self.b_plus.plus(&o.b_plus),
            b_minus: self.b_minus.plus(&o.b_minus),
            epsilon: self.epsilon.clone(),
        }
    }

    /// True when `self · c = other · d` for nonzero coefficients `c`, `d`.
    pub fn is_proportional_to(&self, other: &Self) -> bool {
        let first = |q: &Self| {
            q.parts().into_iter().flat_map(|f| f.poly.terms().chain(f.exp.terms())).next().map(|(_, _, c)| c.clone())
        };
        match (first(self), first(other)) {
            (Some(c), Some(d)) => {
                let a = self.scale(&d);
                let b = other.scale(&c);
                a.parts() == b.parts()
            }
            (None, None) => true,
            _ => false,
        }
    }

    /// Fixes a symbolic bias.
    pub fn at_bias(&self, eps: &Rational) -> Self {
        let mut q = self.map(|p| p.substitute_eps(eps));
        q.epsilon = Bias::Value(eps.clone());
        q
    }
}

/// The four PDE left-hand sides, in the order
/// - `∂v d+ - g ∂u b+`
/// - `∂v d- + 2(ε + gv) b- + g(2∂v + v∂u) b-`
/// - `∂v b+ - g ∂u d+ + 2Δ² b-`
/// - `[(v² - 4u)∂v + v] b- + 2b+ + [2ε + g(2v + 2∂v + v∂u)] d-`
pub fn pde_residual(q: &QuadSolution) -> [GenFun; 4] {
    let q = match &q.epsilon {
        Bias::Value(r) => q.at_bias(r),
        Bias::Symbolic => q.clone(),
    };
    let eps = q.epsilon.scalar();
    let g = EpsScalar::g();
    let (dp, dm, bp, bm) = (&q.d_plus, &q.d_minus, &q.b_plus, &q.b_minus);
    let r25 = dp.d_v().minus(&bp.d_u().scale(&g));
    let r26 = dm.d_v().plus(&l26(bm, &eps));
    let two_d2 = EpsScalar::delta().pow(2).scaled(&rat_int(2));
    let r27 = bp.d_v().minus(&dp.d_u().scale(&g)).plus(&bm.scale(&two_d2));
    let r28 = l28_bminus(bm).plus(&bp.scale_rational(&rat_int(2))).plus(&l28_dminus(dm, &eps));
    [r25, r26, r27, r28]
}

/// `2(ε + gv) b + g(2∂v + v∂u) b`
fn l26(b: &GenFun, eps: &EpsScalar) -> GenFun {
    let g = EpsScalar::g();
    let v = Poly2::<EpsScalar>::second();
    let lin = Poly2::from_terms([(0, 0, eps.scaled(&rat_int(2))), (0, 1, g.scaled(&rat_int(2)))]);
    b.mul_poly(&lin).plus(&b.d_v().scale(&g.scaled(&rat_int(2)))).plus(&b.d_u().mul_poly(&v).scale(&g))
}

/// `[(v² - 4u)∂v + v] b`
fn l28_bminus(b: &GenFun) -> GenFun {
    let w = Poly2::from_terms([(0, 2, EpsScalar::one()), (1, 0, EpsScalar::from(-4))]);
    b.d_v().mul_poly(&w).plus(&b.mul_poly(&Poly2::second()))
}

/// `[2ε + g(2v + 2∂v + v∂u)] d`
fn l28_dminus(d: &GenFun, eps: &EpsScalar) -> GenFun {
    let g = EpsScalar::g();
    let lin = Poly2::from_terms([(0, 0, eps.scaled(&rat_int(2))), (0, 1, g.scaled(&rat_int(2)))]);
    d.mul_poly(&lin).plus(&d.d_v().scale(&g.scaled(&rat_int(2)))).plus(&d.d_u().mul_poly(&Poly2::second()).scale(&g))
}

/// Generating functions `(A, B, C, D)` of a block operator, in `(x, y)`.
/// An odd entry `𝒫·X(a†, a)` contributes `X(-x, y)·e^{-2xy}`.
pub fn block_generating_functions(j: &BlockOp<EpsScalar>) -> [GenFun; 4] {
    let gf = |e: &GradedOp<EpsScalar>| {
        let p = Poly2::from_terms(e.body().terms().map(|(m, n, c)| (m, n, c.clone())));
        match e.grade() {
            Grade::Even => GenFun::poly(p),
            Grade::Odd => GenFun::exp(p.negate_first()),
        }
    };
    [gf(j.entry(0, 0)), gf(j.entry(0, 1)), gf(j.entry(1, 0)), gf(j.entry(1, 1))]
}

fn div_delta(p: &Poly2) -> Result<Poly2> {
    let mut out = Poly2::zero();
    for (i, j, c) in p.terms() {
        let q = c.poly().mul_monomial(&[0, -1, 0], &rat_int(1));
        let q = EpsScalar::from_poly(q)
            .map_err(|_| Error::InconsistentInput(format!("coefficient {} is not divisible by Δ", c)))?;
        out.add_term(i, j, q);
    }
    Ok(out)
}

fn check_even_in_delta(p: &Poly2, what: &str) -> Result<()> {
    for (_, _, c) in p.terms() {
        if c.poly().terms().any(|(e, _)| e[1] % 2 != 0) {
            return Err(Error::InconsistentInput(format!("{} is not even in Δ: {}", what, c)));
        }
    }
    Ok(())
}

/// Splits `(A, B, C, D)` in `(x, y)` into `(d+, d-, b+, b-)` in `(u, v)`.
pub fn delta_decompose(a: &GenFun, b: &GenFun, c: &GenFun, d: &GenFun, epsilon: Bias) -> Result<QuadSolution> {
    let half = rat(1, 2);
    let part = |f: &dyn Fn(&Poly2, &Poly2) -> Poly2, x: &GenFun, y: &GenFun| -> GenFun {
        GenFun::new(f(&x.poly, &y.poly).scale_rational(&half), f(&x.exp, &y.exp).scale_rational(&half))
    };
    let sum = |x: &Poly2, y: &Poly2| x.plus(y);
    let diff = |x: &Poly2, y: &Poly2| x.minus(y);
    let dp = part(&sum, d, a);
    let dm = part(&diff, d, a);
    let bp = part(&sum, b, c);
    let bm = part(&diff, b, c);
    let dm = GenFun::new(div_delta(&dm.poly)?, div_delta(&dm.exp)?);
    let bm = GenFun::new(div_delta(&bm.poly)?, div_delta(&bm.exp)?);
    for (f, name) in [(&dp, "D+"), (&dm, "D-"), (&bp, "B+"), (&bm, "B-")] {
        check_even_in_delta(&f.poly, name)?;
        check_even_in_delta(&f.exp, name)?;
    }
    let sym = |f: &GenFun| -> Result<GenFun> { Ok(GenFun::new(symmetrize(&f.poly)?, symmetrize(&f.exp)?)) };
    let anti = |f: &GenFun| -> Result<GenFun> {
        Ok(GenFun::new(symmetrize(&divide_antisymmetric(&f.poly)?)?, symmetrize(&divide_antisymmetric(&f.exp)?)?))
    };
    Ok(QuadSolution::new(sym(&dp)?, sym(&dm)?, sym(&bp)?, anti(&bm)?, epsilon))
}

/// `(A, B, C, D)` in `(x, y)` from a tuple; inverse of [`delta_decompose`].
pub fn recombine(q: &QuadSolution) -> [GenFun; 4] {
    let xy = |f: &GenFun| GenFun::new(back_substitute(&f.poly), back_substitute(&f.exp));
    let x_minus_y = Poly2::from_terms([(1, 0, EpsScalar::one()), (0, 1, EpsScalar::from(-1))]);
    let dp = xy(&q.d_plus);
    let dm = xy(&q.d_minus).scale(&EpsScalar::delta());
    let bp = xy(&q.b_plus);
    let bm = xy(&q.b_minus).mul_poly(&x_minus_y).scale(&EpsScalar::delta());
    [dp.minus(&dm), bp.plus(&bm), bp.minus(&bm), dp.plus(&dm)]
}

/// Rebuilds the block operator; the exponential tail becomes the parity grade.
pub fn genfun_to_blockop(q: &QuadSolution) -> Result<BlockOp<EpsScalar>> {
    let q = match &q.epsilon {
        Bias::Value(r) => q.at_bias(r),
        Bias::Symbolic => q.clone(),
    };
    let [a, b, c, d] = recombine(&q);
    let entry = |f: &GenFun, label: &str| -> Result<GradedOp<EpsScalar>> {
        let to_op = |p: &Poly2| NormalOp::from_terms(p.terms().map(|(m, n, c)| (m, n, c.clone())));
        match (f.poly.is_zero(), f.exp.is_zero()) {
            (_, true) => Ok(GradedOp::even(to_op(&f.poly))),
            (true, false) => Ok(GradedOp::odd(to_op(&f.exp.negate_first()))),
            (false, false) => {
                Err(Error::RepresentationMiss(format!("entry {} mixes a polynomial part with an e^(-2xy) tail", label)))
            }
        }
    };
    Ok(BlockOp::new(entry(&a, "11")?, entry(&b, "12")?, entry(&c, "21")?, entry(&d, "22")?))
}

/// Tuple for `J = H^k`, `k <= 4`, with symbolic bias.
pub fn gauge_solution(k: u32) -> Result<QuadSolution> {
    let g = EpsScalar::g();
    let d = EpsScalar::delta();
    let e = EpsScalar::eps();
    let c = |x: i64| EpsScalar::from(x);
    let t = |i: u32, j: u32, x: EpsScalar| (i, j, x);
    let gp = |k: u32| g.pow(k);
    let pf = |ts: Vec<(u32, u32, EpsScalar)>| GenFun::poly(Poly2::from_terms(ts));
    let d2 = d.pow(2);
    let e2 = e.pow(2);
    let q = match k {
        0 => QuadSolution::new(pf(vec![t(0, 0, c(1))]), GenFun::zero(), GenFun::zero(), GenFun::zero(), Bias::Symbolic),
        1 => QuadSolution::new(
            pf(vec![t(1, 0, c(1))]),
            pf(vec![t(0, 0, c(-1))]),
            pf(vec![t(0, 0, e.clone()), t(0, 1, g.clone())]),
            GenFun::zero(),
            Bias::Symbolic,
        ),
        2 => {
            // u(u+1) + gv(2ε + gv) + g² + Δ² + ε²
            let dp = pf(vec![
                t(2, 0, c(1)),
                t(1, 0, c(1)),
                t(0, 1, &g * &e.scaled(&rat_int(2))),
                t(0, 2, gp(2)),
                t(0, 0, &(&gp(2) + &d2) + &e2),
            ]);
            let dm = pf(vec![t(1, 0, c(-2))]);
            // gv(2u + 1) + 2εu
            let bp = pf(vec![t(1, 1, g.scaled(&rat_int(2))), t(0, 1, g.clone()), t(1, 0, e.scaled(&rat_int(2)))]);
            QuadSolution::new(dp, dm, bp, GenFun::zero(), Bias::Symbolic)
        }
        3 => {
            // u(u² + 3u + 3Δ² + 1 + 3ε²) + 3εgv(2u + 1) + 3g²(u + 1)v² + g²(3u + 1)
            let three = rat_int(3);
            let ge = &g * &e;
            let dp = pf(vec![
                t(3, 0, c(1)),
                t(2, 0, c(3)),
                t(1, 0, &(&d2.scaled(&three) + &c(1)) + &e2.scaled(&three)),
                t(1, 1, ge.scaled(&rat_int(6))),
                t(0, 1, ge.scaled(&three)),
                t(1, 2, gp(2).scaled(&three)),
                t(0, 2, gp(2).scaled(&three)),
                t(1, 0, gp(2).scaled(&three)),
                t(0, 0, gp(2)),
            ]);
            // -3u(u+1) - 2εgv - g²(1 + v²) - Δ² - ε²
            let dm = pf(vec![
                t(2, 0, c(-3)),
                t(1, 0, c(-3)),
                t(0, 1, ge.scaled(&rat_int(-2))),
                t(0, 0, -&gp(2)),
                t(0, 2, -&gp(2)),
                t(0, 0, -&d2),
                t(0, 0, -&e2),
            ]);
            // 3εu(u+1) + gv(1 + 3ε² + Δ² + 3u(u+2)) + 3εg²(v² + 1) + g³v(v² + 3) + ε³ + εΔ²
            let eg2 = &e * &gp(2);
            let bp = pf(vec![
                t(2, 0, e.scaled(&three)),
                t(1, 0, e.scaled(&three)),
                t(0, 1, &(&g + &(&g * &e2).scaled(&three)) + &(&g * &d2)),
                t(2, 1, g.scaled(&three)),
                t(1, 1, g.scaled(&rat_int(6))),
                t(0, 2, eg2.scaled(&three)),
                t(0, 0, eg2.scaled(&three)),
                t(0, 3, gp(3)),
                t(0, 1, gp(3).scaled(&three)),
                t(0, 0, &e.pow(3) + &(&e * &d2)),
            ]);
            let bm = pf(vec![t(0, 0, g.clone())]);
            QuadSolution::new(dp, dm, bp, bm, Bias::Symbolic)
        }
        4 => tuple_of_operator(&hamiltonian(&g, &d, &e).pow(4), Bias::Symbolic)?,
        _ => return Err(Error::OutOfRange { what: "gauge power k", detail: format!("{} (supported: 0..=4)", k) }),
    };
    Ok(q)
}

/// `(d+, d-, b+, b-)` for an operator satisfying the Δ-flip with sign `+1`.
pub fn tuple_of_operator(j: &BlockOp<EpsScalar>, epsilon: Bias) -> Result<QuadSolution> {
    let [a, b, c, d] = block_generating_functions(j);
    delta_decompose(&a, &b, &c, &d, epsilon)
}

/// Nontrivial tuple at `ε = 0`: `d- = e^{-2u}`, all else zero.
pub fn zero_bias_tuple() -> QuadSolution {
    QuadSolution::new(
        GenFun::zero(),
        GenFun::exp(Poly2::constant(EpsScalar::one())),
        GenFun::zero(),
        GenFun::zero(),
        Bias::Value(rat_int(0)),
    )
}

/// Nontrivial tuple at `ε = ±1/2`.
pub fn half_bias_tuple(eps: &Rational) -> Result<QuadSolution> {
    if *eps == rat(1, 2) || *eps == rat(-1, 2) {
        let g = EpsScalar::g();
        let e = EpsScalar::constant(eps.clone());
        // d+ = -Δ²/g e^{-2u}, d- = 2(g - εv) e^{-2u}, b+ = 0, b- = e^{-2u}
        let dp = GenFun::exp(Poly2::constant(EpsScalar::term(-1, 2, 0, rat_int(-1))));
        let dm = GenFun::exp(Poly2::from_terms([(0, 0, g.scaled(&rat_int(2))), (0, 1, e.scaled(&rat_int(-2)))]));
        let bm = GenFun::exp(Poly2::constant(EpsScalar::one()));
        Ok(QuadSolution::new(dp, dm, GenFun::zero(), bm, Bias::Value(eps.clone())))
    } else {
        Err(Error::CatalogMiss { eps: eps.clone() })
    }
}

/// Nontrivial tuple at `ε = ±1`, multiplied through by `Δ²` so that every
/// coefficient is polynomial in `Δ`.
pub fn unit_bias_tuple(eps: &Rational) -> Result<QuadSolution> {
    if *eps != rat_int(1) && *eps != rat_int(-1) {
        return Err(Error::CatalogMiss { eps: eps.clone() });
    }
    let g = EpsScalar::g();
    let d2 = EpsScalar::delta().pow(2);
    let e = EpsScalar::constant(eps.clone());
    let g2 = g.pow(2);
    let ge = &g * &e;
    // d+ = 2gΔ²(2gε - v)
    let dp = GenFun::exp(Poly2::from_terms([
        (0, 0, &(&g2 * &d2) * &e.scaled(&rat_int(4))),
        (0, 1, (&g * &d2).scaled(&rat_int(-2))),
    ]));
    let bp = GenFun::exp(Poly2::constant(d2.clone()));
    // b- = 2g²(v - 2gε)
    let bm = GenFun::exp(Poly2::from_terms([(0, 1, g2.scaled(&rat_int(2))), (0, 0, (&g2 * &ge).scaled(&rat_int(-4)))]));
    // d- = 4g²ε(u - g²) + 2g²v(2g - εv) - εΔ²
    let dm = GenFun::exp(Poly2::from_terms([
        (1, 0, (&g2 * &e).scaled(&rat_int(4))),
        (0, 0, (&(&g2 * &g2) * &e).scaled(&rat_int(-4))),
        (0, 1, g2.pow(1).times(&g).scaled(&rat_int(4))),
        (0, 2, (&g2 * &e).scaled(&rat_int(-2))),
        (0, 0, -&(&e * &d2)),
    ]));
    Ok(QuadSolution::new(dp, dm, bp, bm, Bias::Value(eps.clone())))
}

#[derive(Serialize, Deserialize)]
struct GenFunJson {
    poly: Vec<(u32, u32, EpsScalar)>,
    exp: Vec<(u32, u32, EpsScalar)>,
}

impl From<&GenFun> for GenFunJson {
    fn from(f: &GenFun) -> Self {
        let ts = |p: &Poly2| p.terms().map(|(i, j, c)| (i, j, c.clone())).collect();
        GenFunJson { poly: ts(&f.poly), exp: ts(&f.exp) }
    }
}

impl Serialize for GenFun {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GenFunJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenFun {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GenFunJson::deserialize(d)?;
        Ok(GenFun::new(Poly2::from_terms(j.poly), Poly2::from_terms(j.exp)))
    }
}

impl Serialize for Bias {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bias::Symbolic => s.serialize_str("symbolic"),
            Bias::Value(r) => s.serialize_str(&format_rational(r)),
        }
    }
}

impl<'de> Deserialize<'de> for Bias {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "symbolic" {
            return Ok(Bias::Symbolic);
        }
        parse_rational(&s).map(Bias::Value).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct QuadJson {
    epsilon: Bias,
    d_plus: GenFun,
    d_minus: GenFun,
    b_plus: GenFun,
    b_minus: GenFun,
}

impl Serialize for QuadSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadJson {
            epsilon: self.epsilon.clone(),
            d_plus: self.d_plus.clone(),
            d_minus: self.d_minus.clone(),
            b_plus: self.b_plus.clone(),
            b_minus: self.b_minus.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadSolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = QuadJson::deserialize(d)?;
        Ok(QuadSolution::new(j.d_plus, j.d_minus, j.b_plus, j.b_minus, j.epsilon))
    }
}

impl fmt::Display for QuadSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.epsilon {
            Bias::Symbolic => writeln!(f, "ε symbolic")?,
            Bias::Value(r) => writeln!(f, "ε = {}", format_rational(r))?,
        }
        writeln!(f, "d+ = {}", self.d_plus)?;
        writeln!(f, "d- = {}", self.d_minus)?;
        writeln!(f, "b+ = {}", self.b_plus)?;
        write!(f, "b- = {}", self.b_minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{j_catalog, Basis, ModelParams};

    type P = Poly2<EpsScalar>;

    fn xy(terms: &[(u32, u32, i64)]) -> P {
        P::from_terms(terms.iter().map(|&(i, j, c)| (i, j, EpsScalar::from(c))))
    }

    fn all_zero(r: &[GenFun; 4]) -> bool {
        r.iter().all(|x| x.is_zero())
    }

    #[test]
    fn symmetrize_examples() {
        assert_eq!(symmetrize(&xy(&[(1, 0, 1), (0, 1, 1)])).unwrap(), xy(&[(0, 1, 1)]));
        assert_eq!(symmetrize(&xy(&[(2, 0, 1), (0, 2, 1)])).unwrap(), xy(&[(0, 2, 1), (1, 0, -2)]));
        assert_eq!(symmetrize(&xy(&[(2, 1, 1), (1, 2, 1)])).unwrap(), xy(&[(1, 1, 1)]));
        assert!(matches!(symmetrize(&xy(&[(1, 0, 1)])), Err(Error::InconsistentInput(_))));
    }

    #[test]
    fn antisymmetric_division() {
        // x³ - y³ = (x - y)(x² + xy + y²) → v² - u
        let q = divide_antisymmetric(&xy(&[(3, 0, 1), (0, 3, -1)])).unwrap();
        assert_eq!(symmetrize(&q).unwrap(), xy(&[(0, 2, 1), (1, 0, -1)]));
        assert!(divide_antisymmetric(&xy(&[(1, 0, 1), (0, 1, 1)])).is_err());
    }

    #[test]
    fn decompose_identity_and_hamiltonian() {
        let one = GenFun::constant(EpsScalar::one());
        let z = GenFun::zero();
        let q = delta_decompose(&one, &z, &z, &one, Bias::Symbolic).unwrap();
        assert_eq!(q, gauge_solution(0).unwrap());
        for k in 1..=3 {
            let h = hamiltonian(&EpsScalar::g(), &EpsScalar::delta(), &EpsScalar::eps());
            let q = tuple_of_operator(&h.pow(k), Bias::Symbolic).unwrap();
            assert_eq!(q, gauge_solution(k).unwrap(), "k = {}", k);
        }
    }

    #[test]
    fn equal_off_diagonal_gives_zero_bminus() {
        let b = GenFun::poly(xy(&[(1, 0, 2), (0, 1, 2), (0, 0, 5)]));
        let z = GenFun::zero();
        let q = delta_decompose(&z, &b, &b, &z, Bias::Symbolic).unwrap();
        assert!(q.b_minus.is_zero());
    }

    #[test]
    fn gauge_tuples_solve_the_pdes() {
        for k in 0..=4 {
            let q = gauge_solution(k).unwrap();
            assert!(all_zero(&pde_residual(&q)), "k = {}", k);
        }
        assert_eq!(
            gauge_solution(4).unwrap().b_minus,
            GenFun::poly(P::from_terms([
                (0, 0, EpsScalar::g().scaled(&rat_int(2))),
                (1, 0, EpsScalar::g().scaled(&rat_int(4))),
            ]))
        );
        assert!(matches!(gauge_solution(5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn nontrivial_tuples_solve_the_pdes() {
        assert!(all_zero(&pde_residual(&zero_bias_tuple())));
        for e in [rat(1, 2), rat(-1, 2)] {
            assert!(all_zero(&pde_residual(&half_bias_tuple(&e).unwrap())));
        }
        for e in [rat_int(1), rat_int(-1)] {
            assert!(all_zero(&pde_residual(&unit_bias_tuple(&e).unwrap())));
        }
        let mut wrong = half_bias_tuple(&rat(1, 2)).unwrap();
        wrong.epsilon = Bias::Value(rat(3, 10));
        assert!(!all_zero(&pde_residual(&wrong)));
    }

    #[test]
    fn gauge_one_rebuilds_hamiltonian() {
        let j = genfun_to_blockop(&gauge_solution(1).unwrap()).unwrap();
        assert_eq!(j, hamiltonian(&EpsScalar::g(), &EpsScalar::delta(), &EpsScalar::eps()));
    }

    #[test]
    fn tuples_rebuild_catalog_operators() {
        let j0 = genfun_to_blockop(&zero_bias_tuple()).unwrap();
        let cat0 = j_catalog(&ModelParams::symbolic(rat_int(0)), Basis::Original).unwrap().to_eps();
        assert_eq!(j0, cat0.scale(&-EpsScalar::delta()));
        for e in [rat(1, 2), rat(-1, 2)] {
            let j = genfun_to_blockop(&half_bias_tuple(&e).unwrap()).unwrap();
            let cat = j_catalog(&ModelParams::symbolic(e.clone()), Basis::Original).unwrap().to_eps();
            assert_eq!(j, cat.scale(&-EpsScalar::delta()), "ε = {}", e);
        }
    }

    #[test]
    fn unit_bias_tuple_rebuilds_catalog_operator() {
        for e in [rat_int(1), rat_int(-1)] {
            let j = genfun_to_blockop(&unit_bias_tuple(&e).unwrap()).unwrap();
            let cat = j_catalog(&ModelParams::symbolic(e.clone()), Basis::Original).unwrap().to_eps();
            assert!(j.is_proportional_to(&cat), "ε = {}", e);
            assert!(!j.is_proportional_to(&cat.plus(&cat.negate_delta())));
        }
    }

    #[test]
    fn mixed_entry_is_a_representation_miss() {
        let f = GenFun::new(P::constant(EpsScalar::one()), P::constant(EpsScalar::one()));
        let q = QuadSolution::new(f, GenFun::zero(), GenFun::zero(), GenFun::zero(), Bias::Value(rat_int(0)));
        assert!(matches!(genfun_to_blockop(&q), Err(Error::RepresentationMiss(_))));
    }

    #[test]
    fn json_round_trip() {
        let q = half_bias_tuple(&rat(1, 2)).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.contains("\"epsilon\":\"1/2\""));
        let back: QuadSolution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
