//! Finite-ansatz solver for the PDE system.
//!
//! `b-` is a polynomial of degree `M - 1` in `v` whose coefficients, like the
//! two integration functions `h1(u)`, `h2(u)`, lie in
//! `span{u^j, u^j e^{-2u} : j <= bound}`. The remaining equation becomes a
//! linear system in the expansion coefficients, solved with `ε` symbolic.

use std::collections::BTreeMap;

use serde::Serialize;

use super::elim::{eps_content, nullspace, substitute_eps, Poly3};
use super::{l26, l28_bminus, l28_dminus, Bias, GenFun, Poly2, QuadSolution, UPoly};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, rat, rat_int, Coeff, EpsScalar, Rational};

/// Largest supported ansatz order.
pub const MAX_ORDER: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    /// First appears at this order.
    New,
    /// Already admits a nontrivial solution at a lower order.
    Inherited,
}

/// Bias values, grouped by kind, at which nontrivial solutions exist.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonCondition {
    pub kind: ConditionKind,
    pub roots: Vec<Rational>,
}

impl EpsilonCondition {
    /// Integer polynomial with exactly these roots.
    pub fn polynomial(&self) -> UPoly {
        UPoly::from_roots(&self.roots)
    }

    /// `α·(p(ε)) = 0`, `α` the amplitude of the nontrivial solution.
    pub fn statement(&self) -> String {
        let p = self.polynomial().to_string();
        if p == "ε" {
            "α·ε = 0".into()
        } else {
            format!("α·({}) = 0", p)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedSolution {
    pub epsilon: Bias,
    pub kind: ConditionKind,
    pub solution: QuadSolution,
}

#[derive(Clone, Debug)]
pub struct DerivationReport {
    pub m: usize,
    pub bound: usize,
    pub epsilon_conditions: Vec<EpsilonCondition>,
    pub solutions: Vec<DerivedSolution>,
    /// Solutions for every bias; spanned by powers of `H` when the bound allows.
    pub gauge: Vec<QuadSolution>,
    pub gauge_dimension: usize,
}

impl DerivationReport {
    pub fn new_biases(&self) -> Vec<Rational> {
        self.epsilon_conditions.iter().filter(|c| c.kind == ConditionKind::New).flat_map(|c| c.roots.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let conds: Vec<_> = self
            .epsilon_conditions
            .iter()
            .map(|c| {
                serde_json::json!({
                    "kind": c.kind,
                    "polynomial": c.polynomial().to_string(),
                    "condition": c.statement(),
                    "roots": c.roots.iter().map(format_rational).collect::<Vec<_>>(),
                })
            })
            .collect();
        let sols: Vec<_> = self
            .solutions
            .iter()
            .map(|s| {
                serde_json::json!({
                    "epsilon": s.epsilon,
                    "kind": s.kind,
                    "tuple": s.solution,
                })
            })
            .collect();
        serde_json::json!({
            "M": self.m,
            "u_degree_bound": self.bound,
            "epsilon_conditions": conds,
            "solutions": sols,
            "gauge_dimension": self.gauge_dimension,
            "gauge": self.gauge,
        })
    }
}

/// One basis unknown pushed through the integration pipeline.
struct Column {
    d_plus: GenFun,
    d_minus: GenFun,
    b_plus: GenFun,
    b_minus: GenFun,
    r27: GenFun,
}

fn pipeline(b_minus: GenFun, h1: GenFun, h2: GenFun) -> Column {
    let eps = EpsScalar::eps();
    let g = EpsScalar::g();
    let d_minus = l26(&b_minus, &eps).negated().integrate_v().plus(&h1);
    let b_plus = l28_bminus(&b_minus).plus(&l28_dminus(&d_minus, &eps)).scale_rational(&rat(-1, 2));
    let d_plus = b_plus.d_u().scale(&g).integrate_v().plus(&h2);
    let two_d2 = EpsScalar::delta().pow(2).scaled(&rat_int(2));
    let r27 = b_plus.d_v().minus(&d_plus.d_u().scale(&g)).plus(&b_minus.scale(&two_d2));
    Column { d_plus, d_minus, b_plus, b_minus, r27 }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sector {
    Poly,
    Exp,
}

impl Sector {
    fn wrap(self, p: Poly2) -> GenFun {
        match self {
            Sector::Poly => GenFun::poly(p),
            Sector::Exp => GenFun::exp(p),
        }
    }

    fn part(self, f: &GenFun) -> &Poly2 {
        match self {
            Sector::Poly => &f.poly,
            Sector::Exp => &f.exp,
        }
    }
}

fn columns(m: usize, bound: usize, sector: Sector) -> Vec<Column> {
    let mono = |j: usize, k: usize| sector.wrap(Poly2::monomial(j as u32, k as u32, EpsScalar::one()));
    let mut out = Vec::new();
    for k in 0..m {
        for j in 0..=bound {
            out.push(pipeline(mono(j, k), GenFun::zero(), GenFun::zero()));
        }
    }
    for j in 0..=bound {
        out.push(pipeline(GenFun::zero(), mono(j, 0), GenFun::zero()));
    }
    for j in 0..=bound {
        out.push(pipeline(GenFun::zero(), GenFun::zero(), mono(j, 0)));
    }
    out
}

fn system(cols: &[Column], sector: Sector) -> Vec<Vec<Poly3>> {
    let mut rows: BTreeMap<(u32, u32), Vec<Poly3>> = BTreeMap::new();
    for (c, col) in cols.iter().enumerate() {
        for (i, j, x) in sector.part(&col.r27).terms() {
            rows.entry((i, j)).or_insert_with(|| vec![Poly3::zero(); cols.len()])[c] = x.poly().clone();
        }
    }
    rows.into_values().collect()
}

fn assemble(cols: &[Column], x: &[Poly3], epsilon: Bias) -> Result<QuadSolution> {
    let mut q = QuadSolution::new(GenFun::zero(), GenFun::zero(), GenFun::zero(), GenFun::zero(), Bias::Symbolic);
    for (col, xi) in cols.iter().zip(x) {
        if xi.is_zero() {
            continue;
        }
        let c = EpsScalar::from_poly(xi.clone())?;
        let t = QuadSolution::new(
            col.d_plus.scale(&c),
            col.d_minus.scale(&c),
            col.b_plus.scale(&c),
            col.b_minus.scale(&c),
            Bias::Symbolic,
        );
        q = q.plus(&t);
    }
    Ok(match epsilon {
        Bias::Symbolic => q,
        Bias::Value(r) => q.at_bias(&r),
    })
}

struct SectorAnalysis {
    generic: Vec<Vec<Poly3>>,
    special: Vec<(Rational, Vec<Vec<Poly3>>)>,
}

fn analyze(cols: &[Column], sector: Sector) -> SectorAnalysis {
    let a = system(cols, sector);
    let ns = nullspace(a.clone(), cols.len());
    let mut candidates: Vec<Rational> = Vec::new();
    for p in &ns.eps_pivots {
        for r in eps_content(p).rational_roots() {
            if !candidates.contains(&r) {
                candidates.push(r);
            }
        }
    }
    candidates.sort();
    let generic_dim = ns.basis.len();
    let special = candidates
        .into_iter()
        .filter_map(|r| {
            let at = nullspace(substitute_eps(&a, &r), cols.len());
            (at.basis.len() > generic_dim).then_some((r, at.basis))
        })
        .collect();
    SectorAnalysis { generic: ns.basis, special }
}

fn special_biases(m: usize, bound: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    for sector in [Sector::Poly, Sector::Exp] {
        for (r, _) in analyze(&columns(m, bound, sector), sector).special {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// Solves the PDE system with `b-` of degree `m - 1` in `v` (`b- = 0` for
/// `m = 0`) and `u`-expansions up to `u_degree_bound` (default `m + 2`).
///
/// Returns the bias values admitting nontrivial solutions, split into those
/// new at this order and those inherited from lower orders, together with
/// the solutions themselves and the bias-independent gauge span.
pub fn derive_symmetry(m: usize, u_degree_bound: Option<usize>) -> Result<DerivationReport> {
    if m > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "ansatz order M",
            detail: format!("{} (symbolic derivation supports M <= {})", m, MAX_ORDER),
        });
    }
    let bound = u_degree_bound.unwrap_or(m + 2);
    let mut inherited: Vec<Rational> = Vec::new();
    for lower in 0..m {
        for r in special_biases(lower, bound) {
            if !inherited.contains(&r) {
                inherited.push(r);
            }
        }
    }
    let kind_of = |r: &Rational| {
        if inherited.contains(r) {
            ConditionKind::Inherited
        } else {
            ConditionKind::New
        }
    };

    let mut solutions = Vec::new();
    let mut gauge = Vec::new();
    let mut found: Vec<Rational> = Vec::new();
    let mut generic_nontrivial = false;
    for sector in [Sector::Poly, Sector::Exp] {
        let cols = columns(m, bound, sector);
        let an = analyze(&cols, sector);
        for x in &an.generic {
            let q = assemble(&cols, x, Bias::Symbolic)?;
            if sector == Sector::Poly {
                gauge.push(q);
            } else {
                generic_nontrivial = true;
                solutions.push(DerivedSolution { epsilon: Bias::Symbolic, kind: ConditionKind::New, solution: q });
            }
        }
        for (r, basis) in &an.special {
            if !found.contains(r) {
                found.push(r.clone());
            }
            for x in basis {
                let q = assemble(&cols, x, Bias::Value(r.clone()))?;
                solutions.push(DerivedSolution { epsilon: Bias::Value(r.clone()), kind: kind_of(r), solution: q });
            }
        }
    }
    found.sort();
    let mut epsilon_conditions = Vec::new();
    for kind in [ConditionKind::New, ConditionKind::Inherited] {
        let roots: Vec<Rational> = found.iter().filter(|r| kind_of(r) == kind).cloned().collect();
        if !roots.is_empty() {
            epsilon_conditions.push(EpsilonCondition { kind, roots });
        }
    }
    if !generic_nontrivial && !epsilon_conditions.iter().any(|c| c.kind == ConditionKind::New) {
        return Err(Error::BoundExhausted { m, bound });
    }
    Ok(DerivationReport { m, bound, epsilon_conditions, gauge_dimension: gauge.len(), gauge, solutions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::hamiltonian;
    use crate::genfun::{genfun_to_blockop, half_bias_tuple, pde_residual, unit_bias_tuple};

    fn check_solutions(r: &DerivationReport) {
        for s in r.solutions.iter().map(|s| &s.solution).chain(&r.gauge) {
            assert!(pde_residual(s).iter().all(|x| x.is_zero()), "{}", s);
        }
    }

    #[test]
    fn order_zero() {
        let r = derive_symmetry(0, None).unwrap();
        assert_eq!(r.new_biases(), vec![rat_int(0)]);
        assert_eq!(r.epsilon_conditions[0].statement(), "α·ε = 0");
        assert_eq!(r.gauge_dimension, 3);
        assert_eq!(r.solutions.len(), 1);
        check_solutions(&r);
        let _ = genfun_to_blockop(&r.solutions[0].solution).unwrap();
    }

    #[test]
    fn order_one() {
        let r = derive_symmetry(1, None).unwrap();
        assert_eq!(r.new_biases(), vec![rat(-1, 2), rat(1, 2)]);
        assert_eq!(r.epsilon_conditions[0].statement(), "α·(4ε^2 - 1) = 0");
        check_solutions(&r);
    }

    fn commutes(q: &QuadSolution) -> bool {
        let Bias::Value(e) = &q.epsilon else { panic!("numeric bias expected") };
        let j = genfun_to_blockop(q).unwrap();
        let h = hamiltonian(&EpsScalar::g(), &EpsScalar::delta(), &EpsScalar::constant(e.clone()));
        j.commutator(&h).is_zero()
    }

    #[test]
    fn order_one_matches_known_tuple() {
        let r = derive_symmetry(1, None).unwrap();
        for e in [rat(1, 2), rat(-1, 2)] {
            let sols: Vec<_> = r.solutions.iter().filter(|s| s.epsilon == Bias::Value(e.clone())).collect();
            assert_eq!(sols.len(), 1);
            assert!(sols[0].solution.is_proportional_to(&half_bias_tuple(&e).unwrap()));
            assert!(commutes(&sols[0].solution));
        }
    }

    #[test]
    fn order_two() {
        let r = derive_symmetry(2, None).unwrap();
        assert_eq!(r.new_biases(), vec![rat_int(-1), rat_int(1)]);
        assert_eq!(r.epsilon_conditions[0].statement(), "α·(ε^2 - 1) = 0");
        let inherited = &r.epsilon_conditions[1];
        assert_eq!(inherited.kind, ConditionKind::Inherited);
        assert_eq!(inherited.roots, vec![rat(-1, 2), rat_int(0), rat(1, 2)]);
        check_solutions(&r);
        for s in &r.solutions {
            assert!(commutes(&s.solution));
        }
        for e in [rat_int(1), rat_int(-1)] {
            let sols: Vec<_> = r.solutions.iter().filter(|s| s.epsilon == Bias::Value(e.clone())).collect();
            assert_eq!(sols.len(), 1);
            assert!(sols[0].solution.is_proportional_to(&unit_bias_tuple(&e).unwrap()));
        }
    }

    #[test]
    fn small_bound_is_exhausted() {
        // the ε = ±1 solution needs u-degree 1 in d-
        assert!(matches!(derive_symmetry(2, Some(0)), Err(Error::BoundExhausted { m: 2, bound: 0 })));
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(derive_symmetry(3, None), Err(Error::OutOfRange { .. })));
    }
}
