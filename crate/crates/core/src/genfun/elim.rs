//! Fraction-free Gauss–Jordan elimination over `ℚ[g^±, Δ^±, ε]`.
//!
//! `g` and `Δ` are generic nonzero parameters, so monomials in them are
//! units. Pivots that depend on `ε` are recorded: the bias values where such
//! a pivot vanishes identically are where the rank can drop.

use num_traits::{One, Zero};

use super::upoly::UPoly;
use crate::scalar::{MPoly, Rational};

pub(crate) type Poly3 = MPoly<3>;

const EPS: usize = 2;

#[derive(Debug)]
pub(crate) struct Nullspace {
    pub basis: Vec<Vec<Poly3>>,
    pub eps_pivots: Vec<Poly3>,
}

fn pivot_rank(p: &Poly3) -> (u8, usize, i32) {
    let class = if p.depends_on(EPS) {
        2
    } else if p.len() == 1 {
        0
    } else {
        1
    };
    (class, p.len(), p.total_degree())
}

/// Divides out the `g`, `Δ` monomial content and the rational content.
fn normalize(v: &mut [Poly3]) {
    let nz: Vec<&Poly3> = v.iter().filter(|p| !p.is_zero()).collect();
    if nz.is_empty() {
        return;
    }
    let mut shift = [0i32; 3];
    for (var, s) in shift.iter_mut().enumerate().take(2) {
        *s = -nz.iter().map(|p| p.min_exponent(var).unwrap()).min().unwrap();
    }
    let lead = nz[0].leading().map(|(_, c)| c.clone()).unwrap();
    let inv = Rational::one() / lead;
    for p in v.iter_mut() {
        if !p.is_zero() {
            *p = p.mul_monomial(&shift, &inv);
        }
    }
}

fn is_zero_row(r: &[Poly3]) -> bool {
    r.iter().all(|p| p.is_zero())
}

/// Basis of `{x : A x = 0}` for generic `g`, `Δ`, `ε`.
pub(crate) fn nullspace(mut a: Vec<Vec<Poly3>>, ncols: usize) -> Nullspace {
    a.retain(|r| !is_zero_row(r));
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut eps_pivots = Vec::new();
    let mut used_row = vec![false; a.len()];
    let mut used_col = vec![false; ncols];
    loop {
        let mut best: Option<((u8, usize, i32), usize, usize)> = None;
        for (r, row) in a.iter().enumerate() {
            if used_row[r] {
                continue;
            }
            for (c, p) in row.iter().enumerate() {
                if used_col[c] || p.is_zero() {
                    continue;
                }
                let key = pivot_rank(p);
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, r, c));
                }
            }
        }
        let Some(((class, _, _), r, c)) = best else { break };
        used_row[r] = true;
        used_col[c] = true;
        pivots.push((r, c));
        let p = a[r][c].clone();
        if class == 2 {
            eps_pivots.push(p.clone());
        }
        if class == 0 {
            let inv = p.monomial_inverse().expect("monomial");
            for x in a[r].iter_mut() {
                *x = &*x * &inv;
            }
            let prow = a[r].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    if !y.is_zero() {
                        *x = &*x - &(&f * y);
                    }
                }
            }
        } else {
            let prow = a[r].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    let px = &p * &*x;
                    *x = if y.is_zero() { px } else { &px - &(&f * y) };
                }
                normalize(row);
            }
        }
    }
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|&c| !used_col[c]) {
        let involved: Vec<(usize, usize)> = pivots.iter().copied().filter(|&(r, _)| !a[r][f].is_zero()).collect();
        let mut x = vec![Poly3::zero(); ncols];
        let prod = |skip: Option<usize>| {
            involved
                .iter()
                .enumerate()
                .filter(|(k, _)| Some(*k) != skip)
                .fold(Poly3::one(), |acc, (_, &(r, c))| &acc * &a[r][c])
        };
        x[f] = prod(None);
        for (k, &(r, c)) in involved.iter().enumerate() {
            x[c] = -&(&a[r][f] * &prod(Some(k)));
        }
        reduce_common_pivots(&mut x, involved.iter().map(|&(r, c)| &a[r][c]));
        normalize(&mut x);
        basis.push(x);
    }
    Nullspace { basis, eps_pivots }
}

/// Removes pivot factors shared by every component.
fn reduce_common_pivots<'a>(x: &mut [Poly3], pivots: impl Iterator<Item = &'a Poly3>) {
    for p in pivots {
        if p.len() == 1 {
            continue;
        }
        loop {
            let divided: Option<Vec<Poly3>> =
                x.iter().map(|c| if c.is_zero() { Some(Poly3::zero()) } else { c.div_exact(p) }).collect();
            match divided {
                Some(d) => x.clone_from_slice(&d),
                None => break,
            }
        }
    }
}

/// Monic gcd over `ℚ[ε]` of the coefficients of `p` viewed in `ℚ[ε][g^±, Δ^±]`.
/// Its roots are the biases where `p` vanishes for every `g`, `Δ`.
pub(crate) fn eps_content(p: &Poly3) -> UPoly {
    let mut groups: std::collections::BTreeMap<[i32; 2], Vec<Rational>> = Default::default();
    for (e, c) in p.terms() {
        let k = e[EPS] as usize;
        let v = groups.entry([e[0], e[1]]).or_default();
        if v.len() <= k {
            v.resize(k + 1, Rational::zero());
        }
        v[k] = c.clone();
    }
    groups.into_values().map(UPoly::new).fold(UPoly::zero(), |g, q| g.gcd(&q))
}

/// `A` with `ε` replaced by a rational value.
pub(crate) fn substitute_eps(a: &[Vec<Poly3>], eps: &Rational) -> Vec<Vec<Poly3>> {
    a.iter().map(|r| r.iter().map(|p| p.substitute(EPS, eps).expect("polynomial in ε")).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn c(r: i64) -> Poly3 {
        Poly3::constant(rat_int(r))
    }

    fn mono(e: [i32; 3], r: i64) -> Poly3 {
        Poly3::monomial(e, rat_int(r))
    }

    fn times(a: &[Vec<Poly3>], x: &[Poly3]) -> Vec<Poly3> {
        a.iter().map(|row| row.iter().zip(x).fold(Poly3::zero(), |acc, (p, q)| &acc + &(p * q))).collect()
    }

    #[test]
    fn numeric_nullspace() {
        let a = vec![vec![c(1), c(2), c(3)], vec![c(2), c(4), c(6)]];
        let ns = nullspace(a.clone(), 3);
        assert_eq!(ns.basis.len(), 2);
        for v in &ns.basis {
            assert!(times(&a, v).iter().all(|p| p.is_zero()));
        }
    }

    #[test]
    fn symbolic_nullspace_and_conditions() {
        // [[ε, g], [g ε, g²]] has rank 1 generically
        let eps = mono([0, 0, 1], 1);
        let g = mono([1, 0, 0], 1);
        let a = vec![vec![eps.clone(), g.clone()], vec![&g * &eps, &g * &g]];
        let ns = nullspace(a.clone(), 2);
        assert_eq!(ns.basis.len(), 1);
        assert!(times(&a, &ns.basis[0]).iter().all(|p| p.is_zero()));
        // [[4ε² - 1 + g(4ε² - 1)Δ]] vanishes at ε = ±1/2
        let q = &(&mono([0, 0, 2], 4) - &c(1)) * &(&c(1) + &mono([1, 1, 0], 1));
        let ns = nullspace(vec![vec![q.clone()]], 1);
        assert!(ns.basis.is_empty());
        assert_eq!(eps_content(&ns.eps_pivots[0]).rational_roots(), vec![rat(-1, 2), rat(1, 2)]);
        let at = substitute_eps(&[vec![q]], &rat(1, 2));
        assert_eq!(nullspace(at, 1).basis.len(), 1);
    }
}
