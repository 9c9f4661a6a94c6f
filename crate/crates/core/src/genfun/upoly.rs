//! Dense univariate polynomials over ℚ, used for bias conditions.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{format_rational, Rational};

/// Coefficients from the constant term upward; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn one() -> Self {
        UPoly(vec![Rational::one()])
    }

    /// `Π (x - r)`, rescaled to coprime integer coefficients with positive lead.
    pub fn from_roots(roots: &[Rational]) -> Self {
        let mut p = Self::one();
        for r in roots {
            p = p.mul(&UPoly::new(vec![-r.clone(), Rational::one()]));
        }
        p.primitive()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    fn monic(&self) -> Self {
        match self.0.last() {
            Some(lead) => UPoly(self.0.iter().map(|c| c / lead).collect()),
            None => Self::zero(),
        }
    }

    fn rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("nonzero divisor");
        let lead = d.0.last().unwrap().clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let q = &r[top] / &lead;
            for (k, c) in d.0.iter().enumerate() {
                r[top - dd + k] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let den = self.0.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * Rational::from(den.clone())).to_integer()).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        UPoly(ints.into_iter().map(|c| Rational::from(c / &g)).collect())
    }

    /// All distinct rational roots, ascending.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut roots = Vec::new();
        let mut p = self.primitive();
        // strip x^k
        let shift = p.0.iter().take_while(|c| c.is_zero()).count();
        if shift > 0 {
            roots.push(Rational::zero());
            p = UPoly(p.0[shift..].to_vec());
        }
        if p.degree().unwrap_or(0) > 0 {
            let a0 = p.0[0].to_integer().abs();
            let an = p.0.last().unwrap().to_integer().abs();
            for num in divisors(&a0) {
                for den in divisors(&an) {
                    for sign in [1, -1] {
                        let r = Rational::new(BigInt::from(sign) * &num, den.clone());
                        if p.eval(&r).is_zero() && !roots.contains(&r) {
                            roots.push(r);
                        }
                    }
                }
            }
        }
        roots.sort();
        roots
    }

    pub fn fmt_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{}^{}", var, k),
            };
            if mono.is_empty() {
                s.push_str(&fmt_abs(&a));
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{}{}", fmt_abs(&a), mono));
            }
        }
        s
    }
}

fn fmt_abs(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format_rational(r)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_in("ε"))
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            small.push(d.clone());
            let q = n / &d;
            if q != d {
                large.push(q);
            }
        }
        d += 1;
        // guard against pathological coefficient sizes
        if d.to_u64().is_none_or(|x| x > 10_000_000) {
            break;
        }
    }
    small.extend(large.into_iter().rev());
    small
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn p(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| rat_int(x)).collect())
    }

    #[test]
    fn roots_of_quantization_polynomials() {
        assert_eq!(p(&[-1, 0, 4]).rational_roots(), vec![rat(-1, 2), rat(1, 2)]);
        assert_eq!(p(&[0, 3]).rational_roots(), vec![rat_int(0)]);
        assert_eq!(p(&[1, 0, 1]).rational_roots(), Vec::<Rational>::new());
        assert_eq!(p(&[0, -1, 0, 1]).rational_roots(), vec![rat_int(-1), rat_int(0), rat_int(1)]);
    }

    #[test]
    fn gcd_and_display() {
        let a = p(&[-1, 0, 4]).mul(&p(&[2, 1]));
        let b = p(&[-1, 2]).mul(&p(&[5, 0, 1]));
        assert_eq!(a.gcd(&b), UPoly::new(vec![rat(-1, 2), rat_int(1)]));
        assert_eq!(UPoly::from_roots(&[rat(1, 2), rat(-1, 2)]).to_string(), "4ε^2 - 1");
        assert_eq!(UPoly::from_roots(&[rat_int(0)]).to_string(), "ε");
    }
}
