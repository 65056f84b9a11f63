//! Sparse multivariate polynomials over the rationals, with variables
//! indexed by branch-point labels.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Monomial as sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(usize, u32)>;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<usize, u32> = a.iter().copied().collect();
    for &(v, e) in b {
        *out.entry(v).or_insert(0) += e;
    }
    out.into_iter().collect()
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.push(Vec::new(), c);
        p
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// The variable `e_var`.
    pub fn var(var: usize) -> Self {
        let mut p = Self::zero();
        p.push(vec![(var, 1)], BigRational::one());
        p
    }

    fn push(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().map(|&(_, e)| e).sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.iter().map(|&(_, e)| e).sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.push(m.clone(), v * c);
        }
        out
    }

    /// Evaluates with `values[var]` substituted for each variable.
    pub fn eval(&self, values: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m {
                t *= num_traits::pow(values[v].clone(), e as usize);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let coef = c.to_f64().unwrap_or(f64::NAN);
                m.iter().fold(coef, |t, &(v, e)| t * values[v].powi(e as i32))
            })
            .sum()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.push(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.push(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.push(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-BigRational::one())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if n > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let a = c.abs();
            if m.is_empty() || !a.is_one() {
                write!(f, "{a}")?;
            }
            for (k, &(v, e)) in m.iter().enumerate() {
                if k > 0 || !a.is_one() {
                    f.write_str("*")?;
                }
                if e == 1 {
                    write!(f, "e{v}")?;
                } else {
                    write!(f, "e{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn arithmetic_and_evaluation() {
        let x = Poly::var(0);
        let y = Poly::var(3);
        let p = &(&x + &y) * &(&x - &y);
        let expect = &(&x * &x) - &(&y * &y);
        assert_eq!(p, expect);
        let vals = vec![q(5), q(0), q(0), q(2)];
        assert_eq!(p.eval(&vals), q(21));
        assert_eq!(p.eval_f64(&[5.0, 0.0, 0.0, 2.0]), 21.0);
        assert_eq!(p.degree(), Some(2));
        assert!(p.is_homogeneous());
        assert!((&p - &p).is_zero());
        assert_eq!((&p - &p).degree(), None);
        assert_eq!(format!("{}", &Poly::from_int(2) * &x), "2*e0");
    }
}
