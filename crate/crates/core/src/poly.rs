//! Sparse multivariate polynomials over `f64`.
//!
//! Terms are kept in a [`BTreeMap`] keyed by [`Monomial`], whose ordering is
//! graded lexicographic (`1, x1, x2, x1^2, x1*x2, x2^2, ...`). Only exact zero
//! coefficients are pruned, so arithmetic never silently drops small terms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial `x1^e1 * ... * xn^en`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// `x_j` in `n` variables.
    pub fn var(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .fold(1.0, |acc, (&e, &xi)| if e == 0 { acc } else { acc * xi.powi(e as i32) })
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `n` variables of degree `<= d`, graded-lex sorted.
/// The result has `C(n + d, d)` entries.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut cur = vec![0u32; n];
        homogeneous(n, deg, 0, &mut cur, &mut out);
    }
    out
}

// Emits exponent vectors of total degree `rem` in descending lex order.
fn homogeneous(n: usize, rem: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if n == 0 {
        if rem == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = rem;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=rem).rev() {
        cur[pos] = e;
        homogeneous(n, rem - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// A sparse polynomial in `n` real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The coordinate polynomial `x_j` (zero-based `j`).
    pub fn var(n: usize, j: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::var(n, j), 1.0);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(n);
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: exps.len(),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree of a stored term; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Adds `c * m` in place, removing the entry if it cancels to exactly zero.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.n(), self.n);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the length check; `x` must have length `n`.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    pub fn scale(&self, a: f64) -> Polynomial {
        if a == 0.0 {
            return Polynomial::zero(self.n);
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * a)).collect(),
        }
    }

    pub fn partial(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (m, &c) in &self.terms {
            let e = m.0[j];
            if e > 0 {
                let mut exps = m.0.clone();
                exps[j] -= 1;
                out.add_term(Monomial(exps), c * e as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.n).map(|j| self.partial(j)).collect()
    }

    /// `q(x) = p(x / s)`: each coefficient is divided by `s^degree`.
    pub fn substitute_scale(&self, s: f64) -> Result<Polynomial> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {s}"
            )));
        }
        let mut out = Polynomial::zero(self.n);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c / s.powi(m.degree() as i32));
        }
        Ok(out)
    }

    /// `q(x) = p(x - t)`, expanded to canonical form.
    pub fn translate(&self, t: &[f64]) -> Result<Polynomial> {
        if t.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: t.len(),
            });
        }
        // (x_j - t_j)^e for every needed (j, e), built once.
        let max_deg = self.degree();
        let powers: Vec<Vec<Polynomial>> = (0..self.n)
            .map(|j| {
                let shifted = &Polynomial::var(self.n, j) - &Polynomial::constant(self.n, t[j]);
                let mut acc = vec![Polynomial::constant(self.n, 1.0)];
                for _ in 0..max_deg {
                    let next = acc.last().unwrap() * &shifted;
                    acc.push(next);
                }
                acc
            })
            .collect();
        let mut out = Polynomial::zero(self.n);
        for (m, &c) in &self.terms {
            let mut term = Polynomial::constant(self.n, c);
            for (j, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[j][e as usize];
                }
            }
            out += &term;
        }
        Ok(out)
    }

    /// Exact integral over the axis-aligned box `bounds[j] = (lo_j, hi_j)`.
    pub fn integrate_over_box(&self, bounds: &[(f64, f64)]) -> Result<f64> {
        if bounds.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: bounds.len(),
            });
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidArgument(format!(
                "degenerate box interval [{lo}, {hi}]"
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                c * m
                    .0
                    .iter()
                    .zip(bounds)
                    .map(|(&e, &(lo, hi))| {
                        let k = e as i32 + 1;
                        (hi.powi(k) - lo.powi(k)) / k as f64
                    })
                    .product::<f64>()
            })
            .sum())
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        let diff = self - other;
        diff.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        for (m, &c) in &rhs.terms {
            self.add_term(m.clone(), c);
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        for (m, &c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.n);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &Polynomial) -> Polynomial {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        format!("x{}", j + 1)
                    } else {
                        format!("x{}^{}", j + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    exps: Vec<u32>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialWire {
    n: usize,
    terms: Vec<TermWire>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialWire {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| TermWire {
                    exps: m.0.clone(),
                    coef: c,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = PolynomialWire::deserialize(deserializer)?;
        Polynomial::from_terms(wire.n, wire.terms.into_iter().map(|t| (t.exps, t.coef)))
            .map_err(serde::de::Error::custom)
    }
}
