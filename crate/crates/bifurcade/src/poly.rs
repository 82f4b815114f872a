//! Dense-exponent multivariate polynomials over f64.
//!
//! Used for center-manifold reductions: the number of variables is the
//! crossing number (1 or 2 in every shipped scenario) and total degrees
//! stay at or below 5, so a sorted map from exponent tuples to
//! coefficients is entirely adequate. Monomials order graded
//! lexicographically, which is also the canonical ordering used when a
//! reduction is serialized.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent tuple of a monomial in `w_1..w_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn unit(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(w)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `nvars` variables, graded-lex ordered terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Monomial, f64>,
}

/// Serialized term: exponent tuple plus coefficient, emitted in graded-lex
/// order so documents are canonical.
#[derive(Serialize, Deserialize)]
struct TermRecord {
    exponents: Vec<u32>,
    coefficient: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRecord {
    nvars: usize,
    terms: Vec<TermRecord>,
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        PolyRecord {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| TermRecord {
                    exponents: m.0.clone(),
                    coefficient: c,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rec = PolyRecord::deserialize(deserializer)?;
        let mut p = Poly::zero(rec.nvars);
        for t in rec.terms {
            if t.exponents.len() != rec.nvars {
                return Err(serde::de::Error::custom("term arity does not match nvars"));
            }
            p.add_term(Monomial(t.exponents), t.coefficient);
        }
        Ok(p)
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        if c != 0.0 {
            p.terms.insert(Monomial::unit(nvars), c);
        }
        p
    }

    /// The coordinate polynomial `w_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Poly::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), 1.0);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            p.add_term(m.clone(), c * s);
        }
        p
    }

    /// Product truncated to total degree `max_deg`.
    pub fn mul_truncated(&self, other: &Poly, max_deg: u32) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                if ma.degree() + mb.degree() > max_deg {
                    continue;
                }
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }

    /// Terms of exact total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            if m.degree() == d {
                p.add_term(m.clone(), c);
            }
        }
        p
    }

    /// Drops every term of total degree above `max_deg`.
    pub fn truncate(&self, max_deg: u32) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            if m.degree() <= max_deg {
                p.add_term(m.clone(), c);
            }
        }
        p
    }

    /// Partial derivative with respect to `w_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.clone();
            d.0[i] = e - 1;
            p.add_term(d, c * e as f64);
        }
        p
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.nvars);
        self.terms.iter().map(|(m, &c)| c * m.eval(w)).sum()
    }

    /// Coefficient of the given exponent tuple (zero when absent).
    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Largest absolute coefficient, zero for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:.6e}")?;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    write!(f, "*w{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*w{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}
