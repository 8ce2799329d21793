//! Small exact polynomial toolbox: univariate polynomials with Sturm-chain
//! root counting, bivariate polynomials, and homogeneous quartics in three
//! variables. All coefficients are rationals; every sign decision is exact.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rat::{rat, Rat};

/// Dense univariate polynomial, `coeffs[i]` is the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rat((i + 1) as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Rat) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// Remainder of `self` divided by `other` (which must be non-zero).
    fn rem(&self, other: &UniPoly) -> UniPoly {
        let d = other.degree().expect("division by zero polynomial");
        let lead = other.coeffs[d].clone();
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < d {
                break;
            }
            let f = &r.coeffs[rd] / &lead;
            let shift = rd - d;
            let mut new = r.coeffs.clone();
            for (j, b) in other.coeffs.iter().enumerate() {
                new[j + shift] = &new[j + shift] - &f * b;
            }
            r = UniPoly::new(new);
        }
        r
    }

    /// Sturm chain of `self`.
    fn sturm_chain(&self) -> Vec<UniPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(r.scale(&rat(-1)));
        }
        chain
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`.
    /// Neither endpoint may be a root of `self`.
    pub fn count_roots_between(&self, lo: &Rat, hi: &Rat) -> usize {
        assert!(lo < hi);
        assert!(!self.eval(lo).is_zero() && !self.eval(hi).is_zero(), "endpoint is a root");
        let chain = self.sturm_chain();
        let variations = |x: &Rat| {
            let mut last = 0i8;
            let mut v = 0usize;
            for p in &chain {
                let val = p.eval(x);
                let s = if val.is_zero() {
                    0
                } else if val.is_positive() {
                    1
                } else {
                    -1
                };
                if s != 0 {
                    if last != 0 && s != last {
                        v += 1;
                    }
                    last = s;
                }
            }
            v
        };
        variations(lo) - variations(hi)
    }

    /// Exact sign certificate that the polynomial is negative (resp.
    /// positive) on the whole closed interval: no roots inside, and a sample
    /// value of that sign. Endpoints are checked directly.
    pub fn sign_on_interval(&self, lo: &Rat, hi: &Rat) -> Option<i8> {
        let (flo, fhi) = (self.eval(lo), self.eval(hi));
        if flo.is_zero() || fhi.is_zero() {
            return None;
        }
        let slo: i8 = if flo.is_positive() { 1 } else { -1 };
        let shi: i8 = if fhi.is_positive() { 1 } else { -1 };
        if slo != shi || self.count_roots_between(lo, hi) != 0 {
            return None;
        }
        Some(slo)
    }
}

/// Sparse bivariate polynomial; key `(i, j)` holds the coefficient of
/// `x^i y^j`. Used both for the gradient polynomials in `(alpha, beta)` and
/// the curve polynomials in `(s, t)`.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct BiPoly {
    #[serde(with = "bipoly_terms")]
    terms: BTreeMap<(u32, u32), Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> BiPoly {
        if s.is_zero() {
            return BiPoly::zero();
        }
        BiPoly { terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect() }
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * pow(x, i) * pow(y, j);
        }
        acc
    }

    /// Partial derivative in the first variable.
    pub fn d_dx(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term(i - 1, j, c * rat(i as i64));
            }
        }
        out
    }

    /// Substitute a rational for the second variable, leaving a univariate
    /// polynomial in the first.
    pub fn fix_y(&self, y: &Rat) -> UniPoly {
        let deg = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Rat::zero(); deg + 1];
        for (&(i, j), c) in &self.terms {
            coeffs[i as usize] += c * pow(y, j);
        }
        UniPoly::new(coeffs)
    }

    /// Substitute a rational for the first variable.
    pub fn fix_x(&self, x: &Rat) -> UniPoly {
        let deg = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Rat::zero(); deg + 1];
        for (&(i, j), c) in &self.terms {
            coeffs[j as usize] += c * pow(x, i);
        }
        UniPoly::new(coeffs)
    }
}

mod bipoly_terms {
    use super::*;
    use crate::rat::{parse_rat, rat_to_string};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        t: &BTreeMap<(u32, u32), Rat>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_map(t.iter().map(|(&(i, j), c)| (format!("{i},{j}"), rat_to_string(c))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<(u32, u32), Rat>, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(de)?;
        m.into_iter()
            .map(|(k, v)| {
                let (i, j) = k
                    .split_once(',')
                    .ok_or_else(|| de::Error::custom("bad monomial key"))?;
                Ok((
                    (
                        i.parse().map_err(de::Error::custom)?,
                        j.parse().map_err(de::Error::custom)?,
                    ),
                    parse_rat(&v).map_err(de::Error::custom)?,
                ))
            })
            .collect()
    }
}

fn pow(x: &Rat, e: u32) -> Rat {
    let mut acc = rat(1);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Polynomial in three variables `(x, y, z)`; the density polynomials of
/// 4-point patterns are homogeneous of degree four (15 monomials).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TriPoly {
    terms: BTreeMap<(u8, u8, u8), Rat>,
}

impl TriPoly {
    pub fn zero() -> Self {
        TriPoly::default()
    }

    pub fn add_term(&mut self, key: (u8, u8, u8), c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn coeff(&self, key: (u8, u8, u8)) -> Rat {
        self.terms.get(&key).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u8, u8, u8), &Rat)> {
        self.terms.iter()
    }

    pub fn eval(&self, x: &Rat, y: &Rat, z: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(a, b, c), coef) in &self.terms {
            acc += coef * pow(x, a.into()) * pow(y, b.into()) * pow(z, c.into());
        }
        acc
    }

    /// Substitute `x = s t`, `y = s (1 - t)`, `z = 1 - s`.
    pub fn substitute_st(&self) -> BiPoly {
        let mut x = BiPoly::zero();
        x.add_term(1, 1, rat(1));
        let mut y = BiPoly::zero();
        y.add_term(1, 0, rat(1));
        y.add_term(1, 1, rat(-1));
        let mut z = BiPoly::constant(rat(1));
        z.add_term(1, 0, rat(-1));
        let mut out = BiPoly::zero();
        for (&(a, b, c), coef) in &self.terms {
            let mut m = BiPoly::constant(coef.clone());
            for _ in 0..a {
                m = m.mul(&x);
            }
            for _ in 0..b {
                m = m.mul(&y);
            }
            for _ in 0..c {
                m = m.mul(&z);
            }
            out = out.add(&m);
        }
        out
    }
}
