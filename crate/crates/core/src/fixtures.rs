//! Embedded reference data.
//!
//! The JSON files under `fixtures/` hold, for every certified quadruple, the
//! expected gradients, Hessian combination and its reported spectrum, plus
//! the canonical class lists and the data of the two special permuton
//! constructions. The verification pipeline recomputes everything from
//! scratch and diffs against these files; they are the frozen expectations,
//! never an input to the computation itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::perm::Permutation;
use crate::poly::{BiPoly, TriPoly};
use crate::rat::{parse_rat, Rat};

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct QuadrupleClasses {
    /// The twelve canonical quadruples whose matrices sum to the all-one
    /// matrix, in the reference order.
    pub all_one: Vec<[String; 4]>,
    /// The seven canonical quadruples with `A1 + A2 - A3 - A4 = 0`, as
    /// (plus pair, minus pair).
    pub zero_combination: Vec<[[String; 2]; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct HessianBlock {
    pub family: String,
    pub class_index: usize,
    pub n: usize,
    pub perms: Vec<String>,
    pub signs: Vec<i64>,
    pub gradients: Vec<Vec<String>>,
    pub hessian_combo: Vec<Vec<String>>,
    pub eigenvalues: Vec<f64>,
}

impl HessianBlock {
    pub fn perms(&self) -> Result<Vec<Permutation>> {
        self.perms.iter().map(|s| s.parse()).collect()
    }

    pub fn gradient_rats(&self) -> Result<Vec<Vec<Rat>>> {
        self.gradients
            .iter()
            .map(|g| g.iter().map(|s| parse_rat(s)).collect())
            .collect()
    }

    pub fn hessian_rat(&self) -> Result<RatMatrix> {
        let rows = self
            .hessian_combo
            .iter()
            .map(|r| r.iter().map(|s| parse_rat(s)).collect())
            .collect::<Result<Vec<Vec<Rat>>>>()?;
        RatMatrix::from_rows(rows)
    }

    /// Sign counts of the listed eigenvalues; values printed as `0.00` are
    /// exact zeros of the combination.
    pub fn listed_inertia(&self) -> crate::matrix::Inertia {
        let mut inertia = crate::matrix::Inertia { pos: 0, zero: 0, neg: 0 };
        for &e in &self.eigenvalues {
            if e == 0.0 {
                inertia.zero += 1;
            } else if e > 0.0 {
                inertia.pos += 1;
            } else {
                inertia.neg += 1;
            }
        }
        inertia
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExceptionalFixture {
    pub monomial_order: Vec<String>,
    pub cases: Vec<ExceptionalCaseFixture>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExceptionalCaseFixture {
    pub id: usize,
    pub k: usize,
    pub perms: Vec<Vec<u32>>,
    pub patterns: Vec<String>,
    pub rotation_partners: BTreeMap<String, String>,
    pub quadruple: Vec<String>,
    pub d_poly_scale: i64,
    pub d_poly_coeffs: BTreeMap<String, Vec<i64>>,
    pub g_scale: i64,
    pub g_coeffs: BTreeMap<String, BTreeMap<String, i64>>,
    pub t_domain: [String; 2],
}

impl ExceptionalCaseFixture {
    pub fn perms(&self) -> Result<Vec<Permutation>> {
        self.perms.iter().map(|v| Permutation::new(v.clone())).collect()
    }

    /// Displayed density polynomial of `pattern` as an exact `TriPoly`.
    pub fn displayed_d_poly(&self, order: &[String], pattern: &str) -> Result<TriPoly> {
        let coeffs = self
            .d_poly_coeffs
            .get(pattern)
            .ok_or_else(|| Error::Other(format!("no displayed polynomial for {pattern}")))?;
        let mut out = TriPoly::zero();
        let scale = Rat::from_integer(self.d_poly_scale.into());
        for (mon, &c) in order.iter().zip(coeffs) {
            let parts: Vec<u8> = mon.split(',').map(|x| x.parse().unwrap()).collect();
            out.add_term(
                (parts[0], parts[1], parts[2]),
                Rat::from_integer(c.into()) / &scale,
            );
        }
        Ok(out)
    }

    /// Displayed curve polynomial (`g1` or `g2`) as an exact `BiPoly` in
    /// `(s, t)`.
    pub fn displayed_g_poly(&self, which: &str) -> Result<BiPoly> {
        let coeffs = self
            .g_coeffs
            .get(which)
            .ok_or_else(|| Error::Other(format!("no displayed polynomial {which}")))?;
        let scale = Rat::from_integer(self.g_scale.into());
        let mut out = BiPoly::zero();
        for (mon, &c) in coeffs {
            let (i, j) = mon.split_once(',').unwrap();
            out.add_term(
                i.parse().unwrap(),
                j.parse().unwrap(),
                Rat::from_integer(c.into()) / &scale,
            );
        }
        Ok(out)
    }

    pub fn t_domain_rats(&self) -> Result<(Rat, Rat)> {
        Ok((parse_rat(&self.t_domain[0])?, parse_rat(&self.t_domain[1])?))
    }
}

pub fn quadruple_classes() -> QuadrupleClasses {
    serde_json::from_str(include_str!("../fixtures/quadruple_classes.json"))
        .expect("embedded class list parses")
}

pub fn exceptional_cases() -> ExceptionalFixture {
    serde_json::from_str(include_str!("../fixtures/exceptional/cases.json"))
        .expect("embedded case data parses")
}

macro_rules! blocks {
    ($($name:literal),+ $(,)?) => {
        &[$(($name, include_str!(concat!("../fixtures/hessian_blocks/", $name, ".json")))),+]
    };
}

static HESSIAN_BLOCKS: &[(&str, &str)] = blocks![
    "one_02_n7",
    "one_03_n5",
    "one_04_n5",
    "one_05_n5",
    "one_06_n5",
    "one_07_n5",
    "one_09_n5",
    "one_10_n7",
    "one_11_n5",
    "one_12_n4",
    "zero_01_n5",
    "zero_02_n5",
    "zero_03_n7",
    "zero_04_n5",
    "zero_05_n5",
    "zero_06_n5",
    "zero_07_n7",
];

pub fn hessian_blocks() -> Vec<(String, HessianBlock)> {
    HESSIAN_BLOCKS
        .iter()
        .map(|(name, json)| {
            let block: HessianBlock =
                serde_json::from_str(json).unwrap_or_else(|e| panic!("fixture {name}: {e}"));
            (name.to_string(), block)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse_and_are_consistent() {
        let classes = quadruple_classes();
        assert_eq!(classes.all_one.len(), 12);
        assert_eq!(classes.zero_combination.len(), 7);

        let blocks = hessian_blocks();
        assert_eq!(blocks.len(), 17);
        for (name, b) in &blocks {
            let d = (b.n - 1) * (b.n - 1);
            assert_eq!(b.perms.len(), 4, "{name}");
            assert_eq!(b.gradients.len(), 4, "{name}");
            for g in &b.gradients {
                assert_eq!(g.len(), d, "{name}");
            }
            assert_eq!(b.hessian_combo.len(), d, "{name}");
            assert_eq!(b.eigenvalues.len(), d, "{name}");
            assert!(b.hessian_rat().unwrap().is_symmetric(), "{name}");
            let signs_ok = match b.family.as_str() {
                "all_one" => b.signs == [1, 1, 1, 1],
                "zero_combination" => b.signs == [1, 1, -1, -1],
                _ => false,
            };
            assert!(signs_ok, "{name}");
        }

        let exc = exceptional_cases();
        assert_eq!(exc.cases.len(), 2);
        assert_eq!(exc.monomial_order.len(), 15);
        for c in &exc.cases {
            assert_eq!(c.perms().unwrap().len(), 3);
            for p in c.perms().unwrap() {
                assert_eq!(p.size(), c.k);
            }
        }
    }
}
