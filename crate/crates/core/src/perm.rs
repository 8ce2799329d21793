//! Permutations in one-line notation, pattern densities, permutation
//! matrices and the dihedral symmetry action.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rat::{rat, Rat};

/// A permutation of `[k]` in one-line notation: `image[i] = pi(i+1)`,
/// values are 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    image: Vec<u32>,
}

impl Permutation {
    pub fn new(image: Vec<u32>) -> Result<Self> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &v in &image {
            if v == 0 || v as usize > k {
                return Err(Error::InvalidPermutation {
                    size: k,
                    reason: format!("value {v} out of range"),
                });
            }
            if seen[v as usize - 1] {
                return Err(Error::InvalidPermutation {
                    size: k,
                    reason: format!("value {v} repeated"),
                });
            }
            seen[v as usize - 1] = true;
        }
        if k == 0 {
            return Err(Error::InvalidPermutation { size: 0, reason: "empty".into() });
        }
        Ok(Permutation { image })
    }

    pub fn identity(k: usize) -> Self {
        Permutation { image: (1..=k as u32).collect() }
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    /// `pi(i)` with 1-based `i`.
    pub fn apply(&self, i: usize) -> u32 {
        self.image[i - 1]
    }

    pub fn values(&self) -> &[u32] {
        &self.image
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u32; self.size()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v as usize - 1] = (i + 1) as u32;
        }
        Permutation { image }
    }

    /// Position reversal: `pi(i) -> pi(k+1-i)`.
    pub fn reverse(&self) -> Permutation {
        Permutation { image: self.image.iter().rev().copied().collect() }
    }

    /// Value complement: `pi(i) -> k+1-pi(i)`.
    pub fn complement(&self) -> Permutation {
        let k = self.size() as u32;
        Permutation { image: self.image.iter().map(|&v| k + 1 - v).collect() }
    }

    /// The unique permutation order-isomorphic to the restriction of `self`
    /// to the 1-based positions in `indices` (given in increasing order).
    pub fn subpermutation(&self, indices: &[usize]) -> Result<Permutation> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        for &i in indices {
            if i == 0 || i > self.size() {
                return Err(Error::IndexOutOfRange { index: i, max: self.size() });
            }
        }
        let vals: Vec<u32> = indices.iter().map(|&i| self.apply(i)).collect();
        Ok(pattern_of(&vals))
    }

    /// 0/1 permutation matrix; entry (i, pi(i)) is one.
    pub fn matrix(&self) -> PermMatrix {
        PermMatrix { image: self.image.clone() }
    }
}

/// Order-isomorphism pattern of a sequence of distinct values.
pub fn pattern_of(vals: &[u32]) -> Permutation {
    let mut sorted: Vec<u32> = vals.to_vec();
    sorted.sort_unstable();
    let image = vals
        .iter()
        .map(|v| (sorted.binary_search(v).unwrap() + 1) as u32)
        .collect();
    Permutation { image }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() <= 9 {
            for v in &self.image {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let strs: Vec<String> = self.image.iter().map(u32::to_string).collect();
            write!(f, "{}", strs.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `2143` (digits, k <= 9) or `31,1,29,...` (comma separated).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::ParsePermutation("empty input".into()));
        }
        let tokens: Vec<String> = if s.contains(',') {
            s.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            s.chars().map(|c| c.to_string()).collect()
        };
        let mut image = Vec::with_capacity(tokens.len());
        for t in &tokens {
            let v: u32 = t
                .parse()
                .map_err(|_| Error::ParsePermutation(format!("bad token {t:?}")))?;
            image.push(v);
        }
        Permutation::new(image).map_err(|e| Error::ParsePermutation(e.to_string()))
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.image
    }
}

/// 0/1 matrix of a permutation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PermMatrix {
    image: Vec<u32>,
}

impl PermMatrix {
    pub fn k(&self) -> usize {
        self.image.len()
    }

    pub fn entry(&self, r: usize, c: usize) -> u8 {
        u8::from(self.image[r] == (c + 1) as u32)
    }

    pub fn entries(&self) -> Vec<Vec<u8>> {
        let k = self.k();
        (0..k).map(|r| (0..k).map(|c| self.entry(r, c)).collect()).collect()
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::from_fn(self.k(), self.k(), |r, c| rat(i64::from(self.entry(r, c))))
    }
}

/// Exact pattern density `d(sigma, pi)`: the probability that a uniformly
/// random `|sigma|`-subset of positions of `pi` induces `sigma`. Zero when
/// `|sigma| > |pi|`.
pub fn pattern_density(sigma: &Permutation, pi: &Permutation) -> Rat {
    let m = sigma.size();
    let n = pi.size();
    if m > n {
        return Rat::zero();
    }
    let mut count: u64 = 0;
    let mut total: u64 = 0;
    let mut idx: Vec<usize> = (1..=m).collect();
    loop {
        total += 1;
        if &pi.subpermutation(&idx).expect("valid indices") == sigma {
            count += 1;
        }
        // next m-combination of [n]
        let mut i = m;
        loop {
            if i == 0 {
                return Rat::new(BigInt::from(count), BigInt::from(total));
            }
            i -= 1;
            if idx[i] < n - (m - 1 - i) {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

use num_traits::Zero;

/// All `k!` permutations of `[k]` in lexicographic order, `1 <= k <= 8`.
pub fn enumerate_sk(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > 8 {
        return Err(Error::IndexOutOfRange { index: k, max: 8 });
    }
    let mut out = Vec::new();
    let mut cur = Permutation::identity(k).image;
    loop {
        out.push(Permutation { image: cur.clone() });
        // next lexicographic permutation
        let Some(i) = (0..k - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// The eight symmetries of the square acting on permutation matrices,
/// generated by position reversal, value complement and inversion.
pub fn dihedral_images(p: &Permutation) -> Vec<Permutation> {
    let r = p.reverse();
    let c = p.complement();
    let rc = r.complement();
    vec![
        p.clone(),
        r,
        c,
        rc,
        p.inverse(),
        p.reverse().inverse(),
        p.complement().inverse(),
        p.reverse().complement().inverse(),
    ]
}

fn apply_symmetry(p: &Permutation, idx: usize) -> Permutation {
    match idx {
        0 => p.clone(),
        1 => p.reverse(),
        2 => p.complement(),
        3 => p.reverse().complement(),
        4 => p.inverse(),
        5 => p.reverse().inverse(),
        6 => p.complement().inverse(),
        7 => p.reverse().complement().inverse(),
        _ => unreachable!(),
    }
}

/// Orbit of a set of same-size permutations under the dihedral action,
/// applied element-wise. Returns the distinct image sets.
pub fn dihedral_orbit(set: &BTreeSet<Permutation>) -> Result<BTreeSet<BTreeSet<Permutation>>> {
    let mut sizes = set.iter().map(Permutation::size);
    let Some(first) = sizes.next() else {
        return Err(Error::EmptyIndexSet);
    };
    if sizes.any(|s| s != first) {
        return Err(Error::MixedSizes);
    }
    let mut orbit = BTreeSet::new();
    for g in 0..8 {
        let image: BTreeSet<Permutation> = set.iter().map(|p| apply_symmetry(p, g)).collect();
        orbit.insert(image);
    }
    Ok(orbit)
}

/// Lexicographically smallest sorted tuple in the dihedral orbit of `set`;
/// the canonical representative used for the class lists.
pub fn canonical_class(set: &BTreeSet<Permutation>) -> Result<Vec<Permutation>> {
    let orbit = dihedral_orbit(set)?;
    Ok(orbit
        .into_iter()
        .map(|s| s.into_iter().collect::<Vec<_>>())
        .min()
        .expect("orbit is non-empty"))
}
