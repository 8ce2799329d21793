//! Step permutons: grid measures given by doubly stochastic matrices, their
//! exact pattern densities, convex mixtures of permutation matrices, and a
//! seeded sampler used for Monte Carlo cross-checks.
//!
//! The density of a pattern `sigma` in the step permuton of a doubly
//! stochastic `k x k` matrix `A` is
//!
//! ```text
//! d(sigma, mu[A]) = (m! / k^m) * sum over non-decreasing f, g: [m] -> [k]
//!     of prod_i A[f(i), g(sigma(i))] / (prod_i |f^-1(i)|! * |g^-1(i)|!)
//! ```
//!
//! with `m = |sigma|`. The enumeration below walks `f` and then only the
//! columns that are structurally non-zero, which is what makes the 32-step
//! mixtures (at most 3 non-zero entries per row) tractable.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::par;
use crate::perm::{pattern_of, Permutation};
use crate::poly::TriPoly;
use crate::rat::{rat, Rat};

/// A step permuton: a `k x k` doubly stochastic matrix of exact rationals.
/// Cell `(i, j)` carries mass `A[i][j] / k`.
#[derive(Clone, PartialEq, Debug)]
pub struct StepPermuton {
    a: RatMatrix,
}

impl StepPermuton {
    /// Validates double stochasticity exactly.
    pub fn new(a: RatMatrix) -> Result<Self> {
        if a.rows() != a.cols() || a.rows() == 0 {
            return Err(Error::NotDoublyStochastic("matrix must be square".into()));
        }
        let k = a.rows();
        for r in 0..k {
            for c in 0..k {
                if a.get(r, c).is_negative() {
                    return Err(Error::NotDoublyStochastic(format!(
                        "negative entry at ({r}, {c})"
                    )));
                }
            }
        }
        for r in 0..k {
            let s: Rat = (0..k).map(|c| a.get(r, c).clone()).sum();
            if !s.is_one() {
                return Err(Error::NotDoublyStochastic(format!("row {r} sums to {s}")));
            }
        }
        for c in 0..k {
            let s: Rat = (0..k).map(|r| a.get(r, c).clone()).sum();
            if !s.is_one() {
                return Err(Error::NotDoublyStochastic(format!("column {c} sums to {s}")));
            }
        }
        Ok(StepPermuton { a })
    }

    pub fn uniform(k: usize) -> Self {
        let w = Rat::new(BigInt::one(), BigInt::from(k));
        StepPermuton { a: RatMatrix::from_fn(k, k, |_, _| w.clone()) }
    }

    pub fn k(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.a
    }

    /// Convex mixture of permutation matrices: `A = sum w_i A_{pi_i}`.
    pub fn mixture(perms: &[Permutation], weights: &[Rat]) -> Result<Self> {
        if perms.is_empty() || perms.len() != weights.len() {
            return Err(Error::WrongCount { expected: perms.len(), got: weights.len() });
        }
        let k = perms[0].size();
        if perms.iter().any(|p| p.size() != k) {
            return Err(Error::MixedSizes);
        }
        for w in weights {
            if w.is_negative() {
                return Err(Error::NegativeWeight(w.clone()));
            }
        }
        let total: Rat = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::WeightSum(total));
        }
        let mut a = RatMatrix::zeros(k, k);
        for (p, w) in perms.iter().zip(weights) {
            for i in 0..k {
                let j = p.apply(i + 1) as usize - 1;
                let v = a.get(i, j) + w;
                a.set(i, j, v);
            }
        }
        StepPermuton::new(a)
    }

    /// Exact pattern density, sparse enumeration, parallel over `f`.
    pub fn density(&self, sigma: &Permutation) -> Rat {
        density_impl(&self.a, sigma, true, false)
    }

    /// Sequential twin of [`StepPermuton::density`] for the benchmarks.
    pub fn density_seq(&self, sigma: &Permutation) -> Rat {
        density_impl(&self.a, sigma, true, true)
    }

    /// Density by the plain dense double enumeration (no sparsity pruning).
    /// Only sensible for small `k`; kept as the second route for testing.
    pub fn density_dense(&self, sigma: &Permutation) -> Rat {
        density_impl(&self.a, sigma, false, false)
    }

    /// Draws one pattern of size `m`: sample `m` cells with probability
    /// `A[i][j]/k`, a uniform point inside each cell, sort by the first
    /// coordinate and read off the rank pattern of the second.
    ///
    /// Cell selection uses exact integer thresholds, so given `(m, seed)`
    /// the chosen cells are reproducible bit-exactly across platforms; the
    /// within-cell offsets use `f64` draws.
    pub fn sample(&self, m: usize, seed: u64) -> Permutation {
        let table = self.cell_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&table, m, &mut rng)
    }

    fn cell_table(&self) -> CellTable {
        let k = self.k();
        // common denominator so each cell has an integer weight
        let mut denom = BigInt::one();
        for r in 0..k {
            for c in 0..k {
                let d = self.a.get(r, c).denom();
                denom = num_integer::lcm(denom, d.clone());
            }
        }
        let mut cells = Vec::new();
        let mut cum = BigInt::zero();
        for r in 0..k {
            for c in 0..k {
                let v = self.a.get(r, c);
                if !v.is_zero() {
                    cum += v.numer() * (&denom / v.denom());
                    cells.push((cum.clone(), r, c));
                }
            }
        }
        // total = k * denom
        CellTable { total: cum, cells }
    }

    fn sample_with(&self, table: &CellTable, m: usize, rng: &mut ChaCha8Rng) -> Permutation {
        let k = self.k() as f64;
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(m);
        for _ in 0..m {
            let (r, c) = table.draw(rng);
            loop {
                let u = (r as f64 + rng.gen::<f64>()) / k;
                let v = (c as f64 + rng.gen::<f64>()) / k;
                // exact coordinate ties have probability ~0; resample if hit
                if pts.iter().all(|&(pu, pv)| pu != u && pv != v) {
                    pts.push((u, v));
                    break;
                }
            }
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut vals: Vec<(f64, usize)> = pts.iter().map(|p| p.1).zip(0..).collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut image = vec![0u32; m];
        for (rank, &(_, pos)) in vals.iter().enumerate() {
            image[pos] = (rank + 1) as u32;
        }
        pattern_of(&image)
    }

    /// Monte Carlo estimate of `d(sigma, self)`: fraction of `trials`
    /// samples equal to `sigma`, with the binomial standard error. Each
    /// trial uses its own ChaCha8 stream, so the result is independent of
    /// the number of worker threads.
    pub fn mc_density_estimate(
        &self,
        sigma: &Permutation,
        trials: u64,
        seed: u64,
    ) -> (f64, f64) {
        let counts = self.mc_counts(std::slice::from_ref(sigma), trials, seed, false);
        mc_stats(counts[0], trials)
    }

    /// Sequential twin of [`StepPermuton::mc_density_estimate`].
    pub fn mc_density_estimate_seq(
        &self,
        sigma: &Permutation,
        trials: u64,
        seed: u64,
    ) -> (f64, f64) {
        let counts = self.mc_counts(std::slice::from_ref(sigma), trials, seed, true);
        mc_stats(counts[0], trials)
    }

    /// Sample counts for several target patterns of a common size in one
    /// pass over `trials` draws.
    pub fn mc_counts(
        &self,
        sigmas: &[Permutation],
        trials: u64,
        seed: u64,
        force_seq: bool,
    ) -> Vec<u64> {
        let m = sigmas[0].size();
        let table = self.cell_table();
        let run = |range: std::ops::Range<u64>| {
            let mut counts = vec![0u64; sigmas.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for trial in range {
                rng.set_stream(trial);
                rng.set_word_pos(0);
                let pat = self.sample_with(&table, m, &mut rng);
                for (i, s) in sigmas.iter().enumerate() {
                    if &pat == s {
                        counts[i] += 1;
                    }
                }
            }
            counts
        };
        let merge = |mut a: Vec<u64>, b: Vec<u64>| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        };
        #[cfg(feature = "parallel")]
        if !force_seq {
            use rayon::prelude::*;
            let workers = (rayon::current_num_threads() * 4).max(1) as u64;
            let chunk = trials.div_ceil(workers);
            return (0..workers)
                .into_par_iter()
                .map(|w| run(w * chunk..((w + 1) * chunk).min(trials)))
                .reduce(|| vec![0u64; sigmas.len()], merge);
        }
        let _ = (force_seq, merge);
        run(0..trials)
    }
}

struct CellTable {
    total: BigInt,
    cells: Vec<(BigInt, usize, usize)>,
}

impl CellTable {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (usize, usize) {
        // uniform BigInt in [0, total) via rejection on 64-bit limbs
        let bits = self.total.bits();
        loop {
            let mut v = BigInt::zero();
            let mut remaining = bits;
            while remaining > 0 {
                let take = remaining.min(64);
                let word: u64 = rng.gen();
                let word = if take == 64 { word } else { word & ((1u64 << take) - 1) };
                v = (v << take) | BigInt::from(word);
                remaining -= take;
            }
            if v < self.total {
                let idx = self.cells.partition_point(|(cum, _, _)| *cum <= v);
                let (_, r, c) = &self.cells[idx];
                return (*r, *c);
            }
        }
    }
}

fn mc_stats(count: u64, trials: u64) -> (f64, f64) {
    let p = count as f64 / trials as f64;
    let stderr = (p * (1.0 - p) / trials as f64).sqrt();
    (p, stderr)
}

/// Non-decreasing maps `[m] -> [k]`, 0-indexed values.
pub(crate) fn nondecreasing_maps(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < k {
                let v = cur[i] + 1;
                for x in cur.iter_mut().skip(i) {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// `prod_i |f^-1(i)|!` for a non-decreasing map.
pub(crate) fn multiplicity(f: &[usize]) -> u64 {
    let mut p = 1u64;
    let mut run = 1u64;
    for w in f.windows(2) {
        if w[0] == w[1] {
            run += 1;
            p *= run;
        } else {
            run = 1;
        }
    }
    p
}

fn density_impl(a: &RatMatrix, sigma: &Permutation, sparse: bool, force_seq: bool) -> Rat {
    let m = sigma.size();
    let k = a.rows();
    // positions ordered by the value they carry: row_of_value[j] = f(sigma^{-1}(j+1))
    let inv = sigma.inverse();
    let fs = nondecreasing_maps(m, k);
    let nz_cols: Vec<Vec<usize>> = (0..k)
        .map(|r| (0..k).filter(|&c| !sparse || !a.get(r, c).is_zero()).collect())
        .collect();

    let fold = |acc: Rat, f: &Vec<usize>| {
        let mf = multiplicity(f);
        let rows: Vec<usize> = (0..m).map(|j| f[inv.apply(j + 1) as usize - 1]).collect();
        let mut acc = acc;
        // depth-first over non-decreasing g through allowed columns
        let mut g = vec![0usize; m];
        let mut prod: Vec<Rat> = vec![Rat::one(); m + 1];
        fn rec(
            a: &RatMatrix,
            rows: &[usize],
            nz: &[Vec<usize>],
            g: &mut Vec<usize>,
            prod: &mut Vec<Rat>,
            depth: usize,
            acc: &mut Rat,
            mf: u64,
        ) {
            let m = rows.len();
            if depth == m {
                let mg = multiplicity(g);
                *acc += &prod[m] / rat((mf * mg) as i64);
                return;
            }
            let min = if depth == 0 { 0 } else { g[depth - 1] };
            for &c in &nz[rows[depth]] {
                if c < min {
                    continue;
                }
                let e = a.get(rows[depth], c);
                if e.is_zero() {
                    continue;
                }
                g[depth] = c;
                prod[depth + 1] = &prod[depth] * e;
                rec(a, rows, nz, g, prod, depth + 1, acc, mf);
            }
        }
        rec(a, &rows, &nz_cols, &mut g, &mut prod, 0, &mut acc, mf);
        acc
    };

    let total = if force_seq {
        par::fold_chunks_seq(&fs, Rat::zero, fold)
    } else {
        par::fold_chunks(&fs, Rat::zero, fold, |x, y| x + y)
    };
    let mut factorial = BigInt::one();
    for i in 2..=m {
        factorial *= i;
    }
    total * Rat::new(factorial, BigInt::from(k).pow(m as u32))
}

/// Density of `sigma` in the mixture `x A_{p1} + y A_{p2} + z A_{p3}` with
/// symbolic weights: the exact polynomial in `(x, y, z)`. The three
/// permutations must have pairwise disjoint supports, which makes every
/// matrix entry a single variable.
pub fn mixture_density_poly(sigma: &Permutation, perms: &[Permutation; 3]) -> Result<TriPoly> {
    mixture_density_poly_impl(sigma, perms, false)
}

/// Sequential twin of [`mixture_density_poly`].
pub fn mixture_density_poly_seq(
    sigma: &Permutation,
    perms: &[Permutation; 3],
) -> Result<TriPoly> {
    mixture_density_poly_impl(sigma, perms, true)
}

fn mixture_density_poly_impl(
    sigma: &Permutation,
    perms: &[Permutation; 3],
    force_seq: bool,
) -> Result<TriPoly> {
    let k = perms[0].size();
    if perms.iter().any(|p| p.size() != k) {
        return Err(Error::MixedSizes);
    }
    // var[r][c] = which of x, y, z sits in that cell (None if empty)
    let mut var = vec![vec![None::<u8>; k]; k];
    for (vi, p) in perms.iter().enumerate() {
        for i in 0..k {
            let c = p.apply(i + 1) as usize - 1;
            if var[i][c].is_some() {
                return Err(Error::Other(format!(
                    "permutation supports overlap at ({}, {})",
                    i + 1,
                    c + 1
                )));
            }
            var[i][c] = Some(vi as u8);
        }
    }
    let nz_cols: Vec<Vec<usize>> = (0..k)
        .map(|r| (0..k).filter(|&c| var[r][c].is_some()).collect())
        .collect();
    let m = sigma.size();
    let inv = sigma.inverse();
    let fs = nondecreasing_maps(m, k);

    type Acc = std::collections::BTreeMap<(u8, u8, u8), Rat>;
    let fold = |mut acc: Acc, f: &Vec<usize>| {
        let mf = multiplicity(f);
        let rows: Vec<usize> = (0..m).map(|j| f[inv.apply(j + 1) as usize - 1]).collect();
        let mut g = vec![0usize; m];
        let mut mono = vec![(0u8, 0u8, 0u8); m + 1];
        fn rec(
            var: &[Vec<Option<u8>>],
            rows: &[usize],
            nz: &[Vec<usize>],
            g: &mut Vec<usize>,
            mono: &mut Vec<(u8, u8, u8)>,
            depth: usize,
            acc: &mut Acc,
            mf: u64,
        ) {
            let m = rows.len();
            if depth == m {
                let mg = multiplicity(g);
                let e = acc.entry(mono[m]).or_insert_with(Rat::zero);
                *e += Rat::new(BigInt::one(), BigInt::from(mf * mg));
                return;
            }
            let min = if depth == 0 { 0 } else { g[depth - 1] };
            for &c in &nz[rows[depth]] {
                if c < min {
                    continue;
                }
                let v = var[rows[depth]][c].expect("non-zero cell");
                g[depth] = c;
                let mut key = mono[depth];
                match v {
                    0 => key.0 += 1,
                    1 => key.1 += 1,
                    _ => key.2 += 1,
                }
                mono[depth + 1] = key;
                rec(var, rows, nz, g, mono, depth + 1, acc, mf);
            }
        }
        rec(&var, &rows, &nz_cols, &mut g, &mut mono, 0, &mut acc, mf);
        acc
    };
    let merge = |mut a: Acc, b: Acc| {
        for (key, v) in b {
            let e = a.entry(key).or_insert_with(Rat::zero);
            *e += v;
        }
        a
    };
    let acc = if force_seq {
        par::fold_chunks_seq(&fs, Acc::new, fold)
    } else {
        par::fold_chunks(&fs, Acc::new, fold, merge)
    };
    let mut factorial = BigInt::one();
    for i in 2..=m {
        factorial *= i;
    }
    let scale = Rat::new(factorial, BigInt::from(k).pow(m as u32));
    let mut out = TriPoly::zero();
    for (key, v) in acc {
        out.add_term(key, v * &scale);
    }
    Ok(out)
}

/// JSON wire format: either an explicit matrix or a mixture description.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermutonSpec {
    Matrix { k: usize, #[serde(rename = "A")] a: Vec<Vec<String>> },
    Mixture { perms: Vec<String>, weights: Vec<String> },
}

impl PermutonSpec {
    pub fn build(&self) -> Result<StepPermuton> {
        match self {
            PermutonSpec::Matrix { k, a } => {
                if a.len() != *k || a.iter().any(|r| r.len() != *k) {
                    return Err(Error::WrongCount { expected: *k, got: a.len() });
                }
                let rows = a
                    .iter()
                    .map(|row| row.iter().map(|s| crate::rat::parse_rat(s)).collect())
                    .collect::<Result<Vec<Vec<Rat>>>>()?;
                StepPermuton::new(RatMatrix::from_rows(rows)?)
            }
            PermutonSpec::Mixture { perms, weights } => {
                let ps = perms
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<Permutation>>>()?;
                let ws = weights
                    .iter()
                    .map(|s| crate::rat::parse_rat(s))
                    .collect::<Result<Vec<Rat>>>()?;
                StepPermuton::mixture(&ps, &ws)
            }
        }
    }

    pub fn from_permuton(p: &StepPermuton) -> Self {
        let k = p.k();
        PermutonSpec::Matrix {
            k,
            a: (0..k)
                .map(|r| (0..k).map(|c| crate::rat::rat_to_string(p.matrix().get(r, c))).collect())
                .collect(),
        }
    }
}
