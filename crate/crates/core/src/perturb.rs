//! Perturbations of the uniform step permuton.
//!
//! `B(x) = Z^0 + sum_t x_t Z^(t)` perturbs the all-one matrix by elementary
//! checkerboard bumps `Z^{j,j'}` that preserve row and column sums. The
//! deviation function
//!
//! ```text
//! h_sigma(x) = -k^(2m)/m! + m! * sum_{f,g} prod_i B(x)[f(i), g(sigma(i))] / (mult_f * mult_g)
//! ```
//!
//! (`m = |sigma|`) satisfies `d(sigma, mu[B(x)/k]) = 1/m! + h_sigma(x)/k^(2m)`
//! whenever `B(x)/k` is doubly stochastic, and `h_sigma(0) = 0`.
//!
//! Derivatives at the origin are computed by expanding the product of affine
//! entry forms to total degree two; this is exact and never touches the full
//! multivariate expansion. The returned "Hessian" is the quadratic
//! coefficient matrix `H` of `h(x) = g.x + x^T H x + O(|x|^3)`, i.e. half
//! the analytic second derivative; this is the normalization under which all
//! entries for 4-point patterns come out half-integral.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::{self, RatMatrix};
use crate::par;
use crate::perm::Permutation;
use crate::permuton::{multiplicity, nondecreasing_maps};
use crate::poly::BiPoly;
use crate::rat::{rat, Rat};

/// A point in the perturbation space: `x` has `(k-1)^2` coordinates, with
/// `x[t]` attached to `Z^{j,j'}` for `t = (j-1)(k-1) + j'` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationPoint {
    pub k: usize,
    pub x: Vec<Rat>,
}

impl PerturbationPoint {
    pub fn new(k: usize, x: Vec<Rat>) -> Result<Self> {
        if k < 2 {
            return Err(Error::GridTooSmall(0));
        }
        if x.len() != (k - 1) * (k - 1) {
            return Err(Error::WrongCount { expected: (k - 1) * (k - 1), got: x.len() });
        }
        Ok(PerturbationPoint { k, x })
    }

    pub fn zero(k: usize) -> Self {
        PerturbationPoint { k, x: vec![Rat::zero(); (k - 1) * (k - 1)] }
    }
}

/// The elementary perturbation `Z^{j,j'}`: +1 at `(j, j')` and
/// `(j+1, j'+1)`, -1 at `(j+1, j')` and `(j, j'+1)`; `1 <= j, j' <= k-1`.
pub fn z_basis(k: usize, j: usize, jp: usize) -> Result<RatMatrix> {
    if j == 0 || j >= k {
        return Err(Error::IndexOutOfRange { index: j, max: k - 1 });
    }
    if jp == 0 || jp >= k {
        return Err(Error::IndexOutOfRange { index: jp, max: k - 1 });
    }
    let mut m = RatMatrix::zeros(k, k);
    m.set(j - 1, jp - 1, rat(1));
    m.set(j, jp, rat(1));
    m.set(j, jp - 1, rat(-1));
    m.set(j - 1, jp, rat(-1));
    Ok(m)
}

/// Linear form of entry `(r, c)` of `B(x)` (0-based indices): the constant
/// is one; returns the non-zero `(t, +-1)` coefficients, 0-based `t`.
fn entry_form(k: usize, r: usize, c: usize) -> Vec<(usize, i64)> {
    let mut terms = Vec::with_capacity(4);
    // Z^{j,j'} touches (r, c) when j in {r, r+1} and j' in {c, c+1} (1-based
    // j = row index of the +1 corner). Work 1-based to match the t layout.
    let (r1, c1) = (r + 1, c + 1);
    for j in [r1.wrapping_sub(1), r1] {
        if j == 0 || j > k - 1 {
            continue;
        }
        for jp in [c1.wrapping_sub(1), c1] {
            if jp == 0 || jp > k - 1 {
                continue;
            }
            let t = (j - 1) * (k - 1) + jp - 1;
            let sign = if (j == r1 && jp == c1) || (j + 1 == r1 && jp + 1 == c1) {
                1
            } else {
                -1
            };
            terms.push((t, sign));
        }
    }
    terms
}

/// `B(x) = Z^0 + sum_t x_t Z^(t)`; every row and column sums to `k`.
pub fn b_matrix(p: &PerturbationPoint) -> RatMatrix {
    let k = p.k;
    RatMatrix::from_fn(k, k, |r, c| {
        let mut v = rat(1);
        for (t, s) in entry_form(k, r, c) {
            if s > 0 {
                v += &p.x[t];
            } else {
                v -= &p.x[t];
            }
        }
        v
    })
}

/// Exact `h_sigma(x)` by the defining sum.
pub fn h_value(sigma: &Permutation, p: &PerturbationPoint) -> Rat {
    let b = b_matrix(p);
    let m = sigma.size();
    let k = p.k;
    let inv = sigma.inverse();
    let fs = nondecreasing_maps(m, k);
    let total = par::fold_chunks(
        &fs,
        Rat::zero,
        |acc, f| {
            let mf = multiplicity(f);
            let rows: Vec<usize> = (0..m).map(|j| f[inv.apply(j + 1) as usize - 1]).collect();
            let mut acc = acc;
            for g in nondecreasing_maps(m, k) {
                let mg = multiplicity(&g);
                let mut prod = Rat::one();
                for (j, &gv) in g.iter().enumerate() {
                    prod *= b.get(rows[j], gv);
                    if prod.is_zero() {
                        break;
                    }
                }
                if !prod.is_zero() {
                    acc += prod / rat((mf * mg) as i64);
                }
            }
            acc
        },
        |x, y| x + y,
    );
    let mfact = factorial(m);
    let k2m = BigInt::from(k).pow(2 * m as u32);
    total * Rat::from_integer(mfact.clone()) - Rat::new(k2m, mfact)
}

/// Exact gradient of `h_sigma` at the origin.
pub fn h_gradient_at_zero(sigma: &Permutation, k: usize) -> Vec<Rat> {
    h_derivatives_at_zero(sigma, k).0
}

/// Exact quadratic coefficient matrix of `h_sigma` at the origin (see the
/// module docs for the normalization).
pub fn h_hessian_at_zero(sigma: &Permutation, k: usize) -> RatMatrix {
    h_derivatives_at_zero(sigma, k).1
}

/// Gradient and Hessian together; they share one enumeration pass.
pub fn h_derivatives_at_zero(sigma: &Permutation, k: usize) -> (Vec<Rat>, RatMatrix) {
    h_derivatives_impl(sigma, k, false)
}

/// Sequential twin of [`h_derivatives_at_zero`] for the benchmarks.
pub fn h_derivatives_at_zero_seq(sigma: &Permutation, k: usize) -> (Vec<Rat>, RatMatrix) {
    h_derivatives_impl(sigma, k, true)
}

struct DerivAcc {
    count: i64,
    grad: Vec<i64>,
    // packed upper triangle of quadratic coefficients, t <= u
    quad: Vec<i64>,
}

impl DerivAcc {
    fn new(d: usize) -> Self {
        DerivAcc { count: 0, grad: vec![0; d], quad: vec![0; d * (d + 1) / 2] }
    }

    fn merge(mut self, other: DerivAcc) -> DerivAcc {
        self.count += other.count;
        for (a, b) in self.grad.iter_mut().zip(other.grad) {
            *a += b;
        }
        for (a, b) in self.quad.iter_mut().zip(other.quad) {
            *a += b;
        }
        self
    }
}

fn h_derivatives_impl(sigma: &Permutation, k: usize, force_seq: bool) -> (Vec<Rat>, RatMatrix) {
    let m = sigma.size();
    let d = (k - 1) * (k - 1);
    let inv = sigma.inverse();
    // scale every (f, g) weight by lcm = (m!)^2 so it is an integer
    let mfact_u = {
        let mut v = 1u64;
        for i in 2..=m as u64 {
            v *= i;
        }
        v
    };
    let lcm = mfact_u * mfact_u;
    let forms: Vec<Vec<Vec<(usize, i64)>>> = (0..k)
        .map(|r| (0..k).map(|c| entry_form(k, r, c)).collect())
        .collect();
    let fs = nondecreasing_maps(m, k);
    let gs = nondecreasing_maps(m, k);

    let fold = |mut acc: DerivAcc, f: &Vec<usize>| {
        let mf = multiplicity(f);
        let rows: Vec<usize> = (0..m).map(|j| f[inv.apply(j + 1) as usize - 1]).collect();
        for g in &gs {
            let mg = multiplicity(g);
            let w = (lcm / (mf * mg)) as i64;
            acc.count += w;
            let term_forms: Vec<&Vec<(usize, i64)>> =
                (0..m).map(|j| &forms[rows[j]][g[j]]).collect();
            // gradient: sum of the affine forms
            for tf in &term_forms {
                for &(t, s) in tf.iter() {
                    acc.grad[t] += w * s;
                }
            }
            // quadratic coefficients: products of distinct form pairs
            for a in 0..m {
                for b in (a + 1)..m {
                    for &(t1, s1) in term_forms[a] {
                        for &(t2, s2) in term_forms[b] {
                            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                            acc.quad[lo * (2 * d - lo - 1) / 2 + hi] += w * s1 * s2;
                        }
                    }
                }
            }
        }
        acc
    };

    let acc = if force_seq {
        par::fold_chunks_seq(&fs, || DerivAcc::new(d), fold)
    } else {
        par::fold_chunks(&fs, || DerivAcc::new(d), fold, DerivAcc::merge)
    };

    // consistency: m! * sum 1/(mf*mg) must equal k^(2m)/m!
    let expected = BigInt::from(k).pow(2 * m as u32);
    assert_eq!(
        BigInt::from(acc.count),
        expected,
        "weighted (f, g) count mismatch for k = {k}"
    );

    let scale = Rat::new(BigInt::from(mfact_u), BigInt::from(lcm));
    let grad: Vec<Rat> = acc.grad.iter().map(|&v| &scale * rat(v)).collect();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let hess = RatMatrix::from_fn(d, d, |r, c| {
        let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
        let q = &scale * rat(acc.quad[lo * (2 * d - lo - 1) / 2 + hi]);
        if r == c {
            q
        } else {
            q * &half
        }
    });
    (grad, hess)
}

fn factorial(m: usize) -> BigInt {
    let mut v = BigInt::one();
    for i in 2..=m {
        v *= i;
    }
    v
}

/// The gradient polynomial of a `k`-point permutation: the first-order
/// density response to an elementary perturbation of the uniform permuton
/// at `(alpha, beta)`. The apparent poles at the domain boundary cancel
/// (their coefficients vanish), so the result is a genuine polynomial.
pub fn gradient_polynomial(pi: &Permutation) -> BiPoly {
    let k = pi.size();
    let kfact = Rat::from_integer(factorial(k));
    let mut out = BiPoly::zero();
    for m in 1..=k {
        let pm = pi.apply(m) as usize;
        let apart = boundary_form(k, m);
        let bpart = boundary_form(k, pm);
        let denom = factorial(m - 1) * factorial(k - m) * factorial(pm - 1) * factorial(k - pm);
        let coef = &kfact / Rat::from_integer(denom);
        for (&(i, _), ca) in apart.terms() {
            for (&(j, _), cb) in bpart.terms() {
                out.add_term(i, j, ca * cb * &coef);
            }
        }
    }
    out
}

/// `(k-m) a^(m-1) (1-a)^(k-m-1) - (m-1) a^(m-2) (1-a)^(k-m)` as a univariate
/// polynomial embedded in the first slot of a `BiPoly`.
fn boundary_form(k: usize, m: usize) -> BiPoly {
    let mut out = BiPoly::zero();
    if k > m {
        add_scaled_binomial(&mut out, rat((k - m) as i64), m - 1, k - m - 1);
    }
    if m > 1 {
        add_scaled_binomial(&mut out, rat(-((m - 1) as i64)), m - 2, k - m);
    }
    out
}

/// `out += c * a^p * (1-a)^q`, expanded.
fn add_scaled_binomial(out: &mut BiPoly, c: Rat, p: usize, q: usize) {
    let mut binom = BigInt::one();
    for i in 0..=q {
        // (-1)^i * C(q, i) * a^(p+i)
        let term = &c * Rat::from_integer(binom.clone());
        out.add_term(
            (p + i) as u32,
            0,
            if i % 2 == 0 { term } else { -term },
        );
        if i < q {
            binom = binom * (q - i) / (i + 1);
        }
    }
}

/// Result of testing a family of gradient polynomials for linear
/// (in)dependence.
#[derive(Clone, Debug, PartialEq)]
pub enum GradPolyDependence {
    Independent,
    Dependent {
        /// A non-trivial kernel vector, cleared to coprime integers.
        coeffs: Vec<Rat>,
        /// Whether the matching combination of permutation matrices is a
        /// constant matrix.
        combo_is_constant: bool,
    },
}

/// Exact rank test of the gradient polynomials of `perms` over the monomial
/// basis. On dependence, returns one kernel vector together with the
/// constant-matrix cross-check on `sum t_i A_{pi_i}`.
pub fn grad_poly_dependence(perms: &[Permutation]) -> Result<GradPolyDependence> {
    if perms.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let k = perms[0].size();
    if perms.iter().any(|p| p.size() != k) {
        return Err(Error::MixedSizes);
    }
    let polys: Vec<BiPoly> = perms.iter().map(gradient_polynomial).collect();
    let monomials: std::collections::BTreeSet<(u32, u32)> =
        polys.iter().flat_map(|p| p.terms().map(|(&m, _)| m)).collect();
    let rows: Vec<Vec<Rat>> = polys
        .iter()
        .map(|p| monomials.iter().map(|&(i, j)| p.coeff(i, j)).collect())
        .collect();
    let stack = RatMatrix::from_rows(rows)?;
    if matrix::rank(&stack) == perms.len() {
        return Ok(GradPolyDependence::Independent);
    }
    let kernel = matrix::kernel_basis(&stack.transpose());
    let coeffs = normalize_primitive(&kernel[0]);
    // combination of the permutation matrices
    let mut combo = RatMatrix::zeros(k, k);
    for (p, t) in perms.iter().zip(&coeffs) {
        combo = combo.add(&p.matrix().to_rat().scale(t))?;
    }
    let first = combo.get(0, 0).clone();
    let combo_is_constant =
        (0..k).all(|r| (0..k).all(|c| combo.get(r, c) == &first));
    Ok(GradPolyDependence::Dependent { coeffs, combo_is_constant })
}

/// Scale a rational vector to coprime integers with positive leading entry.
fn normalize_primitive(v: &[Rat]) -> Vec<Rat> {
    let mut denom_lcm = BigInt::one();
    for x in v {
        denom_lcm = num_integer::lcm(denom_lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> =
        v.iter().map(|x| x.numer() * (&denom_lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = num_integer::gcd(g, i.clone());
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let lead_neg = ints.iter().find(|i| !i.is_zero()).is_some_and(Signed::is_negative);
    ints.into_iter()
        .map(|i| {
            let r = Rat::from_integer(i / &g);
            if lead_neg {
                -r
            } else {
                r
            }
        })
        .collect()
}
