//! Dense matrices over exact rationals: rank, kernel, inertia.
//!
//! The inertia computation is the workhorse of the certificates. It runs a
//! symmetric congruence elimination (Sylvester's law keeps the sign counts
//! invariant), so no characteristic polynomial or eigenvalue computation is
//! involved in any verdict. Floating-point spectra are provided separately
//! for cross-checking reported eigenvalue listings only.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{rat, rat_to_f64, Rat};

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl std::fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RatMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(12) {
            let row: Vec<String> =
                (0..self.cols).map(|c| crate::rat::rat_to_string(self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, rat(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Other("ragged rows".into()));
        }
        Ok(RatMatrix { rows: nr, cols: nc, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn add(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }

    fn check_symmetric(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimMismatch(self.rows, self.cols, self.cols, self.rows));
        }
        for r in 0..self.rows {
            for c in 0..r {
                if self.get(r, c) != self.get(c, r) {
                    return Err(Error::NotSymmetric(r, c));
                }
            }
        }
        Ok(())
    }

    /// v^T M v for square M.
    pub fn quadratic_form(&self, v: &[Rat]) -> Result<Rat> {
        if v.len() != self.rows || self.rows != self.cols {
            return Err(Error::WrongCount { expected: self.rows, got: v.len() });
        }
        let mut acc = Rat::zero();
        for r in 0..self.rows {
            if v[r].is_zero() {
                continue;
            }
            let mut row_acc = Rat::zero();
            for c in 0..self.cols {
                if !v[c].is_zero() {
                    row_acc += self.get(r, c) * &v[c];
                }
            }
            acc += &v[r] * row_acc;
        }
        Ok(acc)
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut lead = 0usize;
    for r in 0..m.rows {
        let mut col = None;
        'search: while lead < m.cols {
            for rr in r..m.rows {
                if !m.get(rr, lead).is_zero() {
                    col = Some((rr, lead));
                    break 'search;
                }
            }
            lead += 1;
        }
        let Some((pr, pc)) = col else { break };
        if pr != r {
            for c in 0..m.cols {
                m.data.swap(r * m.cols + c, pr * m.cols + c);
            }
        }
        let inv = m.get(r, pc).recip();
        for c in pc..m.cols {
            let v = m.get(r, c) * &inv;
            m.set(r, c, v);
        }
        for rr in 0..m.rows {
            if rr != r && !m.get(rr, pc).is_zero() {
                let f = m.get(rr, pc).clone();
                for c in pc..m.cols {
                    let v = m.get(rr, c) - &f * m.get(r, c);
                    m.set(rr, c, v);
                }
            }
        }
        pivots.push(pc);
        lead = pc + 1;
    }
    pivots
}

/// Exact rank by rational Gaussian elimination.
pub fn rank(m: &RatMatrix) -> usize {
    let mut work = m.clone();
    rref(&mut work).len()
}

/// Exact basis of the right null space; `cols - rank` vectors.
pub fn kernel_basis(m: &RatMatrix) -> Vec<Vec<Rat>> {
    let mut work = m.clone();
    let pivots = rref(&mut work);
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; m.cols];
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = Some(r);
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..m.cols {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut vec = vec![Rat::zero(); m.cols];
        vec[free] = rat(1);
        for (c, &p) in pivot_set.iter().enumerate() {
            if let Some(r) = p {
                vec[c] = -work.get(r, free).clone();
            }
        }
        basis.push(vec);
    }
    basis
}

/// Basis of the orthogonal complement of the row space of `rows`.
///
/// Over the rationals this is exactly the kernel of the row matrix.
pub fn orth_complement_basis(rows: &RatMatrix) -> Vec<Vec<Rat>> {
    kernel_basis(rows)
}

/// Signature of a symmetric matrix: counts of positive, zero and negative
/// eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub pos: usize,
    pub zero: usize,
    pub neg: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.pos + self.zero + self.neg
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.pos, self.zero, self.neg)
    }
}

/// Symmetric congruence reduction of `s`: returns `(t, d)` with `t^T s t`
/// diagonal with entries `d`. The columns of `t` give explicit vectors whose
/// quadratic forms are the diagonal entries; the certificates use them as
/// witness directions.
pub fn congruence_diagonalize(s: &RatMatrix) -> Result<(RatMatrix, Vec<Rat>)> {
    s.check_symmetric()?;
    let n = s.rows;
    let mut a = s.clone();
    let mut t = RatMatrix::identity(n);

    // col j of t += f * col i of t
    fn col_op(t: &mut RatMatrix, a: &mut RatMatrix, i: usize, j: usize, f: &Rat) {
        let n = t.rows;
        for r in 0..n {
            let v = t.get(r, j) + f * t.get(r, i);
            t.set(r, j, v);
        }
        // congruence on a: row/col j += f * row/col i
        for c in 0..n {
            let v = a.get(j, c) + f * a.get(i, c);
            a.set(j, c, v);
        }
        for r in 0..n {
            let v = a.get(r, j) + f * a.get(r, i);
            a.set(r, j, v);
        }
    }

    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        // pivot: the largest |a_ii| among the remaining diagonal
        let mut pivot: Option<usize> = None;
        for i in k..n {
            if !a.get(i, i).is_zero() {
                let better = match pivot {
                    None => true,
                    Some(p) => a.get(i, i).abs() > a.get(p, p).abs(),
                };
                if better {
                    pivot = Some(i);
                }
            }
        }
        if pivot.is_none() {
            // all-zero diagonal: pull a non-zero off-diagonal entry onto it;
            // the resulting hyperbolic pair contributes one +1 and one -1
            'outer: for i in k..n {
                for j in (i + 1)..n {
                    if !a.get(i, j).is_zero() {
                        let one = rat(1);
                        col_op(&mut t, &mut a, j, i, &one);
                        pivot = Some(i);
                        break 'outer;
                    }
                }
            }
        }
        let Some(p) = pivot else {
            // remaining block is zero
            for _ in k..n {
                diag.push(Rat::zero());
            }
            break;
        };
        if p != k {
            for r in 0..n {
                let (x, y) = (t.get(r, k).clone(), t.get(r, p).clone());
                t.set(r, k, y);
                t.set(r, p, x);
            }
            for c in 0..n {
                let (x, y) = (a.get(k, c).clone(), a.get(p, c).clone());
                a.set(k, c, y);
                a.set(p, c, x);
            }
            for r in 0..n {
                let (x, y) = (a.get(r, k).clone(), a.get(r, p).clone());
                a.set(r, k, y);
                a.set(r, p, x);
            }
        }
        let d = a.get(k, k).clone();
        for j in (k + 1)..n {
            if !a.get(k, j).is_zero() {
                let f = -(a.get(k, j) / &d);
                col_op(&mut t, &mut a, k, j, &f);
            }
        }
        diag.push(d);
    }
    Ok((t, diag))
}

/// Exact inertia of a symmetric rational matrix.
pub fn inertia(s: &RatMatrix) -> Result<Inertia> {
    let (_, diag) = congruence_diagonalize(s)?;
    let mut out = Inertia { pos: 0, zero: 0, neg: 0 };
    for d in diag {
        if d.is_zero() {
            out.zero += 1;
        } else if d.is_positive() {
            out.pos += 1;
        } else {
            out.neg += 1;
        }
    }
    Ok(out)
}

/// Inertia of `v^T s v` where the columns of the restriction are the vectors
/// in `basis`. The basis must be linearly independent.
pub fn restricted_inertia(s: &RatMatrix, basis: &[Vec<Rat>]) -> Result<Inertia> {
    s.check_symmetric()?;
    let m = restriction_matrix(s, basis)?;
    inertia(&m)
}

/// `v^T s v` for a list of basis column vectors.
pub fn restriction_matrix(s: &RatMatrix, basis: &[Vec<Rat>]) -> Result<RatMatrix> {
    let n = s.rows();
    if basis.iter().any(|b| b.len() != n) {
        return Err(Error::WrongCount { expected: n, got: basis.first().map_or(0, Vec::len) });
    }
    let v = RatMatrix::from_rows(basis.to_vec())?.transpose();
    if rank(&v) != basis.len() {
        return Err(Error::DependentVectors);
    }
    v.transpose().mul(&s.mul(&v)?)
}

/// Double-precision spectrum of a symmetric matrix, sorted ascending.
///
/// Cyclic Jacobi iteration; plenty for the 36x36 matrices that show up here.
pub fn float_eigenvalues(s: &RatMatrix) -> Result<Vec<f64>> {
    s.check_symmetric()?;
    let n = s.rows;
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| rat_to_f64(s.get(r, c))).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-13 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flat_map(|r| r.iter()).map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn rank_basics() {
        assert_eq!(rank(&RatMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&RatMatrix::identity(4)), 4);
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn kernel_basics() {
        assert!(kernel_basis(&RatMatrix::identity(3)).is_empty());
        let k = kernel_basis(&m(&[&[1, 1]]));
        assert_eq!(k.len(), 1);
        // spanned by (1, -1)
        assert_eq!(&k[0][0] + &k[0][1], Rat::zero());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn rank_nullity() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 0, 1]]);
        assert_eq!(rank(&a) + kernel_basis(&a).len(), a.cols());
    }

    #[test]
    fn inertia_diag() {
        let s = m(&[&[1, 0, 0], &[0, -2, 0], &[0, 0, 0]]);
        assert_eq!(inertia(&s).unwrap(), Inertia { pos: 1, zero: 1, neg: 1 });
    }

    #[test]
    fn inertia_hyperbolic_block() {
        // zero diagonal, non-zero off-diagonal: one positive, one negative
        let s = m(&[&[0, 3], &[3, 0]]);
        assert_eq!(inertia(&s).unwrap(), Inertia { pos: 1, zero: 0, neg: 1 });
    }

    #[test]
    fn inertia_rejects_asymmetric() {
        let s = m(&[&[0, 1], &[2, 0]]);
        assert!(matches!(inertia(&s), Err(Error::NotSymmetric(_, _))));
    }

    #[test]
    fn congruence_columns_are_witnesses() {
        let s = m(&[&[2, 1, 0], &[1, -3, 1], &[0, 1, 0]]);
        let (t, d) = congruence_diagonalize(&s).unwrap();
        for (j, dj) in d.iter().enumerate() {
            let col: Vec<Rat> = (0..3).map(|r| t.get(r, j).clone()).collect();
            assert_eq!(&s.quadratic_form(&col).unwrap(), dj);
        }
    }

    #[test]
    fn restricted_inertia_basics() {
        let s = m(&[&[1, 0], &[0, -1]]);
        let e1 = vec![rat(1), rat(0)];
        assert_eq!(
            restricted_inertia(&s, &[e1]).unwrap(),
            Inertia { pos: 1, zero: 0, neg: 0 }
        );
        // full basis restriction equals the full inertia
        let full = vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]];
        assert_eq!(restricted_inertia(&s, &full).unwrap(), inertia(&s).unwrap());
        // dependent basis is rejected
        let dep = vec![vec![rat(1), rat(0)], vec![rat(2), rat(0)]];
        assert!(matches!(restricted_inertia(&s, &dep), Err(Error::DependentVectors)));
    }

    #[test]
    fn float_eigenvalues_sorted() {
        let s = m(&[&[3, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
        let e = float_eigenvalues(&s).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_value() {
        let s = m(&[&[2, 1], &[1, -1]]);
        let v = vec![ratio(1, 2), rat(3)];
        // 2*(1/2)^2 + 2*(1/2)*3 - 9 = 1/2 + 3 - 9
        assert_eq!(s.quadratic_form(&v).unwrap(), ratio(-11, 2));
    }
}
