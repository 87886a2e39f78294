//! Minimal dense linear algebra: just what the SDP solver and the state
//! geometry need, generic over the scalar type.

mod chol;
mod complex;
mod sym_eig;

pub use chol::{cholesky_in_place, packed_cholesky, packed_solve, CholError, PackedLower};
pub use complex::{hermitian_eig, hermitian_embed, CMat};
pub use sym_eig::{sym_eig, SymEig};

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<S> {
    data: Vec<S>,
    rows: usize,
    cols: usize,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            data: vec![S::zero(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            data,
            rows: r,
            cols: c,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn fill(&mut self, v: S) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn transpose(&self) -> Mat<S> {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    /// Symmetry defect `max |a_ij - a_ji|`.
    pub fn sym_defect(&self) -> S {
        let mut d = S::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        d
    }

    /// Overwrites with `(A + A^T)/2`.
    pub fn symmetrize(&mut self) {
        let half = S::from_f64(0.5);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn scale(&mut self, s: S) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn add_assign_scaled(&mut self, other: &Mat<S>, s: S) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    /// `C = A * B`.
    pub fn matmul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows);
        let mut c = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let crow = c.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == S::zero() {
                    continue;
                }
                let brow = other.row(k);
                for (cv, &bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += aik * bv;
                }
            }
        }
        c
    }

    /// `C = A * B^T`.
    pub fn matmul_nt(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.cols);
        let mut c = Mat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            for j in 0..other.rows {
                c[(i, j)] = dot(arow, other.row(j));
            }
        }
        c
    }

    /// `C = A^T * B`.
    pub fn matmul_tn(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.rows, other.rows);
        let mut c = Mat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = other.row(k);
            for (i, &aki) in arow.iter().enumerate() {
                if aki == S::zero() {
                    continue;
                }
                let crow = c.row_mut(i);
                for (cv, &bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += aki * bv;
                }
            }
        }
        c
    }

    /// `<A, B> = sum_ij a_ij b_ij`.
    pub fn inner(&self, other: &Mat<S>) -> S {
        dot(&self.data, &other.data)
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .sum()
    }

    /// Solves `L x = b` in place for lower-triangular `L` (forward substitution).
    pub fn solve_lower_in_place(&self, b: &mut [S]) {
        let n = self.rows;
        for i in 0..n {
            let s = dot(&self.row(i)[..i], &b[..i]);
            b[i] = (b[i] - s) / self[(i, i)];
        }
    }

    /// Solves `L^T x = b` in place for lower-triangular `L` (back substitution).
    pub fn solve_lower_transpose_in_place(&self, b: &mut [S]) {
        let n = self.rows;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self[(k, i)] * b[k];
            }
            b[i] = s / self[(i, i)];
        }
    }

    /// Given Cholesky factor `L` of `A`, computes `A^{-1} B` column by column.
    pub fn chol_solve_mat(&self, b: &Mat<S>) -> Mat<S> {
        let n = self.rows;
        assert_eq!(b.rows, n);
        let mut out = Mat::zeros(n, b.cols);
        let mut col = vec![S::zero(); n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            self.solve_lower_in_place(&mut col);
            self.solve_lower_transpose_in_place(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::fmt::Debug for Mat<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc0 = S::zero();
    let mut acc1 = S::zero();
    let mut acc2 = S::zero();
    let mut acc3 = S::zero();
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    let mut acc = (acc0 + acc1) + (acc2 + acc3);
    for i in 4 * chunks..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yv, &xv) in y.iter_mut().zip(x.iter()) {
        *yv += alpha * xv;
    }
}

pub fn norm2<S: Scalar>(v: &[S]) -> S {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Mat::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[19.0, 22.0]);
        assert_eq!(c.row(1), &[43.0, 50.0]);
        let d = a.matmul_nt(&b);
        assert_eq!(d.row(0), &[17.0, 23.0]);
        let e = a.matmul_tn(&b);
        assert_eq!(e.row(0), &[26.0, 30.0]);
    }

    #[test]
    fn triangular_solves() {
        let l = Mat::from_rows(&[vec![2.0, 0.0], vec![1.0, 3.0]]);
        let mut b = vec![4.0, 11.0];
        l.solve_lower_in_place(&mut b);
        assert_eq!(b, vec![2.0, 3.0]);
        let mut b = vec![7.0, 6.0];
        l.solve_lower_transpose_in_place(&mut b);
        assert_eq!(b, vec![2.5, 2.0]);
    }
}
