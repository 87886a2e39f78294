//! Complex dense matrices and Hermitian eigendecomposition.
//!
//! Hermitian eigenproblems are solved through the real symmetric embedding
//! `H -> [[Re H, -Im H], [Im H, Re H]]`: every real eigenvector `(x; y)` of
//! the embedding yields a complex eigenvector `x + iy` of `H`, with each
//! eigenvalue appearing twice.

use num_complex::Complex;

use super::{sym_eig, Mat};
use crate::scalar::Scalar;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat<S> {
    data: Vec<Complex<S>>,
    rows: usize,
    cols: usize,
}

impl<S: Scalar> CMat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            data: vec![Complex::new(S::zero(), S::zero()); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(S::one(), S::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<S>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(r: &Mat<S>) -> Self {
        Self::from_fn(r.rows(), r.cols(), |i, j| Complex::new(r[(i, j)], S::zero()))
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

    pub fn row(&self, i: usize) -> &[Complex<S>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex<S>] {
        &self.data
    }

    pub fn adjoint(&self) -> CMat<S> {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMat<S>) -> CMat<S> {
        assert_eq!(self.cols, other.rows);
        let mut c = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.re == S::zero() && aik.im == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    c[(i, j)] = c[(i, j)] + aik * other[(k, j)];
                }
            }
        }
        c
    }

    /// `A^* B`.
    pub fn adjoint_mul(&self, other: &CMat<S>) -> CMat<S> {
        assert_eq!(self.rows, other.rows);
        let mut c = CMat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)].conj();
                for j in 0..other.cols {
                    c[(i, j)] = c[(i, j)] + a * other[(k, j)];
                }
            }
        }
        c
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Largest deviation from `A = A^*`.
    pub fn hermitian_defect(&self) -> S {
        let mut d = S::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Largest absolute imaginary part (realness check).
    pub fn max_imag(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, z| acc.max(z.im.abs()))
    }

    pub fn real_part(&self) -> Mat<S> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].re)
    }

    pub fn trace(&self) -> Complex<S> {
        (0..self.rows.min(self.cols)).fold(Complex::new(S::zero(), S::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    /// Hilbert-Schmidt pairing `tr(A^* B)`.
    pub fn hs_inner(&self, other: &CMat<S>) -> Complex<S> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(Complex::new(S::zero(), S::zero()), |acc, (a, b)| {
                acc + a.conj() * *b
            })
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for CMat<S> {
    type Output = Complex<S>;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<S> {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for CMat<S> {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<S> {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::fmt::Debug for CMat<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a square
/// complex matrix.
pub fn hermitian_embed<S: Scalar>(h: &CMat<S>) -> Mat<S> {
    assert!(h.is_square());
    let n = h.rows();
    let mut s = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            s[(i, j)] = z.re;
            s[(i, j + n)] = -z.im;
            s[(i + n, j)] = z.im;
            s[(i + n, j + n)] = z.re;
        }
    }
    s
}

pub struct HermEig<S> {
    /// Eigenvalues ascending.
    pub values: Vec<S>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: CMat<S>,
}

/// Eigendecomposition of a Hermitian matrix via its real embedding.
///
/// The embedding doubles every eigenvalue; the duplicate copies are removed by
/// Gram-Schmidt within eigenvalue clusters, leaving `n` orthonormal complex
/// eigenvectors.
pub fn hermitian_eig<S: Scalar>(h: &CMat<S>) -> HermEig<S> {
    let n = h.rows();
    assert!(h.is_square());
    if n == 0 {
        return HermEig {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let s = hermitian_embed(h);
    let eig = sym_eig(&s, true);
    let q = eig.vectors.unwrap();
    let scale = eig
        .values
        .iter()
        .fold(S::zero(), |a, &v| a.max(v.abs()))
        .max(S::one());
    let cluster_tol = S::from_f64(1e-8) * scale;

    let mut values: Vec<S> = Vec::with_capacity(n);
    let mut vecs: Vec<Vec<Complex<S>>> = Vec::with_capacity(n);
    for idx in 0..2 * n {
        if values.len() == n {
            break;
        }
        let lam = eig.values[idx];
        let mut v: Vec<Complex<S>> = (0..n)
            .map(|r| Complex::new(q[(r, idx)], q[(r + n, idx)]))
            .collect();
        // remove components along already-accepted vectors of the same cluster
        for (k, prev) in vecs.iter().enumerate() {
            if (values[k] - lam).abs() <= cluster_tol {
                let proj = prev
                    .iter()
                    .zip(v.iter())
                    .fold(Complex::new(S::zero(), S::zero()), |a, (p, x)| {
                        a + p.conj() * *x
                    });
                for (x, p) in v.iter_mut().zip(prev.iter()) {
                    *x = *x - proj * *p;
                }
            }
        }
        let nrm = v
            .iter()
            .fold(S::zero(), |a, z| a + z.norm_sqr())
            .sqrt();
        if nrm > S::from_f64(0.1) {
            let inv = S::one() / nrm;
            for x in v.iter_mut() {
                *x = Complex::new(x.re * inv, x.im * inv);
            }
            values.push(lam);
            vecs.push(v);
        }
    }
    assert_eq!(values.len(), n, "embedding eigenvector pairing failed");
    let mut vm = CMat::zeros(n, n);
    for (j, v) in vecs.iter().enumerate() {
        for i in 0..n {
            vm[(i, j)] = v[i];
        }
    }
    HermEig {
        values,
        vectors: vm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn embed_example() {
        // H = [[1, i], [-i, 1]] has eigenvalues {0, 2}; embedding has {0,0,2,2}
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = cx(1.0, 0.0);
        h[(0, 1)] = cx(0.0, 1.0);
        h[(1, 0)] = cx(0.0, -1.0);
        h[(1, 1)] = cx(1.0, 0.0);
        let s = hermitian_embed(&h);
        let w = sym_eig(&s, false).values;
        let expect = [0.0, 0.0, 2.0, 2.0];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let he = hermitian_eig(&h);
        assert!((he.values[0] - 0.0).abs() < 1e-12);
        assert!((he.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_embed_is_block_diagonal() {
        let r = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let h = CMat::from_real(&r);
        let s = hermitian_embed(&h);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(s[(i, j)], r[(i, j)]);
                assert_eq!(s[(i + 2, j + 2)], r[(i, j)]);
                assert_eq!(s[(i, j + 2)], 0.0);
                assert_eq!(s[(i + 2, j)], 0.0);
            }
        }
    }

    #[test]
    fn hermitian_eig_reconstructs() {
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for n in [1usize, 2, 3, 5, 8] {
            let mut h = CMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    if i == j {
                        h[(i, j)] = cx(next(), 0.0);
                    } else {
                        let z = cx(next(), next());
                        h[(i, j)] = z;
                        h[(j, i)] = z.conj();
                    }
                }
            }
            let eig = hermitian_eig(&h);
            let v = &eig.vectors;
            // V^* V = I
            let vv = v.adjoint_mul(v);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((vv[(i, j)] - cx(want, 0.0)).norm() < 1e-10);
                }
            }
            // V diag(w) V^* = H
            let mut vd = v.clone();
            for i in 0..n {
                for j in 0..n {
                    vd[(i, j)] = vd[(i, j)] * cx(eig.values[j], 0.0);
                }
            }
            let recon = vd.matmul(&v.adjoint());
            for i in 0..n {
                for j in 0..n {
                    assert!((recon[(i, j)] - h[(i, j)]).norm() < 1e-10, "n={}", n);
                }
            }
        }
    }
}
