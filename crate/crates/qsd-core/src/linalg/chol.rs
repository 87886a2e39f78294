//! Cholesky factorizations: dense per-block, and a packed lower-triangle
//! variant for the (possibly large) Schur complement.

use super::{axpy, dot, Mat};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CholError {
    /// Pivot index at which positive definiteness failed.
    pub pivot: usize,
}

/// In-place Cholesky `A = L L^T` reading the lower triangle; on success the
/// lower triangle of `a` holds `L` and the strict upper triangle is zeroed.
pub fn cholesky_in_place<S: Scalar>(a: &mut Mat<S>) -> Result<(), CholError> {
    let n = a.rows();
    assert!(a.is_square());
    for j in 0..n {
        let rj = a.row(j);
        let d = a[(j, j)] - dot(&rj[..j], &rj[..j]);
        if d <= S::zero() || !d.is_finite() {
            return Err(CholError { pivot: j });
        }
        let l = d.sqrt();
        a[(j, j)] = l;
        for i in (j + 1)..n {
            let s = {
                // rows j and i are disjoint since i > j
                let (top, bottom) = a.as_slice().split_at(i * n);
                dot(&bottom[..j], &top[j * n..j * n + j])
            };
            a[(i, j)] = (a[(i, j)] - s) / l;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            a[(i, j)] = S::zero();
        }
    }
    Ok(())
}

/// Lower triangle stored packed by columns: column `j` holds `L[j..m, j]`
/// contiguously. This halves memory for the big Schur systems.
pub struct PackedLower<S> {
    pub m: usize,
    data: Vec<S>,
}

impl<S: Scalar> PackedLower<S> {
    pub fn zeros(m: usize) -> Self {
        PackedLower {
            m,
            data: vec![S::zero(); m * (m + 1) / 2],
        }
    }

    /// Start of column `j` in the packed buffer: `sum_{k<j} (m - k)`.
    #[inline(always)]
    fn offset(&self, j: usize) -> usize {
        j * self.m - j * j.saturating_sub(1) / 2
    }

    /// Entry (i, j) with i >= j.
    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> S {
        debug_assert!(i >= j);
        self.data[self.offset(j) + (i - j)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        debug_assert!(i >= j);
        let o = self.offset(j);
        self.data[o + (i - j)] = v;
    }

    pub fn col(&self, j: usize) -> &[S] {
        let o = self.offset(j);
        &self.data[o..o + (self.m - j)]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [S] {
        let o = self.offset(j);
        &mut self.data[o..o + (self.m - j)]
    }

    pub fn add_to_diagonal(&mut self, v: S) {
        for j in 0..self.m {
            let o = self.offset(j);
            self.data[o] += v;
        }
    }

    pub fn max_diag(&self) -> S {
        (0..self.m).fold(S::zero(), |acc, j| acc.max(self.get(j, j).abs()))
    }
}

/// In-place packed Cholesky. Left-looking over column panels so the trailing
/// access pattern stays contiguous.
pub fn packed_cholesky<S: Scalar>(h: &mut PackedLower<S>) -> Result<(), CholError> {
    let m = h.m;
    for j in 0..m {
        // subtract contributions of earlier columns k < j onto column j
        for k in 0..j {
            let ljk = h.get(j, k);
            if ljk == S::zero() {
                continue;
            }
            let (before, from_j) = split_cols(h, k, j);
            // before = column k suffix starting at row j; from_j = column j
            axpy(-ljk, before, from_j);
        }
        let col = h.col_mut(j);
        let d = col[0];
        if d <= S::zero() || !d.is_finite() {
            return Err(CholError { pivot: j });
        }
        let r = d.sqrt();
        col[0] = r;
        let inv = S::one() / r;
        for v in col[1..].iter_mut() {
            *v *= inv;
        }
    }
    Ok(())
}

/// Borrow column `k`'s suffix from row `j` and column `j` simultaneously.
fn split_cols<'a, S: Scalar>(
    h: &'a mut PackedLower<S>,
    k: usize,
    j: usize,
) -> (&'a [S], &'a mut [S]) {
    debug_assert!(k < j);
    let m = h.m;
    let off_k = h.offset(k) + (j - k);
    let off_j = h.offset(j);
    let len = m - j;
    let (a, b) = h.data.split_at_mut(off_j);
    (&a[off_k..off_k + len], &mut b[..len])
}

/// Solves `L L^T x = b` given a packed factor.
pub fn packed_solve<S: Scalar>(l: &PackedLower<S>, b: &mut [S]) {
    let m = l.m;
    assert_eq!(b.len(), m);
    // forward: L y = b
    for j in 0..m {
        let col = l.col(j);
        let yj = b[j] / col[0];
        b[j] = yj;
        axpy(-yj, &col[1..], &mut b[j + 1..]);
    }
    // backward: L^T x = y
    for j in (0..m).rev() {
        let col = l.col(j);
        let s = dot(&col[1..], &b[j + 1..]);
        b[j] = (b[j] - s) / col[0];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> Mat<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = Mat::from_fn(n, n, |_, _| next());
        let mut a = b.matmul_nt(&b);
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        a
    }

    #[test]
    fn dense_chol_roundtrip() {
        let a = spd(7, 3);
        let mut l = a.clone();
        cholesky_in_place(&mut l).unwrap();
        let recon = l.matmul_nt(&l);
        for i in 0..7 {
            for j in 0..7 {
                assert!((recon[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_chol_rejects_indefinite() {
        let mut a = Mat::identity(3);
        a[(1, 1)] = -0.5;
        assert_eq!(cholesky_in_place(&mut a), Err(CholError { pivot: 1 }));
    }

    #[test]
    fn packed_matches_dense() {
        let n = 23;
        let a = spd(n, 9);
        let mut l = a.clone();
        cholesky_in_place(&mut l).unwrap();

        let mut p = PackedLower::zeros(n);
        for j in 0..n {
            for i in j..n {
                p.set(i, j, a[(i, j)]);
            }
        }
        packed_cholesky(&mut p).unwrap();
        for j in 0..n {
            for i in j..n {
                assert!((p.get(i, j) - l[(i, j)]).abs() < 1e-11, "({},{})", i, j);
            }
        }

        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        packed_solve(&p, &mut x);
        // check A x = b
        for i in 0..n {
            let got = dot(a.row(i), &x);
            assert!((got - b[i]).abs() < 1e-9);
        }
    }
}
