//! Symmetric eigendecomposition by Householder tridiagonalization followed by
//! the implicit-shift QL iteration (the classical tred2/tql2 pair).

use super::Mat;
use crate::scalar::Scalar;

pub struct SymEig<S> {
    /// Eigenvalues in ascending order.
    pub values: Vec<S>,
    /// Orthonormal eigenvectors as columns, when requested.
    pub vectors: Option<Mat<S>>,
}

/// Eigendecomposition of a symmetric matrix (the lower triangle is used).
///
/// `with_vectors = false` skips the transform accumulation, roughly halving
/// the cost; useful for extreme-eigenvalue queries.
pub fn sym_eig<S: Scalar>(a: &Mat<S>, with_vectors: bool) -> SymEig<S> {
    assert!(a.is_square());
    let n = a.rows();
    if n == 0 {
        return SymEig {
            values: vec![],
            vectors: with_vectors.then(|| Mat::zeros(0, 0)),
        };
    }
    let mut z = a.clone();
    z.symmetrize();
    let mut d = vec![S::zero(); n];
    let mut e = vec![S::zero(); n];
    tred2(&mut z, &mut d, &mut e, with_vectors);
    tql2(&mut d, &mut e, &mut z, with_vectors);
    // ascending sort (tql2 leaves them sorted already; keep as safety for ties)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<S> = order.iter().map(|&i| d[i]).collect();
    let vectors = with_vectors.then(|| {
        let mut v = Mat::zeros(n, n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                v[(i, new_j)] = z[(i, old_j)];
            }
        }
        v
    });
    SymEig { values, vectors }
}

/// Householder reduction to tridiagonal form; `d` receives the diagonal and
/// `e` the subdiagonal. With `with_vectors`, `z` accumulates the orthogonal
/// transform, otherwise its content is scratch.
fn tred2<S: Scalar>(z: &mut Mat<S>, d: &mut [S], e: &mut [S], with_vectors: bool) {
    let n = z.rows();
    for i in 0..n {
        d[i] = z[(n - 1, i)];
    }
    for i in (1..n).rev() {
        let l = i;
        let mut h = S::zero();
        let mut scale = S::zero();
        if l > 1 {
            for k in 0..l {
                scale += d[k].abs();
            }
        }
        if scale == S::zero() {
            e[i] = if l >= 1 { d[l - 1] } else { S::zero() };
            for j in 0..l {
                d[j] = z[(l - 1, j)];
                z[(i, j)] = S::zero();
                z[(j, i)] = S::zero();
            }
        } else {
            for k in 0..l {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[l - 1];
            let mut g = if f > S::zero() { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[l - 1] = f - g;
            for j in 0..l {
                e[j] = S::zero();
            }
            for j in 0..l {
                f = d[j];
                z[(j, i)] = f;
                g = e[j] + z[(j, j)] * f;
                for k in (j + 1)..l {
                    g += z[(k, j)] * d[k];
                    e[k] += z[(k, j)] * f;
                }
                e[j] = g;
            }
            f = S::zero();
            for j in 0..l {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..l {
                e[j] -= hh * d[j];
            }
            for j in 0..l {
                f = d[j];
                g = e[j];
                for k in j..l {
                    let upd = f * e[k] + g * d[k];
                    z[(k, j)] -= upd;
                }
                d[j] = z[(l - 1, j)];
                z[(i, j)] = S::zero();
            }
        }
        d[i] = h;
    }
    if with_vectors {
        for i in 1..n {
            z[(n - 1, i - 1)] = z[(i - 1, i - 1)];
            z[(i - 1, i - 1)] = S::one();
            let h = d[i];
            if h != S::zero() {
                for k in 0..i {
                    d[k] = z[(k, i)] / h;
                }
                for j in 0..i {
                    let mut g = S::zero();
                    for k in 0..i {
                        g += z[(k, i)] * z[(k, j)];
                    }
                    for k in 0..i {
                        z[(k, j)] -= g * d[k];
                    }
               }
            }
            for k in 0..i {
                z[(k, i)] = S::zero();
            }
        }
        for i in 0..n {
            d[i] = z[(n - 1, i)];
            z[(n - 1, i)] = S::zero();
        }
        z[(n - 1, n - 1)] = S::one();
    } else {
        for i in 0..n {
            d[i] = z[(i, i)];
        }
    }
    e[0] = S::zero();
}

/// Implicit-shift QL on the tridiagonal (d, e); accumulates vectors into `z`
/// when requested. Eigenvalues come out ascending.
fn tql2<S: Scalar>(d: &mut [S], e: &mut [S], z: &mut Mat<S>, with_vectors: bool) {
    let n = d.len();
    if n <= 1 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();
    let eps = S::epsilon();
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // find small subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 64, "QL iteration failed to converge");
            // form shift
            let mut g = (d[l + 1] - d[l]) / (e[l] + e[l]);
            let mut r = hypot(g, S::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = S::one();
            let mut c = S::one();
            let mut p = S::zero();
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == S::zero() {
                    d[i + 1] -= p;
                    e[m] = S::zero();
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + S::from_f64(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if with_vectors {
                    for k in 0..n {
                        f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if r == S::zero() && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = S::zero();
        }
    }
    // straight selection sort (ascending), carrying vectors along
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in (i + 1)..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if with_vectors {
                for r in 0..n {
                    let t = z[(r, i)];
                    z[(r, i)] = z[(r, k)];
                    z[(r, k)] = t;
                }
            }
        }
    }
}

fn hypot<S: Scalar>(a: S, b: S) -> S {
    let (a, b) = (a.abs(), b.abs());
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == S::zero() {
        return S::zero();
    }
    let r = lo / hi;
    hi * (S::one() + r * r).sqrt()
}
