//! Gram matrix builders: general ensembles, slot-product sequence Grams for
//! arbitrary change counts, and closed forms for one, two, and three change
//! points.
//!
//! Two routes exist on purpose. The closed forms are fast and assume real
//! nonnegative overlaps; the general slot-product path works for any complex
//! table and serves as their independent cross-check.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{hermitian_embed, sym_eig, CMat, Mat};
use crate::scalar::Scalar;
use crate::states::{inner_product, ChangeIndexSet, OverlapTable, StateEnsemble, StateError};

const HERM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("not Hermitian: defect {0}")]
    NotHermitian(f64),
    #[error("diagonal entry {0} deviates from 1 by {1}")]
    BadDiagonal(usize, f64),
    #[error("not positive semidefinite: min eigenvalue {0}")]
    NotPsd(f64),
    #[error("closed-form path requires real nonnegative overlaps (use the general path)")]
    ComplexOverlaps,
    #[error("table has {0} symbols, expected {1}")]
    TableSize(usize, usize),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Hermitian PSD matrix with unit diagonal. Construction validates; nothing
/// is repaired here (noisy estimates are repaired in the estimation module).
#[derive(Debug, Clone)]
pub struct GramMatrix<S: Scalar> {
    entries: CMat<S>,
}

impl<S: Scalar> GramMatrix<S> {
    pub fn new(entries: CMat<S>) -> Result<Self, GramError> {
        if !entries.is_square() {
            return Err(GramError::NotSquare(entries.rows(), entries.cols()));
        }
        let n = entries.rows();
        let htol = S::from_f64(HERM_TOL) * S::from_usize(n.max(1)).max(S::one());
        let defect = entries.hermitian_defect();
        if defect > htol {
            return Err(GramError::NotHermitian(defect.as_f64()));
        }
        for i in 0..n {
            let d = (entries[(i, i)] - Complex::new(S::one(), S::zero())).norm();
            if d > S::from_f64(HERM_TOL) {
                return Err(GramError::BadDiagonal(i, d.as_f64()));
            }
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -S::from_f64(PSD_TOL) {
            return Err(GramError::NotPsd(min_eig.as_f64()));
        }
        Ok(GramMatrix { entries })
    }

    /// Real symmetric input.
    pub fn from_real(entries: Mat<S>) -> Result<Self, GramError> {
        Self::new(CMat::from_real(&entries))
    }

    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &CMat<S> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<S> {
        self.entries[(i, j)]
    }

    /// True when every entry is real within `tol`.
    pub fn is_real(&self, tol: S) -> bool {
        self.entries.max_imag() <= tol
    }

    pub fn real_part(&self) -> Mat<S> {
        self.entries.real_part()
    }

    /// True when the matrix is symmetric Toeplitz within `tol` (the canonical
    /// one-change-point form).
    pub fn is_symmetric_toeplitz(&self, tol: S) -> bool {
        let n = self.size();
        if self.entries.max_imag() > tol {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                let want = self.entries[(0, i.max(j) - i.min(j))].re;
                if (self.entries[(i, j)].re - want).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn min_eigenvalue(&self) -> S {
        min_eigenvalue(&self.entries)
    }
}

/// Minimum eigenvalue of a Hermitian matrix (via the real embedding when
/// complex).
pub(crate) fn min_eigenvalue<S: Scalar>(h: &CMat<S>) -> S {
    if h.rows() == 0 {
        return S::zero();
    }
    if h.max_imag() == S::zero() {
        let eig = sym_eig(&h.real_part(), false);
        eig.values[0]
    } else {
        let eig = sym_eig(&hermitian_embed(h), false);
        eig.values[0]
    }
}

/// Gram matrix of an explicit ensemble: `G_ij = <psi_i|psi_j>`.
pub fn gram_from_ensemble<S: Scalar>(e: &StateEnsemble<S>) -> Result<GramMatrix<S>, GramError> {
    let n = e.len();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inner_product(e.state(i), e.state(j))?;
        }
    }
    GramMatrix::new(g)
}

/// Sequence Gram for arbitrary change counts: entry `(c, c')` is the product
/// over time slots of the alphabet overlaps, `O(N)` per entry, never forming
/// tensor products.
pub fn gram_sequences_general<S: Scalar>(
    table: &OverlapTable<S>,
    idx: &ChangeIndexSet,
) -> Result<GramMatrix<S>, GramError> {
    GramMatrix::new(gram_sequences_entries(table, idx)?)
}

/// Entry computation behind [`gram_sequences_general`], without the PSD gate
/// (the raw matrix is useful for cross-builder tests and estimation).
pub fn gram_sequences_entries<S: Scalar>(
    table: &OverlapTable<S>,
    idx: &ChangeIndexSet,
) -> Result<CMat<S>, GramError> {
    if table.num_symbols() != idx.num_changes() + 1 {
        return Err(GramError::TableSize(
            table.num_symbols(),
            idx.num_changes() + 1,
        ));
    }
    let n = idx.len();
    let horizon = idx.horizon();
    let one = Complex::new(S::one(), S::zero());
    let mut g = CMat::zeros(n, n);
    for a in 0..n {
        let ca = idx.get(a);
        g[(a, a)] = one;
        for b in (a + 1)..n {
            let cb = idx.get(b);
            let mut v = one;
            for t in 1..=horizon {
                let (s, u) = (ca.symbol_at(t), cb.symbol_at(t));
                if s != u {
                    v = v * table.value(s, u);
                }
            }
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

/// One change point: symmetric Toeplitz `gamma^|i-j|`.
pub fn gram_1cp<S: Scalar>(gamma: S, horizon: usize) -> Result<GramMatrix<S>, GramError> {
    if gamma < S::zero() || gamma > S::one() {
        return Err(GramError::ComplexOverlaps);
    }
    GramMatrix::from_real(gram_1cp_entries(gamma, horizon))
}

pub fn gram_1cp_entries<S: Scalar>(gamma: S, horizon: usize) -> Mat<S> {
    Mat::from_fn(horizon, horizon, |i, j| {
        pow_abs_diff(gamma, i as isize - j as isize)
    })
}

/// Two change points, closed form over the index set `I_N` (two strictly
/// increasing entries, padded with `N`).
pub fn gram_2cp<S: Scalar>(
    table: &OverlapTable<S>,
    horizon: usize,
) -> Result<GramMatrix<S>, GramError> {
    if table.num_symbols() != 3 {
        return Err(GramError::TableSize(table.num_symbols(), 3));
    }
    if !table.is_nonnegative_real(S::from_f64(HERM_TOL)) {
        return Err(GramError::ComplexOverlaps);
    }
    let idx = crate::states::enumerate_change_indices(horizon, 2);
    GramMatrix::from_real(gram_2cp_entries(
        table.gamma(1),
        table.gamma(2),
        table.gamma_pair(1, 2),
        &idx,
    ))
}

pub fn gram_2cp_entries<S: Scalar>(
    g1: S,
    g2: S,
    g12: S,
    idx: &ChangeIndexSet,
) -> Mat<S> {
    let n = idx.len();
    Mat::from_fn(n, n, |a, b| {
        let (ca, cb) = (idx.get(a).entries(), idx.get(b).entries());
        let (x, y) = if ca[0] <= cb[0] { (ca, cb) } else { (cb, ca) };
        entry_2cp(g1, g2, g12, x[0], x[1], y[0], y[1])
    })
}

/// Entry for row `(i, j)`, column `(k, l)` with `i <= k`.
fn entry_2cp<S: Scalar>(g1: S, g2: S, g12: S, i: usize, j: usize, k: usize, l: usize) -> S {
    let (i, j, k, l) = (i as isize, j as isize, k as isize, l as isize);
    if j < k {
        pow_abs_diff(g1, i - j) * pow_abs_diff(g2, j - k) * pow_abs_diff(g12, k - l)
    } else {
        pow_abs_diff(g1, i - k) * pow_abs_diff(g12, j - l)
    }
}

/// Three change points, closed form over `I_N`.
///
/// The six-case formula is evaluated top to bottom, first match wins, for the
/// index pair ordered so the first tuple's leading entry is smallest. Two of
/// the printed cases drop a `gamma_23` factor that the slot-product identity
/// requires (they disagree with the tensor oracle from N = 5 on); the factor
/// is included here, and the cross-builder equivalence test is the arbiter.
pub fn gram_3cp<S: Scalar>(
    table: &OverlapTable<S>,
    horizon: usize,
) -> Result<GramMatrix<S>, GramError> {
    if table.num_symbols() != 4 {
        return Err(GramError::TableSize(table.num_symbols(), 4));
    }
    if !table.is_nonnegative_real(S::from_f64(HERM_TOL)) {
        return Err(GramError::ComplexOverlaps);
    }
    let idx = crate::states::enumerate_change_indices(horizon, 3);
    let g = [
        table.gamma(1),
        table.gamma(2),
        table.gamma(3),
        table.gamma_pair(1, 2),
        table.gamma_pair(1, 3),
        table.gamma_pair(2, 3),
    ];
    GramMatrix::from_real(gram_3cp_entries(&g, &idx))
}

/// `g = [g1, g2, g3, g12, g13, g23]`.
pub fn gram_3cp_entries<S: Scalar>(g: &[S; 6], idx: &ChangeIndexSet) -> Mat<S> {
    let n = idx.len();
    Mat::from_fn(n, n, |a, b| {
        let (ca, cb) = (idx.get(a).entries(), idx.get(b).entries());
        let (x, y) = if ca[0] <= cb[0] { (ca, cb) } else { (cb, ca) };
        entry_3cp(g, x[0], x[1], x[2], y[0], y[1], y[2])
    })
}

/// Entry for row `(i, j, k)`, column `(l, m, n)` with `i <= l`.
#[allow(clippy::too_many_arguments)]
fn entry_3cp<S: Scalar>(
    g: &[S; 6],
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    m: usize,
    n: usize,
) -> S {
    let [g1, g2, g3, g12, g13, g23] = *g;
    let (i, j, k, l, m, n) = (
        i as isize,
        j as isize,
        k as isize,
        l as isize,
        m as isize,
        n as isize,
    );
    let p = pow_abs_diff::<S>;
    if l <= j && j <= k && k <= m {
        p(g1, i - l) * p(g12, j - k) * p(g13, k - m) * p(g23, m - n)
    } else if l <= j && j <= n && k > m {
        p(g1, i - l) * p(g12, j - m) * p(g23, k - n)
    } else if l <= m && m <= n && n < j && j <= k {
        p(g1, i - l) * p(g12, m - n) * p(g13, n - j) * p(g23, j - k)
    } else if j < l && l <= k && k <= m {
        p(g1, i - j) * p(g2, j - l) * p(g12, l - k) * p(g13, k - m) * p(g23, m - n)
    } else if j < l && l <= k && k > m {
        p(g1, i - j) * p(g2, j - l) * p(g12, l - m) * p(g23, k - n)
    } else if j <= k && k < l {
        p(g1, i - j) * p(g2, j - k) * p(g3, k - l) * p(g13, l - m) * p(g23, m - n)
    } else {
        unreachable!("the six cases cover every admissible index pair")
    }
}

/// `base^|d|` with the 0^0 = 1 convention.
#[inline]
fn pow_abs_diff<S: Scalar>(base: S, d: isize) -> S {
    let mut e = d.unsigned_abs();
    if e == 0 {
        return S::one();
    }
    let mut acc = S::one();
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// Multiplies each mutated symbol by a unit phase making its overlap with the
/// base symbol real nonnegative. The discrimination value is invariant under
/// per-state global phases; for the two-symbol (single change point) alphabet
/// this yields an all-nonnegative overlap table.
pub fn phase_canonicalize<S: Scalar>(e: &StateEnsemble<S>) -> StateEnsemble<S> {
    let base = e.state(0).clone();
    let mut out = vec![base.clone()];
    for k in 1..e.len() {
        let ov = inner_product(&base, e.state(k)).expect("same dim by ensemble invariant");
        let r = ov.norm();
        if r <= S::from_f64(1e-15) {
            out.push(e.state(k).clone());
        } else {
            // multiply by conj(ov)/|ov| so the overlap becomes |ov|
            let phase = Complex::new(ov.re / r, -ov.im / r);
            out.push(e.state(k).with_phase(phase));
        }
    }
    StateEnsemble::new(out, e.priors().to_vec()).expect("priors unchanged")
}
