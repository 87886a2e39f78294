//! Pure states, change-point sequence indexing, overlap tables, and explicit
//! tensor-product sequence states for small-instance oracles.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::CMat;
use crate::scalar::Scalar;

/// Default cap on the total tensor-product dimension accepted by
/// [`sequence_state`]; the oracle paths refuse anything larger.
pub const DEFAULT_DIM_CAP: usize = 1 << 24;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("amplitude vector is empty")]
    Empty,
    #[error("state norm is {0}, not 1 within 1e-12")]
    NotNormalized(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("priors must be nonnegative and sum to 1 (sum = {0})")]
    BadPriors(f64),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("alphabet has {got} symbols, expected {expected} for {changes} change points")]
    AlphabetSize { got: usize, expected: usize, changes: usize },
    #[error("tensor dimension {0} exceeds cap {1}")]
    DimCap(usize, usize),
    #[error("index tuple {0:?} is not a valid member for horizon {1}")]
    BadIndex(Vec<usize>, usize),
}

/// Unit-norm complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<S> {
    amplitudes: Vec<Complex<S>>,
}

impl<S: Scalar> PureState<S> {
    /// Builds a state, asserting unit norm within 1e-12 (normalization is
    /// checked, never silently repaired).
    pub fn new(amplitudes: Vec<Complex<S>>) -> Result<Self, StateError> {
        if amplitudes.is_empty() {
            return Err(StateError::Empty);
        }
        let norm: S = amplitudes
            .iter()
            .fold(S::zero(), |a, z| a + z.norm_sqr())
            .sqrt();
        if (norm - S::one()).abs() > S::from_f64(NORM_TOL) {
            return Err(StateError::NotNormalized(norm.as_f64()));
        }
        Ok(PureState { amplitudes })
    }

    /// Builds a state from arbitrary nonzero amplitudes by normalizing.
    pub fn normalized(mut amplitudes: Vec<Complex<S>>) -> Result<Self, StateError> {
        if amplitudes.is_empty() {
            return Err(StateError::Empty);
        }
        let norm: S = amplitudes
            .iter()
            .fold(S::zero(), |a, z| a + z.norm_sqr())
            .sqrt();
        if norm == S::zero() || !norm.is_finite() {
            return Err(StateError::NotNormalized(norm.as_f64()));
        }
        let inv = S::one() / norm;
        for z in amplitudes.iter_mut() {
            *z = Complex::new(z.re * inv, z.im * inv);
        }
        Ok(PureState { amplitudes })
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amp = vec![Complex::new(S::zero(), S::zero()); dim];
        amp[k] = Complex::new(S::one(), S::zero());
        PureState { amplitudes: amp }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amplitudes
    }

    /// Multiplies by a unit phase.
    pub fn with_phase(&self, phase: Complex<S>) -> Self {
        PureState {
            amplitudes: self.amplitudes.iter().map(|z| *z * phase).collect(),
        }
    }
}

/// `cos(k theta)|0> + sin(k theta)|1>`.
pub fn qubit_state<S: Scalar>(k: usize, theta: S) -> PureState<S> {
    let a = S::from_usize(k) * theta;
    PureState {
        amplitudes: vec![
            Complex::new(a.cos(), S::zero()),
            Complex::new(a.sin(), S::zero()),
        ],
    }
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner_product<S: Scalar>(
    a: &PureState<S>,
    b: &PureState<S>,
) -> Result<Complex<S>, StateError> {
    if a.dim() != b.dim() {
        return Err(StateError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.amplitudes
        .iter()
        .zip(b.amplitudes.iter())
        .fold(Complex::new(S::zero(), S::zero()), |acc, (x, y)| {
            acc + x.conj() * *y
        }))
}

/// One change-point configuration: entry `a_k` is the last time step before
/// the `k`-th mutated symbol takes over. `(N, ..., N)` is the unchanged
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChangeIndex {
    entries: Vec<usize>,
    horizon: usize,
}

impl ChangeIndex {
    pub fn new(entries: Vec<usize>, horizon: usize) -> Result<Self, StateError> {
        let ok = !entries.is_empty()
            && entries.iter().all(|&a| a >= 1 && a <= horizon)
            && entries
                .windows(2)
                .all(|w| w[0] < w[1] || (w[0] == horizon && w[1] == horizon));
        if !ok {
            return Err(StateError::BadIndex(entries, horizon));
        }
        Ok(ChangeIndex { entries, horizon })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_changes(&self) -> usize {
        self.entries.len()
    }

    /// Alphabet symbol occupying time slot `t` (1-based): 0 is the original
    /// state, `k >= 1` the `k`-th mutation.
    #[inline]
    pub fn symbol_at(&self, t: usize) -> usize {
        debug_assert!(t >= 1 && t <= self.horizon);
        self.entries.iter().take_while(|&&c| c < t).count()
    }
}

/// The full set of admissible change configurations for horizon `N` and at
/// most `P` changes, in lexicographic order with a bijective linear index.
#[derive(Debug, Clone)]
pub struct ChangeIndexSet {
    horizon: usize,
    num_changes: usize,
    indices: Vec<ChangeIndex>,
}

/// Enumerates the admissible tuples: `1 <= a_1 <= ... <= a_P <= N` with
/// `a_i < a_{i+1}` unless `a_i = N`. Lexicographic order; the no-change tuple
/// `(N, ..., N)` therefore sorts last.
pub fn enumerate_change_indices(horizon: usize, num_changes: usize) -> ChangeIndexSet {
    assert!(horizon >= 1 && num_changes >= 1);
    let mut indices = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(num_changes);
    fn rec(
        out: &mut Vec<ChangeIndex>,
        stack: &mut Vec<usize>,
        horizon: usize,
        num_changes: usize,
    ) {
        if stack.len() == num_changes {
            out.push(ChangeIndex {
                entries: stack.clone(),
                horizon,
            });
            return;
        }
        let lo = match stack.last() {
            None => 1,
            Some(&a) if a == horizon => horizon,
            Some(&a) => a + 1,
        };
        for v in lo..=horizon {
            stack.push(v);
            rec(out, stack, horizon, num_changes);
            stack.pop();
        }
    }
    rec(&mut indices, &mut stack, horizon, num_changes);
    indices.sort();
    ChangeIndexSet {
        horizon,
        num_changes,
        indices,
    }
}

impl ChangeIndexSet {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_changes(&self) -> usize {
        self.num_changes
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[ChangeIndex] {
        &self.indices
    }

    pub fn get(&self, linear: usize) -> &ChangeIndex {
        &self.indices[linear]
    }

    /// Linear index of a configuration (inverse of `get`).
    pub fn position_of(&self, c: &ChangeIndex) -> Option<usize> {
        self.indices.binary_search(c).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChangeIndex> {
        self.indices.iter()
    }
}

/// Pairwise inner products of the sequence alphabet; row/column 0 is the
/// original state, row/column `k >= 1` the `k`-th mutation.
#[derive(Debug, Clone)]
pub struct OverlapTable<S: Scalar> {
    values: CMat<S>,
}

impl<S: Scalar> OverlapTable<S> {
    /// Builds the table from explicit values; must be Hermitian with unit
    /// diagonal and entries of magnitude at most 1.
    pub fn new(values: CMat<S>) -> Result<Self, StateError> {
        if !values.is_square() {
            return Err(StateError::DimMismatch(values.rows(), values.cols()));
        }
        let tol = S::from_f64(1e-9);
        for i in 0..values.rows() {
            if (values[(i, i)] - Complex::new(S::one(), S::zero())).norm() > tol {
                return Err(StateError::NotNormalized(values[(i, i)].re.as_f64()));
            }
            for j in 0..values.cols() {
                if values[(i, j)].norm() > S::one() + tol {
                    return Err(StateError::NotNormalized(values[(i, j)].norm().as_f64()));
                }
                if (values[(i, j)] - values[(j, i)].conj()).norm() > tol {
                    return Err(StateError::DimMismatch(i, j));
                }
            }
        }
        Ok(OverlapTable { values })
    }

    /// Table with the given nonnegative magnitudes (real entries); layout
    /// `gammas[s][t]` for `s < t`.
    pub fn from_magnitudes(mags: &[Vec<S>]) -> Result<Self, StateError> {
        let p1 = mags.len();
        let mut m = CMat::zeros(p1, p1);
        for s in 0..p1 {
            for t in 0..p1 {
                let v = if s == t { S::one() } else { mags[s.min(t)][s.max(t)] };
                m[(s, t)] = Complex::new(v, S::zero());
            }
        }
        Self::new(m)
    }

    pub fn num_symbols(&self) -> usize {
        self.values.rows()
    }

    pub fn value(&self, s: usize, t: usize) -> Complex<S> {
        self.values[(s, t)]
    }

    /// `gamma_i = |<psi|phi_i>|`.
    pub fn gamma(&self, i: usize) -> S {
        self.values[(0, i)].norm()
    }

    /// `gamma_ij = |<phi_i|phi_j>|`.
    pub fn gamma_pair(&self, i: usize, j: usize) -> S {
        self.values[(i, j)].norm()
    }

    /// True when every entry is real and nonnegative (within `tol`), the
    /// precondition of the closed-form Gram builders.
    pub fn is_nonnegative_real(&self, tol: S) -> bool {
        self.values
            .as_slice()
            .iter()
            .all(|z| z.im.abs() <= tol && z.re >= -tol)
    }

    pub fn values(&self) -> &CMat<S> {
        &self.values
    }
}

/// All pairwise inner products of an alphabet.
pub fn overlap_table<S: Scalar>(alphabet: &[PureState<S>]) -> Result<OverlapTable<S>, StateError> {
    let p1 = alphabet.len();
    if p1 == 0 {
        return Err(StateError::EmptyEnsemble);
    }
    let d = alphabet[0].dim();
    let mut m = CMat::zeros(p1, p1);
    for s in 0..p1 {
        if alphabet[s].dim() != d {
            return Err(StateError::DimMismatch(alphabet[s].dim(), d));
        }
        for t in 0..p1 {
            m[(s, t)] = inner_product(&alphabet[s], &alphabet[t])?;
        }
    }
    OverlapTable::new(m)
}

/// Explicit tensor-product sequence state for a change configuration. Oracle
/// use only: the result has dimension `d^N` and is rejected above `dim_cap`.
pub fn sequence_state<S: Scalar>(
    alphabet: &[PureState<S>],
    c: &ChangeIndex,
    dim_cap: usize,
) -> Result<PureState<S>, StateError> {
    if alphabet.len() != c.num_changes() + 1 {
        return Err(StateError::AlphabetSize {
            got: alphabet.len(),
            expected: c.num_changes() + 1,
            changes: c.num_changes(),
        });
    }
    let d = alphabet[0].dim();
    for s in alphabet {
        if s.dim() != d {
            return Err(StateError::DimMismatch(s.dim(), d));
        }
    }
    let n = c.horizon();
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= dim_cap)
            .ok_or(StateError::DimCap(usize::MAX, dim_cap))?;
    }
    let mut amp = vec![Complex::new(S::one(), S::zero())];
    for t in 1..=n {
        let sym = &alphabet[c.symbol_at(t)];
        let mut next = Vec::with_capacity(amp.len() * d);
        for z in &amp {
            for w in sym.amplitudes() {
                next.push(*z * *w);
            }
        }
        amp = next;
    }
    // tensor products of unit vectors are unit vectors; construct directly
    Ok(PureState { amplitudes: amp })
}

/// A discrimination ensemble: `N` same-dimension pure states with priors.
#[derive(Debug, Clone)]
pub struct StateEnsemble<S> {
    states: Vec<PureState<S>>,
    priors: Vec<S>,
}

impl<S: Scalar> StateEnsemble<S> {
    pub fn new(states: Vec<PureState<S>>, priors: Vec<S>) -> Result<Self, StateError> {
        if states.is_empty() {
            return Err(StateError::EmptyEnsemble);
        }
        let d = states[0].dim();
        for s in &states {
            if s.dim() != d {
                return Err(StateError::DimMismatch(s.dim(), d));
            }
        }
        if priors.len() != states.len() {
            return Err(StateError::DimMismatch(priors.len(), states.len()));
        }
        let sum: S = priors.iter().copied().sum();
        if priors.iter().any(|&q| q < S::zero()) || (sum - S::one()).abs() > S::from_f64(NORM_TOL)
        {
            return Err(StateError::BadPriors(sum.as_f64()));
        }
        Ok(StateEnsemble { states, priors })
    }

    pub fn uniform(states: Vec<PureState<S>>) -> Result<Self, StateError> {
        let n = states.len();
        if n == 0 {
            return Err(StateError::EmptyEnsemble);
        }
        let q = S::one() / S::from_usize(n);
        Self::new(states, vec![q; n])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[PureState<S>] {
        &self.states
    }

    pub fn state(&self, j: usize) -> &PureState<S> {
        &self.states[j]
    }

    pub fn priors(&self) -> &[S] {
        &self.priors
    }

    /// The `d x N` matrix whose `j`-th column is `|psi_j>`.
    pub fn state_matrix(&self) -> CMat<S> {
        let d = self.dim();
        let n = self.len();
        CMat::from_fn(d, n, |i, j| self.states[j].amplitudes()[i])
    }
}
