//! Self-contained primal-dual interior-point solver for block-diagonal
//! semidefinite programs in standard form,
//!
//! ```text
//!   min/max  <C, X>   s.t.  <A_k, X> = b_k  (k = 1..m),   X >= 0,
//! ```
//!
//! with `X` block-diagonal symmetric. The solver runs a Mehrotra-style
//! predictor-corrector with Nesterov-Todd scaling and dense per-block
//! factorizations; the Schur complement is kept packed so large instances
//! stay within memory. Complex Hermitian data enters through the real
//! embedding in [`embed`].

mod embed;
mod solver;

pub use embed::{check_psd, check_psd_complex, embed_hermitian, ComplexSdpProblem, EmbedMap};

use thiserror::Error;

use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Symmetric data for one block of a block-diagonal operator.
#[derive(Debug, Clone)]
pub enum BlockData<S: Scalar> {
    /// Identically zero block.
    Zero,
    /// Upper-triangle entries `(r, c, v)` with `r <= c`; each off-diagonal
    /// entry acts symmetrically at `(r, c)` and `(c, r)`.
    Sparse(Vec<(u32, u32, S)>),
    /// Dense symmetric block.
    Dense(Mat<S>),
}

impl<S: Scalar> BlockData<S> {
    pub fn diag(values: &[S]) -> Self {
        BlockData::Sparse(
            values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != S::zero())
                .map(|(i, &v)| (i as u32, i as u32, v))
                .collect(),
        )
    }

    pub fn elementary(r: usize, c: usize, v: S) -> Self {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        BlockData::Sparse(vec![(r as u32, c as u32, v)])
    }

    pub fn identity_scaled(n: usize, v: S) -> Self {
        BlockData::Sparse((0..n as u32).map(|i| (i, i, v)).collect())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BlockData::Zero => true,
            BlockData::Sparse(e) => e.is_empty(),
            BlockData::Dense(m) => m.as_slice().iter().all(|&v| v == S::zero()),
        }
    }

    /// Frobenius norm (counting symmetric copies of off-diagonal entries).
    pub fn norm_fro(&self) -> S {
        match self {
            BlockData::Zero => S::zero(),
            BlockData::Sparse(e) => e
                .iter()
                .map(|&(r, c, v)| if r == c { v * v } else { S::from_f64(2.0) * v * v })
                .sum::<S>()
                .sqrt(),
            BlockData::Dense(m) => m.norm_fro(),
        }
    }

    pub fn max_abs(&self) -> S {
        match self {
            BlockData::Zero => S::zero(),
            BlockData::Sparse(e) => e.iter().fold(S::zero(), |a, &(_, _, v)| a.max(v.abs())),
            BlockData::Dense(m) => m.max_abs(),
        }
    }

    /// `<A, M>` against a dense symmetric block.
    pub fn inner(&self, m: &Mat<S>) -> S {
        match self {
            BlockData::Zero => S::zero(),
            BlockData::Sparse(e) => {
                let two = S::from_f64(2.0);
                e.iter().fold(S::zero(), |acc, &(r, c, v)| {
                    let (r, c) = (r as usize, c as usize);
                    if r == c {
                        acc + v * m[(r, c)]
                    } else {
                        acc + two * v * m[(r, c)]
                    }
                })
            }
            BlockData::Dense(d) => d.inner(m),
        }
    }

    /// Scatter `y * A` into a dense accumulator.
    pub fn add_scaled_into(&self, y: S, out: &mut Mat<S>) {
        match self {
            BlockData::Zero => {}
            BlockData::Sparse(e) => {
                for &(r, c, v) in e {
                    let (r, c) = (r as usize, c as usize);
                    out[(r, c)] += y * v;
                    if r != c {
                        out[(c, r)] += y * v;
                    }
                }
            }
            BlockData::Dense(d) => out.add_assign_scaled(d, y),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), SdpError> {
        match self {
            BlockData::Zero => Ok(()),
            BlockData::Sparse(e) => {
                for &(r, c, v) in e {
                    if r > c || c as usize >= dim {
                        return Err(SdpError::BadBlockData);
                    }
                    if !v.is_finite() {
                        return Err(SdpError::NotFinite);
                    }
                }
                Ok(())
            }
            BlockData::Dense(m) => {
                if m.rows() != dim || m.cols() != dim {
                    return Err(SdpError::BadBlockData);
                }
                if m.as_slice().iter().any(|v| !v.is_finite()) {
                    return Err(SdpError::NotFinite);
                }
                if m.sym_defect() > S::from_f64(1e-12) * (S::one() + m.max_abs()) {
                    return Err(SdpError::NotSymmetric);
                }
                Ok(())
            }
        }
    }
}

/// Block-diagonal symmetric operator: one [`BlockData`] per block.
#[derive(Debug, Clone)]
pub struct BlockOp<S: Scalar> {
    pub blocks: Vec<BlockData<S>>,
}

impl<S: Scalar> BlockOp<S> {
    pub fn zero(num_blocks: usize) -> Self {
        BlockOp {
            blocks: (0..num_blocks).map(|_| BlockData::Zero).collect(),
        }
    }

    pub fn single(num_blocks: usize, at: usize, data: BlockData<S>) -> Self {
        let mut op = Self::zero(num_blocks);
        op.blocks[at] = data;
        op
    }

    pub fn norm_fro(&self) -> S {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.norm_fro();
                n * n
            })
            .sum::<S>()
            .sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.blocks
            .iter()
            .fold(S::zero(), |a, b| a.max(b.max_abs()))
    }

    /// `<A, X>` against dense blocks.
    pub fn inner(&self, x: &[Mat<S>]) -> S {
        self.blocks
            .iter()
            .zip(x.iter())
            .map(|(b, m)| b.inner(m))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Standard-form block-diagonal SDP.
#[derive(Debug, Clone)]
pub struct SdpProblem<S: Scalar> {
    pub block_dims: Vec<usize>,
    pub objective: BlockOp<S>,
    pub constraints: Vec<(BlockOp<S>, S)>,
    pub sense: Sense,
}

impl<S: Scalar> SdpProblem<S> {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.objective.blocks.len() != self.block_dims.len() {
            return Err(SdpError::BadBlockData);
        }
        for (b, &d) in self.objective.blocks.iter().zip(self.block_dims.iter()) {
            b.validate(d)?;
        }
        for (a, bval) in &self.constraints {
            if a.blocks.len() != self.block_dims.len() {
                return Err(SdpError::BadBlockData);
            }
            if !bval.is_finite() {
                return Err(SdpError::NotFinite);
            }
            let mut all_zero = true;
            for (blk, &d) in a.blocks.iter().zip(self.block_dims.iter()) {
                blk.validate(d)?;
                all_zero = all_zero && blk.is_zero();
            }
            if all_zero {
                return Err(SdpError::ZeroConstraint);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SdpError {
    #[error("block data inconsistent with declared dimensions")]
    BadBlockData,
    #[error("input contains NaN or infinity")]
    NotFinite,
    #[error("dense block is not symmetric")]
    NotSymmetric,
    #[error("a constraint has an identically zero matrix")]
    ZeroConstraint,
    #[error("complex data is not Hermitian (defect {0})")]
    NotHermitian(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Certificates satisfy the requested tolerances.
    Optimal,
    /// Iterates diverged; the instance is (numerically) infeasible or
    /// unbounded.
    InfeasibleOrUnbounded,
    /// Iteration cap reached without meeting tolerances.
    MaxIterations,
    /// Factorization breakdown or non-finite values.
    NumericalFailure,
}

impl SdpStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SdpStatus::Optimal)
    }
}

/// Solver tolerances and limits. Defaults: residuals and relative gap 1e-8,
/// 200 iterations, step fraction to the boundary 0.98.
#[derive(Debug, Clone)]
pub struct SolverOptions<S> {
    pub tol_primal: S,
    pub tol_dual: S,
    pub tol_gap: S,
    pub max_iterations: usize,
    pub step_fraction: S,
    /// Print one line per iteration (iteration, residuals, gap) to stderr.
    pub verbose: bool,
}

impl<S: Scalar> Default for SolverOptions<S> {
    fn default() -> Self {
        SolverOptions {
            tol_primal: S::from_f64(1e-8),
            tol_dual: S::from_f64(1e-8),
            tol_gap: S::from_f64(1e-8),
            max_iterations: 200,
            step_fraction: S::from_f64(0.98),
            verbose: false,
        }
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy)]
pub struct IterStat<S> {
    pub primal_obj: S,
    pub dual_obj: S,
    pub primal_res: S,
    pub dual_res: S,
    pub rel_gap: S,
    pub mu: S,
}

/// Solution with primal/dual certificates. For `Maximize` problems the dual
/// is `min b^T y` s.t. `sum_k y_k A_k - C = Z >= 0`, so `dual_value` bounds
/// `primal_value` from above.
#[derive(Debug, Clone)]
pub struct SdpSolution<S: Scalar> {
    pub primal_blocks: Vec<Mat<S>>,
    pub dual_y: Vec<S>,
    pub dual_slack_blocks: Vec<Mat<S>>,
    pub primal_value: S,
    pub dual_value: S,
    /// `|primal - dual| / (1 + |primal|)` at the final iterate.
    pub rel_gap: S,
    pub primal_residual: S,
    pub dual_residual: S,
    /// `<X, Z>`, the complementary slackness measure.
    pub xz_inner: S,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Set when the Schur complement needed Tikhonov regularization.
    pub schur_regularized: bool,
    pub trace: Vec<IterStat<S>>,
}

/// Solves a standard-form block-diagonal SDP.
pub fn solve<S: Scalar>(
    problem: &SdpProblem<S>,
    options: &SolverOptions<S>,
) -> Result<SdpSolution<S>, SdpError> {
    problem.validate()?;
    Ok(solver::solve_validated(problem, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions<f64> {
        SolverOptions::default()
    }

    #[test]
    fn forced_by_constraint() {
        // min <I, X> s.t. X_11 = 1, X >= 0 (one 2x2 block) -> value 1, X = E_11
        let p = SdpProblem {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::identity_scaled(2, 1.0)],
            },
            constraints: vec![(
                BlockOp {
                    blocks: vec![BlockData::elementary(0, 0, 1.0)],
                },
                1.0,
            )],
            sense: Sense::Minimize,
        };
        let s = solve(&p, &opts()).unwrap();
        assert!(s.status.is_optimal());
        assert!((s.primal_value - 1.0).abs() < 1e-7);
        assert!((s.primal_blocks[0][(0, 0)] - 1.0).abs() < 1e-6);
        assert!(s.primal_blocks[0][(1, 1)].abs() < 1e-6);
    }

    #[test]
    fn extreme_point() {
        // max <E_11, X> s.t. tr X = 1, X >= 0 -> value 1
        let p = SdpProblem {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::elementary(0, 0, 1.0)],
            },
            constraints: vec![(
                BlockOp {
                    blocks: vec![BlockData::identity_scaled(2, 1.0)],
                },
                1.0,
            )],
            sense: Sense::Maximize,
        };
        let s = solve(&p, &opts()).unwrap();
        assert!(s.status.is_optimal());
        assert!((s.primal_value - 1.0).abs() < 1e-7);
        // weak duality direction for a max problem
        assert!(s.dual_value >= s.primal_value - 1e-9);
    }

    #[test]
    fn frozen_2x2_kkt_instance() {
        // min 2 x_00 + x_11 + 2 x_01 s.t. x_00 + x_11 = 1, X >= 0.
        // Writing X = [[a, b], [b, 1-a]], objective f(a,b) = a + 1 + 2b with
        // b^2 <= a(1-a); minimizing over b gives f = a + 1 - 2 sqrt(a(1-a)),
        // stationary at a = (1 - 1/sqrt(5))/2 with value 1 + (1-sqrt(5))/2.
        let c = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let p = SdpProblem {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::Dense(c)],
            },
            constraints: vec![(
                BlockOp {
                    blocks: vec![BlockData::identity_scaled(2, 1.0)],
                },
                1.0,
            )],
            sense: Sense::Minimize,
        };
        let s = solve(&p, &opts()).unwrap();
        let want = 1.0 + (1.0 - 5.0f64.sqrt()) / 2.0;
        assert!(s.status.is_optimal());
        assert!((s.primal_value - want).abs() < 1e-7, "{}", s.primal_value);
        assert!((s.dual_value - want).abs() < 1e-7);
    }

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn rand_sym(n: usize, seed: &mut u64) -> Mat<f64> {
        let mut m = Mat::from_fn(n, n, |_, _| splitmix(seed) - 0.5);
        m.symmetrize();
        m
    }

    fn rand_psd(n: usize, seed: &mut u64) -> Mat<f64> {
        let b = Mat::from_fn(n, n, |_, _| splitmix(seed) - 0.5);
        let mut m = b.matmul_nt(&b);
        for i in 0..n {
            m[(i, i)] += 0.5;
        }
        m
    }

    /// Builds a random strictly feasible primal-dual pair, so the optimum
    /// exists and strong duality holds with equality.
    fn random_strict_instance(
        dims: &[usize],
        m: usize,
        seed: &mut u64,
    ) -> (SdpProblem<f64>, f64) {
        let nb = dims.len();
        let x0: Vec<Mat<f64>> = dims.iter().map(|&n| rand_psd(n, seed)).collect();
        let z0: Vec<Mat<f64>> = dims.iter().map(|&n| rand_psd(n, seed)).collect();
        let y0: Vec<f64> = (0..m).map(|_| splitmix(seed) - 0.5).collect();
        let mut constraints = Vec::new();
        let mut asum: Vec<Mat<f64>> = dims.iter().map(|&n| Mat::zeros(n, n)).collect();
        for k in 0..m {
            let blocks: Vec<BlockData<f64>> = dims
                .iter()
                .map(|&n| BlockData::Dense(rand_sym(n, seed)))
                .collect();
            let op = BlockOp { blocks };
            let b = op.inner(&x0);
            for (i, blk) in op.blocks.iter().enumerate() {
                blk.add_scaled_into(y0[k], &mut asum[i]);
            }
            constraints.push((op, b));
        }
        // C = A^*(y0) + Z0 makes (y0, Z0) strictly dual feasible
        let cblocks: Vec<BlockData<f64>> = (0..nb)
            .map(|i| {
                let mut c = asum[i].clone();
                c.add_assign_scaled(&z0[i], 1.0);
                BlockData::Dense(c)
            })
            .collect();
        let p = SdpProblem {
            block_dims: dims.to_vec(),
            objective: BlockOp { blocks: cblocks },
            constraints,
            sense: Sense::Minimize,
        };
        // optimum is unknown analytically; return the duality-gap-free marker
        (p, f64::NAN)
    }

    #[test]
    fn strong_duality_on_random_feasible_instances() {
        let mut seed = 2024u64;
        for trial in 0..8 {
            let dims: Vec<usize> = match trial % 3 {
                0 => vec![3],
                1 => vec![2, 4],
                _ => vec![3, 1, 2],
            };
            let m = 2 + trial % 4;
            let (p, _) = random_strict_instance(&dims, m, &mut seed);
            let s = solve(&p, &opts()).unwrap();
            assert!(s.status.is_optimal(), "trial {} status {:?}", trial, s.status);
            assert!(
                (s.primal_value - s.dual_value).abs() <= 1e-7 * (1.0 + s.primal_value.abs()),
                "trial {} gap {} vs {}",
                trial,
                s.primal_value,
                s.dual_value
            );
            // weak duality with slack at every iterate: p - d >= -(residual terms)
            for it in &s.trace {
                let slack = 1e-6 * (1.0 + it.primal_obj.abs() + it.dual_obj.abs())
                    + it.primal_res * (1.0 + it.dual_obj.abs()) * 1e3
                    + it.dual_res * 1e3;
                assert!(
                    it.primal_obj - it.dual_obj >= -slack - 1e-9,
                    "iterate violates slacked weak duality: {:?}",
                    it
                );
            }
            // complementary slackness at the optimum
            assert!(s.xz_inner <= 1e-7 * (1.0 + s.primal_value.abs()));
        }
    }

    #[test]
    fn certificates_meet_tolerances() {
        let mut seed = 77u64;
        let (p, _) = random_strict_instance(&[3, 2], 4, &mut seed);
        let s = solve(&p, &opts()).unwrap();
        assert!(s.status.is_optimal());
        assert!(s.primal_residual <= 1e-8);
        assert!(s.dual_residual <= 1e-8);
        assert!(s.rel_gap <= 1e-8);
        // X, Z PSD within tolerance
        for b in s.primal_blocks.iter().chain(s.dual_slack_blocks.iter()) {
            let (ok, min_eig) = check_psd(b, 1e-9);
            assert!(ok, "min eig {}", min_eig);
        }
    }

    #[test]
    fn invariant_under_row_rescaling() {
        let mut seed = 31u64;
        let (p, _) = random_strict_instance(&[3, 2], 3, &mut seed);
        let s1 = solve(&p, &opts()).unwrap();
        let mut p2 = p.clone();
        // rescale each constraint by a positive constant
        for (k, (a, b)) in p2.constraints.iter_mut().enumerate() {
            let f = [3.0, 0.02, 40.0][k % 3];
            *b *= f;
            for blk in a.blocks.iter_mut() {
                match blk {
                    BlockData::Dense(m) => m.scale(f),
                    BlockData::Sparse(e) => e.iter_mut().for_each(|t| t.2 *= f),
                    BlockData::Zero => {}
                }
            }
        }
        let s2 = solve(&p2, &opts()).unwrap();
        assert!(s2.status.is_optimal());
        assert!(
            (s1.primal_value - s2.primal_value).abs() <= 1e-7 * (1.0 + s1.primal_value.abs())
        );
    }

    #[test]
    fn infeasible_is_flagged() {
        // <E_00, X> = -1 cannot hold for X >= 0
        let p = SdpProblem {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::identity_scaled(2, 1.0)],
            },
            constraints: vec![(
                BlockOp {
                    blocks: vec![BlockData::elementary(0, 0, 1.0)],
                },
                -1.0,
            )],
            sense: Sense::Minimize,
        };
        let s = solve(&p, &opts()).unwrap();
        assert!(
            !s.status.is_optimal(),
            "infeasible instance must not report optimal"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = Mat::identity(2);
        m[(0, 1)] = 0.5; // asymmetric
        let p = SdpProblem {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::Dense(m)],
            },
            constraints: vec![],
            sense: Sense::Minimize,
        };
        assert_eq!(p.validate(), Err(SdpError::NotSymmetric));

        let p = SdpProblem::<f64> {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::Zero],
            },
            constraints: vec![(BlockOp::zero(1), 1.0)],
            sense: Sense::Minimize,
        };
        assert_eq!(p.validate(), Err(SdpError::ZeroConstraint));

        let p = SdpProblem::<f64> {
            block_dims: vec![2],
            objective: BlockOp {
                blocks: vec![BlockData::elementary(0, 0, f64::NAN)],
            },
            constraints: vec![],
            sense: Sense::Minimize,
        };
        assert_eq!(p.validate(), Err(SdpError::NotFinite));
    }
}
