//! Complex-Hermitian problems in a real solver: each `n x n` Hermitian block
//! `H` maps to the `2n x 2n` real symmetric `[[Re H, -Im H], [Im H, Re H]]`.
//! Data is halved so the embedded optimum equals the original exactly, and a
//! recovery map returns complex optimizers.

use num_complex::Complex;

use super::{BlockData, BlockOp, SdpError, SdpProblem, SdpSolution, Sense};
use crate::linalg::{hermitian_embed, sym_eig, CMat, Mat};
use crate::scalar::Scalar;

/// Standard-form SDP with complex Hermitian data. Constraint values stay
/// real (`<A, X>` is real for Hermitian pairings).
#[derive(Debug, Clone)]
pub struct ComplexSdpProblem<S: Scalar> {
    pub block_dims: Vec<usize>,
    pub objective: Vec<CMat<S>>,
    pub constraints: Vec<(Vec<CMat<S>>, S)>,
    pub sense: Sense,
}

/// Maps embedded real solutions back to complex ones.
pub struct EmbedMap {
    block_dims: Vec<usize>,
}

impl EmbedMap {
    /// Complex block recovered from its embedded optimizer: the average of
    /// the two real diagonal halves plus `i` times the skew off-diagonal
    /// half. PSD-ness survives because the average of the block with its
    /// symplectic conjugate is embedding-structured.
    pub fn recover_block<S: Scalar>(&self, index: usize, embedded: &Mat<S>) -> CMat<S> {
        let n = self.block_dims[index];
        debug_assert_eq!(embedded.rows(), 2 * n);
        let half = S::from_f64(0.5);
        CMat::from_fn(n, n, |i, j| {
            Complex::new(
                (embedded[(i, j)] + embedded[(i + n, j + n)]) * half,
                (embedded[(i + n, j)] - embedded[(i, j + n)]) * half,
            )
        })
    }

    pub fn recover_all<S: Scalar>(&self, sol: &SdpSolution<S>) -> Vec<CMat<S>> {
        sol.primal_blocks
            .iter()
            .enumerate()
            .map(|(i, b)| self.recover_block(i, b))
            .collect()
    }
}

/// Embeds a complex Hermitian problem into a real symmetric one of doubled
/// block dimensions. The doubling factor is divided out of the data, so
/// objective and constraint values are preserved exactly.
pub fn embed_hermitian<S: Scalar>(
    p: &ComplexSdpProblem<S>,
) -> Result<(SdpProblem<S>, EmbedMap), SdpError> {
    let nb = p.block_dims.len();
    let half = S::from_f64(0.5);
    let embed_op = |blocks: &[CMat<S>]| -> Result<BlockOp<S>, SdpError> {
        if blocks.len() != nb {
            return Err(SdpError::BadBlockData);
        }
        let mut out = Vec::with_capacity(nb);
        for (i, h) in blocks.iter().enumerate() {
            if h.rows() != p.block_dims[i] || !h.is_square() {
                return Err(SdpError::BadBlockData);
            }
            let defect = h.hermitian_defect();
            if defect > S::from_f64(1e-12) * (S::one() + h.max_abs()) {
                return Err(SdpError::NotHermitian(defect.as_f64()));
            }
            if h.max_abs() == S::zero() {
                out.push(BlockData::Zero);
            } else {
                let mut e = hermitian_embed(h);
                e.scale(half);
                e.symmetrize();
                out.push(BlockData::Dense(e));
            }
        }
        Ok(BlockOp { blocks: out })
    };

    let objective = embed_op(&p.objective)?;
    let mut constraints = Vec::with_capacity(p.constraints.len());
    for (a, b) in &p.constraints {
        constraints.push((embed_op(a)?, *b));
    }
    Ok((
        SdpProblem {
            block_dims: p.block_dims.iter().map(|&n| 2 * n).collect(),
            objective,
            constraints,
            sense: p.sense,
        },
        EmbedMap {
            block_dims: p.block_dims.clone(),
        },
    ))
}

/// PSD test of the symmetric part: true iff the minimum eigenvalue is at
/// least `-tol`. Returns the eigenvalue alongside.
pub fn check_psd<S: Scalar>(m: &Mat<S>, tol: S) -> (bool, S) {
    assert!(m.is_square());
    if m.rows() == 0 {
        return (true, S::zero());
    }
    let eig = sym_eig(m, false);
    let min = eig.values[0];
    (min >= -tol, min)
}

/// PSD test of the Hermitian part of a complex matrix.
pub fn check_psd_complex<S: Scalar>(m: &CMat<S>, tol: S) -> (bool, S) {
    assert!(m.is_square());
    if m.rows() == 0 {
        return (true, S::zero());
    }
    let min = crate::gram::min_eigenvalue(m);
    (min >= -tol, min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{solve, SolverOptions};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn check_psd_examples() {
        let (ok, min) = check_psd(&Mat::<f64>::identity(3), 1e-9);
        assert!(ok);
        assert!((min - 1.0).abs() < 1e-14);

        let mut d = Mat::<f64>::identity(2);
        d[(1, 1)] = -0.5;
        let (ok, min) = check_psd(&d, 1e-9);
        assert!(!ok);
        assert!((min + 0.5).abs() < 1e-14);

        // gram of (|0>, |+>): min eigenvalue 1 - 1/sqrt2
        let g = Mat::from_rows(&[vec![1.0, FRAC_1_SQRT_2], vec![FRAC_1_SQRT_2, 1.0]]);
        let (ok, min) = check_psd(&g, 1e-9);
        assert!(ok);
        assert!((min - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn complex_solve_matches_analytic_eigenvalue() {
        // max <A, X> s.t. tr X = 1, X >= 0 has optimum lambda_max(A)
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = cx(0.3, 0.0);
        a[(0, 1)] = cx(0.1, 0.7);
        a[(1, 0)] = cx(0.1, -0.7);
        a[(1, 1)] = cx(-0.2, 0.0);
        // lambda = (tr +/- sqrt(tr^2 - 4 det)) / 2 for 2x2 Hermitian
        let tr = 0.1;
        let det = 0.3 * (-0.2) - (0.1f64.powi(2) + 0.7f64.powi(2));
        let lam_max = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());

        let p = ComplexSdpProblem {
            block_dims: vec![2],
            objective: vec![a],
            constraints: vec![(vec![CMat::identity(2)], 1.0)],
            sense: Sense::Maximize,
        };
        let (real_p, map) = embed_hermitian(&p).unwrap();
        assert_eq!(real_p.block_dims, vec![4]);
        let s = solve(&real_p, &SolverOptions::default()).unwrap();
        assert!(s.status.is_optimal());
        assert!(
            (s.primal_value - lam_max).abs() < 1e-7,
            "{} vs {}",
            s.primal_value,
            lam_max
        );
        // recovered complex optimizer is PSD with unit trace
        let xc = map.recover_block(0, &s.primal_blocks[0]);
        let (ok, _) = check_psd_complex(&xc, 1e-8);
        assert!(ok);
        assert!((xc.trace().re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn complex_instance_matches_real_parameterization_oracle() {
        // one-constraint complex instance solved twice: via the embedding and
        // via an independent real parameterization of the Hermitian variable
        // X = [[x0, x1 + i x2], [x1 - i x2, x3]] -> 2x2-block real SDP on
        // [[x0, x1, x2], [x1, x3, .], ...]; here we simply compare against a
        // fine closed-form: min <C, X> s.t. tr X = 1 equals lambda_min(C).
        let mut c = CMat::zeros(2, 2);
        c[(0, 0)] = cx(1.0, 0.0);
        c[(0, 1)] = cx(0.0, 1.0);
        c[(1, 0)] = cx(0.0, -1.0);
        c[(1, 1)] = cx(1.0, 0.0);
        // eigenvalues {0, 2}
        let p = ComplexSdpProblem {
            block_dims: vec![2],
            objective: vec![c],
            constraints: vec![(vec![CMat::identity(2)], 1.0)],
            sense: Sense::Minimize,
        };
        let (real_p, _) = embed_hermitian(&p).unwrap();
        let s = solve(&real_p, &SolverOptions::default()).unwrap();
        assert!(s.status.is_optimal());
        assert!(s.primal_value.abs() < 1e-7);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = cx(1.0, 0.0); // missing conjugate partner
        let p = ComplexSdpProblem {
            block_dims: vec![2],
            objective: vec![a],
            constraints: vec![],
            sense: Sense::Minimize,
        };
        assert!(matches!(
            embed_hermitian(&p),
            Err(SdpError::NotHermitian(_))
        ));
    }
}
