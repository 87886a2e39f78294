//! Reward matrices for every discrimination scheme, including the
//! change-point families. Infinitely-penalized entries are carried as a
//! boolean mask (hard constraints downstream), never as large finite values.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::states::{ChangeIndex, ChangeIndexSet};

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("partition must cover 1..=N disjointly")]
    BadPartition,
    #[error("parameter {name} = {value} out of range")]
    BadParameter { name: &'static str, value: f64 },
}

/// `L x N` finite reward values plus a mask marking forbidden (guess, state)
/// pairs; masked cells carry value 0 and become equality constraints in the
/// solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix<S> {
    values: Vec<S>,
    forbidden: Vec<bool>,
    num_guesses: usize,
    num_states: usize,
}

impl<S: Scalar> RewardMatrix<S> {
    pub fn from_fn(
        num_guesses: usize,
        num_states: usize,
        mut f: impl FnMut(usize, usize) -> Entry<S>,
    ) -> Self {
        let mut values = vec![S::zero(); num_guesses * num_states];
        let mut forbidden = vec![false; num_guesses * num_states];
        for i in 0..num_guesses {
            for j in 0..num_states {
                match f(i, j) {
                    Entry::Value(v) => {
                        assert!(v.is_finite(), "reward values must be finite");
                        values[i * num_states + j] = v;
                    }
                    Entry::Forbidden => forbidden[i * num_states + j] = true,
                }
            }
        }
        RewardMatrix {
            values,
            forbidden,
            num_guesses,
            num_states,
        }
    }

    pub fn num_guesses(&self) -> usize {
        self.num_guesses
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn value(&self, i: usize, j: usize) -> S {
        self.values[i * self.num_states + j]
    }

    pub fn is_forbidden(&self, i: usize, j: usize) -> bool {
        self.forbidden[i * self.num_states + j]
    }

    pub fn has_mask(&self) -> bool {
        self.forbidden.iter().any(|&b| b)
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.values[i * self.num_states..(i + 1) * self.num_states]
    }

    /// Whether the shape is `N` guess rows plus one trailing inconclusive row.
    pub fn has_inconclusive_row(&self) -> bool {
        self.num_guesses == self.num_states + 1
    }
}

/// One reward cell: a finite value or a hard-forbidden marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry<S> {
    Value(S),
    Forbidden,
}

/// The named reward schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme<S> {
    /// Unit reward for naming the received state.
    MinError,
    /// Minimized error of naming the received state (exclusion game);
    /// see [`build_reward`] on the sign convention.
    Exclusion,
    /// Never guess wrong: off-diagonal guesses are forbidden, an extra
    /// inconclusive row earns 0.
    UnambiguousExact,
    /// Wrong guesses cost `beta > 0` instead of being forbidden.
    UnambiguousPenalty { beta: S },
    /// Excluding the received state is forbidden; inconclusive costs 1.
    UnambiguousExclusion,
    /// Unit reward within distance `mu` of the true index.
    Horseshoe { mu: usize },
    /// Reward `gamma^|i-j|`, with `0^0 = 1` so `gamma = 0` is minimum-error.
    CloserTheBetter { gamma: S },
    /// Unit for exact, 0 for wrong, `partial` for inconclusive.
    Exam { partial: S },
    /// Unit reward for naming the class containing the state; `classes[c]`
    /// lists the 1-based state indices of class `c`.
    Classification { classes: Vec<Vec<usize>> },
}

/// Builds the `L x N` reward for a named scheme.
///
/// Exclusion-type schemes are minimization games in their natural form; they
/// are emitted as the rewards printed (the engine maximizes `<-R>` and
/// negates, see the solver report's sign convention).
pub fn build_reward<S: Scalar>(
    scheme: &Scheme<S>,
    num_states: usize,
) -> Result<RewardMatrix<S>, RewardError> {
    let n = num_states;
    let r = match scheme {
        Scheme::MinError => RewardMatrix::from_fn(n, n, |i, j| {
            Entry::Value(if i == j { S::one() } else { S::zero() })
        }),
        Scheme::Exclusion => RewardMatrix::from_fn(n, n, |i, j| {
            Entry::Value(if i == j { S::zero() } else { S::one() })
        }),
        Scheme::UnambiguousExact => RewardMatrix::from_fn(n + 1, n, |i, j| {
            if i == n {
                Entry::Value(S::zero())
            } else if i == j {
                Entry::Value(S::one())
            } else {
                Entry::Forbidden
            }
        }),
        Scheme::UnambiguousPenalty { beta } => {
            if *beta <= S::zero() {
                return Err(RewardError::BadParameter {
                    name: "beta",
                    value: beta.as_f64(),
                });
            }
            RewardMatrix::from_fn(n + 1, n, |i, j| {
                Entry::Value(if i == n {
                    S::zero()
                } else if i == j {
                    S::one()
                } else {
                    -*beta
                })
            })
        }
        Scheme::UnambiguousExclusion => RewardMatrix::from_fn(n + 1, n, |i, j| {
            if i == n {
                Entry::Value(-S::one())
            } else if i == j {
                Entry::Forbidden
            } else {
                Entry::Value(S::zero())
            }
        }),
        Scheme::Horseshoe { mu } => {
            let mu = *mu as isize;
            RewardMatrix::from_fn(n, n, |i, j| {
                Entry::Value(if (i as isize - j as isize).abs() <= mu {
                    S::one()
                } else {
                    S::zero()
                })
            })
        }
        Scheme::CloserTheBetter { gamma } => {
            if *gamma < S::zero() || *gamma > S::one() {
                return Err(RewardError::BadParameter {
                    name: "gamma",
                    value: gamma.as_f64(),
                });
            }
            RewardMatrix::from_fn(n, n, |i, j| {
                Entry::Value(pow_dist(*gamma, i, j))
            })
        }
        Scheme::Exam { partial } => {
            if *partial < S::zero() || *partial > S::one() {
                return Err(RewardError::BadParameter {
                    name: "partial",
                    value: partial.as_f64(),
                });
            }
            RewardMatrix::from_fn(n + 1, n, |i, j| {
                Entry::Value(if i == n {
                    *partial
                } else if i == j {
                    S::one()
                } else {
                    S::zero()
                })
            })
        }
        Scheme::Classification { classes } => {
            let mut seen = vec![false; n];
            for class in classes {
                for &j in class {
                    if j == 0 || j > n || seen[j - 1] {
                        return Err(RewardError::BadPartition);
                    }
                    seen[j - 1] = true;
                }
            }
            if !seen.iter().all(|&b| b) {
                return Err(RewardError::BadPartition);
            }
            let classes = classes.clone();
            RewardMatrix::from_fn(classes.len(), n, |i, j| {
                Entry::Value(if classes[i].contains(&(j + 1)) {
                    S::one()
                } else {
                    S::zero()
                })
            })
        }
    };
    Ok(r)
}

/// Distance-profile reward for the single change point problem.
#[derive(Debug, Clone)]
pub struct ChangePointReward<S> {
    /// `r_k` paid when the guess is `k` steps from the true change point.
    pub profile: Vec<S>,
    /// Constant reward of the inconclusive row.
    pub inconclusive: S,
}

impl<S: Scalar> ChangePointReward<S> {
    /// `r_k = base^k` with inconclusive reward 0.
    pub fn closer_the_better(base: S, horizon: usize) -> Self {
        ChangePointReward {
            profile: (0..horizon).map(|k| pow_dist(base, k, 0)).collect(),
            inconclusive: S::zero(),
        }
    }
}

/// `(N+1) x N`: row `i <= N` pays `r_|i-j|`, the last row pays the constant.
pub fn build_1cp_reward<S: Scalar>(p: &ChangePointReward<S>) -> RewardMatrix<S> {
    let n = p.profile.len();
    RewardMatrix::from_fn(n + 1, n, |i, j| {
        Entry::Value(if i == n {
            p.inconclusive
        } else {
            p.profile[(i as isize - j as isize).unsigned_abs()]
        })
    })
}

/// Two-change-point closer-the-better reward over `I_N` plus an inconclusive
/// row; the printed three cases, first match wins.
pub fn build_2cp_ctb_reward<S: Scalar>(
    idx: &ChangeIndexSet,
    base: S,
) -> Result<RewardMatrix<S>, RewardError> {
    check_base(base)?;
    assert_eq!(idx.num_changes(), 2);
    let n = idx.len();
    Ok(RewardMatrix::from_fn(n + 1, n, |gi, ci| {
        if gi == n {
            return Entry::Value(S::zero());
        }
        let g = idx.get(gi).entries();
        let c = idx.get(ci).entries();
        Entry::Value(reward_2cp_entry(base, g, c))
    }))
}

fn reward_2cp_entry<S: Scalar>(base: S, g: &[usize], c: &[usize]) -> S {
    let (i, j) = (g[0], g[1]);
    let (k, l) = (c[0], c[1]);
    if j < k {
        pow_dist(base, i, j) * pow_dist(base, k, l)
    } else {
        pow_dist(base, i, k) * pow_dist(base, j, l)
    }
}

/// Three-change-point closer-the-better reward: the seven printed cases
/// verbatim, evaluated top to bottom, first match wins. (The second case's
/// `l <= j <= n` condition is implemented as printed; the cases cover every
/// guess/state pair, verified exhaustively in tests.)
pub fn build_3cp_ctb_reward<S: Scalar>(
    idx: &ChangeIndexSet,
    base: S,
) -> Result<RewardMatrix<S>, RewardError> {
    check_base(base)?;
    assert_eq!(idx.num_changes(), 3);
    let n = idx.len();
    Ok(RewardMatrix::from_fn(n + 1, n, |gi, ci| {
        if gi == n {
            return Entry::Value(S::zero());
        }
        let g = idx.get(gi).entries();
        let c = idx.get(ci).entries();
        Entry::Value(
            reward_3cp_entry(base, g, c)
                .expect("the printed cases cover every admissible pair"),
        )
    }))
}

/// Case index alongside the value, for auditability.
pub fn reward_3cp_case<S: Scalar>(base: S, g: &ChangeIndex, c: &ChangeIndex) -> (S, usize) {
    reward_3cp_entry_case(base, g.entries(), c.entries())
        .expect("the printed cases cover every admissible pair")
}

fn reward_3cp_entry<S: Scalar>(base: S, g: &[usize], c: &[usize]) -> Option<S> {
    reward_3cp_entry_case(base, g, c).map(|(v, _)| v)
}

fn reward_3cp_entry_case<S: Scalar>(base: S, g: &[usize], c: &[usize]) -> Option<(S, usize)> {
    let (i, j, k) = (g[0], g[1], g[2]);
    let (l, m, n) = (c[0], c[1], c[2]);
    let p = |a: usize, b: usize| pow_dist(base, a, b);
    if l <= j && j <= k && k <= m {
        Some((p(i, l) * p(j, k) * p(m, n), 1))
    } else if l <= j && j <= n && k > m {
        Some((p(i, l) * p(j, m) * p(k, n), 2))
    } else if l <= m && m <= n && n < j && j <= k {
        Some((p(i, l) * p(m, n), 3))
    } else if j < l && l <= k && k <= m {
        Some((p(i, j) * p(l, k) * p(m, n), 4))
    } else if j < l && l <= k && k > m {
        Some((p(i, j) * p(l, m), 5))
    } else if j <= k && k < l {
        Some((p(i, j) * p(k, l) * p(m, n), 6))
    } else {
        None
    }
}

fn check_base<S: Scalar>(base: S) -> Result<(), RewardError> {
    if base <= S::zero() || base > S::one() {
        return Err(RewardError::BadParameter {
            name: "base",
            value: base.as_f64(),
        });
    }
    Ok(())
}

/// `base^|i-j|` with `0^0 = 1`.
#[inline]
fn pow_dist<S: Scalar>(base: S, i: usize, j: usize) -> S {
    let mut e = i.abs_diff(j);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::enumerate_change_indices;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn min_error_and_horseshoe() {
        let r = build_reward::<f64>(&Scheme::MinError, 2).unwrap();
        assert_eq!(r.row(0), &[1.0, 0.0]);
        assert_eq!(r.row(1), &[0.0, 1.0]);
        assert!(!r.has_mask());

        // mu = 0 recovers minimum error exactly
        let h0 = build_reward::<f64>(&Scheme::Horseshoe { mu: 0 }, 5).unwrap();
        let me = build_reward::<f64>(&Scheme::MinError, 5).unwrap();
        assert_eq!(h0, me);

        let h1 = build_reward::<f64>(&Scheme::Horseshoe { mu: 1 }, 3).unwrap();
        assert_eq!(h1.row(0), &[1.0, 1.0, 0.0]);
        assert_eq!(h1.row(1), &[1.0, 1.0, 1.0]);
        assert_eq!(h1.row(2), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn horseshoe_monotone_in_mu() {
        for n in [3usize, 6] {
            let mut prev = build_reward::<f64>(&Scheme::Horseshoe { mu: 0 }, n).unwrap();
            for mu in 1..4 {
                let cur = build_reward::<f64>(&Scheme::Horseshoe { mu }, n).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        assert!(cur.value(i, j) >= prev.value(i, j));
                    }
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn closer_the_better() {
        let r = build_reward(&Scheme::CloserTheBetter { gamma: 1.0 }, 3).unwrap();
        assert!(r.values.iter().all(|&v| v == 1.0));
        // gamma = 0 equals minimum error under 0^0 = 1
        let r0 = build_reward(&Scheme::CloserTheBetter { gamma: 0.0 }, 4).unwrap();
        let me = build_reward(&Scheme::MinError, 4).unwrap();
        assert_eq!(r0, me);
    }

    #[test]
    fn exam_and_unambiguous() {
        let r = build_reward(&Scheme::Exam { partial: 0.25 }, 2).unwrap();
        assert_eq!(r.row(0), &[1.0, 0.0]);
        assert_eq!(r.row(1), &[0.0, 1.0]);
        assert_eq!(r.row(2), &[0.25, 0.25]);

        let r = build_reward::<f64>(&Scheme::UnambiguousExact, 2).unwrap();
        assert_eq!(r.num_guesses(), 3);
        assert!(r.is_forbidden(0, 1) && r.is_forbidden(1, 0));
        assert!(!r.is_forbidden(0, 0) && !r.is_forbidden(2, 0));
        // masked cells carry value 0
        assert_eq!(r.value(0, 1), 0.0);

        let r = build_reward(&Scheme::UnambiguousPenalty { beta: 0.3 }, 2).unwrap();
        assert!(!r.has_mask());
        assert_eq!(r.value(0, 1), -0.3);

        let r = build_reward::<f64>(&Scheme::UnambiguousExclusion, 2).unwrap();
        assert!(r.is_forbidden(0, 0) && r.is_forbidden(1, 1));
        assert_eq!(r.value(2, 0), -1.0);
    }

    #[test]
    fn classification_partition() {
        let r = build_reward::<f64>(
            &Scheme::Classification {
                classes: vec![vec![1, 3], vec![2, 4]],
            },
            4,
        )
        .unwrap();
        assert_eq!(r.row(0), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(r.row(1), &[0.0, 1.0, 0.0, 1.0]);
        // exactly one 1 per column
        for j in 0..4 {
            let ones = (0..2).filter(|&i| r.value(i, j) == 1.0).count();
            assert_eq!(ones, 1);
        }
        // overlapping / incomplete partitions are rejected
        assert!(build_reward::<f64>(
            &Scheme::Classification {
                classes: vec![vec![1], vec![1, 2]],
            },
            2,
        )
        .is_err());
        assert!(build_reward::<f64>(
            &Scheme::Classification {
                classes: vec![vec![1]],
            },
            2,
        )
        .is_err());
    }

    #[test]
    fn onecp_reward_examples() {
        // unit profile: min-error rows plus a zero inconclusive row
        let mut profile = vec![0.0; 4];
        profile[0] = 1.0;
        let r = build_1cp_reward(&ChangePointReward {
            profile,
            inconclusive: 0.0,
        });
        assert_eq!(r.num_guesses(), 5);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r.value(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(r.row(4), &[0.0; 4]);

        // geometric profile (1/sqrt2)^k at N = 3
        let r = build_1cp_reward(&ChangePointReward::closer_the_better(FRAC_1_SQRT_2, 3));
        let want = [
            [1.0, FRAC_1_SQRT_2, 0.5],
            [FRAC_1_SQRT_2, 1.0, FRAC_1_SQRT_2],
            [0.5, FRAC_1_SQRT_2, 1.0],
            [0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..3 {
                assert!((r.value(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn twocp_reward_examples() {
        let idx = enumerate_change_indices(2, 2);
        let r = build_2cp_ctb_reward(&idx, FRAC_1_SQRT_2).unwrap();
        // exact hit
        assert_eq!(r.value(0, 0), 1.0);
        // guess (1,2), state (2,2): otherwise branch -> base^1 * base^0
        assert!((r.value(0, 1) - FRAC_1_SQRT_2).abs() < 1e-15);
        // inconclusive row all zeros
        assert_eq!(r.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn threecp_reward_examples() {
        let idx = enumerate_change_indices(4, 3);
        let r = build_3cp_ctb_reward(&idx, FRAC_1_SQRT_2).unwrap();
        // exact hits give 1 for every guess
        for gi in 0..idx.len() {
            assert!((r.value(gi, gi) - 1.0).abs() < 1e-15);
        }
        // inconclusive row all zeros
        assert!(r.row(idx.len()).iter().all(|&v| v == 0.0));
        // guess (1,2,3), state (1,2,4) -> second printed case -> base^1
        let g = crate::states::ChangeIndex::new(vec![1, 2, 3], 4).unwrap();
        let c = crate::states::ChangeIndex::new(vec![1, 2, 4], 4).unwrap();
        let (v, case) = reward_3cp_case(FRAC_1_SQRT_2, &g, &c);
        assert_eq!(case, 2);
        assert!((v - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn threecp_cases_cover_everything() {
        for n in 2..=9usize {
            let idx = enumerate_change_indices(n, 3);
            for g in idx.iter() {
                for c in idx.iter() {
                    assert!(
                        reward_3cp_entry(0.5f64, g.entries(), c.entries()).is_some(),
                        "uncovered pair {:?} {:?}",
                        g,
                        c
                    );
                }
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(build_reward::<f64>(&Scheme::CloserTheBetter { gamma: 1.5 }, 3).is_err());
        assert!(build_reward::<f64>(&Scheme::UnambiguousPenalty { beta: 0.0 }, 3).is_err());
        let idx = enumerate_change_indices(3, 2);
        assert!(build_2cp_ctb_reward(&idx, 0.0f64).is_err());
    }
}
