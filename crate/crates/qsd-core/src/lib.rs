//! Reward-optimal discrimination of pure quantum states.
//!
//! Given `N` pure states with priors and an `L x N` reward matrix, the
//! maximum expected reward over all quantum measurements is a semidefinite
//! program over `L` operators of the states' dimension. When the states are
//! pure, that program collapses to one over `L` matrices of size `N x N`
//! built from the Gram matrix of the ensemble — small enough to solve even
//! when the states themselves live in a 2^220-dimensional space. This crate
//! implements that reduction end to end:
//!
//! - [`states`]: pure states, change-point sequence indexing, overlap tables;
//! - [`gram`]: Gram matrix builders (general and closed-form change-point);
//! - [`rewards`]: reward schemes (minimum-error, unambiguous, exclusion,
//!   horseshoe, closer-the-better, exam, classification, change-point);
//! - [`sdp`]: a self-contained primal-dual interior-point solver for
//!   block-diagonal semidefinite programs, plus the complex-Hermitian to
//!   real-symmetric embedding;
//! - [`discrim`]: the discrimination programs themselves — full-dimension
//!   oracle, reduced primal/dual, Toeplitz and block-structured heuristic
//!   duals, measurement recovery, and outcome statistics;
//! - [`estimate`]: statistical simulation of swap/Hadamard-test Gram
//!   estimation with shot planning and PSD repair;
//! - [`verify`]: named self-check suites used by tests and the CLI.
//!
//! The numeric core is generic over the floating scalar (see [`Scalar`]);
//! `f64` aliases are exported at the crate root and are what the solver
//! tolerances assume.

pub mod discrim;
pub mod estimate;
pub mod gram;
pub mod linalg;
pub mod rewards;
pub mod scalar;
pub mod sdp;
pub mod states;
pub mod textio;
pub mod verify;

pub use scalar::Scalar;

/// Default-precision aliases; the documented tolerances assume these.
pub type PureState = states::PureState<f64>;
pub type StateEnsemble = states::StateEnsemble<f64>;
pub type OverlapTable = states::OverlapTable<f64>;
pub type GramMatrix = gram::GramMatrix<f64>;
pub type RewardMatrix = rewards::RewardMatrix<f64>;
pub type SdpProblem = sdp::SdpProblem<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type SolverOptions = sdp::SolverOptions<f64>;


