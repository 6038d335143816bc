//! Discovery and verification of iterative schedules for matrix functions.
//!
//! The crate plans hybrid sequences of classical matrix iterations (Newton,
//! Newton-Schulz, Denman-Beavers, Visser and friends) that compute a matrix
//! function — inverse, sign, square root, or 1/3-root — of a symmetric input
//! in minimal modeled wall-clock time. Because every registered iteration is
//! a rational matrix function, the whole decision process collapses onto the
//! eigenvalues of the input: states are spectra, transitions are elementwise
//! scalar maps, and a plan found on the spectrum replays exactly on any
//! co-diagonalizable dense realization.
//!
//! Module map:
//!
//! - [`matcore`]: dense symmetric linear algebra (matmul, LU/Cholesky inverse,
//!   Jacobi eigensolver, Haar sampling) used for matrix-level verification.
//! - [`spectra`]: seeded samplers for the random-matrix ensembles the planner
//!   is trained and tested on.
//! - [`iterations`]: the registry of parametrized iterations with spectral
//!   and matrix forms plus primitive-operation cost profiles.
//! - [`env`]: the staged decision process — spectrum states, decoupled
//!   iteration/parameter actions, `-T_j` rewards, loss-based termination.
//! - [`costmodel`]: per-iteration cost tables, static or measured.
//! - [`baselines`]: runnable classical schedules (with adaptive scalings)
//!   used both for comparison curves and as rollout policies.
//! - [`mcts`]: the tree search with progressive widening over continuous
//!   parameters; produces a [`mcts::DiscoveredAlgorithm`].
//! - [`verify`]: spectral and dense replay, spectral/matrix equivalence
//!   checking, and cross-distribution generalization experiments.
//!
//! The crate is `no_std` (with `alloc`); everything is deterministic given
//! the seeds threaded through [`rng`].

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;



pub mod baselines;
pub mod costmodel;
pub mod env;
pub(crate) mod fm;
pub mod iterations;
pub mod matcore;
pub mod mcts;

pub mod rng;
pub mod spectra;
pub mod verify;

