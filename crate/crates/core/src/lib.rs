//! Glauber dynamics for heavy-tailed mean-field spin glasses.
//!
//! The model lives on `{-1,+1}^N` with Hamiltonian
//!
//! ```text
//! H(sigma) = sum_{i<j} J_ij sigma_i sigma_j
//! ```
//!
//! where the couplings `J_ij` are i.i.d. heavy-tailed (Pareto-type with
//! exponent `alpha` in `(0,1)`, scaled by `N^{-1/alpha}`), and the Gibbs
//! measure is `pi(sigma) ~ exp(beta * H(sigma))` (larger energy is *more*
//! likely under this sign convention). On timescales `exp(a N^gamma)` the
//! dynamics is metastable: the handful of bonds with `|J| >= (a/2beta) N^gamma`
//! freeze into satisfying assignments, partitioning the state space into
//! wells, and the projection of the dynamics onto wells is approximated by an
//! explicit Markov jump process on `{-1,+1}^K`.
//!
//! The crate provides the pieces needed to simulate and *verify* that picture
//! at desk scale:
//!
//! - [`couplings`]: sampling and auditing of the heavy-tailed bond matrix,
//!   order statistics, the relevant-edge set `E_{a,gamma}`, and the
//!   structural diagnostics the metastability analysis rests on.
//! - [`hamiltonian`]: energies, local fields, heat-bath flip rates, satisfied
//!   bonds and exact Gibbs tables for small systems.
//! - [`dynamics`]: continuous-time Glauber dynamics (naive and
//!   rejection-free engines), restricted dynamics, escape times, two-time
//!   autocorrelation.
//! - [`wells`]: the well decomposition, skeleton projection, timescale index
//!   and the two-state chain approximating a single critical bond.
//! - [`yprocess`]: the Markov jump process `Y` on wells, its Gibbs-averaged
//!   rates, stationary measure, and statistical comparison to the skeleton of
//!   the true dynamics.
//! - [`exact`]: dense generators, spectral gaps, total-variation curves and
//!   mixing times, block-dynamics gap inequalities, and the canonical-path
//!   congestion bound for the 4-state chain.
//! - [`fk`]: the random-cluster (Edwards-Sokal) coupling, signed union-find
//!   clusters, the correlation identity, and high-temperature overlap /
//!   skeleton-uniformity estimators.
//! - [`stats`]: plug-in total variation with bootstrap, Kolmogorov-Smirnov,
//!   chi-square, DKW bands, and small time-series utilities.
//!
//! All randomness flows through explicit seeds (ChaCha streams); identical
//! seeds give bit-identical results.

pub mod couplings;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod fk;
pub mod hamiltonian;
pub mod numerics;
pub mod rng;
pub mod stats;
pub mod wells;
pub mod yprocess;

pub use error::{Error, ErrorKind};

/// Spin value alias: always `+1` or `-1`.
pub type Spin = i8;

/// Map over task indices, in parallel when the `parallel` feature is on.
///
/// Results come back in index order and every task derives its own RNG
/// stream, so output never depends on worker count or scheduling.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
