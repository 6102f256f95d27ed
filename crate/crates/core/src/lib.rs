//! Mass-action reaction network analysis for single-linkage-class systems.
//!
//! The crate models dynamics of the form
//!
//! ```text
//! dx/dt = f(x) = Σ_ij a_ij · θ(x_1)^{b_1j} ⋯ θ(x_n)^{b_nj} · (b_i − b_j)
//! ```
//!
//! parametrized by a rate matrix `A`, a complex matrix `B` whose columns
//! `b_j` describe the reacting complexes, and a power-law kinetics
//! θ(y) = y^p. Under the structural hypotheses checked by
//! [`network::validate_network`] (strongly connected reaction graph, full
//! column rank, no vanishing species row, coefficients 0 or ≥ 1) every
//! positive stoichiometric class carries a unique positive equilibrium,
//! and an entropy-like function decreases along trajectories. The modules
//! here compute those objects and certify the claimed inequalities
//! numerically:
//!
//! - [`network`]: the network representation, text format, structural
//!   validation, stoichiometric subspace bases and classes.
//! - [`dynamics`]: vector-field evaluation in three equivalent forms and
//!   nonnegativity-preserving ODE integration.
//! - [`equilibria`]: Perron-Frobenius kernel direction, positive
//!   equilibria, and the per-class equilibrium via convex minimization.
//! - [`lyapunov`]: entropy distance, per-class Lyapunov function,
//!   deviation measures, quadratic-form constants and decrease
//!   certificates.
//! - [`boundary`]: support sets, boundary-equilibrium tests, and the
//!   decision procedure for whether a class touches any boundary
//!   equilibrium.
//! - [`proofreading`]: the kinetic proofreading receptor-modification
//!   chain as a built-in network family.
//! - [`cli`]: the `crnzero` command-line surface.

pub mod boundary;
pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod kinetics;
pub mod linalg;
pub mod lyapunov;
pub mod network;
pub mod proofreading;

pub use kinetics::Kinetics;
pub use network::{ClassDescriptor, Network, StoichBasis, ValidationReport};
