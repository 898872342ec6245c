//! Ramsey numbers as ground-state energies.
//!
//! The pipeline turns a Ramsey instance `(m, n, N)` into a cost function over
//! the `N(N-1)/2` edge bits of a graph, reduces it to a quadratic model,
//! converts it to Ising form, embeds it onto a Chimera qubit graph and samples
//! it with simulated annealing or an exact statevector anneal. Exhaustive
//! oracles supply ground truth for every stage.

pub mod analysis;
pub mod cli;
pub mod cost;
pub mod dense;
pub mod embed;
mod error;
pub mod graph;
pub mod qa;
pub mod qubo;
pub mod sa;

pub use cost::RamseyInstance;
pub use error::{Error, Result};
pub use graph::{EdgeIndexMap, GraphBits};
pub use qubo::{Domain, QuadraticModel, VarRole};
