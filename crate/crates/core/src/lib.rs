//! Online minimization of L♮-convex functions on bounded integer domains.
//!
//! A domain is a difference-constraint polyhedron
//! `{lower <= x <= upper, x_i - x_j <= gamma_ij}` intersected with `Z^d`.
//! Learners keep a fractional iterate in its convex hull, play a lattice
//! point read off a maximal chain through that iterate, and take projected
//! subgradient steps on the convex extension.

pub mod adversaries;
pub mod applications;
pub mod chain;
pub mod error;
pub mod extension;
pub mod functions;
pub mod io;
pub mod lattice;
pub mod oracles;
pub mod projection;
pub mod rational;
pub mod solvers;
pub mod trace;

pub use adversaries::{lower_bound_adversary, random_lnat_stream, CostSequence, Family, StreamParams};
pub use chain::{maximal_chain, MaximalChain, TieBreak};
pub use error::{Error, Result};
pub use extension::{CostOracle, LatticeFunction};
pub use functions::{FunctionSpec, Term};
pub use lattice::{ConstraintSystem, LNatDomain, LatticePoint};
pub use oracles::CheckReport;
pub use projection::ProjectionConfig;
pub use rational::Rational;
pub use solvers::{run_experiment, Algorithm, ExperimentOptions, LearnerState, RoundOutcome};
pub use trace::{RegretTrace, RoundRecord, TraceMeta};
