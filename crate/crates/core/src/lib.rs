//! Hybrid finite-difference solver for two-parameter singularly perturbed
//! parabolic problems
//!
//! ```text
//! eps u_xx + mu a u_x - b u - u_t = f   on ((0,d) ∪ (d,1)) × (0,T]
//! ```
//!
//! where the convection coefficient `a` and the source `f` jump at `x = d`.
//! Space is discretised on a piecewise-uniform Shishkin mesh with a per-node
//! choice of central, midpoint-upwind and upwind stencils plus a transformed
//! five-point row at the discontinuity; time is advanced with Crank–Nicolson.
//!
//! The [`verify`] module estimates errors with the double-mesh principle and
//! with manufactured solutions.

// negated comparisons below are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mesh;
pub mod par;
pub mod problem;
pub mod scheme;
pub mod solver;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use mesh::{SpatialMesh, TimeGrid};
pub use par::Execution;
pub use problem::{builtin_example, classify_regime, ExampleId, ProblemSpec, Regime};
pub use scheme::{OperatorTag, OuterRule, SchemeRow};
pub use solver::{solve, SolutionField};
pub use verify::ConvergenceTable;
