//! Stabilized SQP for set-constrained nonlinear programs
//! `min f(x)  s.t.  G(x) in K` over finite-dimensional inner-product spaces.
//!
//! The solver augments each SQP subproblem with a multiplier proximal term
//! weighted by the KKT residual `sigma(v)`, which restores fast local
//! convergence on degenerate problems (non-unique multipliers, redundant
//! constraints) where ordinary SQP stalls or fails. Subproblems are solved
//! inexactly to a tolerance tied to a power of `sigma(v)`, preserving the
//! quadratic rate without exact inner solves.
//!
//! Layout:
//! - [`hilbert`]: weighted inner-product spaces and convex sets with exact
//!   metric projections.
//! - [`problem`]: oracle bundle for `f`, `G`, derivatives, and the KKT
//!   residual.
//! - [`subproblem`]: semismooth-Newton subproblem solver, the ordinary-SQP
//!   counterpart, and a brute-force verification oracle.
//! - [`driver`]: outer iteration, trace recording, and rate estimation.
//! - [`instances`]: built-in benchmark problems with independently computed
//!   reference solutions.

// validations use `!(x > 0.0)` so NaN is rejected along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod error;
pub mod hilbert;
pub mod instances;
pub mod problem;
pub mod subproblem;

pub use driver::{
    estimate_rate, run_ordinary_sqp, run_stabilized_sqp, IterationRecord, RateEstimate,
    SolveStatus, SolveTrace, SolverOptions,
};
pub use error::{Error, Result};
pub use hilbert::{ConvexSet, Gram, InnerProductSpace, Vector};
pub use problem::{KktReport, PrimalDualPoint, ProblemOracles};
pub use subproblem::{solve_ordinary, StabilizedSubproblem, SubStatus, SubproblemSolution};
