//! A compact mixed-integer linear programming core.
//!
//! Models are generic over [`Scalar`]: `f64` for normal use, `f32` for
//! quick experiments and [`BigRational`] when results must be exact.
//! The solver is a dense bounded-variable simplex with a dual simplex for
//! warm starts, driven by a best-bound branch-and-bound over binaries.

pub mod error;
pub mod model;
pub mod mps;
pub mod scalar;
mod simplex;
pub mod solution_file;
pub mod solve;

pub use error::MilpError;
pub use model::{Constraint, ConstraintId, Model, Objective, Relation, Sense, VarId, VarKind, Variable};
pub use mps::{export_mps, parse_mps, sanitize_name};
pub use num_rational::BigRational;
pub use scalar::{ratio, Scalar};
pub use solution_file::{read_solution, write_solution};
pub use solve::{solve_lp, solve_mip, NodeEvent, Solution, SolveParams, SolveStatus};

pub type MipModel = Model<f64>;
pub type MipSolution = Solution<f64>;
pub type MipModelF32 = Model<f32>;
pub type ExactModel = Model<BigRational>;
pub type ExactSolution = Solution<BigRational>;
