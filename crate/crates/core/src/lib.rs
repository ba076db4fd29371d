//! Solver-free decision-focused learning for linear programs.
//!
//! The pipeline: generate a benchmark LP and a feature-to-cost dataset,
//! precompute the vertices adjacent to each instance's optimal solution by
//! simplex pivoting (degenerate vertices included, via transition-node
//! pivoting), then train a linear cost predictor with a hinge-style loss
//! over those adjacent vertices. Training itself never calls an LP solver;
//! MSE and SPO+ baselines and regret evaluation are included for comparison.

pub mod adjacency;
pub mod benchgen;
pub mod error;
pub mod ilp;
pub mod io;
pub mod linalg;
pub mod losses;
pub mod lp;
pub mod model;
pub mod simplex;
pub mod train;

pub use error::{LpError, Result};
pub use lp::{Basis, BasicFeasibleSolution, Sense, SolveStats, StandardFormLP};
pub use simplex::SimplexSolver;
