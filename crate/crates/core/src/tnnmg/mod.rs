//! Truncated Nonsmooth Newton Multigrid: nonlinear block Gauss–Seidel
//! presmoothing, a truncated multigrid Newton correction, projection and a
//! monotone line search.

mod config;
pub mod local;
mod solver;

pub use config::{SmootherKind, TnnmgConfig};
pub use local::{presmooth, smooth_vertex_damage, smooth_vertex_displacement, Majorant, Patch};
pub use solver::{IterationRecord, SolverReport, Termination, TnnmgSolver};
