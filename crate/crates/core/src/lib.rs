//! Small-strain phase-field brittle fracture.
//!
//! The crate provides the pointwise material laws ([`material`]), a structured
//! Q1 finite element layer with a uniform refinement hierarchy ([`fem`]), the
//! algebraic increment problem of one load step ([`increment`]), block sparse
//! linear algebra with a truncated geometric multigrid V-cycle ([`sparse`]),
//! the Truncated Nonsmooth Newton Multigrid solver ([`tnnmg`]) and an
//! operator-splitting history-field baseline ([`opsplit`]).
//!
//! Units are kN and mm throughout.

pub mod error;
pub mod fem;
pub mod increment;
pub mod material;
pub mod opsplit;
pub mod sparse;
pub mod sum;
pub mod tnnmg;

pub use error::{Error, Result};
pub use increment::{IncrementProblem, State};
pub use material::{
    CrackDensity, Degradation, DensityEval, MaterialModel, Split, SymOp, SymTensor,
};
