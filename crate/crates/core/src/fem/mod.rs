//! Structured Q1 finite elements on rectangles with a uniform refinement
//! hierarchy.

pub mod assembly;
mod bc;
mod element;
mod grid;

pub use bc::{build_single_notch_mesh, notch_conditions, BoundaryConditions, MAX_DOFS};
pub use element::{gather, strain_at_qp, Q1Element, QpValues, D, DOFS_PER_VERTEX, NQP};
pub use grid::{GridHierarchy, Prolongation, StructuredGrid};
