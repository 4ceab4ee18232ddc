//! Vertex-blocked sparse matrices, truncation, block Gauss–Seidel and the
//! geometric multigrid V-cycle.

mod block;
mod cg;
mod coarse;
mod multigrid;
mod smoother;
mod truncation;

pub use block::{Block, BlockSparseMatrix, B as BLOCK};
pub use cg::{pcg, CgOutcome};
pub use coarse::BandedLdlt;
pub use multigrid::{galerkin, restrict_mask, Multigrid};
pub use smoother::{block_gauss_seidel, block_gauss_seidel_backward};
pub use truncation::{apply_truncation, truncate_in_place, TruncationMask};
