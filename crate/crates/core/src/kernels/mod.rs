//! Tile-structured refactoring kernels.
//!
//! Three processing styles cover the whole transform:
//!
//! * grid processing: [`compute_coefficients`] / [`restore_coefficients`]
//!   interpolate coarse nodes onto the coefficient nodes of one level;
//! * linear processing: [`masstrans_apply`] applies the transfer matrix after
//!   the mass matrix along one dimension as a single out-of-place stencil;
//! * iterative processing: [`solve_correction`] (and the split
//!   [`forward_sweep`] / [`backward_sweep`]) runs batched Thomas solves of
//!   the coarse mass matrix along one dimension.
//!
//! Every kernel operates on an [`NdBlock`], a dense box of level positions
//! with a global origin, so the same code serves whole arrays and the
//! halo-extended partitions of cooperative workers. Traversal order follows
//! the [`Tiling`]; arithmetic order per element never depends on it.

mod block;
mod coefficients;
mod correction;
mod masstrans;
mod operator;
mod solver;
mod tiling;

pub use block::{NdBlock, Region};
pub use coefficients::{compute_coefficients, restore_coefficients};
pub use correction::apply_correction;
pub use masstrans::{masstrans_apply, masstrans_output_region};
pub use operator::{
    MassMatrix, NodeKind, OperatorSet, ThomasFactors, TridiagonalOperator,
};
pub use solver::{backward_sweep, forward_sweep, solve_correction};
pub use tiling::{TileConfig, Tiling, DEFAULT_TILE_BUDGET};
