//! Multigrid hierarchical data refactoring.
//!
//! A structured N-dimensional grid (uniform or nonuniform spacing) is
//! decomposed level by level into coefficient classes: the coarsest nodal
//! values followed by one class of interpolation details per level. Any
//! prefix of the classes recomposes to the L² projection of the data onto
//! the corresponding coarse grid, prolonged back to the full resolution.
//!
//! The crate is organised around the processing styles of the transform:
//!
//! * [`grid`]: geometry, nested level hierarchy and the coarse-first layout.
//! * [`kernels`]: coefficient interpolation, the merged mass-transfer stencil
//!   and the batched tridiagonal correction solver, all tile-structured.
//! * [`refactor`]: decomposition/recomposition orchestration, progressive
//!   truncation and spatiotemporal (N+1-D) refactoring.
//! * [`autotune`]: analytic kernel performance models and model-guided tuning.
//! * [`parallel`]: embarrassingly parallel and cooperative multi-worker
//!   refactoring with halo exchange and pipelined solves.
//! * [`pipeline`]: the `MGRF` container, progressive reads and the
//!   error-bounded compression pipeline.

pub mod autotune;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod parallel;
pub mod pipeline;
mod real;
pub mod refactor;

pub use error::{Error, Result};
pub use grid::{GridHierarchy, TensorGrid};
pub use kernels::{TileConfig, Tiling};
pub use real::{Precision, Real};
pub use refactor::{decompose, recompose, RefactoredData, ReconstructionReport};
