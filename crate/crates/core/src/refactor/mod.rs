//! Level-by-level decomposition and recomposition.
//!
//! Decomposition walks from the finest level down. At level `l` it
//! replaces the coefficient nodes by their interpolation residuals (class
//! `l`), builds the load vector of those residuals with the merged
//! mass-transfer stencil and solves the coarse mass matrix for the
//! correction, one dimension at a time in ascending order, then adds the
//! correction to the surviving coarse nodes. What remains after level 1 is
//! class 0. Recomposition replays the steps in reverse; classes that are
//! not used contribute neither correction nor detail.

mod data;
mod decompose;
mod passes;
mod recompose;
mod spatiotemporal;

pub use data::{ErrorMetrics, ReconstructionReport, RefactoredData};
pub use decompose::{decompose, decompose_with, DecomposeOptions};
pub use passes::{LevelPasses, PassCounters};
pub use recompose::{recompose, recompose_values, recompose_with_report};
pub use spatiotemporal::{
    decompose_spatiotemporal, recompose_spatiotemporal, select_tiling, PhaseTiling, TilingPlan,
};

pub(crate) use decompose::mask_coarse;
