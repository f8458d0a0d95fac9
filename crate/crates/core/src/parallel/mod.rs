//! Multi-worker refactoring.
//!
//! Workers are threads of one process talking over in-memory channels with
//! phase-tagged messages and phase barriers; nothing in the protocol relies
//! on shared memory, so a network transport could stand in.
//!
//! In cooperative mode the grid is split into partitions owned by workers.
//! At each level a worker computes the coefficients of its own nodes after
//! receiving a one-position halo, runs each mass-transfer sweep after
//! receiving a two-position halo along the swept dimension, and takes part
//! in the correction solves as one segment of a pipeline: forward sweeps
//! pass their last state down the chain of partitions, backward sweeps pass
//! it back up. Halos are exchanged in natural level coordinates. With the
//! block scheme only one worker of a chain is busy per pipeline stage;
//! the shifted round-robin scheme staggers ownership so every worker has a
//! segment in every stage.

mod comm;
mod cooperative;
mod embarrassing;
mod partition;
mod report;

pub use comm::{Descriptor, ExchangeMessage, Phase, Tag};
pub use cooperative::{cooperative_decompose, cooperative_decompose_with, CoopOptions, FaultInjection};
pub use embarrassing::{embarrassing_decompose, grouped_decompose};
pub use partition::{partition, split_dims, Partition, Scheme, COEFFICIENT_GHOST, MASSTRANS_GHOST};
pub use report::{CommReport, LevelComm};
