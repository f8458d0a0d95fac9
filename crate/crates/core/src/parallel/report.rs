use serde::Serialize;

use super::partition::Scheme;

/// Traffic and scheduling of one level of a cooperative run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelComm {
    pub level: usize,
    pub level_elems: u64,
    /// Halo elements received for the coefficient phase.
    pub coefficient_elems: u64,
    /// Halo elements received per mass-transfer sweep.
    pub masstrans_elems: Vec<u64>,
    /// Sweep-state elements passed between workers per solve.
    pub carry_elems: Vec<u64>,
    /// Idle workers at each pipeline stage of the solve along each dimension.
    pub stage_idle: Vec<Vec<usize>>,
    /// Slowest worker's wall time for the level.
    pub secs: f64,
}

impl LevelComm {
    pub(crate) fn new(level: usize, ndims: usize) -> Self {
        Self {
            level,
            level_elems: 0,
            coefficient_elems: 0,
            masstrans_elems: vec![0; ndims],
            carry_elems: vec![0; ndims],
            stage_idle: vec![Vec::new(); ndims],
            secs: 0.0,
        }
    }

    pub fn exchanged(&self) -> u64 {
        self.coefficient_elems
            + self.masstrans_elems.iter().sum::<u64>()
            + self.carry_elems.iter().sum::<u64>()
    }
}

/// Machine-readable summary of a cooperative decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommReport {
    pub workers: usize,
    pub scheme: Scheme,
    pub partitions: usize,
    /// Finest-level elements owned by each worker.
    pub owned_elems: Vec<u64>,
    /// Finest level first.
    pub levels: Vec<LevelComm>,
    pub total_secs: f64,
}

impl CommReport {
    pub fn total_exchanged(&self) -> u64 {
        self.levels.iter().map(LevelComm::exchanged).sum()
    }
}
