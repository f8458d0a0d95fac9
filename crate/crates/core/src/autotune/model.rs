use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::TileConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kernel {
    /// Grid processing: coefficient computation.
    Gpk,
    /// Linear processing: merged mass-transfer sweep.
    Lpk,
    /// Iterative processing: batched tridiagonal solve.
    Ipk,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Gpk, Kernel::Lpk, Kernel::Ipk];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Gpk => "GPK",
            Kernel::Lpk => "LPK",
            Kernel::Ipk => "IPK",
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GPK" => Ok(Kernel::Gpk),
            "LPK" => Ok(Kernel::Lpk),
            "IPK" => Ok(Kernel::Ipk),
            _ => Err(format!("unknown kernel `{s}` (expected GPK, LPK or IPK)")),
        }
    }
}

/// Memory system parameters of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviceModel {
    /// Bytes per memory transaction `S`.
    pub transaction_bytes: usize,
    /// Peak memory bandwidth in bytes per second.
    pub peak_bw: f64,
    /// Bytes per element `L` (4 or 8).
    pub elem_bytes: usize,
    ghost: Option<usize>,
}

impl DeviceModel {
    pub fn new(transaction_bytes: usize, peak_bw: f64, elem_bytes: usize) -> Result<Self> {
        if elem_bytes == 0 || transaction_bytes < elem_bytes {
            return Err(Error::InvalidArgument(format!(
                "transaction size {transaction_bytes} must be at least the element size {elem_bytes} > 0"
            )));
        }
        if !(peak_bw.is_finite() && peak_bw > 0.0) {
            return Err(Error::InvalidArgument(format!("peak bandwidth {peak_bw} must be positive")));
        }
        Ok(Self {
            transaction_bytes,
            peak_bw,
            elem_bytes,
            ghost: None,
        })
    }

    /// Overrides the ghost extent `G` (default `S / L`).
    pub fn with_ghost(mut self, ghost: usize) -> Self {
        self.ghost = Some(ghost);
        self
    }

    /// Elements per transaction, `S / L`.
    pub fn per_transaction(&self) -> usize {
        (self.transaction_bytes / self.elem_bytes).max(1)
    }

    pub fn ghost(&self) -> usize {
        self.ghost.unwrap_or_else(|| self.per_transaction())
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

// ⌊N/B⌋ tiles, but never fewer than one: a tile wider than the grid still
// launches once
fn tiles(n: usize, b: usize) -> usize {
    (n / b).max(1)
}

/// Predicted seconds of one launch of `kernel` on an `n³` grid.
///
/// With `q = S/L` (each floor term counts at least one tile):
/// * GPK: `⌈(B_x+1)/q⌉·q·(B_y+1)(B_z+1)·⌊N/B_x⌋⌊N/B_y⌋⌊N/B_z⌋·2L / bw`
/// * LPK: `(⌈B_x/q⌉·q + 2q)·B_y·B_z·⌊N/B_x⌋⌊N/B_y⌋⌊N/B_z⌋·2L / bw`
/// * IPK: `(⌈G/q⌉·q + ⌈B_x/q⌉·q·⌈N/B_x⌉)·B_y·B_z·⌊N/B_y⌋⌊N/B_z⌋·2L / bw`
pub fn model_time(kernel: Kernel, cfg: &TileConfig, n: usize, dev: &DeviceModel) -> f64 {
    let q = dev.per_transaction();
    let (bx, by, bz) = (cfg.bx, cfg.by, cfg.bz);
    let elements = match kernel {
        Kernel::Gpk => {
            ceil_div(bx + 1, q) * q * (by + 1) * (bz + 1) * tiles(n, bx) * tiles(n, by) * tiles(n, bz)
        }
        Kernel::Lpk => (ceil_div(bx, q) * q + 2 * q) * by * bz * tiles(n, bx) * tiles(n, by) * tiles(n, bz),
        Kernel::Ipk => {
            (ceil_div(dev.ghost(), q) * q + ceil_div(bx, q) * q * ceil_div(n, bx))
                * by
                * bz
                * tiles(n, by)
                * tiles(n, bz)
        }
    };
    elements as f64 * (2 * dev.elem_bytes) as f64 / dev.peak_bw
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankedConfig {
    pub config: TileConfig,
    pub predicted_secs: f64,
    /// 1 = fastest.
    pub rank: usize,
}

/// Candidates in ascending predicted time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigRanking {
    pub kernel: Kernel,
    pub entries: Vec<RankedConfig>,
}

impl ConfigRanking {
    pub fn best(&self) -> TileConfig {
        self.entries[0].config
    }

    pub fn rank_of(&self, cfg: &TileConfig) -> Option<usize> {
        self.entries.iter().find(|e| e.config == *cfg).map(|e| e.rank)
    }

    /// Ranks listed in the order of `candidates`.
    pub fn ranks_for(&self, candidates: &[TileConfig]) -> Vec<Option<usize>> {
        candidates.iter().map(|c| self.rank_of(c)).collect()
    }
}

/// Orders `candidates` by predicted time; ties go to the smaller `B_x`, then
/// `B_y`, then `B_z`.
pub fn rank_configs(
    kernel: Kernel,
    candidates: &[TileConfig],
    n: usize,
    dev: &DeviceModel,
) -> Result<ConfigRanking> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate configurations".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size {n} is below 2")));
    }
    let mut timed: Vec<(TileConfig, f64)> = candidates
        .iter()
        .map(|c| (*c, model_time(kernel, c, n, dev)))
        .collect();
    timed.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    timed.dedup_by_key(|e| e.0);
    let entries = timed
        .into_iter()
        .enumerate()
        .map(|(i, (config, predicted_secs))| RankedConfig {
            config,
            predicted_secs,
            rank: i + 1,
        })
        .collect();
    Ok(ConfigRanking { kernel, entries })
}
