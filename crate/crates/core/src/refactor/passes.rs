use serde::Serialize;

use crate::grid::GridHierarchy;

/// Element traffic of one decomposition level, in elements.
///
/// Full-array passes are these counts divided by `level_len`:
/// coefficient computation (1), the coefficient copy fused into the first
/// mass-transfer sweep (1), per dimension a mass-transfer sweep and a
/// forward/backward solve (2 × their input sizes each) and the correction
/// apply (`|N_{l-1}| / |N_l|`). For large 3-D grids this tends to
/// 1 + 1 + 5.25 + 0.125 passes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelPasses {
    pub level: usize,
    pub level_len: u64,
    pub coefficient: u64,
    pub copy: u64,
    pub masstrans: Vec<u64>,
    pub solve: Vec<u64>,
    pub apply: u64,
}

impl LevelPasses {
    pub fn new(level: usize, level_len: usize, ndims: usize) -> Self {
        Self {
            level,
            level_len: level_len as u64,
            masstrans: vec![0; ndims],
            solve: vec![0; ndims],
            ..Self::default()
        }
    }

    /// Closed-form traffic of level `level` from the hierarchy sizes alone.
    pub fn predicted(h: &GridHierarchy, level: usize) -> Self {
        let nd = h.ndims();
        let fine = h.level_shape(level);
        let coarse = h.level_shape(level - 1);
        let mut lp = Self::new(level, h.level_len(level), nd);
        lp.coefficient = lp.level_len;
        lp.copy = lp.level_len;
        // the working array turns coarse along each processed dimension
        let mut current = fine.clone();
        for d in 0..nd {
            if h.is_fixed(d, level) {
                continue;
            }
            let input: u64 = current.iter().product::<usize>() as u64;
            current[d] = coarse[d];
            let output: u64 = current.iter().product::<usize>() as u64;
            lp.masstrans[d] = 2 * input;
            lp.solve[d] = 2 * output;
        }
        lp.apply = h.level_len(level - 1) as u64;
        lp
    }

    pub fn total(&self) -> u64 {
        self.coefficient
            + self.copy
            + self.masstrans.iter().sum::<u64>()
            + self.solve.iter().sum::<u64>()
            + self.apply
    }

    /// Full passes over the level array.
    pub fn passes(&self) -> f64 {
        self.total() as f64 / self.level_len as f64
    }

    /// Passes spent in the correction (mass-transfer plus solves).
    pub fn correction_passes(&self) -> f64 {
        (self.masstrans.iter().sum::<u64>() + self.solve.iter().sum::<u64>()) as f64
            / self.level_len as f64
    }
}

/// Per-level traffic of a whole decomposition, finest level first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PassCounters {
    pub levels: Vec<LevelPasses>,
    pub full_len: u64,
}

impl PassCounters {
    pub fn predicted(h: &GridHierarchy) -> Self {
        Self {
            levels: (1..=h.levels()).rev().map(|l| LevelPasses::predicted(h, l)).collect(),
            full_len: h.level_len(h.levels()) as u64,
        }
    }

    /// Accumulated passes over the full input across all levels.
    pub fn accumulated_passes(&self) -> f64 {
        self.levels.iter().map(|l| l.total()).sum::<u64>() as f64 / self.full_len as f64
    }
}
