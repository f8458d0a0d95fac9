//! Analytic performance models of the three kernels and model-guided tuning.
//!
//! The models count memory transactions of one kernel launch over an `N³`
//! grid for a thread-block shape `(B_x, B_y, B_z)`; only the relative order
//! of configurations matters. [`autotune`] measures the model's top few
//! candidates and keeps the fastest, caching the choice per kernel, size and
//! precision.

mod bench;
mod cache;
mod model;

pub use bench::{measure_kernel, KernelBench};
pub use cache::{TuneCache, TuneKey, TUNE_DIR_ENV};
pub use model::{model_time, rank_configs, ConfigRanking, DeviceModel, Kernel, RankedConfig};

use crate::error::Result;
use crate::kernels::TileConfig;
use crate::real::Precision;

/// How [`autotune`] arrived at its answer.
#[derive(Clone, Debug, PartialEq)]
pub enum TuneStatus {
    /// The fastest measured of the model's top candidates.
    Measured,
    /// Read back from the cache; nothing was measured.
    Cached,
    /// Measurement failed; the model's first choice is returned.
    ModelFallback { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneOutcome {
    pub config: TileConfig,
    pub status: TuneStatus,
    /// Median time of every measured configuration.
    pub timings: Vec<(TileConfig, f64)>,
    pub ranking: ConfigRanking,
}

/// Measures the `top_k` best configurations predicted by the model (one
/// warm-up, then the median of three runs each) and returns the fastest.
/// `measure` returns elapsed seconds; any failure falls back to the model's
/// rank-1 configuration.
pub fn autotune<F>(
    kernel: Kernel,
    candidates: &[TileConfig],
    n: usize,
    dev: &DeviceModel,
    top_k: usize,
    mut measure: F,
) -> Result<TuneOutcome>
where
    F: FnMut(&TileConfig) -> std::result::Result<f64, String>,
{
    let ranking = rank_configs(kernel, candidates, n, dev)?;
    let shortlist: Vec<TileConfig> = ranking
        .entries
        .iter()
        .take(top_k.max(1))
        .map(|e| e.config)
        .collect();
    let mut timings = Vec::with_capacity(shortlist.len());
    for cfg in &shortlist {
        match median_time(cfg, &mut measure) {
            Ok(t) => timings.push((*cfg, t)),
            Err(reason) => {
                return Ok(TuneOutcome {
                    config: ranking.best(),
                    status: TuneStatus::ModelFallback { reason },
                    timings,
                    ranking,
                })
            }
        }
    }
    // stable: among equal times the better-ranked configuration wins
    let mut best = 0;
    for (i, (_, t)) in timings.iter().enumerate() {
        if *t < timings[best].1 {
            best = i;
        }
    }
    Ok(TuneOutcome {
        config: timings[best].0,
        status: TuneStatus::Measured,
        timings,
        ranking,
    })
}

/// [`autotune`] behind `cache`: a hit skips measurement, a measured result
/// is stored (fallbacks are not).
#[allow(clippy::too_many_arguments)]
pub fn autotune_cached<F>(
    cache: &TuneCache,
    kernel: Kernel,
    candidates: &[TileConfig],
    n: usize,
    precision: Precision,
    dev: &DeviceModel,
    top_k: usize,
    measure: F,
) -> Result<TuneOutcome>
where
    F: FnMut(&TileConfig) -> std::result::Result<f64, String>,
{
    let key = TuneKey {
        kernel,
        n,
        precision,
    };
    if let Some(config) = cache.get(&key) {
        return Ok(TuneOutcome {
            config,
            status: TuneStatus::Cached,
            timings: Vec::new(),
            ranking: rank_configs(kernel, candidates, n, dev)?,
        });
    }
    let out = autotune(kernel, candidates, n, dev, top_k, measure)?;
    if out.status == TuneStatus::Measured {
        cache.insert(key, out.config)?;
    }
    Ok(out)
}

fn median_time<F>(cfg: &TileConfig, measure: &mut F) -> std::result::Result<f64, String>
where
    F: FnMut(&TileConfig) -> std::result::Result<f64, String>,
{
    measure(cfg)?;
    let mut runs = [measure(cfg)?, measure(cfg)?, measure(cfg)?];
    if runs.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(format!("invalid timing for {cfg}: {runs:?}"));
    }
    runs.sort_by(f64::total_cmp);
    Ok(runs[1])
}
