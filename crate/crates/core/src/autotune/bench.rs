use std::time::Instant;

use crate::error::Result;
use crate::grid::{uniform_coords, GridHierarchy};
use crate::kernels::{
    compute_coefficients, masstrans_apply, masstrans_output_region, solve_correction, NdBlock,
    OperatorSet, TileConfig,
};
use crate::real::Real;

use super::model::Kernel;

/// Finest-level workload of an `n³` grid for timing single kernel launches.
pub struct KernelBench<T> {
    ops: OperatorSet,
    level: usize,
    data: NdBlock<T>,
    load: NdBlock<T>,
}

impl<T: Real> KernelBench<T> {
    pub fn new(n: usize) -> Result<Self> {
        let shape = [n, n, n];
        let coords: Vec<Vec<f64>> = shape.iter().map(|&m| uniform_coords(m)).collect();
        let h = GridHierarchy::new(&shape, &coords, Some(1))?;
        let ops = OperatorSet::new(&h)?;
        let level = h.levels();
        let values: Vec<T> = (0..n * n * n)
            .map(|i| T::from_f64((i as f64 * 0.618).sin()))
            .collect();
        let data = NdBlock::from_vec(shape.to_vec(), values)?;
        let lops = ops.level(level);
        let out = masstrans_output_region(&data.region(), &lops[0]);
        let load = masstrans_apply(&data, lops, 0, true, &out, &TileConfig::default().tiling(3))?;
        Ok(Self {
            ops,
            level,
            data,
            load,
        })
    }

    /// Runs `kernel` once with tile shape `cfg`, returning elapsed seconds.
    pub fn run(&self, kernel: Kernel, cfg: &TileConfig) -> Result<f64> {
        let tiling = cfg.tiling(3);
        let lops = self.ops.level(self.level);
        match kernel {
            Kernel::Gpk => {
                let mut block = self.data.clone();
                let region = block.region();
                let t = Instant::now();
                compute_coefficients(&mut block, lops, &region, &tiling)?;
                Ok(t.elapsed().as_secs_f64())
            }
            Kernel::Lpk => {
                let out = masstrans_output_region(&self.data.region(), &lops[0]);
                let t = Instant::now();
                let r = masstrans_apply(&self.data, lops, 0, true, &out, &tiling)?;
                let secs = t.elapsed().as_secs_f64();
                drop(r);
                Ok(secs)
            }
            Kernel::Ipk => {
                let mut block = self.load.clone();
                let t = Instant::now();
                solve_correction(&mut block, 0, &lops[0], &tiling)?;
                Ok(t.elapsed().as_secs_f64())
            }
        }
    }
}

/// One timed launch of `kernel` on a fresh `n³` double-precision grid.
pub fn measure_kernel(kernel: Kernel, cfg: &TileConfig, n: usize) -> Result<f64> {
    KernelBench::<f64>::new(n)?.run(kernel, cfg)
}
