use crate::kernels::MassMatrix;
use crate::real::Real;

use super::ndindex::strides;
use super::tensor::TensorGrid;

/// L2 inner product of the piecewise multilinear functions with nodal
/// values `u` and `v`: `u·(M_0 ⊗ … ⊗ M_{d-1})·v / 6^d`, accumulated in f64.
pub fn mass_weighted_dot<T: Real>(shape: &[usize], coords: &[Vec<f64>], u: &[T], v: &[T]) -> f64 {
    let mut w: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
    let st = strides(shape);
    let total = w.len();
    for (d, &n) in shape.iter().enumerate() {
        let m = MassMatrix::from_coords(&coords[d]);
        let s = st[d];
        let mut fiber = vec![0.0; n];
        for base in 0..total {
            // fibers along d start where the d-index is zero
            if !(base / s).is_multiple_of(n) {
                continue;
            }
            for (i, f) in fiber.iter_mut().enumerate() {
                *f = w[base + i * s];
            }
            for (i, r) in m.apply(&fiber).into_iter().enumerate() {
                w[base + i * s] = r;
            }
        }
    }
    let scale = 6f64.powi(shape.len() as i32);
    u.iter().zip(&w).map(|(a, b)| a.to_f64() * b).sum::<f64>() / scale
}

/// Square root of the mass-weighted quadratic form of the grid values.
pub fn weighted_l2_norm<T: Real>(grid: &TensorGrid<T>) -> f64 {
    mass_weighted_dot(grid.shape(), grid.coords(), grid.values(), grid.values())
        .max(0.0)
        .sqrt()
}
