//! Dense reference implementations used as test oracles. Nothing here calls
//! into the library's operators; hierarchy, hat functions, mass matrices and
//! projections are rebuilt from first principles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};

pub type Matrix = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

/// Strictly increasing coordinates with random gaps in [0.2, 1.8].
pub fn random_coords(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let v = x;
            x += rng.gen_range(0.2..1.8);
            v
        })
        .collect()
}

pub fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Nested node lists per level: keep even positions and the last node.
pub fn level_indices(n: usize, levels: usize) -> Vec<Vec<usize>> {
    let mut lists = vec![(0..n).collect::<Vec<usize>>()];
    for _ in 0..levels {
        let prev = lists.last().unwrap();
        let mut next: Vec<usize> = prev.iter().step_by(2).copied().collect();
        if next.last() != prev.last() {
            next.push(*prev.last().unwrap());
        }
        lists.push(next);
    }
    lists.reverse();
    lists
}

pub fn default_levels(shape: &[usize]) -> usize {
    let m = shape.iter().copied().filter(|&n| n >= 3).min().unwrap();
    ((m - 1) as f64).log2().floor() as usize
}

/// Value at `x` of the hat function of node `j` on the nodes `xs`.
pub fn hat(xs: &[f64], j: usize, x: f64) -> f64 {
    if j > 0 && x >= xs[j - 1] && x <= xs[j] {
        return (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    }
    if j + 1 < xs.len() && x >= xs[j] && x <= xs[j + 1] {
        return (xs[j + 1] - x) / (xs[j + 1] - xs[j]);
    }
    if x == xs[j] {
        1.0
    } else {
        0.0
    }
}

/// Six times the mass matrix of the hats on `xs`, integrated with
/// two-point Gauss quadrature per interval (exact for products of hats).
pub fn dense_mass(xs: &[f64]) -> Matrix {
    let n = xs.len();
    let mut m = vec![vec![0.0; n]; n];
    let g = 0.5 / 3f64.sqrt();
    for k in 0..n - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        let h = b - a;
        for t in [0.5 - g, 0.5 + g] {
            let x = a + t * h;
            for i in [k, k + 1] {
                for j in [k, k + 1] {
                    m[i][j] += 6.0 * 0.5 * h * hat(xs, i, x) * hat(xs, j, x);
                }
            }
        }
    }
    m
}

/// `P[i][j]`: coarse hat `j` evaluated at fine node `i`.
pub fn prolongation(fine: &[f64], coarse: &[f64]) -> Matrix {
    fine.iter()
        .map(|&x| (0..coarse.len()).map(|j| hat(coarse, j, x)).collect())
        .collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Matrix = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Applies `a` (rows × shape[dim]) along `dim` of a dimension-0-fastest tensor.
pub fn apply_along(a: &Matrix, values: &[f64], shape: &[usize], dim: usize) -> (Vec<f64>, Vec<usize>) {
    let mut out_shape = shape.to_vec();
    out_shape[dim] = a.len();
    let inner: usize = shape[..dim].iter().product();
    let outer: usize = shape[dim + 1..].iter().product();
    let (n, m) = (shape[dim], a.len());
    let mut out = vec![0.0; inner * m * outer];
    for o in 0..outer {
        for i in 0..inner {
            for r in 0..m {
                let mut s = 0.0;
                for k in 0..n {
                    s += a[r][k] * values[i + inner * (k + n * o)];
                }
                out[i + inner * (r + m * o)] = s;
            }
        }
    }
    (out, out_shape)
}

/// Dense L2 projection operator from functions on `fine` onto the hats on
/// `coarse` (nodal values out).
pub fn projector(fine: &[f64], coarse: &[f64]) -> Matrix {
    let m = dense_mass(fine);
    let p = prolongation(fine, coarse);
    let pt = transpose(&p);
    let gram = matmul(&pt, &matmul(&m, &p));
    let rhs = matmul(&pt, &m);
    // solve gram · X = rhs column by column
    let cols: Vec<Vec<f64>> = (0..fine.len())
        .map(|j| solve(&gram, &rhs.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    (0..coarse.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

pub struct Reference {
    pub levels: usize,
    /// Projection of the data onto each level, nodal values in natural order.
    pub projections: Vec<Vec<f64>>,
    pub classes: Vec<Vec<f64>>,
}

/// Classes of the multilevel decomposition computed directly: class `l` is
/// the projection onto level `l` minus the interpolation of the projection
/// onto level `l - 1`, on the nodes new at level `l`, grouped by node type
/// (bitmask of non-coarse dimensions, ascending) then natural order.
pub fn reference_decomposition(shape: &[usize], coords: &[Vec<f64>], values: &[f64]) -> Reference {
    let nd = shape.len();
    let levels = default_levels(shape);
    let idx: Vec<Vec<Vec<usize>>> = shape.iter().map(|&n| level_indices(n, levels)).collect();
    let lc = |d: usize, l: usize| -> Vec<f64> { idx[d][l].iter().map(|&i| coords[d][i]).collect() };
    let mut projections = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let (mut v, mut s) = (values.to_vec(), shape.to_vec());
        for d in 0..nd {
            let q = projector(&coords[d], &lc(d, l));
            (v, s) = apply_along(&q, &v, &s, d);
        }
        projections.push(v);
    }
    let mut classes = vec![projections[0].clone()];
    for l in 1..=levels {
        // interpolate Q_l u from its own values on the coarser nodes
        let (mut up, mut s) = (projections[l].clone(), idx.iter().map(|i| i[l].len()).collect::<Vec<_>>());
        for d in 0..nd {
            let pick: Matrix = idx[d][l - 1]
                .iter()
                .map(|g| idx[d][l].iter().map(|h| if h == g { 1.0 } else { 0.0 }).collect())
                .collect();
            (up, s) = apply_along(&pick, &up, &s, d);
        }
        for d in 0..nd {
            let p = prolongation(&lc(d, l), &lc(d, l - 1));
            (up, s) = apply_along(&p, &up, &s, d);
        }
        let lshape: Vec<usize> = (0..nd).map(|d| idx[d][l].len()).collect();
        let coarse_flags: Vec<Vec<bool>> = (0..nd)
            .map(|d| idx[d][l].iter().map(|g| idx[d][l - 1].contains(g)).collect())
            .collect();
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        let total: usize = lshape.iter().product();
        for lin in 0..total {
            let mut rem = lin;
            let mut mask = 0;
            for d in 0..nd {
                let p = rem % lshape[d];
                rem /= lshape[d];
                if !coarse_flags[d][p] {
                    mask |= 1 << d;
                }
            }
            if mask != 0 {
                entries.push((mask, lin, projections[l][lin] - up[lin]));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        classes.push(entries.into_iter().map(|e| e.2).collect());
        assert_eq!(s, lshape);
    }
    Reference {
        levels,
        projections,
        classes,
    }
}

/// Mass-weighted squared norm with the dense per-dimension mass matrices
/// (scaled back by 6 per dimension).
pub fn weighted_norm_sq(shape: &[usize], coords: &[Vec<f64>], v: &[f64]) -> f64 {
    let (mut mv, mut s) = (v.to_vec(), shape.to_vec());
    for d in 0..shape.len() {
        let m: Matrix = dense_mass(&coords[d]).into_iter().map(|r| r.into_iter().map(|x| x / 6.0).collect()).collect();
        (mv, s) = apply_along(&m, &mv, &s, d);
    }
    mv.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn range(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Smooth reaction-diffusion-like field on `[0,1]^3`: a sum of Gaussian
/// spots with a soft ring pattern, values roughly in `[0, 1]`.
pub fn spots_field(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let spots: Vec<([f64; 3], f64, f64)> = (0..12)
        .map(|_| {
            let c = [r.gen_range(0.1..0.9), r.gen_range(0.1..0.9), r.gen_range(0.1..0.9)];
            (c, r.gen_range(0.05..0.15), r.gen_range(0.3..1.0))
        })
        .collect();
    let x = uniform(n);
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = [x[i], x[j], x[k]];
                let v: f64 = spots
                    .iter()
                    .map(|(c, s, a)| {
                        let d2: f64 = (0..3).map(|d| (p[d] - c[d]).powi(2)).sum();
                        a * (-d2 / (2.0 * s * s)).exp() * (1.0 + 0.2 * (d2.sqrt() / s * 3.0).cos())
                    })
                    .sum();
                out.push(v);
            }
        }
    }
    out
}
