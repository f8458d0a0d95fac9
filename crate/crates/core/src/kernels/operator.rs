use crate::error::{Error, Result};
use crate::grid::GridHierarchy;

/// Symmetric tridiagonal mass matrix of piecewise linear hat functions,
/// scaled so that the diagonal is `2(h_{i-1} + h_i)` and the off-diagonal
/// `h_i` (spacings beyond either end count as zero).
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl MassMatrix {
    pub fn from_coords(coords: &[f64]) -> Self {
        let n = coords.len();
        let h: Vec<f64> = coords.windows(2).map(|w| w[1] - w[0]).collect();
        let diag = (0..n)
            .map(|i| {
                let left = if i > 0 { h[i - 1] } else { 0.0 };
                let right = if i + 1 < n { h[i] } else { 0.0 };
                2.0 * (left + right)
            })
            .collect();
        Self { diag, off: h }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

/// LU factors of a tridiagonal mass matrix in the form consumed by the
/// forward and backward substitution passes:
///
/// * forward: `v_i += fwd[i] · v_{i-1}`
/// * backward: `v_i = (v_i - upper[i] · v_{i+1}) · inv_pivot[i]`
#[derive(Clone, Debug, PartialEq)]
pub struct ThomasFactors {
    pub fwd: Vec<f64>,
    pub inv_pivot: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ThomasFactors {
    pub fn new(m: &MassMatrix) -> Result<Self> {
        let n = m.len();
        let mut fwd = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = m.diag[0];
        for i in 0..n {
            if i > 0 {
                let mult = m.off[i - 1] / pivot;
                pivot = m.diag[i] - mult * m.off[i - 1];
                fwd[i] = -mult;
            }
            if !(pivot.is_finite() && pivot != 0.0) {
                return Err(Error::SingularSystem(i));
            }
            inv_pivot[i] = 1.0 / pivot;
        }
        Ok(Self {
            fwd,
            inv_pivot,
            upper: m.off.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// In-place solve of one right-hand side.
    pub fn solve(&self, v: &mut [f64]) {
        let n = v.len();
        for i in 1..n {
            v[i] += self.fwd[i] * v[i - 1];
        }
        v[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            v[i] = (v[i] - self.upper[i] * v[i + 1]) * self.inv_pivot[i];
        }
    }
}

/// Role of one fine position along a dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeKind {
    /// Survives to the coarser level with the given coarse index.
    Coarse(usize),
    /// Lies between coarse indices `left` and `left + 1`; `weight` is the
    /// linear interpolation weight of the right neighbour.
    Between { left: usize, weight: f64 },
}

/// Per-(level, dimension) operator data: fine mass matrix, transfer
/// structure and the factored coarse mass matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalOperator {
    level: usize,
    dim: usize,
    fine_coords: Vec<f64>,
    fine_mass: MassMatrix,
    coarse_positions: Vec<usize>,
    kinds: Vec<NodeKind>,
    coarse_mass: MassMatrix,
    thomas: ThomasFactors,
}

impl TridiagonalOperator {
    pub fn new(h: &GridHierarchy, level: usize, dim: usize) -> Result<Self> {
        if level == 0 || level > h.levels() {
            return Err(Error::InvalidLevel {
                level,
                expected: format!("1..={}", h.levels()),
            });
        }
        let fine_coords = h.level_coords(dim, level);
        let coarse_coords = h.level_coords(dim, level - 1);
        let coarse_positions = h.coarse_positions(dim, level);
        let mut kinds = Vec::with_capacity(fine_coords.len());
        let mut next = 0;
        for (p, &x) in fine_coords.iter().enumerate() {
            if next < coarse_positions.len() && coarse_positions[next] == p {
                kinds.push(NodeKind::Coarse(next));
                next += 1;
            } else {
                let left = next - 1;
                let (xl, xr) = (coarse_coords[left], coarse_coords[left + 1]);
                kinds.push(NodeKind::Between {
                    left,
                    weight: (x - xl) / (xr - xl),
                });
            }
        }
        let fine_mass = MassMatrix::from_coords(&fine_coords);
        let coarse_mass = MassMatrix::from_coords(&coarse_coords);
        let thomas = ThomasFactors::new(&coarse_mass)?;
        Ok(Self {
            level,
            dim,
            fine_coords,
            fine_mass,
            coarse_positions,
            kinds,
            coarse_mass,
            thomas,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fine_len(&self) -> usize {
        self.fine_coords.len()
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_positions.len()
    }

    pub fn fine_coords(&self) -> &[f64] {
        &self.fine_coords
    }

    pub fn fine_mass(&self) -> &MassMatrix {
        &self.fine_mass
    }

    pub fn coarse_mass(&self) -> &MassMatrix {
        &self.coarse_mass
    }

    pub fn thomas(&self) -> &ThomasFactors {
        &self.thomas
    }

    pub fn coarse_positions(&self) -> &[usize] {
        &self.coarse_positions
    }

    pub fn kind(&self, fine_pos: usize) -> NodeKind {
        self.kinds[fine_pos]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn is_coarse(&self, fine_pos: usize) -> bool {
        matches!(self.kinds[fine_pos], NodeKind::Coarse(_))
    }

    /// Nonzeros `(fine position, weight)` of transfer row `coarse`: the value
    /// of coarse hat function `coarse` at each fine node.
    pub fn transfer_row(&self, coarse: usize) -> Vec<(usize, f64)> {
        let p = self.coarse_positions[coarse];
        let mut row = Vec::with_capacity(3);
        if p > 0 {
            if let NodeKind::Between { weight, .. } = self.kinds[p - 1] {
                row.push((p - 1, weight));
            }
        }
        row.push((p, 1.0));
        if p + 1 < self.kinds.len() {
            if let NodeKind::Between { weight, .. } = self.kinds[p + 1] {
                row.push((p + 1, 1.0 - weight));
            }
        }
        row
    }

    /// Coarse indices whose fine positions fall in `[fine_lo, fine_hi)`.
    pub fn coarse_range(&self, fine_lo: usize, fine_hi: usize) -> (usize, usize) {
        let lo = self.coarse_positions.partition_point(|&p| p < fine_lo);
        let hi = self.coarse_positions.partition_point(|&p| p < fine_hi);
        (lo, hi)
    }

    /// Merged mass-transfer weights of coarse row `coarse` as
    /// `(fine position, weight)` pairs over positions `p-2..=p+2`.
    pub fn masstrans_row(&self, coarse: usize) -> Vec<(usize, f64)> {
        let n = self.fine_len();
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(5);
        for (j, r) in self.transfer_row(coarse) {
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(n - 1);
            for k in lo..=hi {
                let m = if k == j {
                    self.fine_mass.diag[j]
                } else {
                    self.fine_mass.off[j.min(k)]
                };
                match acc.iter_mut().find(|(p, _)| *p == k) {
                    Some((_, w)) => *w += r * m,
                    None => acc.push((k, r * m)),
                }
            }
        }
        acc.sort_by_key(|&(p, _)| p);
        acc
    }
}

/// Operators for every level `1..=L` and dimension of a hierarchy, built
/// once and shared by decomposition and recomposition.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    per_level: Vec<Vec<TridiagonalOperator>>,
}

impl OperatorSet {
    pub fn new(h: &GridHierarchy) -> Result<Self> {
        let per_level = (1..=h.levels())
            .map(|l| {
                (0..h.ndims())
                    .map(|d| TridiagonalOperator::new(h, l, d))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { per_level })
    }

    /// Operators of level `level` (1-based), one per dimension.
    pub fn level(&self, level: usize) -> &[TridiagonalOperator] {
        &self.per_level[level - 1]
    }

    pub fn levels(&self) -> usize {
        self.per_level.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_coords;

    fn dense(m: &MassMatrix) -> Vec<Vec<f64>> {
        let n = m.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = m.diag[i];
            if i + 1 < n {
                a[i][i + 1] = m.off[i];
                a[i + 1][i] = m.off[i];
            }
        }
        a
    }

    #[test]
    fn mass_entries() {
        let m = MassMatrix::from_coords(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.diag, vec![2.0, 4.0, 4.0, 4.0, 2.0]);
        assert_eq!(m.off, vec![1.0; 4]);
        let m = MassMatrix::from_coords(&[0.0, 0.5, 2.0]);
        assert_eq!(m.diag, vec![1.0, 4.0, 3.0]);
    }

    #[test]
    fn thomas_factors_reproduce_matrix() {
        let coords: Vec<f64> = (0..65).map(|i| (i as f64).powf(1.3) + 0.1 * (i as f64).sin()).collect();
        let m = MassMatrix::from_coords(&coords);
        let t = ThomasFactors::new(&m).unwrap();
        // L has unit diagonal and subdiagonal -fwd; U has pivots and upper.
        let n = m.len();
        let a = dense(&m);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    let l = if i == k {
                        1.0
                    } else if k + 1 == i {
                        -t.fwd[i]
                    } else {
                        0.0
                    };
                    let u = if k == j {
                        1.0 / t.inv_pivot[k]
                    } else if j == k + 1 {
                        t.upper[k]
                    } else {
                        0.0
                    };
                    s += l * u;
                }
                let scale = a[i][i].abs();
                assert!((s - a[i][j]).abs() <= 1e-13 * scale, "({i},{j}) {s} vs {}", a[i][j]);
            }
        }
    }

    #[test]
    fn uniform_transfer_rows() {
        let coords = vec![uniform_coords(9)];
        let h = GridHierarchy::new(&[9], &coords, None).unwrap();
        let op = TridiagonalOperator::new(&h, 3, 0).unwrap();
        assert_eq!(op.transfer_row(0), vec![(0, 1.0), (1, 0.5)]);
        assert_eq!(op.transfer_row(2), vec![(3, 0.5), (4, 1.0), (5, 0.5)]);
        assert_eq!(op.transfer_row(4), vec![(7, 0.5), (8, 1.0)]);
        assert_eq!(op.coarse_range(3, 7), (2, 4));
    }

    #[test]
    fn non_dyadic_tail_has_no_between_node() {
        let coords = vec![uniform_coords(6)];
        let h = GridHierarchy::new(&[6], &coords, None).unwrap();
        let op = TridiagonalOperator::new(&h, 2, 0).unwrap();
        assert_eq!(op.kind(5), NodeKind::Coarse(3));
        assert_eq!(op.kind(4), NodeKind::Coarse(2));
        assert_eq!(op.transfer_row(3), vec![(5, 1.0)]);
        let row = op.transfer_row(2);
        assert_eq!(row.len(), 2);
        assert_eq!((row[0].0, row[1]), (3, (4, 1.0)));
        assert!((row[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_mass_is_reported() {
        let m = MassMatrix {
            diag: vec![1.0, 1.0],
            off: vec![1.0],
        };
        assert!(matches!(ThomasFactors::new(&m), Err(Error::SingularSystem(1))));
    }
}
