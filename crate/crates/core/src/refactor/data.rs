use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{mass_weighted_dot, GridHierarchy, TensorGrid};
use crate::real::{Precision, Real};

/// Ordered coefficient classes of a refactored grid.
///
/// `classes[0]` holds the nodal values of the coarsest grid `N_0` in
/// natural order; `classes[l]` (`l = 1..=L`) holds the coefficients of
/// `N_l \ N_{l-1}` in coarse-first layout order (grouped by node type, then
/// natural order). A partially loaded container keeps a prefix of classes.
#[derive(Clone, Debug, PartialEq)]
pub struct RefactoredData<T> {
    pub(crate) shape: Vec<usize>,
    pub(crate) coords: Vec<Vec<f64>>,
    pub(crate) levels: usize,
    pub(crate) fixed_axes: bool,
    pub(crate) classes: Vec<Vec<T>>,
}

impl<T: Real> RefactoredData<T> {
    /// Assembles a container from its parts, checking class sizes against
    /// the hierarchy. `classes` may be a prefix of the `L + 1` classes.
    pub fn from_parts(
        shape: Vec<usize>,
        coords: Vec<Vec<f64>>,
        levels: usize,
        classes: Vec<Vec<T>>,
    ) -> Result<Self> {
        let data = Self {
            shape,
            coords,
            levels,
            fixed_axes: false,
            classes,
        };
        let h = data.hierarchy()?;
        if h.levels() != levels {
            return Err(Error::InvalidLevel {
                level: levels,
                expected: format!("at most {} levels for shape {:?}", h.levels(), data.shape),
            });
        }
        if data.classes.len() > levels + 1 {
            return Err(Error::Shape(format!(
                "{} classes for {levels} levels",
                data.classes.len()
            )));
        }
        for (k, c) in data.classes.iter().enumerate() {
            let expected = data.class_len(k);
            if c.len() != expected {
                return Err(Error::Shape(format!(
                    "class {k} holds {} values, expected {expected}",
                    c.len()
                )));
            }
        }
        Ok(data)
    }

    pub fn hierarchy(&self) -> Result<GridHierarchy> {
        if self.fixed_axes {
            GridHierarchy::with_fixed_axes(&self.shape, &self.coords, Some(self.levels))
        } else {
            GridHierarchy::new(&self.shape, &self.coords, Some(self.levels))
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn ndims(&self) -> usize {
        self.shape.len()
    }

    /// Number of coefficient levels `L` (classes `0..=L`).
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// Number of classes held, counting class 0.
    pub fn classes_available(&self) -> usize {
        self.classes.len()
    }

    pub fn is_complete(&self) -> bool {
        self.classes.len() == self.levels + 1
    }

    pub fn class(&self, k: usize) -> Option<&[T]> {
        self.classes.get(k).map(Vec::as_slice)
    }

    pub fn classes(&self) -> &[Vec<T>] {
        &self.classes
    }

    /// Mutable access to a stored class (e.g. for quantization).
    pub fn class_mut(&mut self, k: usize) -> Option<&mut [T]> {
        self.classes.get_mut(k).map(Vec::as_mut_slice)
    }

    /// Element count of class `k` implied by the geometry.
    pub fn class_len(&self, k: usize) -> usize {
        let level_len = |l: usize| -> usize {
            // a level's node count is the product of per-axis counts
            let h = self.hierarchy().expect("validated geometry");
            h.level_len(l)
        };
        if k == 0 {
            level_len(0)
        } else {
            level_len(k) - level_len(k - 1)
        }
    }

    pub fn total_elements(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Little-endian bytes of class `k`.
    pub fn class_bytes(&self, k: usize) -> Option<Vec<u8>> {
        self.classes.get(k).map(|c| {
            let mut out = Vec::with_capacity(c.len() * T::PRECISION.bytes());
            for &v in c {
                v.write_le(&mut out);
            }
            out
        })
    }

    /// CRC32 of class `k`'s little-endian bytes.
    pub fn checksum(&self, k: usize) -> Option<u32> {
        self.class_bytes(k).map(|b| crc32fast::hash(&b))
    }

    /// Keeps classes `0..=k` only.
    pub fn truncated(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.classes.truncate(k + 1);
        out
    }
}

/// Measured reconstruction errors against a reference field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub max_abs: f64,
    /// `max_abs` divided by the reference value range (`max_abs` itself
    /// for a constant reference).
    pub rel_linf: f64,
    /// Mass-weighted L2 norm of the difference.
    pub weighted_l2: f64,
}

impl ErrorMetrics {
    pub fn between<T: Real>(reference: &TensorGrid<T>, approx: &[T]) -> Result<Self> {
        if approx.len() != reference.len() {
            return Err(Error::Shape(format!(
                "{} values compared against a grid of {}",
                approx.len(),
                reference.len()
            )));
        }
        let diff: Vec<f64> = reference
            .values()
            .iter()
            .zip(approx)
            .map(|(a, b)| b.to_f64() - a.to_f64())
            .collect();
        let max_abs = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let range = reference.value_range();
        let rel_linf = if range > 0.0 { max_abs / range } else { max_abs };
        let weighted_l2 = mass_weighted_dot(reference.shape(), reference.coords(), &diff, &diff)
            .max(0.0)
            .sqrt();
        Ok(Self {
            max_abs,
            rel_linf,
            weighted_l2,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionReport {
    /// Coefficient classes used on top of class 0.
    pub classes_used: usize,
    pub errors: Option<ErrorMetrics>,
    pub elapsed_secs: f64,
}
