//! Python bindings: flat `float` lists in, flat lists out, dimension 0
//! varying fastest.

use mgrefactor::autotune::{self, DeviceModel, Kernel};
use mgrefactor::parallel::{cooperative_decompose, Scheme};
use mgrefactor::pipeline::{self, codec_by_name};
use mgrefactor::refactor::recompose_values;
use mgrefactor::{RefactoredData, TensorGrid, TileConfig};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

create_exception!(mgrefactor_py, MgrefactorError, PyValueError);

fn err(e: mgrefactor::Error) -> PyErr {
    MgrefactorError::new_err(format!("{}: {e}", e.kind()))
}

fn grid(values: Vec<f64>, shape: Vec<usize>, coords: Option<Vec<Vec<f64>>>) -> PyResult<TensorGrid<f64>> {
    match coords {
        Some(c) => TensorGrid::new(shape, c, values),
        None => TensorGrid::uniform(shape, values),
    }
    .map_err(err)
}

/// Refactored grid: class 0 holds the coarsest nodal values, class l the
/// coefficients added at level l.
#[pyclass(name = "Refactored", frozen)]
pub struct PyRefactored {
    inner: RefactoredData<f64>,
}

#[pymethods]
impl PyRefactored {
    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    #[getter]
    fn coords(&self) -> Vec<Vec<f64>> {
        self.inner.coords().to_vec()
    }

    #[getter]
    fn class_sizes(&self) -> Vec<usize> {
        self.inner.classes().iter().map(Vec::len).collect()
    }

    fn class_values(&self, k: usize) -> PyResult<Vec<f64>> {
        self.inner
            .class(k)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| MgrefactorError::new_err(format!("MissingClass: class {k} is not stored")))
    }

    fn __repr__(&self) -> String {
        format!(
            "Refactored(shape={:?}, levels={}, classes={})",
            self.inner.shape(),
            self.inner.levels(),
            self.inner.classes_available()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (values, shape, coords=None, levels=None, workers=1, scheme="block"))]
fn decompose(
    values: Vec<f64>,
    shape: Vec<usize>,
    coords: Option<Vec<Vec<f64>>>,
    levels: Option<usize>,
    workers: usize,
    scheme: &str,
) -> PyResult<PyRefactored> {
    let g = grid(values, shape, coords)?;
    let inner = if workers > 1 {
        let scheme: Scheme = scheme.parse().map_err(MgrefactorError::new_err)?;
        if levels.is_some() {
            return Err(MgrefactorError::new_err(
                "InvalidArgument: levels cannot be capped with several workers",
            ));
        }
        cooperative_decompose(&g, workers, scheme).map_err(err)?.0
    } else {
        mgrefactor::decompose(&g, levels).map_err(err)?
    };
    Ok(PyRefactored { inner })
}

/// Reconstructs from classes `0..=classes` (all when omitted).
#[pyfunction]
#[pyo3(signature = (data, classes=None))]
fn recompose(data: &PyRefactored, classes: Option<usize>) -> PyResult<Vec<f64>> {
    recompose_values(&data.inner, classes).map_err(err)
}

#[pyfunction]
fn write(data: &PyRefactored, path: &str) -> PyResult<u64> {
    pipeline::write_refactored(&data.inner, path).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (path, classes=None))]
fn read(path: &str, classes: Option<usize>) -> PyResult<PyRefactored> {
    let inner = pipeline::read_refactored::<f64>(path, classes).map_err(err)?;
    Ok(PyRefactored { inner })
}

/// Returns `(container bytes, stats dict)`.
#[pyfunction]
#[pyo3(signature = (values, shape, eb, coords=None, codec="deflate"))]
fn compress<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    shape: Vec<usize>,
    eb: f64,
    coords: Option<Vec<Vec<f64>>>,
    codec: &str,
) -> PyResult<(Bound<'py, PyBytes>, Bound<'py, PyDict>)> {
    let g = grid(values, shape, coords)?;
    let codec = codec_by_name(codec).map_err(err)?;
    let c = pipeline::compress(&g, eb, codec.as_ref()).map_err(err)?;
    let stats = PyDict::new(py);
    stats.set_item("eb", c.stats.eb)?;
    stats.set_item("max_abs_error", c.stats.max_abs_error)?;
    stats.set_item("codec", &c.stats.codec)?;
    stats.set_item("refinements", c.stats.refinements)?;
    stats.set_item("original_bytes", c.stats.original_bytes)?;
    stats.set_item("compressed_bytes", c.stats.compressed_bytes)?;
    stats.set_item("ratio", c.stats.ratio)?;
    Ok((PyBytes::new(py, &c.bytes), stats))
}

/// Returns `(values, shape, max_abs_error)`.
#[pyfunction]
fn decompress(data: &[u8]) -> PyResult<(Vec<f64>, Vec<usize>, f64)> {
    let (g, rep) = pipeline::decompress::<f64>(data).map_err(err)?;
    let shape = g.shape().to_vec();
    Ok((g.into_values(), shape, rep.max_abs_error))
}

fn kernel(name: &str) -> PyResult<Kernel> {
    name.parse().map_err(|e: String| MgrefactorError::new_err(e))
}

fn device(elem_bytes: usize, transaction_bytes: usize, peak_bw: f64) -> PyResult<DeviceModel> {
    DeviceModel::new(transaction_bytes, peak_bw, elem_bytes).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (kernel_name, tile, n, elem_bytes=8, transaction_bytes=32, peak_bw=900e9))]
fn model_time(
    kernel_name: &str,
    tile: (usize, usize, usize),
    n: usize,
    elem_bytes: usize,
    transaction_bytes: usize,
    peak_bw: f64,
) -> PyResult<f64> {
    let cfg = TileConfig::new(tile.0, tile.1, tile.2).map_err(err)?;
    let dev = device(elem_bytes, transaction_bytes, peak_bw)?;
    Ok(autotune::model_time(kernel(kernel_name)?, &cfg, n, &dev))
}

type Ranked = Vec<((usize, usize, usize), f64, usize)>;

/// `[(tile, predicted seconds, rank)]`, fastest first. Defaults to the seven
/// standard tile shapes.
#[pyfunction]
#[pyo3(signature = (kernel_name, n, tiles=None, elem_bytes=8, transaction_bytes=32, peak_bw=900e9))]
fn rank_configs(
    kernel_name: &str,
    n: usize,
    tiles: Option<Vec<(usize, usize, usize)>>,
    elem_bytes: usize,
    transaction_bytes: usize,
    peak_bw: f64,
) -> PyResult<Ranked> {
    let candidates = match tiles {
        Some(t) => t
            .into_iter()
            .map(|(x, y, z)| TileConfig::new(x, y, z).map_err(err))
            .collect::<PyResult<Vec<_>>>()?,
        None => TileConfig::standard_candidates(),
    };
    let dev = device(elem_bytes, transaction_bytes, peak_bw)?;
    let ranking = autotune::rank_configs(kernel(kernel_name)?, &candidates, n, &dev).map_err(err)?;
    Ok(ranking
        .entries
        .iter()
        .map(|e| ((e.config.bx, e.config.by, e.config.bz), e.predicted_secs, e.rank))
        .collect())
}

/// Adds the bindings to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRefactored>()?;
    m.add("MgrefactorError", m.py().get_type::<MgrefactorError>())?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(recompose, m)?)?;
    m.add_function(wrap_pyfunction!(write, m)?)?;
    m.add_function(wrap_pyfunction!(read, m)?)?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(decompress, m)?)?;
    m.add_function(wrap_pyfunction!(model_time, m)?)?;
    m.add_function(wrap_pyfunction!(rank_configs, m)?)?;
    Ok(())
}

#[pymodule]
fn mgrefactor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
