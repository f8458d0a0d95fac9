use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mgrefactor::autotune::{
    autotune_cached, measure_kernel, rank_configs, DeviceModel, Kernel, TuneCache, TuneStatus,
};
use mgrefactor::grid::GridHierarchy;
use mgrefactor::parallel::{cooperative_decompose_with, CoopOptions, Scheme};
use mgrefactor::pipeline::{
    codec_by_name, compress, decompress_any, read_header, read_refactored, write_refactored, AnyGrid,
};
use mgrefactor::refactor::{recompose_values, PassCounters};
use mgrefactor::{decompose, Precision, Real, RefactoredData, TensorGrid, TileConfig};
use serde_json::json;

// stdout may be a closed pipe (`| head`); that is not an error
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// Multigrid refactoring of raw little-endian grids.
#[derive(Parser)]
#[command(name = "mgrefactor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refactor a raw grid into an MGRF file.
    Decompose {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Cap on the number of levels.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// block or shifted_round_robin
        #[arg(long, default_value = "block")]
        scheme: Scheme,
    },
    /// Reconstruct raw values from the first k+1 classes of an MGRF file.
    Recompose {
        input: PathBuf,
        output: PathBuf,
        /// Use classes 0..=k (all by default).
        #[arg(long)]
        classes: Option<usize>,
    },
    /// Print header, class sizes and predicted pass counters as JSON.
    Info { input: PathBuf },
    /// Recompose an MGRF file and check it against its classes or an original.
    Verify {
        input: PathBuf,
        /// Raw original values to compare the full reconstruction with.
        #[arg(long)]
        original: Option<PathBuf>,
    },
    /// Time the three kernels and print the model rankings.
    Bench {
        /// Edge of the timed n³ workload.
        #[arg(long, default_value_t = 65)]
        n: usize,
        /// Edge of the modelled N³ grid.
        #[arg(long, default_value_t = 257)]
        model_n: usize,
        #[arg(long, default_value = "f64")]
        dtype: Precision,
        /// Measure the model's best candidates and cache the winner.
        #[arg(long)]
        autotune: bool,
        #[arg(long, default_value_t = 3)]
        top_k: usize,
    },
    /// Error-bounded compression of a raw grid.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Absolute max-abs error bound.
        #[arg(long, allow_negative_numbers = true)]
        eb: f64,
        /// Interpret --eb relative to the value range.
        #[arg(long)]
        relative: bool,
        /// null or deflate
        #[arg(long, default_value = "deflate")]
        codec: String,
    },
    /// Expand a compressed container back to raw values.
    Decompress { input: PathBuf, output: PathBuf },
}

#[derive(Args)]
struct GridArgs {
    /// Extents, dimension 0 first, e.g. 65x65x65.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value = "f64")]
    dtype: Precision,
    /// JSON file with one coordinate array per dimension (uniform on [0,1] if absent).
    #[arg(long)]
    coords: Option<PathBuf>,
}

struct Failure {
    kind: &'static str,
    msg: String,
}

impl Failure {
    fn new(kind: &'static str, msg: impl Into<String>) -> Self {
        Self { kind, msg: msg.into() }
    }
}

impl From<mgrefactor::Error> for Failure {
    fn from(e: mgrefactor::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new("Io", e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::new("InvalidArgument", e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            report(&Failure::new("Usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::FAILURE
        }
    }
}

fn report(f: &Failure) {
    eprintln!("error: kind={} msg={:?}", f.kind, f.msg);
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Decompose { input, output, grid, levels, workers, scheme } => {
            match grid.dtype {
                Precision::F32 => run_decompose::<f32>(&input, &output, &grid, levels, workers, scheme),
                Precision::F64 => run_decompose::<f64>(&input, &output, &grid, levels, workers, scheme),
            }
        }
        Command::Recompose { input, output, classes } => match read_header(&input)?.dtype {
            Precision::F32 => run_recompose::<f32>(&input, &output, classes),
            Precision::F64 => run_recompose::<f64>(&input, &output, classes),
        },
        Command::Info { input } => run_info(&input),
        Command::Verify { input, original } => match read_header(&input)?.dtype {
            Precision::F32 => run_verify::<f32>(&input, original.as_deref()),
            Precision::F64 => run_verify::<f64>(&input, original.as_deref()),
        },
        Command::Bench { n, model_n, dtype, autotune, top_k } => run_bench(n, model_n, dtype, autotune, top_k),
        Command::Compress { input, output, grid, eb, relative, codec } => {
            let codec = codec_by_name(&codec)?;
            let c = match grid.dtype {
                Precision::F32 => {
                    let g = load_grid::<f32>(&input, &grid)?;
                    compress(&g, bound(eb, relative, g.value_range()), codec.as_ref())?
                }
                Precision::F64 => {
                    let g = load_grid::<f64>(&input, &grid)?;
                    compress(&g, bound(eb, relative, g.value_range()), codec.as_ref())?
                }
            };
            std::fs::write(&output, &c.bytes)?;
            out!("{}", serde_json::to_string_pretty(&c.stats)?);
            Ok(())
        }
        Command::Decompress { input, output } => {
            let bytes = std::fs::read(&input)?;
            let (grid, rep) = decompress_any(&bytes)?;
            match grid {
                AnyGrid::F32(g) => write_raw(&output, g.values())?,
                AnyGrid::F64(g) => write_raw(&output, g.values())?,
            }
            out!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(())
        }
    }
}

fn bound(eb: f64, relative: bool, range: f64) -> f64 {
    if relative {
        eb * range
    } else {
        eb
    }
}

fn parse_shape(s: &str) -> CliResult<Vec<usize>> {
    s.split(['x', 'X', ','])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Failure::new("InvalidArgument", format!("bad shape {s:?}")))
        })
        .collect()
}

fn read_raw<T: Real>(path: &Path, expected: usize) -> CliResult<Vec<T>> {
    let bytes = std::fs::read(path)?;
    let width = T::PRECISION.bytes();
    if bytes.len() != expected * width {
        return Err(Failure::new(
            "ShapeError",
            format!(
                "{} holds {} bytes, expected {expected} {} values",
                path.display(),
                bytes.len(),
                T::PRECISION.name()
            ),
        ));
    }
    Ok(bytes.chunks_exact(width).map(T::read_le).collect())
}

fn write_raw<T: Real>(path: &Path, values: &[T]) -> CliResult<()> {
    let mut out = Vec::with_capacity(values.len() * T::PRECISION.bytes());
    for &v in values {
        v.write_le(&mut out);
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn load_grid<T: Real>(input: &Path, args: &GridArgs) -> CliResult<TensorGrid<T>> {
    let shape = parse_shape(&args.shape)?;
    let values = read_raw::<T>(input, shape.iter().product())?;
    let grid = match &args.coords {
        Some(p) => {
            let coords: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            TensorGrid::new(shape, coords, values)?
        }
        None => TensorGrid::uniform(shape, values)?,
    };
    Ok(grid)
}

fn class_sizes<T: Real>(r: &RefactoredData<T>) -> Vec<usize> {
    r.classes().iter().map(Vec::len).collect()
}

fn run_decompose<T: Real>(
    input: &Path,
    output: &Path,
    args: &GridArgs,
    levels: Option<usize>,
    workers: usize,
    scheme: Scheme,
) -> CliResult<()> {
    let grid = load_grid::<T>(input, args)?;
    let (data, comm) = if workers > 1 {
        let mut opts = CoopOptions::new(workers, scheme);
        opts.max_levels = levels;
        let (d, rep) = cooperative_decompose_with(&grid, &opts)?;
        (d, Some(rep))
    } else {
        (decompose(&grid, levels)?, None)
    };
    let bytes = write_refactored(&data, output)?;
    let mut stats = json!({
        "levels": data.levels(),
        "class_sizes": class_sizes(&data),
        "bytes": bytes,
        "workers": workers,
    });
    if let Some(rep) = comm {
        stats["comm"] = serde_json::to_value(&rep)?;
    }
    out!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

fn run_recompose<T: Real>(input: &Path, output: &Path, classes: Option<usize>) -> CliResult<()> {
    let data = read_refactored::<T>(input, classes)?;
    let values = recompose_values(&data, classes)?;
    write_raw(output, &values)?;
    out!(
        "wrote {} {} values from classes 0..={} of {}",
        values.len(),
        T::PRECISION.name(),
        classes.unwrap_or(data.levels()),
        data.levels()
    );
    Ok(())
}

fn run_info(input: &Path) -> CliResult<()> {
    let h = read_header(input)?;
    let hier = GridHierarchy::new(&h.shape, &h.coords, Some(h.levels))?;
    let classes: Vec<_> = h
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            json!({
                "class": k,
                "elements": c.byte_len as usize / h.dtype.bytes(),
                "bytes": c.byte_len,
                "offset": h.payload_offset(k),
                "crc32": format!("{:08x}", c.crc32),
            })
        })
        .collect();
    let passes = PassCounters::predicted(&hier);
    let info = json!({
        "version": h.version,
        "dtype": h.dtype.name(),
        "shape": h.shape,
        "levels": h.levels,
        "header_bytes": h.byte_len(),
        "total_bytes": h.total_len(),
        "classes": classes,
        "passes": passes,
        "passes_per_level": passes.levels.iter().map(|l| l.passes()).collect::<Vec<_>>(),
    });
    out!("{}", serde_json::to_string_pretty(&info)?);
    Ok(())
}

fn max_abs<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x.to_f64() - y.to_f64()).abs()))
}

fn value_range<T: Real>(v: &[T]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x.to_f64()), hi.max(x.to_f64()))
    });
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

fn run_verify<T: Real>(input: &Path, original: Option<&Path>) -> CliResult<()> {
    let data = read_refactored::<T>(input, None)?;
    let values = recompose_values(&data, None)?;
    let rel = match T::PRECISION {
        Precision::F32 => 1e-5,
        Precision::F64 => 1e-12,
    };
    let (against, err, range) = match original {
        Some(p) => {
            let orig = read_raw::<T>(p, values.len())?;
            ("original", max_abs(&values, &orig), value_range(&orig))
        }
        None => {
            // decompose the reconstruction again and compare coefficients
            let grid = TensorGrid::new(data.shape().to_vec(), data.coords().to_vec(), values.clone())?;
            let again = decompose(&grid, Some(data.levels()))?;
            let err = (0..=data.levels())
                .map(|k| max_abs(again.class(k).unwrap_or(&[]), data.class(k).unwrap_or(&[])))
                .fold(0.0, f64::max);
            ("classes", err, value_range(&values))
        }
    };
    let tolerance = rel * range;
    let ok = err <= tolerance;
    out!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "against": against,
            "max_abs": err,
            "tolerance": tolerance,
            "ok": ok,
        }))?
    );
    if ok {
        Ok(())
    } else {
        Err(Failure::new("VerifyFailed", format!("max-abs {err:e} exceeds {tolerance:e}")))
    }
}

fn run_bench(n: usize, model_n: usize, dtype: Precision, autotune: bool, top_k: usize) -> CliResult<()> {
    let candidates = TileConfig::standard_candidates();
    let dev = DeviceModel::new(32, 900e9, dtype.bytes())?;
    out!(
        "model: L={} bytes, S=32 bytes, N={model_n}; timed workload {n}^3 f64",
        dtype.bytes()
    );
    let cache = if autotune { Some(TuneCache::from_env()?) } else { None };
    for kernel in Kernel::ALL {
        let ranking = rank_configs(kernel, &candidates, model_n, &dev)?;
        let ranks: Vec<usize> = ranking.ranks_for(&candidates).into_iter().flatten().collect();
        out!("{kernel} ranks {ranks:?}");
        for cfg in &candidates {
            let e = ranking.entries.iter().find(|e| e.config == *cfg).expect("ranked");
            let mut runs = [0.0; 3];
            for r in runs.iter_mut() {
                *r = measure_kernel(kernel, cfg, n)?;
            }
            runs.sort_by(f64::total_cmp);
            out!(
                "  {:<9} rank {}  model {:.3e} s  measured {:.3e} s",
                cfg.to_string(),
                e.rank,
                e.predicted_secs,
                runs[1]
            );
        }
        if let Some(cache) = &cache {
            let out = autotune_cached(cache, kernel, &candidates, n, dtype, &dev, top_k, |cfg| {
                measure_kernel(kernel, cfg, n).map_err(|e| e.to_string())
            })?;
            let status = match &out.status {
                TuneStatus::Measured => "measured".to_string(),
                TuneStatus::Cached => "cached".to_string(),
                TuneStatus::ModelFallback { reason } => format!("model fallback ({reason})"),
            };
            out!("  tuned {} [{status}]", out.config);
        }
    }
    Ok(())
}
