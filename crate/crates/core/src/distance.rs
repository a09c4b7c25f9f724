//! Pairwise dissimilarities: windowed DTW over squared differences, squared
//! Euclidean distance, and the dense symmetric matrix both are stored in.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataset::{Dataset, TimeSeries};
use crate::error::{Error, Result};

/// Sakoe-Chiba band. `window: None` is unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DtwParams {
    pub window: Option<usize>,
}

impl DtwParams {
    pub fn unconstrained() -> Self {
        Self { window: None }
    }

    pub fn band(w: usize) -> Self {
        Self { window: Some(w) }
    }
}

/// Distance used to build a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Dtw(DtwParams),
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Dtw(_) => "dtw",
        }
    }

    /// The band half-width, when the metric is windowed DTW.
    pub fn window(&self) -> Option<usize> {
        match self {
            Metric::Dtw(p) => p.window,
            Metric::Euclidean => None,
        }
    }

    pub fn distance(&self, x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
        match self {
            Metric::Euclidean => euclidean_sq(x, y),
            Metric::Dtw(p) => dtw(x, y, *p),
        }
    }

    /// Stable identifier used for cache file names.
    pub fn cache_tag(&self) -> String {
        match self {
            Metric::Euclidean => "euclidean".into(),
            Metric::Dtw(DtwParams { window: Some(w) }) => format!("dtw_w{w}"),
            Metric::Dtw(DtwParams { window: None }) => "dtw_full".into(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::Dtw(DtwParams { window: Some(w) }) => write!(f, "dtw(w={w})"),
            Metric::Dtw(DtwParams { window: None }) => f.write_str("dtw(unconstrained)"),
        }
    }
}

/// Accumulated squared-difference DTW cost between `x` and `y`.
///
/// Cell `(i, j)` is admissible iff `|i - j| <= w`. The raw accumulated cost
/// is returned, without square root or path-length normalization. Runs in
/// O(n·w) time with two rolling rows.
pub fn dtw(x: &TimeSeries, y: &TimeSeries, params: DtwParams) -> Result<f64> {
    dtw_slices(x.values(), y.values(), params)
}

pub(crate) fn dtw_slices(x: &[f64], y: &[f64], params: DtwParams) -> Result<f64> {
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return Err(Error::InvalidSeries("DTW of an empty series".into()));
    }
    let w = match params.window {
        Some(w) => {
            let gap = n.abs_diff(m);
            if w < gap {
                return Err(Error::Parameter(format!(
                    "window {w} is narrower than the length difference {gap} ({n} vs {m})"
                )));
            }
            w
        }
        None => n.max(m),
    };

    // Row i holds Mat_DTW(i, 0..=m); column 0 and row 0 are the boundary.
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;

    for i in 1..=n {
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        curr[lo - 1] = f64::INFINITY;
        let xi = x[i - 1];
        for j in lo..=hi {
            let d = xi - y[j - 1];
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = d * d + best;
        }
        if hi < m {
            curr[hi + 1] = f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Σ (x_i − y_i)², the squared Euclidean distance.
pub fn euclidean_sq(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "euclidean distance needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Datasets up to this size are stored at 8-byte precision, larger at 4-byte.
pub const F64_MAX_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    F64(Vec<f64>),
    F32(Vec<f32>),
}

/// Dense symmetric n×n matrix, row-major, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    storage: Storage,
}

/// One row of a [`DistanceMatrix`].
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    F64(&'a [f64]),
    F32(&'a [f32]),
}

impl Row<'_> {
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        match self {
            Row::F64(r) => r[j],
            Row::F32(r) => r[j] as f64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Row::F64(r) => r.len(),
            Row::F32(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl DistanceMatrix {
    /// Build from a full row-major n×n buffer, validating the invariants.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::Contract(format!("diagonal entry {i} is not zero")));
            }
            for j in i + 1..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !(a.is_finite() && a >= 0.0) {
                    return Err(Error::Contract(format!("entry ({i},{j}) = {a} is invalid")));
                }
                if a != b {
                    return Err(Error::Contract(format!("entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(Self::from_upper(n, |i, j| entries[i * n + j]))
    }

    /// Build from a function of the upper triangle (`i < j`), mirrored.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_upper(n, f)
    }

    fn from_upper(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let storage = if n <= F64_MAX_SIZE {
            let mut data = vec![0.0f64; n * n];
            fill_upper(&mut data, n, &f, |v| v);
            Storage::F64(data)
        } else {
            let mut data = vec![0.0f32; n * n];
            fill_upper(&mut data, n, &f, |v| v as f32);
            Storage::F32(data)
        };
        Self { n, storage }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Bytes per stored entry (8 or 4).
    pub fn precision_bytes(&self) -> u8 {
        match self.storage {
            Storage::F64(_) => 8,
            Storage::F32(_) => 4,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::F64(d) => d[i * self.n + j],
            Storage::F32(d) => d[i * self.n + j] as f64,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        let span = i * self.n..(i + 1) * self.n;
        match &self.storage {
            Storage::F64(d) => Row::F64(&d[span]),
            Storage::F32(d) => Row::F32(&d[span]),
        }
    }

    /// Write the binary cache format: magic, n (u64 LE), precision byte,
    /// then the strict upper triangle row-major in little endian.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        w.write_all(CACHE_MAGIC).map_err(io)?;
        w.write_all(&(self.n as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&[self.precision_bytes()]).map_err(io)?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                match &self.storage {
                    Storage::F64(d) => w.write_all(&d[i * self.n + j].to_le_bytes()),
                    Storage::F32(d) => w.write_all(&d[i * self.n + j].to_le_bytes()),
                }
                .map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bad = |message: &str| Error::Cache {
            path: path.to_owned(),
            message: message.to_owned(),
        };
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

        if bytes.len() < CACHE_HEADER_LEN || &bytes[..8] != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let precision = bytes[16];
        let body = &bytes[CACHE_HEADER_LEN..];
        let pairs = n * n.saturating_sub(1) / 2;
        if precision != 8 && precision != 4 {
            return Err(bad("unknown precision flag"));
        }
        if body.len() != pairs * precision as usize {
            return Err(bad("body length does not match header"));
        }

        let mut upper = Vec::with_capacity(pairs);
        for chunk in body.chunks_exact(precision as usize) {
            let v = if precision == 8 {
                f64::from_le_bytes(chunk.try_into().unwrap())
            } else {
                f32::from_le_bytes(chunk.try_into().unwrap()) as f64
            };
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad("negative or non-finite entry"));
            }
            upper.push(v);
        }
        // Offset of row i in the packed strict upper triangle.
        let offset = |i: usize| i * (2 * n - i - 1) / 2;
        Ok(Self::from_upper(n, |i, j| upper[offset(i) + (j - i - 1)]))
    }
}

fn fill_upper<T: Copy + Send + Sync>(
    data: &mut [T],
    n: usize,
    f: &(impl Fn(usize, usize) -> f64 + ?Sized),
    cast: impl Fn(f64) -> T,
) {
    for i in 0..n {
        for j in i + 1..n {
            let v = cast(f(i, j));
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
}

const CACHE_MAGIC: &[u8; 8] = b"WOAKMDM1";
const CACHE_HEADER_LEN: usize = 17;

/// Compute all pairwise distances of `data` under `metric`.
///
/// Only the upper triangle is evaluated (in parallel, one task per row) and
/// mirrored. The first failing pair is reported with its indices.
pub fn build_matrix(data: &Dataset, metric: Metric) -> Result<DistanceMatrix> {
    let series = data.series();
    let n = series.len();
    if metric == Metric::Euclidean && !data.is_uniform_length() {
        return Err(Error::Shape(format!(
            "dataset {} has series of differing lengths; use dtw",
            data.name()
        )));
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    metric
                        .distance(&series[i], &series[j])
                        .map_err(|e| Error::Pair {
                            i,
                            j,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    Ok(DistanceMatrix::from_upper(n, |i, j| rows[i][j - i - 1]))
}

/// Cache file for a dataset/metric pair inside `dir`.
pub fn cache_path(dir: impl AsRef<Path>, dataset: &str, metric: Metric) -> PathBuf {
    let safe: String = dataset
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    dir.as_ref()
        .join(format!("{safe}__{}.dm", metric.cache_tag()))
}

/// Load the matrix from `cache_dir` when present, else build and store it.
/// Returns the matrix and whether it came from the cache.
pub fn build_matrix_cached(
    data: &Dataset,
    metric: Metric,
    cache_dir: Option<&Path>,
) -> Result<(DistanceMatrix, bool)> {
    let Some(dir) = cache_dir else {
        return Ok((build_matrix(data, metric)?, false));
    };
    let path = cache_path(dir, data.name(), metric);
    if path.exists() {
        let m = DistanceMatrix::read_cache(&path)?;
        if m.size() != data.len() {
            return Err(Error::Cache {
                path,
                message: format!("holds {} series, dataset has {}", m.size(), data.len()),
            });
        }
        return Ok((m, true));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m = build_matrix(data, metric)?;
    m.write_cache(&path)?;
    Ok((m, false))
}
