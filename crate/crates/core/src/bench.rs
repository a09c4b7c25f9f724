//! Experiment driver: PAM vs WOA comparisons, convergence traces, and
//! population × iteration parameter sweeps, with CSV/JSON output.
//!
//! A run builds the distance matrix once, then executes each method for
//! each seed in sequence so timings are not contended. Clustering times
//! never include matrix construction, which is reported on its own.
//!
//! Configuration is a flat set of `key = value` settings (see
//! [`BenchConfig::from_settings`]) so a config file and command-line flags
//! can be merged before parsing, flags last.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::{self, Dataset, Delimiter};
use crate::distance::{self, DistanceMatrix, DtwParams, Metric};
use crate::error::{Error, Result};
use crate::eval::{self, rand_index};
use crate::pam;
use crate::woa::{self, RunTelemetry, WoaParams};

/// Version of the `records.csv`, `trace_*.csv` and `sweep.csv` layouts.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Version string stamped into `summary.json`.
pub fn version_string() -> &'static str {
    option_env!("WOAKM_GIT_DESCRIBE").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

/// Parameters of [`dataset::synth_blobs`], written `n=50,k=4,len=32,noise=0.1,seed=3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSpec {
    pub n_per_cluster: usize,
    pub k: usize,
    pub length: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Dataset> {
        dataset::synth_blobs(
            self.n_per_cluster,
            self.k,
            self.length,
            self.noise,
            self.seed,
        )
    }
}

impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SynthSpec {
            n_per_cluster: 0,
            k: 0,
            length: 32,
            noise: 0.1,
            seed: 0,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("synth: expected key=value, got {part:?}")))?;
            let value = value.trim();
            match key.trim() {
                "n" | "n_per_cluster" => spec.n_per_cluster = parse_value("synth n", value)?,
                "k" => spec.k = parse_value("synth k", value)?,
                "len" | "length" => spec.length = parse_value("synth len", value)?,
                "noise" => spec.noise = parse_value("synth noise", value)?,
                "seed" => spec.seed = parse_value("synth seed", value)?,
                other => return Err(Error::Config(format!("synth: unknown key {other:?}"))),
            }
        }
        if spec.n_per_cluster == 0 || spec.k == 0 {
            return Err(Error::Config("synth: n and k are required".into()));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Ucr {
        path: PathBuf,
        delimiter: Option<Delimiter>,
    },
    Synth(SynthSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Ucr { path, delimiter } => dataset::load_ucr(path, *delimiter),
            DataSource::Synth(spec) => spec.generate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pam,
    Woa,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pam => "pam",
            Method::Woa => "woa",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pam" => Ok(Method::Pam),
            "woa" => Ok(Method::Woa),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub source: DataSource,
    pub metric: Metric,
    /// Cluster count; `None` takes the dataset's class count.
    pub k: Option<usize>,
    pub methods: Vec<Method>,
    pub population: usize,
    pub iterations: usize,
    pub min_cluster_size: usize,
    pub spiral_shape: f64,
    pub seeds: Vec<u64>,
    pub grid_population: Vec<usize>,
    pub grid_iterations: Vec<usize>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

/// Setting keys accepted by [`BenchConfig::from_settings`].
pub const SETTING_KEYS: &[&str] = &[
    "data",
    "delimiter",
    "synth",
    "metric",
    "window",
    "k",
    "methods",
    "population",
    "iterations",
    "min-cluster-size",
    "spiral-shape",
    "seeds",
    "reps",
    "seed",
    "grid-population",
    "grid-iterations",
    "out",
    "threads",
    "cache",
];

/// Parse a `key = value` config file. `#` starts a comment; blank lines
/// are ignored. Keys may use `-` or `_`.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
        let key = key.trim().replace('_', "-");
        if !SETTING_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key {key:?}",
                idx + 1
            )));
        }
        out.insert(key, value.trim().to_owned());
    }
    Ok(out)
}

fn parse_value<T: FromStr>(what: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{what}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(what: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(what, s))
        .collect()
}

impl BenchConfig {
    /// Resolve settings into a config.
    ///
    /// Exactly one of `data` / `synth` is required. Seeds come from `seeds`
    /// (an explicit list) or from `reps` consecutive values starting at
    /// `seed`; if both `seeds` and `reps` are present they must agree.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| settings.get(k).map(String::as_str);

        let source = match (get("data"), get("synth")) {
            (Some(path), None) => DataSource::Ucr {
                path: PathBuf::from(path),
                delimiter: get("delimiter").map(Delimiter::from_str).transpose()?,
            },
            (None, Some(spec)) => DataSource::Synth(spec.parse()?),
            (Some(_), Some(_)) => return Err(Error::Config("give data or synth, not both".into())),
            (None, None) => return Err(Error::Config("one of data or synth is required".into())),
        };

        let window = match get("window") {
            None | Some("none") | Some("") => None,
            Some(w) => Some(parse_value::<usize>("window", w)?),
        };
        let metric = match get("metric").unwrap_or("dtw") {
            "dtw" => Metric::Dtw(DtwParams { window }),
            "euclidean" | "ed" => Metric::Euclidean,
            other => return Err(Error::Config(format!("unknown metric {other:?}"))),
        };

        let methods = match get("methods") {
            Some(m) => {
                let mut v: Vec<Method> = parse_list("methods", m)?;
                v.sort();
                v.dedup();
                v
            }
            None => vec![Method::Pam, Method::Woa],
        };
        if methods.is_empty() {
            return Err(Error::Config("methods is empty".into()));
        }

        let defaults = WoaParams::new(1);
        let opt_usize = |key: &str, default: usize| -> Result<usize> {
            get(key).map_or(Ok(default), |v| parse_value(key, v))
        };

        let base_seed: u64 = get("seed").map_or(Ok(0), |v| parse_value("seed", v))?;
        let reps: Option<usize> = get("reps").map(|v| parse_value("reps", v)).transpose()?;
        let seeds = match get("seeds") {
            Some(list) => {
                let seeds: Vec<u64> = parse_list("seeds", list)?;
                if let Some(r) = reps {
                    if r != seeds.len() {
                        return Err(Error::Config(format!(
                            "reps = {r} but {} seeds were listed",
                            seeds.len()
                        )));
                    }
                }
                seeds
            }
            None => (0..reps.unwrap_or(1) as u64)
                .map(|i| base_seed + i)
                .collect(),
        };
        if seeds.is_empty() {
            return Err(Error::Config(
                "at least one seed/repetition is required".into(),
            ));
        }

        let threads = get("threads")
            .map(|v| parse_value("threads", v))
            .transpose()?;
        if threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }

        Ok(Self {
            source,
            metric,
            k: get("k").map(|v| parse_value("k", v)).transpose()?,
            methods,
            population: opt_usize("population", defaults.population)?,
            iterations: opt_usize("iterations", defaults.max_iterations)?,
            min_cluster_size: opt_usize("min-cluster-size", defaults.min_cluster_size)?,
            spiral_shape: get("spiral-shape").map_or(Ok(defaults.spiral_shape), |v| {
                parse_value("spiral-shape", v)
            })?,
            seeds,
            grid_population: get("grid-population")
                .map_or(Ok(Vec::new()), |v| parse_list("grid-population", v))?,
            grid_iterations: get("grid-iterations")
                .map_or(Ok(Vec::new()), |v| parse_list("grid-iterations", v))?,
            out_dir: PathBuf::from(get("out").unwrap_or("bench-out")),
            threads,
            cache_dir: get("cache").map(PathBuf::from),
        })
    }

    /// A config over a synthetic dataset with default WOA parameters.
    pub fn synthetic(spec: SynthSpec, metric: Metric, out_dir: impl Into<PathBuf>) -> Self {
        let defaults = WoaParams::new(1);
        Self {
            source: DataSource::Synth(spec),
            metric,
            k: None,
            methods: vec![Method::Pam, Method::Woa],
            population: defaults.population,
            iterations: defaults.max_iterations,
            min_cluster_size: defaults.min_cluster_size,
            spiral_shape: defaults.spiral_shape,
            seeds: vec![0],
            grid_population: Vec::new(),
            grid_iterations: Vec::new(),
            out_dir: out_dir.into(),
            threads: None,
            cache_dir: None,
        }
    }

    pub fn woa_params(&self, k: usize, seed: u64) -> WoaParams {
        WoaParams {
            population: self.population,
            max_iterations: self.iterations,
            k,
            min_cluster_size: self.min_cluster_size,
            spiral_shape: self.spiral_shape,
            seed,
        }
    }

    fn echo(&self) -> BTreeMap<&'static str, String> {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut m = BTreeMap::new();
        match &self.source {
            DataSource::Ucr { path, .. } => m.insert("data", path.display().to_string()),
            DataSource::Synth(s) => m.insert(
                "synth",
                format!(
                    "n={},k={},len={},noise={},seed={}",
                    s.n_per_cluster, s.k, s.length, s.noise, s.seed
                ),
            ),
        };
        m.insert("metric", self.metric.name().to_owned());
        m.insert("window", window_field(self.metric.window()));
        m.insert("k", self.k.map_or("classes".into(), |k| k.to_string()));
        m.insert(
            "methods",
            self.methods
                .iter()
                .map(Method::name)
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("population", self.population.to_string());
        m.insert("iterations", self.iterations.to_string());
        m.insert("min-cluster-size", self.min_cluster_size.to_string());
        m.insert("spiral-shape", self.spiral_shape.to_string());
        m.insert(
            "seeds",
            self.seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        if !self.grid_population.is_empty() {
            m.insert("grid-population", join(&self.grid_population));
            m.insert("grid-iterations", join(&self.grid_iterations));
        }
        m
    }
}

fn window_field(w: Option<usize>) -> String {
    w.map_or(String::new(), |w| w.to_string())
}

/// Run `f` on a rayon pool of `threads` workers (or the global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Dataset plus its distance matrix, built once per invocation.
#[derive(Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub matrix: DistanceMatrix,
    pub matrix_seconds: f64,
    pub matrix_from_cache: bool,
    pub k: usize,
}

pub fn prepare(config: &BenchConfig) -> Result<Prepared> {
    let dataset = config.source.load()?;
    let k = match config.k {
        Some(k) => k,
        None => dataset
            .class_count()
            .ok_or_else(|| Error::Config("k is required for an unlabeled dataset".into()))?,
    };
    if k == 0 || k > dataset.len() {
        return Err(Error::Parameter(format!(
            "k must be in 1..={}, got {k}",
            dataset.len()
        )));
    }
    let start = Instant::now();
    let (matrix, matrix_from_cache) =
        distance::build_matrix_cached(&dataset, config.metric, config.cache_dir.as_deref())
            .map_err(|e| match e {
                Error::Shape(msg) => Error::Shape(format!("{}: {msg}", dataset.name())),
                other => other,
            })?;
    Ok(Prepared {
        dataset,
        matrix,
        matrix_seconds: start.elapsed().as_secs_f64(),
        matrix_from_cache,
        k,
    })
}

/// One clustering run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub method: Method,
    pub metric: String,
    pub window: String,
    pub seed: u64,
    pub ri: f64,
    pub total_cost: f64,
    pub wall_time_seconds: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub runs: usize,
    pub mean_ri: f64,
    pub min_ri: f64,
    pub max_ri: f64,
    pub mean_total_cost: f64,
    pub mean_wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub version: String,
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub metric: String,
    pub window: Option<usize>,
    /// How the window is interpreted.
    pub window_units: &'static str,
    pub matrix_build_seconds: f64,
    pub matrix_from_cache: bool,
    pub threads: Option<usize>,
    pub methods: BTreeMap<Method, MethodSummary>,
    /// Mean PAM time over mean WOA time, when both ran.
    pub speedup: Option<f64>,
    pub config: BTreeMap<&'static str, String>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub records: Vec<BenchRecord>,
    pub summary: Summary,
}

fn truth(dataset: &Dataset) -> Result<&[usize]> {
    dataset
        .labels()
        .ok_or_else(|| Error::Config(format!("dataset {} has no labels", dataset.name())))
}

/// Run every configured method once per seed and summarize.
pub fn run_comparison(config: &BenchConfig) -> Result<Comparison> {
    let prepared = prepare(config)?;
    run_comparison_on(config, &prepared)
}

/// As [`run_comparison`] with an already prepared dataset and matrix.
pub fn run_comparison_on(config: &BenchConfig, prepared: &Prepared) -> Result<Comparison> {
    let Prepared {
        dataset, matrix, k, ..
    } = prepared;
    let truth = truth(dataset)?;
    let mut records = Vec::new();

    for &method in &config.methods {
        for &seed in &config.seeds {
            let result = match method {
                Method::Pam => pam::pam(matrix, *k)?,
                Method::Woa => woa::run(matrix, &config.woa_params(*k, seed))?.0,
            };
            records.push(BenchRecord {
                dataset: dataset.name().to_owned(),
                n: dataset.len(),
                k: *k,
                method,
                metric: config.metric.name().to_owned(),
                window: window_field(config.metric.window()),
                seed,
                ri: rand_index(&result.assignment, truth)?.ri,
                total_cost: result.total_cost,
                wall_time_seconds: result.wall_time_seconds,
                iterations: result.iterations,
            });
        }
    }
    let summary = summarize(config, prepared, &records)?;
    Ok(Comparison { records, summary })
}

fn summarize(
    config: &BenchConfig,
    prepared: &Prepared,
    records: &[BenchRecord],
) -> Result<Summary> {
    let mut methods = BTreeMap::new();
    for &method in &config.methods {
        let runs: Vec<&BenchRecord> = records.iter().filter(|r| r.method == method).collect();
        if runs.is_empty() {
            continue;
        }
        let count = runs.len() as f64;
        let mean = |f: fn(&BenchRecord) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / count;
        methods.insert(
            method,
            MethodSummary {
                runs: runs.len(),
                mean_ri: mean(|r| r.ri),
                min_ri: runs.iter().map(|r| r.ri).fold(f64::INFINITY, f64::min),
                max_ri: runs.iter().map(|r| r.ri).fold(f64::NEG_INFINITY, f64::max),
                mean_total_cost: mean(|r| r.total_cost),
                mean_wall_time_seconds: mean(|r| r.wall_time_seconds),
            },
        );
    }
    let speedup = match (methods.get(&Method::Pam), methods.get(&Method::Woa)) {
        (Some(p), Some(w)) => {
            eval::speedup(p.mean_wall_time_seconds, w.mean_wall_time_seconds).ok()
        }
        _ => None,
    };
    Ok(Summary {
        schema_version: CSV_SCHEMA_VERSION,
        version: version_string().to_owned(),
        dataset: prepared.dataset.name().to_owned(),
        n: prepared.dataset.len(),
        k: prepared.k,
        metric: config.metric.name().to_owned(),
        window: config.metric.window(),
        window_units: "absolute sample count",
        matrix_build_seconds: prepared.matrix_seconds,
        matrix_from_cache: prepared.matrix_from_cache,
        threads: config.threads,
        methods,
        speedup,
        config: config.echo(),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_with_header<S: Serialize>(comment: &str, rows: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let body = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(format!("# {comment}\n{}", String::from_utf8_lossy(&body)))
}

/// Render `records.csv`: a schema comment line, then one record per row.
pub fn records_csv(records: &[BenchRecord]) -> Result<String> {
    csv_with_header(
        &format!("woakm records schema v{CSV_SCHEMA_VERSION}; window in samples"),
        records,
    )
}

/// Write `records.csv` and `summary.json` into `out_dir` and return the
/// plain-text table for the terminal.
pub fn emit_report(records: &[BenchRecord], summary: &Summary, out_dir: &Path) -> Result<String> {
    if records.is_empty() {
        return Err(Error::NoRuns);
    }
    create_dir(out_dir)?;
    write_file(&out_dir.join("records.csv"), &records_csv(records)?)?;
    write_file(
        &out_dir.join("summary.json"),
        &(serde_json::to_string_pretty(summary)? + "\n"),
    )?;
    Ok(render_table(records, summary))
}

fn render_table(records: &[BenchRecord], summary: &Summary) -> String {
    let mut t = String::new();
    let window = summary.window.map_or("none".into(), |w| w.to_string());
    let _ = writeln!(
        t,
        "{} (n={}, k={}, metric={}, window={}), matrix {:.3}s{}",
        summary.dataset,
        summary.n,
        summary.k,
        summary.metric,
        window,
        summary.matrix_build_seconds,
        if summary.matrix_from_cache {
            " (cached)"
        } else {
            ""
        }
    );
    let _ = writeln!(
        t,
        "{:<6} {:>10} {:>8} {:>16} {:>10} {:>6}",
        "method", "seed", "RI", "cost", "time (s)", "iters"
    );
    for r in records {
        let _ = writeln!(
            t,
            "{:<6} {:>10} {:>8.4} {:>16.6} {:>10.4} {:>6}",
            r.method.name(),
            r.seed,
            r.ri,
            r.total_cost,
            r.wall_time_seconds,
            r.iterations
        );
    }
    for (m, s) in &summary.methods {
        let _ = writeln!(
            t,
            "{:<6} mean RI {:.4} over {} run(s), mean time {:.4}s",
            m.name(),
            s.mean_ri,
            s.runs,
            s.mean_wall_time_seconds
        );
    }
    if let Some(s) = summary.speedup {
        let _ = writeln!(t, "speedup (pam / woa): {s:.2}x");
    }
    t
}

/// One row of a convergence trace file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub best_fitness: f64,
    pub unique_medoids: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedConvergence {
    pub seed: u64,
    pub final_fitness: f64,
    pub ri: f64,
    /// First iteration reaching 90% of the run's total improvement.
    pub iteration_90pct: Option<usize>,
    pub initial_unique_medoids: usize,
    pub final_unique_medoids: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub telemetry: Vec<RunTelemetry>,
    pub mean_trace: Vec<TracePoint>,
    pub seeds: Vec<SeedConvergence>,
}

/// Run WOA once per seed, keeping full telemetry, and write
/// `trace_<seed>.csv`, `trace_mean.csv` and `convergence.json`.
pub fn run_convergence(config: &BenchConfig) -> Result<ConvergenceReport> {
    let prepared = prepare(config)?;
    run_convergence_on(config, &prepared)
}

pub fn run_convergence_on(config: &BenchConfig, prepared: &Prepared) -> Result<ConvergenceReport> {
    if !config.methods.contains(&Method::Woa) {
        return Err(Error::Config(
            "convergence traces need the woa method".into(),
        ));
    }
    let truth = truth(&prepared.dataset)?;
    let mut telemetry = Vec::new();
    let mut seeds = Vec::new();
    for &seed in &config.seeds {
        let (result, tel) = woa::run(&prepared.matrix, &config.woa_params(prepared.k, seed))?;
        let diversity = &tel.unique_medoids_per_iteration;
        seeds.push(SeedConvergence {
            seed,
            final_fitness: result.total_cost,
            ri: rand_index(&result.assignment, truth)?.ri,
            iteration_90pct: eval::improvement_iteration(&tel.best_fitness_per_iteration, 0.9),
            initial_unique_medoids: diversity[0],
            final_unique_medoids: *diversity.last().unwrap(),
        });
        telemetry.push(tel);
    }

    let iterations = config.iterations;
    let runs = telemetry.len() as f64;
    let mean_trace = (0..iterations)
        .map(|t| TracePoint {
            iteration: t,
            best_fitness: telemetry
                .iter()
                .map(|r| r.best_fitness_per_iteration[t])
                .sum::<f64>()
                / runs,
            unique_medoids: telemetry
                .iter()
                .map(|r| r.unique_medoids_per_iteration[t] as f64)
                .sum::<f64>()
                / runs,
        })
        .collect();

    let report = ConvergenceReport {
        telemetry,
        mean_trace,
        seeds,
    };
    write_convergence(&report, &config.out_dir)?;
    Ok(report)
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    best_fitness: f64,
    unique_medoids: usize,
}

fn write_convergence(report: &ConvergenceReport, out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    let comment = format!("woakm trace schema v{CSV_SCHEMA_VERSION}");
    for tel in &report.telemetry {
        let rows: Vec<TraceRow> = tel
            .best_fitness_per_iteration
            .iter()
            .zip(&tel.unique_medoids_per_iteration)
            .enumerate()
            .map(|(iteration, (&best_fitness, &unique_medoids))| TraceRow {
                iteration,
                best_fitness,
                unique_medoids,
            })
            .collect();
        write_file(
            &out_dir.join(format!("trace_{}.csv", tel.rng_seed)),
            &csv_with_header(&comment, &rows)?,
        )?;
    }
    write_file(
        &out_dir.join("trace_mean.csv"),
        &csv_with_header(&format!("{comment}; mean over seeds"), &report.mean_trace)?,
    )?;
    write_file(
        &out_dir.join("convergence.json"),
        &(serde_json::to_string_pretty(&report.seeds)? + "\n"),
    )
}

/// One (L, t_max) cell of a sweep, averaged over the seed set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub population: usize,
    pub t_max: usize,
    pub mean_ri: f64,
    pub mean_fitness: f64,
}

/// Run WOA over the population × iteration grid and write `sweep.csv`.
pub fn run_sweep(config: &BenchConfig) -> Result<Vec<SweepRow>> {
    let prepared = prepare(config)?;
    run_sweep_on(config, &prepared)
}

pub fn run_sweep_on(config: &BenchConfig, prepared: &Prepared) -> Result<Vec<SweepRow>> {
    if config.grid_population.is_empty() || config.grid_iterations.is_empty() {
        return Err(Error::Config(
            "sweep needs non-empty grid-population and grid-iterations".into(),
        ));
    }
    let truth = truth(&prepared.dataset)?;
    let mut rows = Vec::new();
    for &population in &config.grid_population {
        for &t_max in &config.grid_iterations {
            let (mut ri, mut fit) = (0.0, 0.0);
            for &seed in &config.seeds {
                let params = WoaParams {
                    population,
                    max_iterations: t_max,
                    ..config.woa_params(prepared.k, seed)
                };
                let (result, _) = woa::run(&prepared.matrix, &params)?;
                ri += rand_index(&result.assignment, truth)?.ri;
                fit += result.total_cost;
            }
            let runs = config.seeds.len() as f64;
            rows.push(SweepRow {
                population,
                t_max,
                mean_ri: ri / runs,
                mean_fitness: fit / runs,
            });
        }
    }
    create_dir(&config.out_dir)?;
    write_file(
        &config.out_dir.join("sweep.csv"),
        &csv_with_header(&format!("woakm sweep schema v{CSV_SCHEMA_VERSION}"), &rows)?,
    )?;
    Ok(rows)
}

/// Build (or load) the matrix and store it in the cache directory.
pub fn build_distance_cache(config: &BenchConfig) -> Result<(Prepared, PathBuf)> {
    let dir = config
        .cache_dir
        .as_ref()
        .ok_or_else(|| Error::Config("distances needs a cache directory".into()))?;
    let prepared = prepare(config)?;
    let path = distance::cache_path(dir, prepared.dataset.name(), config.metric);
    Ok((prepared, path))
}
