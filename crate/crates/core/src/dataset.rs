//! Labeled time-series datasets: UCR text files and a seeded synthetic generator.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A non-empty sequence of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series has no samples".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "sample {pos} is not finite ({})",
                values[pos]
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A named collection of at least two series, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    series: Vec<TimeSeries>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        series: Vec<TimeSeries>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyInput);
        }
        if series.len() < 2 {
            return Err(Error::Shape(format!(
                "a dataset needs at least 2 series, got {}",
                series.len()
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != series.len() {
                return Err(Error::Shape(format!(
                    "{} labels for {} series",
                    labels.len(),
                    series.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            series,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// True when every series has the same number of samples.
    pub fn is_uniform_length(&self) -> bool {
        let first = self.series[0].len();
        self.series.iter().all(|s| s.len() == first)
    }

    /// Number of distinct labels, if labeled.
    pub fn class_count(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |m| m + 1))
    }

    /// Render in UCR layout (label first, then samples) using `delimiter`.
    ///
    /// Values are written in shortest round-trip form, so reparsing
    /// reproduces them exactly. Unlabeled datasets get label 0.
    pub fn to_ucr_string(&self, delimiter: Delimiter) -> String {
        let sep = match delimiter {
            Delimiter::Tab => "\t",
            Delimiter::Comma => ",",
            Delimiter::Whitespace => " ",
        };
        let mut out = String::new();
        for (i, s) in self.series.iter().enumerate() {
            let label = self.labels.as_ref().map_or(0, |l| l[i]);
            let _ = write!(out, "{label}");
            for v in s.values() {
                let _ = write!(out, "{sep}{v:?}");
            }
            out.push('\n');
        }
        out
    }
}

/// Field separator of a UCR file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
    /// Runs of spaces/tabs (older archive releases).
    Whitespace,
}

impl Delimiter {
    /// Pick the separator from the first non-blank line.
    pub fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }
}

impl std::str::FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tab" | "\\t" | "\t" => Ok(Delimiter::Tab),
            "comma" | "," => Ok(Delimiter::Comma),
            "space" | "whitespace" | " " => Ok(Delimiter::Whitespace),
            other => Err(Error::Parameter(format!(
                "unknown delimiter {other:?} (expected tab, comma or space)"
            ))),
        }
    }
}

/// Load a UCR-format file. The dataset is named after the file stem.
pub fn load_ucr(path: impl AsRef<Path>, delimiter: Option<Delimiter>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    parse_ucr(&name, &text, delimiter)
}

/// Parse UCR text: one record per line, class label first.
///
/// Labels are parsed as reals and mapped to dense ids `0..C` in order of
/// first appearance. Blank lines are skipped; line numbers in errors are
/// 1-based and count blank lines.
pub fn parse_ucr(name: &str, text: &str, delimiter: Option<Delimiter>) -> Result<Dataset> {
    let first = text.lines().find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        return Err(Error::EmptyInput);
    };
    let delimiter = delimiter.unwrap_or_else(|| Delimiter::detect(first));

    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut label_ids: Vec<f64> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields: Box<dyn Iterator<Item = &str>> = match delimiter {
            Delimiter::Tab => Box::new(line.split('\t').map(str::trim)),
            Delimiter::Comma => Box::new(line.split(',').map(str::trim)),
            Delimiter::Whitespace => Box::new(line.split_whitespace()),
        };
        let parse = |field: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("non-numeric field {field:?}"),
            })
        };

        let label = parse(fields.next().unwrap_or(""))?;
        let values = fields.map(parse).collect::<Result<Vec<f64>>>()?;
        let ts = TimeSeries::new(values).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;

        let id = match label_ids.iter().position(|&l| l == label) {
            Some(id) => id,
            None => {
                label_ids.push(label);
                label_ids.len() - 1
            }
        };
        labels.push(id);
        series.push(ts);
    }

    Dataset::new(name, series, Some(labels))
}

/// Generate `k` groups of `n_per_cluster` noisy copies of a per-group base
/// waveform. Group `c` uses `c + sin(2π(c+1)t/length)`, so groups differ in
/// both level and frequency and stay apart under any warping window.
pub fn synth_blobs(
    n_per_cluster: usize,
    k: usize,
    length: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if n_per_cluster < 2 {
        return Err(Error::Parameter("n_per_cluster must be at least 2".into()));
    }
    if length == 0 {
        return Err(Error::Parameter("length must be at least 1".into()));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::Parameter(format!("noise must be >= 0, got {noise}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise).expect("noise validated above");
    let mut series = Vec::with_capacity(k * n_per_cluster);
    let mut labels = Vec::with_capacity(k * n_per_cluster);

    for c in 0..k {
        let base: Vec<f64> = (0..length)
            .map(|t| {
                let phase = 2.0 * std::f64::consts::PI * (c + 1) as f64 * t as f64 / length as f64;
                c as f64 + phase.sin()
            })
            .collect();
        for _ in 0..n_per_cluster {
            let values = base
                .iter()
                .map(|b| {
                    if noise > 0.0 {
                        b + normal.sample(&mut rng)
                    } else {
                        *b
                    }
                })
                .collect();
            series.push(TimeSeries::new(values)?);
            labels.push(c);
        }
    }

    let name = format!("synth_n{n_per_cluster}_k{k}_len{length}_noise{noise}_seed{seed}");
    Dataset::new(name, series, Some(labels))
}
