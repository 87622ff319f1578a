//! Time-series data model and dataset ingestion.
//!
//! Datasets use the UCR archive layout: one series per line, the first field
//! is the class label and the remaining fields are the values in temporal
//! order. Both tab and comma separated files are accepted.

use std::fmt::Write as _;
use std::fs;
use std::ops::Deref;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Standard deviations below this are treated as zero by [`znormalize`].
pub const ZNORM_EPSILON: f64 = 1e-12;

/// A non-empty, finite, univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Degenerate(
                "a series needs at least one value".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "value at index {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub label: i64,
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub entries: Vec<LabeledSeries>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, entries: Vec<LabeledSeries>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            name: name.into(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn series(&self) -> impl Iterator<Item = &TimeSeries> {
        self.entries.iter().map(|e| &e.series)
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().map(|e| e.label)
    }

    /// Applies `f` to every series, keeping labels and order.
    pub fn map_series<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&TimeSeries) -> Result<TimeSeries>,
    {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(LabeledSeries {
                    label: e.label,
                    series: f(&e.series)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.name.clone(), entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Tab,
    Comma,
}

impl Delimiter {
    pub fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }
}

fn parse_field(field: &str, line: usize, column: usize) -> Result<f64> {
    let trimmed = field.trim();
    let value: f64 = trimmed.parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("'{trimmed}' is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            column,
            message: format!("'{trimmed}' is not finite"),
        });
    }
    Ok(value)
}

/// Parses UCR-formatted text. Line and column numbers in errors are 1-based.
pub fn parse_tsv(text: &str, delimiter: Delimiter, name: &str) -> Result<LabeledDataset> {
    let sep = delimiter.as_char();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(sep);
        let label_field = fields.next().unwrap_or_default();
        let label = parse_field(label_field, line_no, 1)?.trunc() as i64;
        let values = fields
            .enumerate()
            .map(|(k, f)| parse_field(f, line_no, k + 2))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                column: 2,
                message: "line has a label but no values".into(),
            });
        }
        entries.push(LabeledSeries {
            label,
            series: TimeSeries(values),
        });
    }
    LabeledDataset::new(name, entries)
}

pub fn load_tsv(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_tsv(&text, delimiter, &name)
}

/// Renders a dataset in the format read by [`parse_tsv`]. Values use the
/// shortest representation that parses back to the same bits.
pub fn to_tsv(dataset: &LabeledDataset, delimiter: Delimiter) -> String {
    let sep = delimiter.as_char();
    let mut out = String::new();
    for entry in &dataset.entries {
        write!(out, "{}", entry.label).unwrap();
        for v in entry.series.iter() {
            write!(out, "{sep}{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_tsv(
    dataset: &LabeledDataset,
    path: impl AsRef<Path>,
    delimiter: Delimiter,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_tsv(dataset, delimiter)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a bare series: reals separated by whitespace, commas or newlines.
pub fn load_series(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty());
        for (k, f) in fields.enumerate() {
            values.push(parse_field(f, idx + 1, k + 1)?);
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    TimeSeries::new(values)
}

/// Z-normalization with population standard deviation. Series whose standard
/// deviation is below [`ZNORM_EPSILON`] map to all zeros.
pub fn znormalize(s: &[f64]) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::Degenerate(
            "z-normalization needs at least two values".into(),
        ));
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < ZNORM_EPSILON {
        return Ok(TimeSeries(vec![0.0; s.len()]));
    }
    Ok(TimeSeries(s.iter().map(|v| (v - mean) / std).collect()))
}

/// First-derivative estimate used by the derivative variants (DDTW and
/// friends). The output is two points shorter than the input.
pub fn derivative(s: &[f64]) -> Result<TimeSeries> {
    if s.len() < 3 {
        return Err(Error::Degenerate(
            "derivative needs at least three values".into(),
        ));
    }
    let d = s
        .windows(3)
        .map(|w| ((w[1] - w[0]) + (w[2] - w[0]) / 2.0) / 2.0)
        .collect();
    Ok(TimeSeries(d))
}

/// Per-class drift applied to each random-walk step.
fn class_drift(class: usize, classes: usize) -> f64 {
    0.2 * (class as f64 - (classes as f64 - 1.0) / 2.0)
}

/// Deterministic synthetic dataset: entry `k` has label `k % classes` and is
/// a Gaussian random walk whose steps carry a class-specific drift.
pub fn gen_random_walk(
    count: usize,
    length: usize,
    classes: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if count == 0 || length == 0 || classes == 0 {
        return Err(Error::Degenerate(
            "count, length and classes must all be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..count)
        .map(|k| {
            let class = k % classes;
            let drift = class_drift(class, classes);
            let mut level = 0.0;
            let values = (0..length)
                .map(|_| {
                    let step: f64 = rng.sample(StandardNormal);
                    level += step + drift;
                    level
                })
                .collect();
            LabeledSeries {
                label: class as i64,
                series: TimeSeries(values),
            }
        })
        .collect();
    LabeledDataset::new(format!("random-walk-{seed}"), entries)
}
