use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use elastic_dist::series::{derivative, gen_random_walk, load_tsv, znormalize, Delimiter};
use elastic_dist::{
    DistanceKind, DistanceSpec, LabeledDataset, LbMode, PointCost, Variant, Window,
};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "elastic",
    version,
    about = "Elastic distances, 1-NN classification and subsequence search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two series.
    Dist(DistArgs),
    /// 1-NN classification of a test set against a train set.
    Nn(NnArgs),
    /// Closest window of a reference series to a query.
    Subseq(SubseqArgs),
    /// Timing table of several engine variants on one classification task.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, default_value = "dtw")]
    pub kind: DistanceKind,
    /// Sakoe-Chiba half-width. Required for cdtw; erp defaults to a full window.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub wdtw_g: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub erp_gap: f64,
    #[arg(long, default_value_t = 0.5)]
    pub msm_c: f64,
    #[arg(long, default_value_t = 0.001)]
    pub twe_nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub twe_lambda: f64,
    /// Point cost: squared or absolute.
    #[arg(long, default_value = "squared")]
    pub cost: PointCost,
    #[arg(long, default_value = "eapruned")]
    pub variant: Variant,
    /// Compare first derivatives instead of raw values.
    #[arg(long)]
    pub derivative: bool,
}

impl SpecArgs {
    pub fn spec(&self) -> Result<DistanceSpec> {
        let window = self.window.map_or(Window::Unbounded, Window::Band);
        let spec = match self.kind {
            DistanceKind::Dtw => DistanceSpec::dtw(),
            DistanceKind::Cdtw => {
                let Some(w) = self.window else {
                    bail!("cdtw needs --window");
                };
                DistanceSpec::cdtw(w)
            }
            DistanceKind::Wdtw => DistanceSpec::wdtw(self.wdtw_g),
            DistanceKind::Erp => DistanceSpec::erp(self.erp_gap, self.window.unwrap_or(usize::MAX)),
            DistanceKind::Msm => DistanceSpec::msm(self.msm_c),
            DistanceKind::Twe => DistanceSpec::twe(self.twe_nu, self.twe_lambda),
        };
        let spec = match self.kind {
            DistanceKind::Cdtw | DistanceKind::Erp => spec,
            _ => spec.with_window(window),
        }
        .with_point_cost(self.cost);
        spec.validate()?;
        Ok(spec)
    }

    pub fn echo(&self) -> SpecEcho {
        let params = match self.kind {
            DistanceKind::Wdtw => vec![("g", self.wdtw_g)],
            DistanceKind::Erp => vec![("gap", self.erp_gap)],
            DistanceKind::Msm => vec![("c", self.msm_c)],
            DistanceKind::Twe => vec![("nu", self.twe_nu), ("lambda", self.twe_lambda)],
            _ => vec![],
        };
        SpecEcho {
            kind: self.kind.name(),
            window: self.window,
            params: params.into_iter().collect(),
            cost: match self.cost {
                PointCost::Squared => "squared",
                PointCost::Absolute => "absolute",
            },
            variant: self.variant.name(),
            derivative: self.derivative,
        }
    }

    /// Applies the derivative transform when requested.
    pub fn prepare(&self, values: Vec<f64>) -> Result<Vec<f64>> {
        if self.derivative {
            Ok(derivative(&values)?.into_values())
        } else {
            Ok(values)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SpecEcho {
    pub kind: &'static str,
    pub window: Option<usize>,
    pub params: std::collections::BTreeMap<&'static str, f64>,
    pub cost: &'static str,
    pub variant: &'static str,
    pub derivative: bool,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum DelimiterArg {
    #[default]
    Tab,
    Comma,
}

impl From<DelimiterArg> for Delimiter {
    fn from(d: DelimiterArg) -> Self {
        match d {
            DelimiterArg::Tab => Delimiter::Tab,
            DelimiterArg::Comma => Delimiter::Comma,
        }
    }
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Inline values of the first series, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "a_file")]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "b_file")]
    pub b: Option<String>,
    /// File holding the first series. With --a-row it is read as a labelled
    /// dataset and that row (from 0) is used.
    #[arg(long)]
    pub a_file: Option<PathBuf>,
    #[arg(long, requires = "a_file")]
    pub a_row: Option<usize>,
    #[arg(long)]
    pub b_file: Option<PathBuf>,
    #[arg(long, requires = "b_file")]
    pub b_row: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub delimiter: DelimiterArg,
    /// Abandon above this value (ea and eapruned only).
    #[arg(long)]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub delimiter: DelimiterArg,
    /// Number of generated train series when no files are given.
    #[arg(long, default_value_t = 100)]
    pub gen_train: usize,
    #[arg(long, default_value_t = 100)]
    pub gen_test: usize,
    #[arg(long, default_value_t = 128)]
    pub gen_length: usize,
    #[arg(long, default_value_t = 2)]
    pub gen_classes: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Z-normalize every series before searching.
    #[arg(long)]
    pub normalize: bool,
}

impl DataArgs {
    /// Train and test sets, after the optional transforms.
    pub fn load(&self, spec: &SpecArgs) -> Result<(LabeledDataset, LabeledDataset)> {
        let (train, test) = match (&self.train, &self.test) {
            (Some(train), Some(test)) => (
                load_tsv(train, self.delimiter.into())
                    .with_context(|| format!("loading {}", train.display()))?,
                load_tsv(test, self.delimiter.into())
                    .with_context(|| format!("loading {}", test.display()))?,
            ),
            _ => (
                gen_random_walk(self.gen_train, self.gen_length, self.gen_classes, self.seed)?,
                gen_random_walk(
                    self.gen_test,
                    self.gen_length,
                    self.gen_classes,
                    self.seed + 1,
                )?,
            ),
        };
        let transform = |d: LabeledDataset| -> Result<LabeledDataset> {
            let d = if self.normalize {
                d.map_series(|s| znormalize(s))?
            } else {
                d
            };
            if spec.derivative {
                Ok(d.map_series(|s| derivative(s))?)
            } else {
                Ok(d)
            }
        };
        Ok((transform(train)?, transform(test)?))
    }

    pub fn seed(&self) -> Option<u64> {
        self.train.is_none().then_some(self.seed)
    }
}

#[derive(Debug, Args)]
pub struct NnArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Lower bound used to skip candidates (dtw and cdtw only).
    #[arg(long, default_value = "none")]
    pub lb: LbMode,
    /// Worker threads over test queries.
    #[arg(long, env = "ELASTIC_THREADS", default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SubseqArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Z-normalize the query and every window.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value = "none")]
    pub lb: LbMode,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Variants to time, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "base,ea,eapruned,pruned")]
    pub variants: Vec<Variant>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value = "none")]
    pub lb: LbMode,
    #[arg(long, env = "ELASTIC_THREADS", default_value_t = 1)]
    pub threads: usize,
}

/// Parses `1,2.5,-3` (commas and/or whitespace).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .with_context(|| format!("'{f}' is not a finite number"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty series");
    }
    Ok(values)
}
