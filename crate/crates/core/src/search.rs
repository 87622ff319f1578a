//! Nearest-neighbour search, 1-NN classification and subsequence search.
//!
//! Candidates are scanned in order. The running best distance is handed to
//! the engine as its cut-off, and a candidate only replaces the best on a
//! strictly smaller distance, so the first of several tied candidates wins.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bounds::{build_envelope, lb_keogh, Envelope};
use crate::engines::{evaluate, Cutoff, EngineResult, Variant};
use crate::error::{Error, Result};
use crate::kernels::{make_recurrence_cached, DistanceSpec, KernelCache};
use crate::series::{znormalize, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LbMode {
    #[default]
    None,
    Keogh,
    /// LB-Keogh in both directions, the second one only when needed.
    Keogh2,
}

impl LbMode {
    pub const ALL: [LbMode; 3] = [LbMode::None, LbMode::Keogh, LbMode::Keogh2];

    pub fn name(self) -> &'static str {
        match self {
            LbMode::None => "none",
            LbMode::Keogh => "keogh",
            LbMode::Keogh2 => "keogh2",
        }
    }
}

impl fmt::Display for LbMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(LbMode::None),
            "keogh" => Ok(LbMode::Keogh),
            "keogh2" => Ok(LbMode::Keogh2),
            other => Err(Error::Spec(format!("unknown lower bound '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub spec: DistanceSpec,
    pub variant: Variant,
    pub lb: LbMode,
    /// Z-normalize the query and every window in [`subsequence_search`].
    pub normalize: bool,
    /// Record a [`TraceStep`] per candidate.
    pub trace: bool,
}

impl SearchConfig {
    pub fn new(spec: DistanceSpec, variant: Variant) -> Self {
        Self {
            spec,
            variant,
            lb: LbMode::None,
            normalize: false,
            trace: false,
        }
    }

    pub fn with_lb(mut self, lb: LbMode) -> Self {
        self.lb = lb;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.lb != LbMode::None && !self.spec.kind().supports_lb_keogh() {
            return Err(Error::Spec(format!(
                "lower bound {} is only available for dtw and cdtw, not {}",
                self.lb,
                self.spec.kind()
            )));
        }
        Ok(())
    }
}

/// Per-query outcome counters. Every candidate lands in exactly one of
/// `lb_skips`, `computed` or `abandoned`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub computed: u64,
    pub abandoned: u64,
    pub lb_skips: u64,
    pub cells: u64,
}

impl SearchStats {
    pub fn candidates(&self) -> u64 {
        self.computed + self.abandoned + self.lb_skips
    }

    pub fn merge(&mut self, other: &SearchStats) {
        self.computed += other.computed;
        self.abandoned += other.abandoned;
        self.lb_skips += other.lb_skips;
        self.cells += other.cells;
    }

    fn record(&mut self, r: &EngineResult) {
        self.cells += r.cells_computed;
        if r.is_abandoned() {
            self.abandoned += 1;
        } else {
            self.computed += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub candidate: usize,
    /// Lower bound, when one was computed.
    pub lb: Option<f64>,
    /// Cut-off handed to the engine; `None` when the candidate was skipped.
    pub cutoff: Option<f64>,
    /// Best distance after this candidate.
    pub d_nn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnResult {
    pub distance: f64,
    pub index: usize,
    pub stats: SearchStats,
    pub trace: Vec<TraceStep>,
}

/// A candidate set prepared for many queries: envelopes are built once.
#[derive(Debug)]
pub struct NnSearcher<'a> {
    cfg: SearchConfig,
    candidates: Vec<&'a [f64]>,
    envelopes: Vec<Envelope>,
    cache: KernelCache,
}

impl<'a> NnSearcher<'a> {
    pub fn new<C: AsRef<[f64]>>(candidates: &'a [C], cfg: &SearchConfig) -> Result<Self> {
        cfg.validate()?;
        if candidates.is_empty() {
            return Err(Error::Search("no candidates to search".into()));
        }
        let candidates: Vec<&[f64]> = candidates.iter().map(AsRef::as_ref).collect();
        let envelopes = if cfg.lb == LbMode::None {
            Vec::new()
        } else {
            candidates
                .iter()
                .map(|c| build_envelope(c, cfg.spec.window.resolve(c.len())))
                .collect()
        };
        Ok(Self {
            cfg: cfg.clone(),
            candidates,
            envelopes,
            cache: KernelCache::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn search(&self, q: &[f64]) -> Result<NnResult> {
        let cfg = &self.cfg;
        let mode = cfg.spec.point_cost;
        let mut d_nn = f64::INFINITY;
        let mut index = None;
        let mut stats = SearchStats::default();
        let mut trace = Vec::new();
        let mut env_q: Option<Envelope> = None;

        for (k, c) in self.candidates.iter().enumerate() {
            // LB-Keogh needs equal lengths; other candidates go straight to the engine.
            let lb = if cfg.lb != LbMode::None && c.len() == q.len() {
                let first = lb_keogh(q, &self.envelopes[k], mode)?;
                if cfg.lb == LbMode::Keogh2 && first < d_nn {
                    let env_q = env_q
                        .get_or_insert_with(|| build_envelope(q, cfg.spec.window.resolve(q.len())));
                    Some(first.max(lb_keogh(c, env_q, mode)?))
                } else {
                    Some(first)
                }
            } else {
                None
            };

            if lb.is_some_and(|lb| lb >= d_nn) {
                stats.lb_skips += 1;
                if cfg.trace {
                    trace.push(TraceStep {
                        candidate: k,
                        lb,
                        cutoff: None,
                        d_nn,
                    });
                }
                continue;
            }

            let cutoff = Cutoff::new(d_nn);
            let rec = make_recurrence_cached(&cfg.spec, q, c, &self.cache)?;
            let r = evaluate(&rec, &cfg.spec, cfg.variant, cutoff);
            stats.record(&r);
            if r.cost < d_nn {
                d_nn = r.cost;
                index = Some(k);
            }
            if cfg.trace {
                trace.push(TraceStep {
                    candidate: k,
                    lb,
                    cutoff: Some(cutoff.value()),
                    d_nn,
                });
            }
        }

        let index = index.ok_or_else(|| {
            Error::Search("no candidate admits a warping path within the window".into())
        })?;
        Ok(NnResult {
            distance: d_nn,
            index,
            stats,
            trace,
        })
    }
}

/// Nearest neighbour of `q` among `candidates`. Ties go to the lowest index.
pub fn nn_search<C: AsRef<[f64]>>(
    q: &[f64],
    candidates: &[C],
    cfg: &SearchConfig,
) -> Result<NnResult> {
    NnSearcher::new(candidates, cfg)?.search(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryReport {
    pub query: usize,
    pub label: i64,
    pub predicted: i64,
    pub nn_index: usize,
    pub nn_distance: f64,
    pub stats: SearchStats,
    pub wall: Duration,
}

impl QueryReport {
    pub fn is_correct(&self) -> bool {
        self.label == self.predicted
    }
}

fn classify_one(
    searcher: &NnSearcher<'_>,
    train: &LabeledDataset,
    query: usize,
    test: &LabeledDataset,
) -> Result<QueryReport> {
    let entry = &test.entries[query];
    let start = Instant::now();
    let nn = searcher.search(&entry.series)?;
    Ok(QueryReport {
        query,
        label: entry.label,
        predicted: train.entries[nn.index].label,
        nn_index: nn.index,
        nn_distance: nn.distance,
        stats: nn.stats,
        wall: start.elapsed(),
    })
}

/// 1-NN classification of every test series against `train`, one query
/// after the other.
pub fn classify_1nn(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &SearchConfig,
) -> Result<Vec<QueryReport>> {
    let series: Vec<&[f64]> = train.series().map(|s| s.values()).collect();
    let searcher = NnSearcher::new(&series, cfg)?;
    (0..test.len())
        .map(|q| classify_one(&searcher, train, q, test))
        .collect()
}

/// Same as [`classify_1nn`] with the test queries spread over `threads`
/// workers. Reports come back in query order.
pub fn classify_1nn_parallel(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &SearchConfig,
    threads: usize,
) -> Result<Vec<QueryReport>> {
    let series: Vec<&[f64]> = train.series().map(|s| s.values()).collect();
    let searcher = NnSearcher::new(&series, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Search(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..test.len())
            .into_par_iter()
            .map(|q| classify_one(&searcher, train, q, test))
            .collect()
    })
}

pub fn accuracy(reports: &[QueryReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| r.is_correct()).count() as f64 / reports.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubseqResult {
    pub offset: usize,
    pub distance: f64,
    pub windows: u64,
    pub stats: SearchStats,
}

/// Closest window of `reference` to `q` under DTW or CDTW. Ties go to the
/// lowest offset.
pub fn subsequence_search(
    q: &[f64],
    reference: &[f64],
    cfg: &SearchConfig,
) -> Result<SubseqResult> {
    cfg.validate()?;
    if !cfg.spec.kind().supports_lb_keogh() {
        return Err(Error::Spec(format!(
            "subsequence search supports dtw and cdtw, not {}",
            cfg.spec.kind()
        )));
    }
    let m = q.len();
    if m == 0 || m > reference.len() {
        return Err(Error::Dimension(format!(
            "query of length {m} does not fit in a reference of length {}",
            reference.len()
        )));
    }
    let query = if cfg.normalize {
        znormalize(q)?.into_values()
    } else {
        q.to_vec()
    };
    let w = cfg.spec.window.resolve(m);
    let mode = cfg.spec.point_cost;
    let env_q = (cfg.lb != LbMode::None).then(|| build_envelope(&query, w));
    let cache = KernelCache::new();

    let mut best = f64::INFINITY;
    let mut offset = None;
    let mut stats = SearchStats::default();
    let windows = reference.len() - m + 1;
    let mut buf = Vec::with_capacity(m);

    for o in 0..windows {
        let raw = &reference[o..o + m];
        let window: &[f64] = if cfg.normalize {
            buf.clear();
            buf.extend(znormalize(raw)?.into_values());
            &buf
        } else {
            raw
        };
        if let Some(env_q) = &env_q {
            let mut lb = lb_keogh(window, env_q, mode)?;
            if cfg.lb == LbMode::Keogh2 && lb < best {
                lb = lb.max(lb_keogh(&query, &build_envelope(window, w), mode)?);
            }
            if lb >= best {
                stats.lb_skips += 1;
                continue;
            }
        }
        let rec = make_recurrence_cached(&cfg.spec, &query, window, &cache)?;
        let r = evaluate(&rec, &cfg.spec, cfg.variant, Cutoff::new(best));
        stats.record(&r);
        if r.cost < best {
            best = r.cost;
            offset = Some(o);
        }
    }

    let offset = offset.ok_or_else(|| Error::Search("no window admits a warping path".into()))?;
    Ok(SubseqResult {
        offset,
        distance: best,
        windows: windows as u64,
        stats,
    })
}
