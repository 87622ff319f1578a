//! Distance parameterizations and their cost-matrix recurrences.
//!
//! Every supported distance fills a `(1 + rows) x (1 + cols)` cost matrix
//! with the same shape of recurrence:
//!
//! ```text
//! M(0, 0) = 0
//! M(i, 0) = v_border(i)          non-decreasing in i
//! M(0, j) = h_border(j)          non-decreasing in j
//! M(i, j) = min(M(i-1, j-1) + canonical(i, j),
//!               M(i-1, j)   + alt_row(i, j),
//!               M(i, j-1)   + alt_col(i, j))
//! ```
//!
//! Indices are 1-based on both series. The engines in [`crate::engines`] only
//! see this interface, so adding a distance means adding a [`Recurrence`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointCost {
    #[default]
    Squared,
    Absolute,
}

impl PointCost {
    #[inline(always)]
    pub fn eval(self, a: f64, b: f64) -> f64 {
        let d = a - b;
        match self {
            PointCost::Squared => d * d,
            PointCost::Absolute => d.abs(),
        }
    }
}

impl FromStr for PointCost {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squared" | "sq" => Ok(PointCost::Squared),
            "absolute" | "abs" => Ok(PointCost::Absolute),
            other => Err(Error::Spec(format!("unknown point cost '{other}'"))),
        }
    }
}

pub fn point_cost(a: f64, b: f64, mode: PointCost) -> f64 {
    mode.eval(a, b)
}

/// Sakoe-Chiba band half-width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Unbounded,
    Band(usize),
}

impl Window {
    /// Band width for a pair whose longer series has `longest` points.
    /// An unbounded window becomes `longest`, which admits every cell.
    pub fn resolve(self, longest: usize) -> usize {
        match self {
            Window::Unbounded => longest,
            Window::Band(w) => w.min(longest),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Dtw,
    Cdtw,
    Wdtw,
    Erp,
    Msm,
    Twe,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 6] = [
        DistanceKind::Dtw,
        DistanceKind::Cdtw,
        DistanceKind::Wdtw,
        DistanceKind::Erp,
        DistanceKind::Msm,
        DistanceKind::Twe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Dtw => "dtw",
            DistanceKind::Cdtw => "cdtw",
            DistanceKind::Wdtw => "wdtw",
            DistanceKind::Erp => "erp",
            DistanceKind::Msm => "msm",
            DistanceKind::Twe => "twe",
        }
    }

    /// Kinds for which LB-Keogh is a valid lower bound.
    pub fn supports_lb_keogh(self) -> bool {
        matches!(self, DistanceKind::Dtw | DistanceKind::Cdtw)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Spec(format!("unknown distance '{s}'")))
    }
}

/// A distance together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Dtw,
    Cdtw,
    /// Weighted DTW, `g` controls how steeply off-diagonal cells are penalized.
    Wdtw {
        g: f64,
    },
    /// Edit distance with real penalty against the gap value.
    Erp {
        gap: f64,
    },
    /// Move-split-merge with split/merge cost `c`.
    Msm {
        c: f64,
    },
    /// Time warp edit distance with stiffness `nu` and delete penalty `lambda`.
    Twe {
        nu: f64,
        lambda: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSpec {
    pub measure: Measure,
    pub window: Window,
    pub point_cost: PointCost,
}

impl DistanceSpec {
    fn unbounded(measure: Measure) -> Self {
        Self {
            measure,
            window: Window::Unbounded,
            point_cost: PointCost::Squared,
        }
    }

    pub fn dtw() -> Self {
        Self::unbounded(Measure::Dtw)
    }

    pub fn cdtw(window: usize) -> Self {
        Self::unbounded(Measure::Cdtw).with_window(Window::Band(window))
    }

    pub fn wdtw(g: f64) -> Self {
        Self::unbounded(Measure::Wdtw { g })
    }

    pub fn erp(gap: f64, window: usize) -> Self {
        Self::unbounded(Measure::Erp { gap }).with_window(Window::Band(window))
    }

    pub fn msm(c: f64) -> Self {
        Self::unbounded(Measure::Msm { c })
    }

    pub fn twe(nu: f64, lambda: f64) -> Self {
        Self::unbounded(Measure::Twe { nu, lambda })
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_point_cost(mut self, point_cost: PointCost) -> Self {
        self.point_cost = point_cost;
        self
    }

    pub fn kind(&self) -> DistanceKind {
        match self.measure {
            Measure::Dtw => DistanceKind::Dtw,
            Measure::Cdtw => DistanceKind::Cdtw,
            Measure::Wdtw { .. } => DistanceKind::Wdtw,
            Measure::Erp { .. } => DistanceKind::Erp,
            Measure::Msm { .. } => DistanceKind::Msm,
            Measure::Twe { .. } => DistanceKind::Twe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Spec(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        }
        let needs_band = matches!(self.measure, Measure::Cdtw | Measure::Erp { .. });
        if needs_band && self.window == Window::Unbounded {
            return Err(Error::Spec(format!(
                "{} requires a finite window",
                self.kind()
            )));
        }
        match self.measure {
            Measure::Dtw | Measure::Cdtw => Ok(()),
            Measure::Wdtw { g } => non_negative("wdtw g", g),
            Measure::Erp { gap } if !gap.is_finite() => Err(Error::Spec(format!(
                "erp gap value must be finite, got {gap}"
            ))),
            Measure::Erp { .. } => Ok(()),
            Measure::Msm { c } => non_negative("msm c", c),
            Measure::Twe { nu, lambda } => {
                non_negative("twe nu", nu)?;
                non_negative("twe lambda", lambda)
            }
        }
    }
}

pub fn wdtw_weight(g: f64, d: usize, len: usize) -> f64 {
    1.0 / (1.0 + (-g * (d as f64 - len as f64 / 2.0)).exp())
}

/// Weights for every diagonal offset `0..=len`.
pub fn wdtw_weight_table(g: f64, len: usize) -> Vec<f64> {
    (0..=len).map(|d| wdtw_weight(g, d, len)).collect()
}

/// MSM split/merge cost of inserting `np` next to `x` and `y`.
#[inline(always)]
pub fn msm_split_merge_cost(np: f64, x: f64, y: f64, c: f64) -> f64 {
    if (x <= np && np <= y) || (x >= np && np >= y) {
        c
    } else {
        c + (np - x).abs().min((np - y).abs())
    }
}

/// TWE move costs `(match, deleteA, deleteB)` at cell `(i, j)` with unit
/// sampling. The point before the first one of each series has value 0.
pub fn twe_costs(
    nu: f64,
    lambda: f64,
    mode: PointCost,
    s: &[f64],
    t: &[f64],
    i: usize,
    j: usize,
) -> (f64, f64, f64) {
    let si = s[i - 1];
    let tj = t[j - 1];
    let si1 = if i > 1 { s[i - 2] } else { 0.0 };
    let tj1 = if j > 1 { t[j - 2] } else { 0.0 };
    let gap = i.abs_diff(j) as f64;
    let matched = mode.eval(si, tj) + mode.eval(si1, tj1) + nu * (gap + gap);
    let delete_a = mode.eval(si, si1) + nu + lambda;
    let delete_b = mode.eval(tj, tj1) + nu + lambda;
    (matched, delete_a, delete_b)
}

/// A cost-matrix recurrence over two series. See the module docs.
pub trait Recurrence {
    /// Length of the series laid along the rows.
    fn rows(&self) -> usize;
    /// Length of the series laid along the columns.
    fn cols(&self) -> usize;
    /// `M(i, 0)` for `i >= 1`.
    fn v_border(&self, i: usize) -> f64;
    /// `M(0, j)` for `j >= 1`.
    fn h_border(&self, j: usize) -> f64;
    fn canonical(&self, i: usize, j: usize) -> f64;
    fn alt_row(&self, i: usize, j: usize) -> f64;
    fn alt_col(&self, i: usize, j: usize) -> f64;
}

/// Swaps the roles of rows and columns.
#[derive(Debug, Clone, Copy)]
pub struct Transposed<'r, R>(pub &'r R);

impl<R: Recurrence> Recurrence for Transposed<'_, R> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.0.cols()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.0.rows()
    }
    #[inline(always)]
    fn v_border(&self, i: usize) -> f64 {
        self.0.h_border(i)
    }
    #[inline(always)]
    fn h_border(&self, j: usize) -> f64 {
        self.0.v_border(j)
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        self.0.canonical(j, i)
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, j: usize) -> f64 {
        self.0.alt_col(j, i)
    }
    #[inline(always)]
    fn alt_col(&self, i: usize, j: usize) -> f64 {
        self.0.alt_row(j, i)
    }
}

/// DTW and CDTW: every move pays the point cost, borders are infinite.
#[derive(Debug, Clone)]
pub struct DtwRecurrence<'a> {
    s: &'a [f64],
    t: &'a [f64],
    cost: PointCost,
}

impl<'a> DtwRecurrence<'a> {
    pub fn new(s: &'a [f64], t: &'a [f64], cost: PointCost) -> Self {
        Self { s, t, cost }
    }

    #[inline(always)]
    fn cell(&self, i: usize, j: usize) -> f64 {
        self.cost.eval(self.s[i - 1], self.t[j - 1])
    }
}

impl Recurrence for DtwRecurrence<'_> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.s.len()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.t.len()
    }
    #[inline(always)]
    fn v_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn h_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
    #[inline(always)]
    fn alt_col(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
}

/// WDTW: DTW with every move scaled by the weight of its diagonal offset.
#[derive(Debug, Clone)]
pub struct WdtwRecurrence<'a> {
    s: &'a [f64],
    t: &'a [f64],
    cost: PointCost,
    weights: Arc<[f64]>,
}

impl<'a> WdtwRecurrence<'a> {
    /// `weights` must come from [`wdtw_weight_table`] for the longer length.
    pub fn new(s: &'a [f64], t: &'a [f64], cost: PointCost, weights: Arc<[f64]>) -> Self {
        debug_assert!(weights.len() > s.len().max(t.len()));
        Self {
            s,
            t,
            cost,
            weights,
        }
    }

    #[inline(always)]
    fn cell(&self, i: usize, j: usize) -> f64 {
        self.weights[i.abs_diff(j)] * self.cost.eval(self.s[i - 1], self.t[j - 1])
    }
}

impl Recurrence for WdtwRecurrence<'_> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.s.len()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.t.len()
    }
    #[inline(always)]
    fn v_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn h_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
    #[inline(always)]
    fn alt_col(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j)
    }
}

/// ERP: alternate moves pay the cost of the new point against the gap value,
/// and the borders accumulate those same gap costs.
#[derive(Debug, Clone)]
pub struct ErpRecurrence<'a> {
    s: &'a [f64],
    t: &'a [f64],
    cost: PointCost,
    gap: f64,
    v_borders: Vec<f64>,
    h_borders: Vec<f64>,
}

impl<'a> ErpRecurrence<'a> {
    pub fn new(s: &'a [f64], t: &'a [f64], cost: PointCost, gap: f64) -> Self {
        let prefix = |xs: &[f64]| {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(xs.iter().map(|&x| {
                    acc += cost.eval(x, gap);
                    acc
                }))
                .collect::<Vec<_>>()
        };
        Self {
            v_borders: prefix(s),
            h_borders: prefix(t),
            s,
            t,
            cost,
            gap,
        }
    }
}

impl Recurrence for ErpRecurrence<'_> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.s.len()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.t.len()
    }
    #[inline(always)]
    fn v_border(&self, i: usize) -> f64 {
        self.v_borders[i]
    }
    #[inline(always)]
    fn h_border(&self, j: usize) -> f64 {
        self.h_borders[j]
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        self.cost.eval(self.s[i - 1], self.t[j - 1])
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, _: usize) -> f64 {
        self.cost.eval(self.s[i - 1], self.gap)
    }
    #[inline(always)]
    fn alt_col(&self, _: usize, j: usize) -> f64 {
        self.cost.eval(self.t[j - 1], self.gap)
    }
}

/// MSM: the canonical move is always the absolute difference.
#[derive(Debug, Clone)]
pub struct MsmRecurrence<'a> {
    s: &'a [f64],
    t: &'a [f64],
    c: f64,
}

impl<'a> MsmRecurrence<'a> {
    pub fn new(s: &'a [f64], t: &'a [f64], c: f64) -> Self {
        Self { s, t, c }
    }
}

impl Recurrence for MsmRecurrence<'_> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.s.len()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.t.len()
    }
    #[inline(always)]
    fn v_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn h_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        (self.s[i - 1] - self.t[j - 1]).abs()
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, j: usize) -> f64 {
        // At i == 1 the top dependency is the infinite border, any value works.
        let prev = self.s[i.max(2) - 2];
        msm_split_merge_cost(self.s[i - 1], prev, self.t[j - 1], self.c)
    }
    #[inline(always)]
    fn alt_col(&self, i: usize, j: usize) -> f64 {
        let prev = self.t[j.max(2) - 2];
        msm_split_merge_cost(self.t[j - 1], self.s[i - 1], prev, self.c)
    }
}

#[derive(Debug, Clone)]
pub struct TweRecurrence<'a> {
    s: &'a [f64],
    t: &'a [f64],
    cost: PointCost,
    nu: f64,
    lambda: f64,
}

impl<'a> TweRecurrence<'a> {
    pub fn new(s: &'a [f64], t: &'a [f64], cost: PointCost, nu: f64, lambda: f64) -> Self {
        Self {
            s,
            t,
            cost,
            nu,
            lambda,
        }
    }

    #[inline(always)]
    fn prev(xs: &[f64], i: usize) -> f64 {
        if i > 1 {
            xs[i - 2]
        } else {
            0.0
        }
    }
}

impl Recurrence for TweRecurrence<'_> {
    #[inline(always)]
    fn rows(&self) -> usize {
        self.s.len()
    }
    #[inline(always)]
    fn cols(&self) -> usize {
        self.t.len()
    }
    #[inline(always)]
    fn v_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn h_border(&self, _: usize) -> f64 {
        f64::INFINITY
    }
    #[inline(always)]
    fn canonical(&self, i: usize, j: usize) -> f64 {
        let gap = i.abs_diff(j) as f64;
        self.cost.eval(self.s[i - 1], self.t[j - 1])
            + self.cost.eval(Self::prev(self.s, i), Self::prev(self.t, j))
            + self.nu * (gap + gap)
    }
    #[inline(always)]
    fn alt_row(&self, i: usize, _: usize) -> f64 {
        self.cost.eval(self.s[i - 1], Self::prev(self.s, i)) + self.nu + self.lambda
    }
    #[inline(always)]
    fn alt_col(&self, _: usize, j: usize) -> f64 {
        self.cost.eval(self.t[j - 1], Self::prev(self.t, j)) + self.nu + self.lambda
    }
}

/// The recurrence of any supported distance, as built by [`make_recurrence`].
#[derive(Debug, Clone)]
pub enum AnyRecurrence<'a> {
    Dtw(DtwRecurrence<'a>),
    Wdtw(WdtwRecurrence<'a>),
    Erp(ErpRecurrence<'a>),
    Msm(MsmRecurrence<'a>),
    Twe(TweRecurrence<'a>),
}

/// Calls `$body` with `$rec` bound to the concrete recurrence, so engines are
/// monomorphized per distance.
#[macro_export]
macro_rules! with_recurrence {
    ($any:expr, |$rec:ident| $body:expr) => {
        match $any {
            $crate::kernels::AnyRecurrence::Dtw($rec) => $body,
            $crate::kernels::AnyRecurrence::Wdtw($rec) => $body,
            $crate::kernels::AnyRecurrence::Erp($rec) => $body,
            $crate::kernels::AnyRecurrence::Msm($rec) => $body,
            $crate::kernels::AnyRecurrence::Twe($rec) => $body,
        }
    };
}

impl Recurrence for AnyRecurrence<'_> {
    fn rows(&self) -> usize {
        with_recurrence!(self, |r| r.rows())
    }
    fn cols(&self) -> usize {
        with_recurrence!(self, |r| r.cols())
    }
    fn v_border(&self, i: usize) -> f64 {
        with_recurrence!(self, |r| r.v_border(i))
    }
    fn h_border(&self, j: usize) -> f64 {
        with_recurrence!(self, |r| r.h_border(j))
    }
    fn canonical(&self, i: usize, j: usize) -> f64 {
        with_recurrence!(self, |r| r.canonical(i, j))
    }
    fn alt_row(&self, i: usize, j: usize) -> f64 {
        with_recurrence!(self, |r| r.alt_row(i, j))
    }
    fn alt_col(&self, i: usize, j: usize) -> f64 {
        with_recurrence!(self, |r| r.alt_col(i, j))
    }
}

/// `(g.to_bits(), len)`
type WeightKey = (u64, usize);

/// Shares WDTW weight tables across many distance calls with the same
/// parameters. Safe to use from several threads.
#[derive(Debug, Default)]
pub struct KernelCache {
    weights: RwLock<HashMap<WeightKey, Arc<[f64]>>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn wdtw_weights(&self, g: f64, len: usize) -> Arc<[f64]> {
        let key = (g.to_bits(), len);
        if let Some(table) = self.weights.read().unwrap().get(&key) {
            return Arc::clone(table);
        }
        let mut map = self.weights.write().unwrap();
        Arc::clone(
            map.entry(key)
                .or_insert_with(|| wdtw_weight_table(g, len).into()),
        )
    }
}

pub fn make_recurrence<'a>(
    spec: &DistanceSpec,
    s: &'a [f64],
    t: &'a [f64],
) -> Result<AnyRecurrence<'a>> {
    build_recurrence(spec, s, t, None)
}

/// Like [`make_recurrence`], reusing tables from `cache`.
pub fn make_recurrence_cached<'a>(
    spec: &DistanceSpec,
    s: &'a [f64],
    t: &'a [f64],
    cache: &KernelCache,
) -> Result<AnyRecurrence<'a>> {
    build_recurrence(spec, s, t, Some(cache))
}

fn build_recurrence<'a>(
    spec: &DistanceSpec,
    s: &'a [f64],
    t: &'a [f64],
    cache: Option<&KernelCache>,
) -> Result<AnyRecurrence<'a>> {
    spec.validate()?;
    if s.is_empty() || t.is_empty() {
        return Err(Error::Degenerate("series must not be empty".into()));
    }
    let cost = spec.point_cost;
    Ok(match spec.measure {
        Measure::Dtw | Measure::Cdtw => AnyRecurrence::Dtw(DtwRecurrence::new(s, t, cost)),
        Measure::Wdtw { g } => {
            let len = s.len().max(t.len());
            let weights = match cache {
                Some(cache) => cache.wdtw_weights(g, len),
                None => wdtw_weight_table(g, len).into(),
            };
            AnyRecurrence::Wdtw(WdtwRecurrence::new(s, t, cost, weights))
        }
        Measure::Erp { gap } => AnyRecurrence::Erp(ErpRecurrence::new(s, t, cost, gap)),
        Measure::Msm { c } => AnyRecurrence::Msm(MsmRecurrence::new(s, t, c)),
        Measure::Twe { nu, lambda } => {
            AnyRecurrence::Twe(TweRecurrence::new(s, t, cost, nu, lambda))
        }
    })
}
