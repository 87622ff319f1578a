//! Evaluation engines for any [`Recurrence`].
//!
//! * [`compute_base`]: full matrix, two rows of memory.
//! * [`compute_ea`]: Sakoe-Chiba band plus the classic early abandoning
//!   test on the minimum of each row.
//! * [`compute_eapruned`]: band, pruning of cells that can only lead to
//!   values above the cut-off, and early abandoning as soon as pruning
//!   leaves no open path.
//! * [`compute_pruned_only`]: EAPruned with the cost of the diagonal path
//!   as cut-off, so it prunes but always returns the exact cost.
//!
//! All engines lay the longer series along the rows and the shorter along
//! the columns, and count every evaluated cell.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{make_recurrence, DistanceSpec, Recurrence, Transposed};
use crate::with_recurrence;

const INF: f64 = f64::INFINITY;

/// Upper bound above which a distance is of no interest to the caller.
/// Values `<= cutoff` are kept, values `> cutoff` are pruned or abandoned.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cutoff(f64);

impl Cutoff {
    /// Never abandons.
    pub const NONE: Cutoff = Cutoff(INF);

    /// # Panics
    ///
    /// If `value` is NaN or negative.
    pub fn new(value: f64) -> Self {
        assert!(value >= 0.0, "cut-off must be >= 0, got {value}");
        Cutoff(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline(always)]
    pub fn keeps(self, v: f64) -> bool {
        v <= self.0
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::NONE
    }
}

impl From<f64> for Cutoff {
    fn from(value: f64) -> Self {
        Cutoff::new(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineResult {
    /// Exact cost, or `+inf` when abandoned or when the window admits no path.
    pub cost: f64,
    pub cells_computed: u64,
}

impl EngineResult {
    fn abandoned(cells_computed: u64) -> Self {
        Self {
            cost: INF,
            cells_computed,
        }
    }

    pub fn is_abandoned(&self) -> bool {
        self.cost == INF
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Base,
    Ea,
    EaPruned,
    PrunedOnly,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Base,
        Variant::Ea,
        Variant::EaPruned,
        Variant::PrunedOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Ea => "ea",
            Variant::EaPruned => "eapruned",
            Variant::PrunedOnly => "pruned",
        }
    }

    /// Whether the variant makes use of a caller supplied cut-off.
    pub fn uses_cutoff(self) -> bool {
        matches!(self, Variant::Ea | Variant::EaPruned)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(Variant::Base),
            "ea" | "eabase" => Ok(Variant::Ea),
            "eapruned" => Ok(Variant::EaPruned),
            "pruned" | "pruned-only" | "prune" => Ok(Variant::PrunedOnly),
            other => Err(Error::Spec(format!("unknown engine variant '{other}'"))),
        }
    }
}

/// Evaluates `$body` with `$r` bound to a view whose rows are the longer
/// series.
macro_rules! dispatch_oriented {
    ($rec:expr, |$r:ident| $body:expr) => {{
        let rec = $rec;
        if rec.rows() >= rec.cols() {
            let $r = rec;
            $body
        } else {
            let $r = &Transposed(rec);
            $body
        }
    }};
}

#[inline(always)]
fn min3(a: f64, b: f64, c: f64) -> f64 {
    // Inputs are never NaN, so a plain comparison suffices.
    let ab = if b < a { b } else { a };
    if c < ab {
        c
    } else {
        ab
    }
}

/// Full cost matrix evaluation in linear space, without window or cut-off.
pub fn compute_base<R: Recurrence>(rec: &R) -> EngineResult {
    dispatch_oriented!(rec, |r| base_impl(r))
}

fn base_impl<R: Recurrence>(rec: &R) -> EngineResult {
    let n_li = rec.rows();
    let n_co = rec.cols();
    let mut prev = vec![INF; n_co + 1];
    let mut curr = vec![INF; n_co + 1];
    curr[0] = 0.0;
    for j in 1..=n_co {
        curr[j] = rec.h_border(j);
    }
    for i in 1..=n_li {
        std::mem::swap(&mut prev, &mut curr);
        curr[0] = rec.v_border(i);
        for j in 1..=n_co {
            curr[j] = min3(
                prev[j - 1] + rec.canonical(i, j),
                prev[j] + rec.alt_row(i, j),
                curr[j - 1] + rec.alt_col(i, j),
            );
        }
    }
    EngineResult {
        cost: curr[n_co],
        cells_computed: (n_li * n_co) as u64,
    }
}

/// Windowed evaluation that abandons once a whole row, left border
/// included, exceeds the cut-off.
pub fn compute_ea<R: Recurrence>(rec: &R, window: usize, cutoff: Cutoff) -> EngineResult {
    dispatch_oriented!(rec, |r| ea_impl(r, window, cutoff))
}

fn ea_impl<R: Recurrence>(rec: &R, w: usize, cutoff: Cutoff) -> EngineResult {
    let n_li = rec.rows();
    let n_co = rec.cols();
    if w < n_li - n_co {
        return EngineResult::abandoned(0);
    }
    let mut prev = vec![INF; n_co + 1];
    let mut curr = vec![INF; n_co + 1];
    curr[0] = 0.0;
    for j in 1..=(w + 1).min(n_co) {
        curr[j] = rec.h_border(j);
    }
    let mut cells = 0u64;
    for i in 1..=n_li {
        std::mem::swap(&mut prev, &mut curr);
        let j_start = i.saturating_sub(w).max(1);
        let j_stop = (i + w).min(n_co);
        let left = if j_start == 1 { rec.v_border(i) } else { INF };
        curr[j_start - 1] = left;
        let mut row_min = left;
        for j in j_start..=j_stop {
            let v = min3(
                prev[j - 1] + rec.canonical(i, j),
                prev[j] + rec.alt_row(i, j),
                curr[j - 1] + rec.alt_col(i, j),
            );
            row_min = row_min.min(v);
            curr[j] = v;
        }
        cells += (j_stop + 1 - j_start) as u64;
        if !cutoff.keeps(row_min) {
            return EngineResult::abandoned(cells);
        }
    }
    EngineResult {
        cost: curr[n_co],
        cells_computed: cells,
    }
}

/// Debug-only record of which slice of the previous row holds values
/// written for that row. Reads outside it would see stale data.
#[derive(Clone, Copy)]
struct Span {
    #[cfg(debug_assertions)]
    lo: usize,
    #[cfg(debug_assertions)]
    hi: usize,
}

impl Span {
    #[inline(always)]
    #[allow(unused_variables)]
    fn new(lo: usize, hi: usize) -> Self {
        Span {
            #[cfg(debug_assertions)]
            lo,
            #[cfg(debug_assertions)]
            hi,
        }
    }

    #[inline(always)]
    #[allow(unused_variables)]
    fn check(&self, j: usize) {
        #[cfg(debug_assertions)]
        debug_assert!(
            self.lo <= j && j <= self.hi,
            "read of stale previous-row cell {j} outside [{}, {}]",
            self.lo,
            self.hi
        );
    }
}

/// Windowed evaluation with pruning and early abandoning.
///
/// Returns the exact windowed cost whenever it is `<= cutoff`, and `+inf`
/// otherwise.
pub fn compute_eapruned<R: Recurrence>(rec: &R, window: usize, cutoff: Cutoff) -> EngineResult {
    dispatch_oriented!(rec, |r| eapruned_impl(r, window, cutoff))
}

fn eapruned_impl<R: Recurrence>(rec: &R, w: usize, cutoff: Cutoff) -> EngineResult {
    let n_li = rec.rows();
    let n_co = rec.cols();
    if w < n_li - n_co {
        return EngineResult::abandoned(0);
    }
    let co = cutoff.value();
    let mut prev = vec![INF; n_co + 1];
    let mut curr = vec![INF; n_co + 1];
    curr[0] = 0.0;
    let h_end = (w + 1).min(n_co);
    for j in 1..=h_end {
        curr[j] = rec.h_border(j);
    }

    // First column of the row that is not a discard point.
    let mut next_start = 1usize;
    // Every cell of the previous row at or after this column is above the
    // cut-off. For row 0 it follows the first border cell above the cut-off.
    let mut pruning_point = (0..=h_end).rev().find(|&j| curr[j] <= co).unwrap_or(0) + 1;
    let mut span = Span::new(0, h_end);
    let mut cells = 0u64;

    for i in 1..=n_li {
        std::mem::swap(&mut prev, &mut curr);
        let j_start = i.saturating_sub(w).max(next_start);
        let j_stop = (i + w).min(n_co);
        next_start = j_start;
        let mut next_pruning_point = j_start;
        let mut j = j_start;

        // Stage 1: left border, computed while the band touches column 0.
        let left = if j_start == 1 { rec.v_border(i) } else { INF };
        curr[j_start - 1] = left;

        // Stage 2: discard points. Their left neighbour is above the cut-off,
        // so only the diagonal and top dependencies matter.
        let discarding = left > co;
        if discarding {
            while j < pruning_point && j == next_start {
                span.check(j - 1);
                span.check(j);
                let v = (prev[j - 1] + rec.canonical(i, j)).min(prev[j] + rec.alt_row(i, j));
                curr[j] = v;
                cells += 1;
                if v <= co {
                    next_pruning_point = j + 1;
                } else {
                    next_start += 1;
                }
                j += 1;
            }
        }

        // Stage 3: all three dependencies, up to the previous pruning point.
        let stage3_end = pruning_point.min(j_stop + 1);
        while j < stage3_end {
            span.check(j - 1);
            span.check(j);
            let v = min3(
                prev[j - 1] + rec.canonical(i, j),
                prev[j] + rec.alt_row(i, j),
                curr[j - 1] + rec.alt_col(i, j),
            );
            curr[j] = v;
            cells += 1;
            if v <= co {
                next_pruning_point = j + 1;
            }
            j += 1;
        }

        // Stage 4: at the pruning point the top dependency is above the cut-off.
        if j <= j_stop {
            span.check(j - 1);
            let v = if discarding && j == next_start {
                let v = prev[j - 1] + rec.canonical(i, j);
                if v > co {
                    return EngineResult::abandoned(cells + 1);
                }
                v
            } else {
                (prev[j - 1] + rec.canonical(i, j)).min(curr[j - 1] + rec.alt_col(i, j))
            };
            curr[j] = v;
            cells += 1;
            if v <= co {
                next_pruning_point = j + 1;
            }
            j += 1;
        } else if discarding && j == next_start {
            // Discard points cover the whole row.
            return EngineResult::abandoned(cells);
        }

        // Stage 5: past the pruning point only the left dependency can be
        // under the cut-off; stop at the first cell above it.
        while j <= j_stop && j == next_pruning_point {
            let v = curr[j - 1] + rec.alt_col(i, j);
            curr[j] = v;
            cells += 1;
            if v <= co {
                next_pruning_point = j + 1;
            }
            j += 1;
        }

        span = Span::new(j_start - 1, j - 1);
        pruning_point = next_pruning_point;
    }

    // The last cell is exact only if it was reached and kept.
    let cost = if pruning_point > n_co {
        curr[n_co]
    } else {
        INF
    };
    EngineResult {
        cost,
        cells_computed: cells,
    }
}

/// Cost of the path that follows the diagonal for the length of the shorter
/// series, then finishes along the last column of the longer one. Any
/// complete path bounds the optimal cost from above.
///
/// Returns `+inf` when the window admits no path.
pub fn diagonal_upper_bound<R: Recurrence>(rec: &R, window: usize) -> f64 {
    dispatch_oriented!(rec, |r| diagonal_impl(r, window))
}

fn diagonal_impl<R: Recurrence>(rec: &R, w: usize) -> f64 {
    let n_li = rec.rows();
    let n_co = rec.cols();
    if w < n_li - n_co {
        return INF;
    }
    let mut acc = 0.0;
    for k in 1..=n_co {
        acc += rec.canonical(k, k);
    }
    for i in (n_co + 1)..=n_li {
        acc += rec.alt_row(i, n_co);
    }
    acc
}

/// EAPruned driven by [`diagonal_upper_bound`]: prunes, never abandons.
pub fn compute_pruned_only<R: Recurrence>(rec: &R, window: usize) -> EngineResult {
    let bound = diagonal_upper_bound(rec, window);
    if bound == INF {
        return EngineResult::abandoned(0);
    }
    compute_eapruned(rec, window, Cutoff::new(bound))
}

/// Builds the recurrence for `spec` and evaluates it with `variant`.
///
/// The cut-off is only used by [`Variant::Ea`] and [`Variant::EaPruned`].
pub fn distance(
    spec: &DistanceSpec,
    variant: Variant,
    s: &[f64],
    t: &[f64],
    cutoff: Cutoff,
) -> Result<EngineResult> {
    let rec = make_recurrence(spec, s, t)?;
    Ok(evaluate(&rec, spec, variant, cutoff))
}

/// Evaluates an already built recurrence; see [`distance`].
pub fn evaluate(
    rec: &crate::kernels::AnyRecurrence<'_>,
    spec: &DistanceSpec,
    variant: Variant,
    cutoff: Cutoff,
) -> EngineResult {
    let longest = rec.rows().max(rec.cols());
    let w = spec.window.resolve(longest);
    with_recurrence!(rec, |r| match variant {
        Variant::Base if w >= longest => compute_base(r),
        Variant::Base => compute_ea(r, w, Cutoff::NONE),
        Variant::Ea => compute_ea(r, w, cutoff),
        Variant::EaPruned => compute_eapruned(r, w, cutoff),
        Variant::PrunedOnly => compute_pruned_only(r, w),
    })
}
