//! Slow reference implementations used to check the engines.
//!
//! Both share the kernel layer with the engines, so a disagreement points at
//! the engine and not at a cost function.

use crate::error::{Error, Result};
use crate::kernels::{make_recurrence, DistanceSpec, Recurrence};

/// Longest series accepted by [`oracle_path_enum`].
pub const MAX_ENUM_LEN: usize = 8;

/// The whole `(1 + rows) x (1 + cols)` cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FullMatrix {
    pub rows: usize,
    pub cols: usize,
    cells: Vec<f64>,
}

impl FullMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * (self.cols + 1) + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.cells[i * (self.cols + 1) + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * (self.cols + 1)..(i + 1) * (self.cols + 1)]
    }
}

/// Fills every cell of the cost matrix. Cells outside the window are `+inf`.
pub fn oracle_full_matrix(spec: &DistanceSpec, s: &[f64], t: &[f64]) -> Result<(f64, FullMatrix)> {
    let rec = make_recurrence(spec, s, t)?;
    let (n, m) = (s.len(), t.len());
    let w = spec.window.resolve(n.max(m));
    let mut mat = FullMatrix {
        rows: n,
        cols: m,
        cells: vec![f64::INFINITY; (n + 1) * (m + 1)],
    };
    mat.set(0, 0, 0.0);
    for i in 1..=n {
        mat.set(i, 0, rec.v_border(i));
    }
    for j in 1..=m {
        mat.set(0, j, rec.h_border(j));
    }
    for i in 1..=n {
        for j in 1..=m {
            if i.abs_diff(j) > w {
                continue;
            }
            let diag = mat.get(i - 1, j - 1) + rec.canonical(i, j);
            let top = mat.get(i - 1, j) + rec.alt_row(i, j);
            let left = mat.get(i, j - 1) + rec.alt_col(i, j);
            mat.set(i, j, diag.min(top).min(left));
        }
    }
    Ok((mat.get(n, m), mat))
}

struct Enumerator<'r, R> {
    rec: &'r R,
    rows: usize,
    cols: usize,
    window: usize,
    best: f64,
}

impl<R: Recurrence> Enumerator<'_, R> {
    fn in_band(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i <= self.rows && j <= self.cols && i.abs_diff(j) <= self.window
    }

    /// Extends a path that currently ends at interior cell `(i, j)`.
    fn walk(&mut self, i: usize, j: usize, acc: f64) {
        if i == self.rows && j == self.cols {
            self.best = self.best.min(acc);
            return;
        }
        if self.in_band(i + 1, j + 1) {
            self.walk(i + 1, j + 1, acc + self.rec.canonical(i + 1, j + 1));
        }
        if self.in_band(i + 1, j) {
            self.walk(i + 1, j, acc + self.rec.alt_row(i + 1, j));
        }
        if self.in_band(i, j + 1) {
            self.walk(i, j + 1, acc + self.rec.alt_col(i, j + 1));
        }
    }

    /// Starts from border cell `(i, j)` (one of them is 0) carrying `value`.
    fn start(&mut self, i: usize, j: usize, value: f64) {
        if !value.is_finite() {
            return;
        }
        if self.in_band(i + 1, j + 1) {
            self.walk(i + 1, j + 1, value + self.rec.canonical(i + 1, j + 1));
        }
        // Leaving the top border downwards or the left border rightwards.
        if i == 0 && j >= 1 && self.in_band(1, j) {
            self.walk(1, j, value + self.rec.alt_row(1, j));
        }
        if j == 0 && i >= 1 && self.in_band(i, 1) {
            self.walk(i, 1, value + self.rec.alt_col(i, 1));
        }
    }
}

/// Minimum over every monotone, continuous path through the matrix. Paths
/// may begin anywhere on the borders (only finite borders matter).
pub fn oracle_path_enum(spec: &DistanceSpec, s: &[f64], t: &[f64]) -> Result<f64> {
    if s.len() > MAX_ENUM_LEN || t.len() > MAX_ENUM_LEN {
        return Err(Error::Size(format!(
            "lengths {} and {} exceed {MAX_ENUM_LEN}",
            s.len(),
            t.len()
        )));
    }
    let rec = make_recurrence(spec, s, t)?;
    let mut e = Enumerator {
        rec: &rec,
        rows: s.len(),
        cols: t.len(),
        window: spec.window.resolve(s.len().max(t.len())),
        best: f64::INFINITY,
    };
    e.start(0, 0, 0.0);
    for i in 1..=s.len() {
        e.start(i, 0, rec.v_border(i));
    }
    for j in 1..=t.len() {
        e.start(0, j, rec.h_border(j));
    }
    Ok(e.best)
}
