//! Dynamic time warping: exact dynamic programming, window-constrained
//! search, and the multiresolution FastDTW approximation of Salvador &
//! Chan (2007).
//!
//! Costs are raw sums of local costs along the alignment; no path-length
//! normalization is applied.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Pointwise cost between two aligned values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalCost {
    /// `|a - b|`
    #[default]
    Absolute,
    /// `(a - b)^2`
    Squared,
}

impl LocalCost {
    #[inline]
    pub fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            LocalCost::Absolute => math::abs(a - b),
            LocalCost::Squared => (a - b) * (a - b),
        }
    }
}

/// DTW parameters. `min_size` is the sequence length below which FastDTW
/// falls back to the exact solver; the conventional choice is
/// `2 * radius + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtwConfig {
    pub local_cost: LocalCost,
    pub radius: usize,
    pub min_size: usize,
}

impl DtwConfig {
    pub fn new() -> Self {
        Self::with_radius(1)
    }

    pub fn with_radius(radius: usize) -> Self {
        Self {
            local_cost: LocalCost::Absolute,
            radius,
            min_size: 2 * radius + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_size < 2 {
            return Err(Error::BadConfig(alloc::format!(
                "min_size must be >= 2, got {}",
                self.min_size
            )));
        }
        Ok(())
    }
}

impl Default for DtwConfig {
    fn default() -> Self {
        Self::new()
    }
}

/// A monotone, continuous alignment between two sequences and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    /// Index pairs from `(0, 0)` to `(len_a - 1, len_b - 1)`; every step
    /// advances `i`, `j`, or both by exactly one.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of local costs along `pairs`.
    pub cost: f64,
}

impl WarpingPath {
    /// Check endpoint and step-set invariants against the sequence lengths.
    pub fn validate(&self, len_a: usize, len_b: usize) -> Result<()> {
        let Some(&first) = self.pairs.first() else {
            return Err(Error::BadWarpingPath("empty path".into()));
        };
        if first != (0, 0) {
            return Err(Error::BadWarpingPath(alloc::format!(
                "path starts at {first:?}, not (0, 0)"
            )));
        }
        let last = *self.pairs.last().expect("non-empty");
        if last != (len_a - 1, len_b - 1) {
            return Err(Error::BadWarpingPath(alloc::format!(
                "path ends at {last:?}, not ({}, {})",
                len_a - 1,
                len_b - 1
            )));
        }
        for w in self.pairs.windows(2) {
            let (i0, j0) = w[0];
            let (i1, j1) = w[1];
            let di = i1.wrapping_sub(i0);
            let dj = j1.wrapping_sub(j0);
            if di > 1 || dj > 1 || (di == 0 && dj == 0) {
                return Err(Error::BadWarpingPath(alloc::format!(
                    "invalid step {:?} -> {:?}",
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Per-row inclusive column ranges constraining the DTW search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchWindow {
    rows: Vec<(usize, usize)>,
    cols: usize,
}

impl SearchWindow {
    /// The unconstrained window over a `len_a` × `len_b` grid.
    pub fn full(len_a: usize, len_b: usize) -> Self {
        Self {
            rows: vec![(0, len_b.saturating_sub(1)); len_a],
            cols: len_b,
        }
    }

    /// Build a window from inclusive `(lo, hi)` ranges, validating the
    /// invariants: ranges in bounds, both endpoints monotone
    /// non-decreasing, consecutive rows connected, and the corner cells
    /// `(0, 0)` and `(rows - 1, cols - 1)` covered.
    pub fn from_ranges(rows: Vec<(usize, usize)>, cols: usize) -> Result<Self> {
        if rows.is_empty() || cols == 0 {
            return Err(Error::BadSearchWindow("empty window".into()));
        }
        for (i, &(lo, hi)) in rows.iter().enumerate() {
            if lo > hi || hi >= cols {
                return Err(Error::BadSearchWindow(alloc::format!(
                    "row {i} range ({lo}, {hi}) out of bounds for {cols} columns"
                )));
            }
        }
        for i in 1..rows.len() {
            if rows[i].0 < rows[i - 1].0 || rows[i].1 < rows[i - 1].1 {
                return Err(Error::BadSearchWindow(alloc::format!(
                    "row {i} not monotone non-decreasing"
                )));
            }
            if rows[i].0 > rows[i - 1].1 + 1 {
                return Err(Error::BadSearchWindow(alloc::format!(
                    "rows {} and {i} are disconnected",
                    i - 1
                )));
            }
        }
        if rows[0].0 != 0 {
            return Err(Error::BadSearchWindow("window excludes (0, 0)".into()));
        }
        if rows[rows.len() - 1].1 != cols - 1 {
            return Err(Error::BadSearchWindow(
                "window excludes the terminal cell".into(),
            ));
        }
        Ok(Self { rows, cols })
    }

    pub fn len_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Inclusive `(lo, hi)` column range of row `i`.
    pub fn row(&self, i: usize) -> (usize, usize) {
        self.rows[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.rows.len() && j >= self.rows[i].0 && j <= self.rows[i].1
    }

    /// Number of cells inside the window.
    pub fn cell_count(&self) -> usize {
        self.rows.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }
}

/// Accumulated-cost storage for the cells inside a window.
struct WindowMatrix<'w> {
    window: &'w SearchWindow,
    starts: Vec<usize>,
    data: Vec<f64>,
}

impl<'w> WindowMatrix<'w> {
    fn new(window: &'w SearchWindow) -> Self {
        let mut starts = Vec::with_capacity(window.len_rows());
        let mut total = 0;
        for i in 0..window.len_rows() {
            starts.push(total);
            let (lo, hi) = window.row(i);
            total += hi - lo + 1;
        }
        Self {
            window,
            starts,
            data: vec![f64::INFINITY; total],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = self.window.row(i);
        if j < lo || j > hi {
            f64::INFINITY
        } else {
            self.data[self.starts[i] + (j - lo)]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, _) = self.window.row(i);
        self.data[self.starts[i] + (j - lo)] = v;
    }
}

fn validate_inputs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence("dtw"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dtw input"));
    }
    Ok(())
}

/// Minimum-cost warping path over the full grid.
///
/// Ties in the backtrace prefer the diagonal step, then the predecessor
/// with the smaller row index, which makes the returned path deterministic.
pub fn dtw_exact(a: &[f64], b: &[f64], config: &DtwConfig) -> Result<WarpingPath> {
    validate_inputs(a, b)?;
    solve(a, b, &SearchWindow::full(a.len(), b.len()), config)
}

/// Minimum-cost warping path restricted to the cells of `window`.
pub fn dtw_windowed(
    a: &[f64],
    b: &[f64],
    window: &SearchWindow,
    config: &DtwConfig,
) -> Result<WarpingPath> {
    validate_inputs(a, b)?;
    if window.len_rows() != a.len() || window.cols() != b.len() {
        return Err(Error::BadSearchWindow(alloc::format!(
            "window is {} x {}, sequences are {} x {}",
            window.len_rows(),
            window.cols(),
            a.len(),
            b.len()
        )));
    }
    solve(a, b, window, config)
}

fn solve(a: &[f64], b: &[f64], window: &SearchWindow, config: &DtwConfig) -> Result<WarpingPath> {
    let n = a.len();
    let m = b.len();
    let mut acc = WindowMatrix::new(window);

    for (i, &ai) in a.iter().enumerate() {
        let (lo, hi) = window.row(i);
        for (offset, &bj) in b[lo..=hi].iter().enumerate() {
            let j = lo + offset;
            let local = config.local_cost.eval(ai, bj);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    acc.get(i - 1, j - 1)
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 { acc.get(i - 1, j) } else { f64::INFINITY };
                let left = if j > 0 { acc.get(i, j - 1) } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc.set(i, j, local + best);
        }
    }

    let cost = acc.get(n - 1, m - 1);
    if !cost.is_finite() {
        return Err(Error::BadSearchWindow(
            "terminal cell unreachable inside the window".into(),
        ));
    }

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    pairs.push((i, j));
    while i > 0 || j > 0 {
        let next = if i == 0 {
            (i, j - 1)
        } else if j == 0 {
            (i - 1, j)
        } else {
            let diag = acc.get(i - 1, j - 1);
            let up = acc.get(i - 1, j);
            let left = acc.get(i, j - 1);
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        pairs.push(next);
        (i, j) = next;
    }
    pairs.reverse();
    Ok(WarpingPath { pairs, cost })
}

/// Halve the resolution of a sequence: adjacent pairs are averaged and an
/// odd tail element is kept as-is.
pub fn coarsen(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len().div_ceil(2));
    let mut chunks = a.chunks_exact(2);
    for pair in &mut chunks {
        out.push((pair[0] + pair[1]) / 2.0);
    }
    if let [tail] = chunks.remainder() {
        out.push(*tail);
    }
    out
}

/// Project a half-resolution warping path onto the full grid and dilate it
/// by `radius` cells in every direction.
///
/// Each coarse cell `(i, j)` covers the fine cells `{2i, 2i+1} × {2j, 2j+1}`
/// clipped to the grid; the dilated set is normalized into per-row
/// contiguous, monotone ranges.
pub fn expand_window(
    path: &WarpingPath,
    len_a: usize,
    len_b: usize,
    radius: usize,
) -> Result<SearchWindow> {
    let coarse_a = len_a.div_ceil(2);
    let coarse_b = len_b.div_ceil(2);
    path.validate(coarse_a, coarse_b)?;

    let mut raw = vec![(usize::MAX, 0usize); len_a];
    for &(ci, cj) in &path.pairs {
        let j_lo = 2 * cj;
        let j_hi = (2 * cj + 1).min(len_b - 1);
        for fi in [2 * ci, 2 * ci + 1] {
            if fi < len_a {
                raw[fi].0 = raw[fi].0.min(j_lo);
                raw[fi].1 = raw[fi].1.max(j_hi);
            }
        }
    }

    let mut rows = Vec::with_capacity(len_a);
    for f in 0..len_a {
        let lo_row = f.saturating_sub(radius);
        let hi_row = (f + radius).min(len_a - 1);
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for &(row_lo, row_hi) in &raw[lo_row..=hi_row] {
            lo = lo.min(row_lo);
            hi = hi.max(row_hi);
        }
        rows.push((lo.saturating_sub(radius), (hi + radius).min(len_b - 1)));
    }

    for f in (0..len_a - 1).rev() {
        rows[f].0 = rows[f].0.min(rows[f + 1].0);
    }
    for f in 1..len_a {
        rows[f].1 = rows[f].1.max(rows[f - 1].1);
    }

    SearchWindow::from_ranges(rows, len_b)
}

/// FastDTW: recursively coarsen, solve, and refine the projected path
/// within a window dilated by `config.radius`.
///
/// With a radius at least as large as the longer input this reproduces the
/// exact DTW cost.
pub fn fastdtw(a: &[f64], b: &[f64], config: &DtwConfig) -> Result<WarpingPath> {
    validate_inputs(a, b)?;
    config.validate()?;
    fastdtw_inner(a, b, config)
}

fn fastdtw_inner(a: &[f64], b: &[f64], config: &DtwConfig) -> Result<WarpingPath> {
    if a.len().max(b.len()) <= config.min_size {
        return dtw_exact(a, b, config);
    }
    let coarse_a = coarsen(a);
    let coarse_b = coarsen(b);
    let coarse_path = fastdtw_inner(&coarse_a, &coarse_b, config)?;
    let window = expand_window(&coarse_path, a.len(), b.len(), config.radius)?;
    dtw_windowed(a, b, &window, config)
}
