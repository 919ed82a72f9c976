//! Prefix-sum accumulators for windowed kernel regression.
//!
//! For each grid point `x_i` the accumulator stores running sums over time of
//! `K_h(X_s - x_i)` and `Y_s K_h(X_s - x_i)` (plus the first and second
//! moments of `X_s - x_i` when local-linear fits are requested). Any window
//! sum is then the difference of two prefix entries, so every Nadaraya-Watson
//! or local-linear estimate over a contiguous window costs O(1).
//!
//! Layout: one row of length `n + 1` per grid point, row-major, with entry
//! `[i][t]` holding the sum over `s = 1..=t`. The same sums are also kept
//! accumulated from the end (`[i][t]` over `s = t+1..=n`): the change-point
//! scan only ever asks for a leading window `[1, t]` or a trailing window
//! `[t+1, n]`, and reading those directly avoids the cancellation of a
//! prefix difference, which matters for short trailing windows.
//!
//! Responses are stored centred on the first observation. Estimates are
//! offset back on the way out, while differences of estimates (all the CUSUM
//! scan needs) never see the offset; a constant response therefore yields
//! exactly zero differences.

use crate::error::{Error, Result};
use crate::grid::EvaluationGrid;
use crate::kernel::KernelSpec;
use crate::series::PairedSeries;

/// Relative floor on the local-linear design determinant.
///
/// A window with fewer than two observations inside the kernel support is
/// singular regardless: its determinant is zero in exact arithmetic, but
/// rounding can leave residue above this floor, so the support count is
/// tracked exactly and checked first.
pub const LL_SINGULARITY_FLOOR: f64 = 1e-12;

/// Contiguous 1-based inclusive window `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// Neumaier running sum; `value()` is the compensated total.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running sums of one quantity for a single grid point: `head[t]` over
/// `s = 1..=t` and `tail[t]` over `s = t+1..=n`.
#[derive(Debug, Clone, Copy)]
struct Running<'a> {
    head: &'a [f64],
    tail: &'a [f64],
}

impl Running<'_> {
    /// Sum over prefix coordinates `(lo, hi]`.
    #[inline]
    fn window(&self, lo: usize, hi: usize) -> f64 {
        let n = self.head.len() - 1;
        if lo == 0 {
            self.head[hi]
        } else if hi == n {
            self.tail[lo]
        } else {
            self.head[hi] - self.head[lo]
        }
    }
}

/// All running sums for one grid point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RowView<'a> {
    k: Running<'a>,
    yk: Running<'a>,
    ll: Option<LocalLinearRow<'a>>,
}

#[derive(Debug, Clone, Copy)]
struct LocalLinearRow<'a> {
    dk: Running<'a>,
    d2k: Running<'a>,
    ydk: Running<'a>,
    support: &'a [u32],
}

impl RowView<'_> {
    /// Centred N-W estimate over observations `lo+1..=hi`.
    #[inline]
    pub(crate) fn nw(&self, lo: usize, hi: usize) -> Option<f64> {
        let den = self.k.window(lo, hi);
        if den <= 0.0 {
            return None;
        }
        Some(self.yk.window(lo, hi) / den)
    }

    /// Centred local-linear intercept over observations `lo+1..=hi`.
    #[inline]
    pub(crate) fn ll(&self, lo: usize, hi: usize) -> Option<f64> {
        let mom = self.ll.as_ref()?;
        if mom.support[hi] - mom.support[lo] < 2 {
            return None;
        }
        let s0 = self.k.window(lo, hi);
        if s0 <= 0.0 {
            return None;
        }
        let s1 = mom.dk.window(lo, hi);
        let s2 = mom.d2k.window(lo, hi);
        let t0 = self.yk.window(lo, hi);
        let t1 = mom.ydk.window(lo, hi);
        let det = s0 * s2 - s1 * s1;
        if !(det > LL_SINGULARITY_FLOOR * s0 * s0) {
            return None;
        }
        Some((s2 * t0 - s1 * t1) / det)
    }
}

#[derive(Debug, Clone)]
struct Table {
    head: Vec<f64>,
    tail: Vec<f64>,
}

impl Table {
    fn zeros(len: usize) -> Self {
        Self {
            head: vec![0.0; len],
            tail: vec![0.0; len],
        }
    }

    fn row(&self, range: std::ops::Range<usize>) -> Running<'_> {
        Running {
            head: &self.head[range.clone()],
            tail: &self.tail[range],
        }
    }

    /// Fills `[base, base + terms.len()]` with running sums of `terms`.
    fn fill(&mut self, base: usize, terms: &[f64]) {
        let mut acc = CompensatedSum::default();
        self.head[base] = 0.0;
        for (t, &v) in terms.iter().enumerate() {
            acc.add(v);
            self.head[base + t + 1] = acc.value();
        }
        let mut acc = CompensatedSum::default();
        self.tail[base + terms.len()] = 0.0;
        for (t, &v) in terms.iter().enumerate().rev() {
            acc.add(v);
            self.tail[base + t] = acc.value();
        }
    }
}

#[derive(Debug, Clone)]
struct LocalLinearMoments {
    dk: Table,
    d2k: Table,
    ydk: Table,
    /// Prefix counts of observations with positive kernel weight.
    support: Vec<u32>,
}

/// Sums for `rows` grid points over a series of length `n`, filled one row
/// at a time from the centred data.
#[derive(Debug, Clone)]
struct Sums {
    n: usize,
    k: Table,
    yk: Table,
    ll: Option<LocalLinearMoments>,
    kt: Vec<f64>,
    terms: Vec<f64>,
}

impl Sums {
    fn new(n: usize, rows: usize, need_local_linear: bool) -> Self {
        let len = rows * (n + 1);
        Self {
            n,
            k: Table::zeros(len),
            yk: Table::zeros(len),
            ll: need_local_linear.then(|| LocalLinearMoments {
                dk: Table::zeros(len),
                d2k: Table::zeros(len),
                ydk: Table::zeros(len),
                support: vec![0; len],
            }),
            kt: vec![0.0; n],
            terms: vec![0.0; n],
        }
    }

    fn fill_row(&mut self, row: usize, xs: &[f64], yc: &[f64], xi: f64, h: f64, kernel: KernelSpec) {
        let base = row * (self.n + 1);
        let (kt, terms) = (&mut self.kt, &mut self.terms);
        for (w, &x) in kt.iter_mut().zip(xs) {
            *w = kernel.scaled(x - xi, h);
        }
        self.k.fill(base, kt);
        for ((v, &w), &y) in terms.iter_mut().zip(kt.iter()).zip(yc) {
            *v = y * w;
        }
        self.yk.fill(base, terms);
        if let Some(mom) = self.ll.as_mut() {
            for ((v, &w), &x) in terms.iter_mut().zip(kt.iter()).zip(xs) {
                *v = (x - xi) * w;
            }
            mom.dk.fill(base, terms);
            for ((v, &w), &x) in terms.iter_mut().zip(kt.iter()).zip(xs) {
                let d = x - xi;
                *v = d * d * w;
            }
            mom.d2k.fill(base, terms);
            for (((v, &w), &x), &y) in terms.iter_mut().zip(kt.iter()).zip(xs).zip(yc) {
                *v = y * (x - xi) * w;
            }
            mom.ydk.fill(base, terms);
            let mut count = 0u32;
            mom.support[base] = 0;
            for (t, &w) in kt.iter().enumerate() {
                count += u32::from(w > 0.0);
                mom.support[base + t + 1] = count;
            }
        }
    }

    fn row(&self, row: usize) -> RowView<'_> {
        let stride = self.n + 1;
        let range = row * stride..(row + 1) * stride;
        RowView {
            k: self.k.row(range.clone()),
            yk: self.yk.row(range.clone()),
            ll: self.ll.as_ref().map(|mom| LocalLinearRow {
                dk: mom.dk.row(range.clone()),
                d2k: mom.d2k.row(range.clone()),
                ydk: mom.ydk.row(range.clone()),
                support: &mom.support[range],
            }),
        }
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::config(format!("bandwidth must be finite and > 0, got {h}")));
    }
    Ok(())
}

fn centred_responses(series: &PairedSeries) -> (f64, Vec<f64>) {
    let ys = series.y();
    let offset = ys[0];
    (offset, ys.iter().map(|y| y - offset).collect())
}

#[derive(Debug, Clone)]
pub struct ScanAccumulator {
    h: f64,
    kernel: KernelSpec,
    grid: EvaluationGrid,
    y_offset: f64,
    sums: Sums,
}

/// Precomputes all prefix sums for `series` at every grid point. O(n·m).
pub fn build_accumulator(
    series: &PairedSeries,
    grid: &EvaluationGrid,
    h: f64,
    kernel: KernelSpec,
    need_local_linear: bool,
) -> Result<ScanAccumulator> {
    check_bandwidth(h)?;
    let (y_offset, yc) = centred_responses(series);
    let mut sums = Sums::new(series.len(), grid.len(), need_local_linear);
    for (i, &xi) in grid.points().iter().enumerate() {
        sums.fill_row(i, series.x(), &yc, xi, h, kernel);
    }
    Ok(ScanAccumulator {
        h,
        kernel,
        grid: grid.clone(),
        y_offset,
        sums,
    })
}

/// Visits the running sums of each grid point in turn while holding only
/// one row in memory. Produces the same rows as [`build_accumulator`].
pub(crate) fn for_each_row(
    series: &PairedSeries,
    grid: &EvaluationGrid,
    h: f64,
    kernel: KernelSpec,
    need_local_linear: bool,
    mut visit: impl FnMut(RowView<'_>),
) -> Result<()> {
    check_bandwidth(h)?;
    let (_, yc) = centred_responses(series);
    let mut sums = Sums::new(series.len(), 1, need_local_linear);
    for &xi in grid.points() {
        sums.fill_row(0, series.x(), &yc, xi, h, kernel);
        visit(sums.row(0));
    }
    Ok(())
}

impl ScanAccumulator {
    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn grid(&self) -> &EvaluationGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.sums.n
    }

    pub fn y_offset(&self) -> f64 {
        self.y_offset
    }

    pub fn has_local_linear(&self) -> bool {
        self.sums.ll.is_some()
    }

    /// Prefix sums of `K_h(X_s - x_i)` for `t = 0..=n`.
    pub fn cum_k(&self, i: usize) -> &[f64] {
        self.sums.row(i).k.head
    }

    /// Prefix sums of `(Y_s - c) K_h(X_s - x_i)` for `t = 0..=n`, where `c`
    /// is [`Self::y_offset`].
    pub fn cum_yk(&self, i: usize) -> &[f64] {
        self.sums.row(i).yk.head
    }

    pub(crate) fn row(&self, i: usize) -> RowView<'_> {
        self.sums.row(i)
    }

    fn check(&self, window: Window, i: usize) -> Result<()> {
        let n = self.n();
        if window.start < 1 || window.end > n || window.start > window.end {
            return Err(Error::InvalidWindow {
                start: window.start,
                end: window.end,
                n,
            });
        }
        if i >= self.grid.len() {
            return Err(Error::GridIndex {
                index: i,
                m: self.grid.len(),
            });
        }
        Ok(())
    }

    /// Nadaraya-Watson estimate at grid point `i` from the observations in
    /// `window`. `Ok(None)` when no observation has positive kernel weight.
    pub fn nw_estimate(&self, window: Window, i: usize) -> Result<Option<f64>> {
        self.check(window, i)?;
        Ok(self
            .row(i)
            .nw(window.start - 1, window.end)
            .map(|v| v + self.y_offset))
    }

    /// Local-linear intercept at grid point `i`. `Ok(None)` on an empty or
    /// numerically singular design.
    pub fn ll_estimate(&self, window: Window, i: usize) -> Result<Option<f64>> {
        self.check(window, i)?;
        if !self.has_local_linear() {
            return Err(Error::MissingLocalLinearMoments);
        }
        Ok(self
            .row(i)
            .ll(window.start - 1, window.end)
            .map(|v| v + self.y_offset))
    }
}
