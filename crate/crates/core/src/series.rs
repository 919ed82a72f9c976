use crate::error::{Error, Result};

/// Observed sample `{(X_t, Y_t)}`, `t = 1..=n`.
///
/// Time indices used across the crate are 1-based and inclusive, so the
/// window `[s, u]` covers `x[s-1..u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 observations, got {}",
                x.len()
            )));
        }
        if let Some(t) = x.iter().zip(&y).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at t = {}",
                t + 1
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Smallest and largest regressor value.
    pub fn x_range(&self) -> (f64, f64) {
        self.x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Copy of the observations `start..=end` (1-based, inclusive).
    pub fn subseries(&self, start: usize, end: usize) -> Result<Self> {
        let n = self.len();
        if start < 1 || end > n || end < start + 1 {
            return Err(Error::InvalidWindow { start, end, n });
        }
        Ok(Self {
            x: self.x[start - 1..end].to_vec(),
            y: self.y[start - 1..end].to_vec(),
        })
    }

    /// Re-index the pairs: observation `t` of the result is observation
    /// `order[t]` (0-based) of `self`. `order` must be a permutation.
    pub fn reindexed(&self, order: &[usize]) -> Self {
        debug_assert_eq!(order.len(), self.len());
        Self {
            x: order.iter().map(|&i| self.x[i]).collect(),
            y: order.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Same regressors with responses mapped through `f`.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Index-reversed copy of a series.
pub fn reverse_series(series: &PairedSeries) -> PairedSeries {
    PairedSeries {
        x: series.x.iter().rev().copied().collect(),
        y: series.y.iter().rev().copied().collect(),
    }
}
