use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::NormalRule;

/// Symmetric uniform grid `{−L, −L+δ, .., L}` plus the resolution of the
/// Gaussian quadrature used on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    half_width: f64,
    spacing: f64,
    gh_nodes: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        Self {
            half_width: 10.0,
            spacing: 1.0 / 64.0,
            gh_nodes: 40,
        }
    }
}

impl XGrid {
    pub fn new(half_width: f64, spacing: f64, gh_nodes: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L = {half_width} must be positive"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0 && spacing <= half_width) {
            return Err(Error::InvalidParameter(format!(
                "delta = {spacing} must lie in (0, L]"
            )));
        }
        let ratio = half_width / spacing;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "L / delta = {ratio} must be an integer"
            )));
        }
        if gh_nodes < 2 {
            return Err(Error::InvalidParameter(
                "gh_nodes must be at least 2".into(),
            ));
        }
        Ok(Self {
            half_width,
            spacing,
            gh_nodes,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn gh_nodes(&self) -> usize {
        self.gh_nodes
    }

    /// Number of nodes on each side of zero.
    pub fn half_count(&self) -> usize {
        (self.half_width / self.spacing).round() as usize
    }

    pub fn len(&self) -> usize {
        2 * self.half_count() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - self.half_count() as f64) * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to `x`, if `x` is on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = x / self.spacing + self.half_count() as f64;
        let i = s.round();
        if (s - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.len() {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Rule for `E f(x + spread·Z)` where `f` grows at most like `e^{tilt·|z|}`
    /// after the change of variables. The node spacing in `x` is
    /// `12 / gh_nodes` (0.3 at the default) and never coarser than
    /// `20 / gh_nodes` in `z`; the rule reaches `9.5 + tilt` standard deviations.
    pub fn rule_for(&self, spread: f64, tilt: f64) -> Result<NormalRule> {
        let n0 = self.gh_nodes as f64;
        let step = if spread > 0.0 {
            (20.0 / n0).min(12.0 / (n0 * spread))
        } else {
            20.0 / n0
        };
        let reach = RULE_REACH + tilt.max(0.0);
        let count = 2.0 * (reach / step).ceil() + 1.0;
        if !(count <= MAX_RULE_NODES as f64) {
            return Err(Error::QuadratureShortfall {
                spread: spread.max(tilt),
                limit: 12.0 * MAX_RULE_NODES as f64 / (2.0 * n0 * reach),
            });
        }
        NormalRule::trapezoid(step, reach)
    }

    /// Same grid with the spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_width, self.spacing / factor as f64, self.gh_nodes)
    }

    pub fn with_gh_nodes(&self, gh_nodes: usize) -> Result<Self> {
        Self::new(self.half_width, self.spacing, gh_nodes)
    }
}

/// Standard deviations covered by an untilted rule.
const RULE_REACH: f64 = 9.5;

/// Largest rule built before reporting a quadrature shortfall.
pub const MAX_RULE_NODES: usize = 8001;

/// Cubic Hermite weights on the unit cell at fractional position `t`:
/// value weights `(h00, h10, h01, h11)` and their derivatives in `t`.
#[inline]
pub(crate) fn hermite_basis(t: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            2.0 * t3 - 3.0 * t2 + 1.0,
            t3 - 2.0 * t2 + t,
            -2.0 * t3 + 3.0 * t2,
            t3 - t2,
        ],
        [
            6.0 * t2 - 6.0 * t,
            3.0 * t2 - 4.0 * t + 1.0,
            -6.0 * t2 + 6.0 * t,
            3.0 * t2 - 2.0 * t,
        ],
    )
}

/// A displacement by `a·z` expressed on the grid: whole cells plus Hermite
/// weights for the fractional remainder.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shift {
    pub cells: isize,
    /// Coefficients of `(y_j, y'_j, y_{j+1}, y'_{j+1})` giving the value.
    pub value: [f64; 4],
    /// Coefficients of the same data giving the derivative.
    pub slope: [f64; 4],
    pub weight: f64,
}

impl Shift {
    pub fn new(offset: f64, spacing: f64, weight: f64) -> Self {
        let s = offset / spacing;
        let cells = s.floor();
        let t = s - cells;
        let (v, d) = hermite_basis(t);
        Self {
            cells: cells as isize,
            value: [v[0], v[1] * spacing, v[2], v[3] * spacing],
            slope: [d[0] / spacing, d[1], d[2] / spacing, d[3]],
            weight,
        }
    }

    #[inline]
    pub fn value_at(&self, y: &[f64], dy: &[f64], j: usize) -> f64 {
        self.value[0] * y[j]
            + self.value[1] * dy[j]
            + self.value[2] * y[j + 1]
            + self.value[3] * dy[j + 1]
    }

    #[cfg(test)]
    pub fn slope_at(&self, y: &[f64], dy: &[f64], j: usize) -> f64 {
        self.slope[0] * y[j]
            + self.slope[1] * dy[j]
            + self.slope[2] * y[j + 1]
            + self.slope[3] * dy[j + 1]
    }
}

/// Shifts `a·z_k` for every node of the rule, plus the padding (in cells)
/// needed on each side so every shifted cell lies inside a padded line.
pub(crate) fn shifts(a: f64, spacing: f64, rule: &NormalRule) -> (Vec<Shift>, usize) {
    let list: Vec<Shift> = rule
        .iter()
        .map(|(z, w)| Shift::new(a * z, spacing, w))
        .collect();
    let pad = list
        .iter()
        .map(|s| s.cells.unsigned_abs() + 2)
        .max()
        .unwrap_or(2);
    (list, pad)
}

/// Central differences of a line, one-sided at the ends.
pub(crate) fn fd_slopes(y: &[f64], spacing: f64) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut out = vec![0.0; n];
    out[0] = (y[1] - y[0]) / spacing;
    out[n - 1] = (y[n - 1] - y[n - 2]) / spacing;
    for i in 1..n - 1 {
        out[i] = (y[i + 1] - y[i - 1]) / (2.0 * spacing);
    }
    out
}
