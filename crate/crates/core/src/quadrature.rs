//! Quadrature rules in the normalizations used throughout the crate.

use gauss_quad::{GaussHermite, GaussLegendre};
use std::num::NonZeroUsize;

use crate::error::{Error, Result};

/// Weighted nodes for expectations over a standard normal variable.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalRule {
    pub fn new(n: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(n).ok_or_else(|| {
            Error::InvalidParameter("Gauss-Hermite needs at least one node".into())
        })?;
        let rule = GaussHermite::new(deg);
        let mut pairs: Vec<(f64, f64)> = rule
            .iter()
            .map(|&(x, w)| (std::f64::consts::SQRT_2 * x, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize: the eigen-solver leaves rounding-level asymmetry in the nodes.
        let len = pairs.len();
        for i in 0..len / 2 {
            let j = len - 1 - i;
            let z = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[j].1 + pairs[i].1);
            pairs[i] = (-z, w);
            pairs[j] = (z, w);
        }
        if len % 2 == 1 {
            pairs[len / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// Trapezoidal rule on `{k·step : |k·step| ≤ half_width}` with weights
    /// proportional to the normal density. For integrands analytic in a strip
    /// of half-width `d` the error decays like `exp(−2πd/step)`.
    pub fn trapezoid(step: f64, half_width: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && half_width >= 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "trapezoid rule needs step > 0 and a finite half-width, got {step} and {half_width}"
            )));
        }
        let k = (half_width / step).ceil() as i64;
        let nodes: Vec<f64> = (-k..=k).map(|i| i as f64 * step).collect();
        let dens: Vec<f64> = nodes.iter().map(|z| (-0.5 * z * z).exp()).collect();
        // sum symmetric pairs from the tails inward so the total is exactly even
        let mut total = dens[k as usize];
        for i in (0..k as usize).rev() {
            total += 2.0 * dens[i];
        }
        Ok(Self {
            nodes,
            weights: dens.iter().map(|d| d / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn max_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }

    /// `E f(Z)` for `Z ~ N(0, 1)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(z, w)| w * f(z)).sum()
    }
}

/// Gauss–Legendre rule mapped to the open interval `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl UnitLegendre {
    pub fn new(n: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(n).ok_or_else(|| {
            Error::InvalidParameter("Gauss-Legendre needs at least one node".into())
        })?;
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(deg)
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Weights of a composite rule on sorted nodes: Simpson when the nodes are
/// uniform and odd in number, trapezoid otherwise.
pub fn composite_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h = (nodes[n - 1] - nodes[0]) / (n - 1) as f64;
    let uniform = nodes
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs().max(1.0));
    if uniform && n % 2 == 1 && n >= 3 {
        (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect()
    } else {
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let d = 0.5 * (nodes[i + 1] - nodes[i]);
            w[i] += d;
            w[i + 1] += d;
        }
        w
    }
}
