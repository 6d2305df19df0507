use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `k`-atom probability measure on `[0, 1]` stored through its CDF.
///
/// `μ([0, q]) = cdf[j]` for `q ∈ [atoms[j-1], atoms[j])` with the conventions
/// `atoms[-1] = 0` and `atoms[k] = ∞`, so `cdf[0]` applies below the first atom
/// and `cdf[k] = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if atoms.is_empty() {
            return bad("a measure needs at least one atom".into());
        }
        if cdf.len() != atoms.len() + 1 {
            return bad(format!(
                "{} atoms need {} cdf values, got {}",
                atoms.len(),
                atoms.len() + 1,
                cdf.len()
            ));
        }
        if atoms.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return bad(format!("atoms {atoms:?} must lie in [0, 1]"));
        }
        if atoms.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("atoms {atoms:?} must be strictly increasing"));
        }
        if cdf.iter().any(|m| !(0.0..=1.0).contains(m)) || cdf.windows(2).any(|w| w[1] < w[0]) {
            return bad(format!("cdf {cdf:?} must be nondecreasing in [0, 1]"));
        }
        if cdf[cdf.len() - 1] != 1.0 {
            return bad(format!("cdf {cdf:?} must end at 1"));
        }
        Ok(Self { atoms, cdf })
    }

    /// Point mass at `q`.
    pub fn delta(q: f64) -> Result<Self> {
        Self::new(vec![q], vec![0.0, 1.0])
    }

    /// Measure with the given atom weights; the weights are normalized.
    pub fn from_weights(atoms: Vec<f64>, weights: &[f64]) -> Result<Self> {
        if weights.len() != atoms.len() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights {weights:?} must be nonnegative, one per atom"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        let mut cdf = Vec::with_capacity(atoms.len() + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in &weights[..weights.len() - 1] {
            acc += w / total;
            cdf.push(acc.min(1.0));
        }
        cdf.push(1.0);
        Self::new(atoms, cdf)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass of each atom.
    pub fn weights(&self) -> Vec<f64> {
        self.cdf.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `μ([0, q])`.
    pub fn cdf_at(&self, q: f64) -> f64 {
        let j = self.atoms.partition_point(|&a| a <= q);
        self.cdf[j]
    }

    /// `0`, the atoms and `1`, deduplicated and ascending.
    pub fn layer_points(&self) -> Vec<f64> {
        let mut qs = Vec::with_capacity(self.atoms.len() + 2);
        qs.push(0.0);
        qs.extend(self.atoms.iter().copied().filter(|&q| q > 0.0 && q < 1.0));
        qs.push(1.0);
        qs
    }

    /// Same measure with an extra atom carrying no mass.
    pub fn with_spurious_atom(&self, q: f64) -> Result<Self> {
        if self.atoms.contains(&q) {
            return Ok(self.clone());
        }
        let j = self.atoms.partition_point(|&a| a < q);
        let mut atoms = self.atoms.clone();
        let mut cdf = self.cdf.clone();
        atoms.insert(j, q);
        cdf.insert(j + 1, cdf[j]);
        Self::new(atoms, cdf)
    }

    /// Drops atoms lighter than `threshold` and renormalizes.
    pub fn pruned(&self, threshold: f64) -> Result<Self> {
        let w = self.weights();
        let kept: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .zip(&w)
            .filter(|(_, &w)| w > threshold)
            .map(|(&a, &w)| (a, w))
            .collect();
        if kept.is_empty() {
            return Err(Error::DegenerateMeasure(format!(
                "no atom heavier than {threshold}"
            )));
        }
        let (atoms, weights): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
        Self::from_weights(atoms, &weights)
    }
}
