//! Model parameters of the mixed p-spin Hamiltonian and its mixing function.
//!
//! The Hamiltonian is
//! `H(σ) = Σ_{p≥2} β_p N^{-(p-1)/2} Σ g_{i1..ip} σ_{i1}..σ_{ip} + Σ_i (h + β_1 g_i) σ_i`
//! and its Gaussian part has covariance `N ξ(R)` with `ξ(x) = Σ_p β_p² x^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order of the mixture.
pub const DEFAULT_PMAX: usize = 4;

/// Orders above this are rejected; the enumeration cost grows as `N^p`.
pub const MAX_PMAX: usize = 8;

/// Mixture weights `(β_1, .., β_pmax)` and the deterministic field `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSpec {
    betas: Vec<f64>,
    h: f64,
}

/// Which theorems a spec falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CltScope {
    pub even_only: bool,
    pub has_external_field: bool,
}

impl CltScope {
    pub fn applies(&self) -> bool {
        self.even_only && self.has_external_field
    }
}

impl MixingSpec {
    /// Builds a spec padded to [`DEFAULT_PMAX`] orders, or to `betas.len()` when
    /// more weights are given. Use [`MixingSpec::with_pmax`] to pin the truncation.
    pub fn new(betas: Vec<f64>, h: f64) -> Result<Self> {
        let pmax = betas.len().max(DEFAULT_PMAX);
        Self::with_pmax(betas, h, pmax)
    }

    /// `betas[p-1]` is `β_p`. The sequence is zero-padded up to `pmax`.
    pub fn with_pmax(mut betas: Vec<f64>, h: f64, pmax: usize) -> Result<Self> {
        if pmax == 0 || pmax > MAX_PMAX {
            return Err(Error::InvalidSpec(format!(
                "pmax must lie in 1..={MAX_PMAX}, got {pmax}"
            )));
        }
        if betas.len() > pmax {
            return Err(Error::InvalidSpec(format!(
                "{} mixture weights given but pmax = {pmax}",
                betas.len()
            )));
        }
        if let Some((i, b)) = betas
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || **b < 0.0)
        {
            return Err(Error::InvalidSpec(format!(
                "beta_{} = {b} must be finite and nonnegative",
                i + 1
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidSpec(format!("h = {h} must be finite")));
        }
        betas.resize(pmax, 0.0);
        Ok(Self { betas, h })
    }

    /// Pure SK-type mixture `ξ(x) = β_2² x²` with field `h`.
    pub fn sk(beta2: f64, h: f64) -> Result<Self> {
        Self::new(vec![0.0, beta2], h)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `β_p` for `p ≥ 1`; zero beyond the truncation.
    pub fn beta(&self, p: usize) -> f64 {
        if p == 0 {
            return 0.0;
        }
        self.betas.get(p - 1).copied().unwrap_or(0.0)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pmax(&self) -> usize {
        self.betas.len()
    }

    /// Orders `p ≥ 2` with `β_p > 0`.
    pub fn interaction_orders(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.pmax()).filter(|&p| self.beta(p) > 0.0)
    }

    pub fn has_interactions(&self) -> bool {
        self.interaction_orders().next().is_some()
    }

    /// Largest active interaction order, 1 when only the field is present.
    pub fn max_active_order(&self) -> usize {
        self.interaction_orders().max().unwrap_or(1)
    }

    /// `β_p = 0` for every odd `p ≥ 3`.
    pub fn is_even_only(&self) -> bool {
        (3..=self.pmax()).step_by(2).all(|p| self.beta(p) == 0.0)
    }

    /// `h² + β_1² ≠ 0`.
    pub fn has_external_field(&self) -> bool {
        self.h * self.h + self.beta(1) * self.beta(1) != 0.0
    }

    pub fn validate_for_clt(&self) -> CltScope {
        CltScope {
            even_only: self.is_even_only(),
            has_external_field: self.has_external_field(),
        }
    }

    /// `ξ(x) = Σ β_p² x^p` on `[-1, 1]`.
    pub fn xi(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                what: "xi argument",
                value: x,
                domain: "[-1, 1]",
            });
        }
        Ok(self.xi_unchecked(x))
    }

    pub fn xi_prime(&self, x: f64) -> Result<f64> {
        check_unit(x, "xi' argument")?;
        Ok(self.xi_prime_unchecked(x))
    }

    pub fn xi_second(&self, x: f64) -> Result<f64> {
        check_unit(x, "xi'' argument")?;
        Ok(self.xi_second_unchecked(x))
    }

    pub(crate) fn xi_unchecked(&self, x: f64) -> f64 {
        // Horner from the top order down; the constant term is zero.
        self.betas
            .iter()
            .rev()
            .fold(0.0, |acc, b| (acc + b * b) * x)
    }

    pub(crate) fn xi_prime_unchecked(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for p in (1..=self.pmax()).rev() {
            let b = self.beta(p);
            acc = acc * x + p as f64 * b * b;
        }
        acc
    }

    pub(crate) fn xi_second_unchecked(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for p in (2..=self.pmax()).rev() {
            let b = self.beta(p);
            acc = acc * x + (p * (p - 1)) as f64 * b * b;
        }
        acc
    }

    /// `q ξ'(q) − ξ(q)`, the antiderivative of `q ξ''(q)`.
    pub(crate) fn penalty_antiderivative(&self, q: f64) -> f64 {
        q * self.xi_prime_unchecked(q) - self.xi_unchecked(q)
    }
}

fn check_unit(x: f64, what: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: x,
            domain: "[0, 1]",
        })
    }
}
