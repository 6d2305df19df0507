use crate::model::MixingSpec;

use super::parity_sign;

/// Subsets `S ⊆ {0..n}` that can carry a nonzero coefficient for a given spec.
///
/// An order-`p` product `σ_{i1}..σ_{ip}` collapses to the product over indices
/// of odd multiplicity, a subset of size at most `p` with the parity of `p`.
/// Singletons are always present for the field terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    n: usize,
    masks: Vec<u32>,
    /// For each spin, indices of the masks that contain it.
    containing: Vec<Vec<u32>>,
    singletons: Vec<usize>,
}

impl Basis {
    pub fn new(n: usize, spec: &MixingSpec) -> Self {
        let orders: Vec<usize> = spec.interaction_orders().collect();
        let admissible =
            |size: usize| size == 1 || orders.iter().any(|&p| size <= p && size % 2 == p % 2);
        let masks: Vec<u32> = (0u32..(1u32 << n))
            .filter(|m| admissible(m.count_ones() as usize))
            .collect();
        let mut containing = vec![Vec::new(); n];
        for (k, &m) in masks.iter().enumerate() {
            for (i, list) in containing.iter_mut().enumerate() {
                if m >> i & 1 == 1 {
                    list.push(k as u32);
                }
            }
        }
        let singletons = (0..n)
            .map(|i| {
                masks
                    .binary_search(&(1u32 << i))
                    .expect("singletons are admissible")
            })
            .collect();
        Self {
            n,
            masks,
            containing,
            singletons,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn index_of(&self, mask: u32) -> Option<usize> {
        self.masks.binary_search(&mask).ok()
    }

    pub(crate) fn singleton(&self, i: usize) -> usize {
        self.singletons[i]
    }

    /// `Σ_S c_S (−1)^{|bits ∩ S|}`.
    pub fn evaluate(&self, coeffs: &[f64], bits: u32) -> f64 {
        self.masks
            .iter()
            .zip(coeffs)
            .map(|(&m, &c)| c * parity_sign(bits, m))
            .sum()
    }

    /// Values of the polynomial on all `2^n` configurations, indexed by bits.
    ///
    /// Walks the reflected Gray code so each step flips one spin and only the
    /// terms containing it change. The running value is recomputed from scratch
    /// every 1024 steps to stop rounding drift.
    pub fn evaluate_all(&self, coeffs: &[f64]) -> Vec<f64> {
        const RESYNC: usize = 1024;
        let total = 1usize << self.n;
        let mut out = vec![0.0; total];
        let mut bits = 0u32;
        let mut value = self.evaluate(coeffs, 0);
        out[0] = value;
        for k in 1..total {
            let j = k.trailing_zeros() as usize;
            let mut delta = 0.0;
            for &idx in &self.containing[j] {
                let idx = idx as usize;
                delta += coeffs[idx] * parity_sign(bits, self.masks[idx]);
            }
            bits ^= 1 << j;
            value = if k % RESYNC == 0 {
                self.evaluate(coeffs, bits)
            } else {
                value - 2.0 * delta
            };
            out[bits as usize] = value;
        }
        out
    }
}
