use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

use super::GibbsTable;

/// Below this size the direct double sum is cheap enough and exact.
const DIRECT_MAX_N: usize = 8;

/// Law of the overlap under a product Gibbs measure.
///
/// `masses[k]` is the probability that the two configurations disagree at
/// exactly `k` sites, i.e. that `R = (n − 2k)/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapHistogram {
    n: usize,
    masses: Vec<f64>,
}

impl OverlapHistogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Overlap value of level `k`.
    pub fn level(&self, k: usize) -> f64 {
        (self.n as f64 - 2.0 * k as f64) / self.n as f64
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.level(k)).collect()
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.masses)
    }

    /// `⟨f(R)⟩`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(k, m)| m * f(self.level(k)))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|r| r)
    }

    /// `⟨1{|R − center| ≥ ε}⟩`.
    pub fn tail_mass(&self, center: f64, epsilon: f64) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(k, _)| (self.level(*k) - center).abs() >= epsilon)
            .map(|(_, m)| m)
            .sum()
    }
}

fn check_pair(t1: &GibbsTable, t2: &GibbsTable) -> Result<()> {
    if t1.n() != t2.n() {
        return Err(Error::SizeMismatch {
            left: t1.n(),
            right: t2.n(),
        });
    }
    Ok(())
}

/// Exact overlap law. Uses the direct `O(4^n)` sum for small `n` and an
/// XOR convolution by the Walsh–Hadamard transform otherwise.
pub fn overlap_histogram(t1: &GibbsTable, t2: &GibbsTable) -> Result<OverlapHistogram> {
    check_pair(t1, t2)?;
    if t1.n() <= DIRECT_MAX_N {
        return overlap_histogram_direct(t1, t2);
    }
    let n = t1.n();
    let mut a = t1.weights();
    let mut b = t2.weights();
    walsh_hadamard(&mut a);
    walsh_hadamard(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    walsh_hadamard(&mut a);
    let scale = 1.0 / a.len() as f64;
    let mut masses = vec![0.0; n + 1];
    for (x, c) in a.iter().enumerate() {
        masses[x.count_ones() as usize] += c * scale;
    }
    // Transform rounding can leave levels of true mass zero slightly negative.
    for m in &mut masses {
        if *m < 0.0 {
            *m = 0.0;
        }
    }
    Ok(OverlapHistogram { n, masses })
}

/// Exact overlap law by the double sum over configurations.
pub fn overlap_histogram_direct(t1: &GibbsTable, t2: &GibbsTable) -> Result<OverlapHistogram> {
    check_pair(t1, t2)?;
    let n = t1.n();
    let w1 = t1.weights();
    let w2 = t2.weights();
    let mut masses = vec![0.0; n + 1];
    let mut row = vec![0.0; n + 1];
    for (s, a) in w1.iter().enumerate() {
        row.iter_mut().for_each(|r| *r = 0.0);
        for (t, b) in w2.iter().enumerate() {
            row[(s ^ t).count_ones() as usize] += b;
        }
        for (m, r) in masses.iter_mut().zip(&row) {
            *m += a * r;
        }
    }
    Ok(OverlapHistogram { n, masses })
}

/// In-place unnormalized fast Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, seed: u64) -> GibbsTable {
        let energies = (0..1u64 << n)
            .map(|b| (((b * 2654435761 + seed * 97) % 1000) as f64) / 250.0 - 2.0)
            .collect();
        GibbsTable::from_energies(n, energies).unwrap()
    }

    #[test]
    fn uniform_single_spin() {
        let t = GibbsTable::from_energies(1, vec![0.0, 0.0]).unwrap();
        let h = overlap_histogram(&t, &t).unwrap();
        assert_eq!(h.masses(), &[0.5, 0.5]);
        assert_eq!(h.levels(), vec![1.0, -1.0]);
    }

    #[test]
    fn transform_matches_direct() {
        for n in [9, 11] {
            let (a, b) = (table(n, 1), table(n, 2));
            let fast = overlap_histogram(&a, &b).unwrap();
            let slow = overlap_histogram_direct(&a, &b).unwrap();
            for (x, y) in fast.masses().iter().zip(slow.masses()) {
                assert!((x - y).abs() < 1e-14);
            }
            assert!((fast.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_masses() {
        let (a, b) = (table(6, 3), table(6, 4));
        let h = overlap_histogram(&a, &b).unwrap();
        assert_eq!(h.tail_mass(0.3, 2.5), 0.0);
        assert!((h.tail_mass(0.3, 0.0) - h.total()).abs() < 1e-15);
        let mismatched = table(5, 1);
        assert!(overlap_histogram(&a, &mismatched).is_err());
    }
}
