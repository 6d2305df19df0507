use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

use super::{check_cap, DisorderRealization, MAX_SPINS};

/// Energies of all `2^n` configurations and the log partition function.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsTable {
    n: usize,
    energies: Vec<f64>,
    max_energy: f64,
    log_partition: f64,
}

impl GibbsTable {
    /// `energies[bits]` is `H` of the configuration encoded by `bits`.
    pub fn from_energies(n: usize, energies: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(Error::CapExceeded { n, cap: MAX_SPINS });
        }
        if energies.len() != 1 << n {
            return Err(Error::SizeMismatch {
                left: 1 << n,
                right: energies.len(),
            });
        }
        let max_energy = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max_energy.is_finite() || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("Gibbs table energies"));
        }
        let shifted: Vec<f64> = energies.iter().map(|e| (e - max_energy).exp()).collect();
        let log_partition = max_energy + pairwise_sum(&shifted).ln();
        Ok(Self {
            n,
            energies,
            max_energy,
            log_partition,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    /// `log Σ_σ exp H(σ)`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Gibbs weights `exp(H − log Z)`, indexed by configuration bits.
    pub fn weights(&self) -> Vec<f64> {
        self.energies
            .iter()
            .map(|e| (e - self.log_partition).exp())
            .collect()
    }

    /// `⟨f⟩` for an observable of the configuration bits.
    pub fn expectation<F: Fn(u32) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .weights()
            .iter()
            .enumerate()
            .map(|(b, w)| w * f(b as u32))
            .collect();
        pairwise_sum(&terms)
    }
}

/// `f_N = log Z_N` by enumeration, together with the table.
pub fn free_energy(real: &DisorderRealization) -> Result<(f64, GibbsTable)> {
    check_cap(real.spec(), real.n())?;
    let energies = real.basis().evaluate_all(&real.coefficients());
    let table = GibbsTable::from_energies(real.n(), energies)?;
    Ok((table.log_partition(), table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{energy, sample_disorder, SpinConfiguration};
    use crate::model::MixingSpec;
    use crate::numeric::log_2cosh;
    use crate::rng::SeedKey;

    #[test]
    fn one_spin_closed_forms() {
        let spec = MixingSpec::sk(1.0, 0.0).unwrap();
        let real = sample_disorder(&spec, 1, SeedKey::new(0, 0, 0, 0)).unwrap();
        let g = real.couplings()[0].values[0];
        let (f, _) = free_energy(&real).unwrap();
        assert!((f - (g + 2f64.ln())).abs() < 1e-14);

        let spec = MixingSpec::new(vec![0.5], 0.2).unwrap();
        let real = sample_disorder(&spec, 1, SeedKey::new(0, 0, 5, 0)).unwrap();
        let g = real.field_gaussians()[0];
        let (f, _) = free_energy(&real).unwrap();
        assert!((f - log_2cosh(0.2 + 0.5 * g)).abs() < 1e-14);
    }

    #[test]
    fn matches_naive_log_sum() {
        let spec = MixingSpec::new(vec![0.2, 1.3], 0.4).unwrap();
        for r in 0..5 {
            let real = sample_disorder(&spec, 3, SeedKey::new(2, 0, r, 0)).unwrap();
            let (f, table) = free_energy(&real).unwrap();
            let mut z = 0.0;
            for bits in 0..8 {
                let s = SpinConfiguration::new(3, bits).unwrap();
                z += energy(&real, &s).unwrap().exp();
            }
            assert!((f - z.ln()).abs() < 1e-12);
            let w: f64 = table.weights().iter().sum();
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_overflow() {
        let table = GibbsTable::from_energies(1, vec![1000.0, 999.0]).unwrap();
        assert!((table.log_partition() - (1000.0 + (1.0 + (-1f64).exp()).ln())).abs() < 1e-12);
        assert!(GibbsTable::from_energies(2, vec![0.0; 3]).is_err());
        assert!(GibbsTable::from_energies(1, vec![0.0, f64::NAN]).is_err());
    }
}
