//! Disorder sampling and exact enumeration of Gibbs measures at small N.
//!
//! Every Hamiltonian is reduced to a multilinear spin polynomial
//! `H(σ) = Σ_S c_S Π_{i∈S} σ_i` over a [`Basis`] of subsets shared by all
//! realizations of a given `(spec, n)`. Correlated and coupled Hamiltonians are
//! then plain linear combinations of coefficient vectors.

mod basis;
mod coupled;
mod disorder;
mod gibbs;
mod histogram;

pub use basis::Basis;
pub use coupled::{
    product_gibbs_expectation, restricted_free_energy, CoupledRealization, RestrictedFreeEnergy,
    Side,
};
pub(crate) use disorder::FIELD_STREAM;
pub use disorder::{energy, sample_disorder, CouplingArray, DisorderRealization};
pub use gibbs::{free_energy, GibbsTable};
pub use histogram::{overlap_histogram, overlap_histogram_direct, OverlapHistogram};

use crate::error::{Error, Result};
use crate::model::MixingSpec;

/// Largest system size supported by the bit encoding.
pub const MAX_SPINS: usize = 20;

/// Size cap when some interaction of order three or more is active.
pub const HIGH_ORDER_CAP: usize = 12;

/// Largest `n` for which `spec` may be enumerated.
pub fn enumeration_cap(spec: &MixingSpec) -> usize {
    if spec.max_active_order() <= 2 {
        MAX_SPINS
    } else {
        HIGH_ORDER_CAP
    }
}

pub(crate) fn check_cap(spec: &MixingSpec, n: usize) -> Result<()> {
    let cap = enumeration_cap(spec);
    if n == 0 {
        return Err(Error::InvalidParameter(
            "system size must be at least 1".into(),
        ));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// A configuration `σ ∈ {±1}^n`; bit `i` set means `σ_i = −1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    n: usize,
    bits: u32,
}

impl SpinConfiguration {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(Error::CapExceeded { n, cap: MAX_SPINS });
        }
        if n < 32 && bits >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "bit pattern {bits:#x} has bits beyond n = {n}"
            )));
        }
        Ok(Self { n, bits })
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << i,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "spin {s} at site {i} is not ±1"
                    )))
                }
            }
        }
        Self::new(spins.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn spin(&self, i: usize) -> i8 {
        if self.bits >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.spin(i)).collect()
    }

    pub fn flipped(&self) -> Self {
        let mask = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        Self {
            n: self.n,
            bits: !self.bits & mask,
        }
    }
}

/// `R(σ, τ) = (1/N) Σ σ_i τ_i`.
pub fn overlap(sigma: &SpinConfiguration, tau: &SpinConfiguration) -> Result<f64> {
    if sigma.n != tau.n {
        return Err(Error::SizeMismatch {
            left: sigma.n,
            right: tau.n,
        });
    }
    Ok(overlap_bits(sigma.n, sigma.bits, tau.bits))
}

#[inline]
pub(crate) fn overlap_bits(n: usize, a: u32, b: u32) -> f64 {
    (n as f64 - 2.0 * (a ^ b).count_ones() as f64) / n as f64
}

/// `(−1)^{|bits ∩ mask|}`.
#[inline]
pub(crate) fn parity_sign(bits: u32, mask: u32) -> f64 {
    if (bits & mask).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_examples() {
        let s = SpinConfiguration::from_spins(&[1, 1, -1, -1]).unwrap();
        let t = SpinConfiguration::from_spins(&[1, -1, 1, -1]).unwrap();
        assert_eq!(overlap(&s, &s).unwrap(), 1.0);
        assert_eq!(overlap(&s, &s.flipped()).unwrap(), -1.0);
        assert_eq!(overlap(&s, &t).unwrap(), 0.0);
        let u = SpinConfiguration::from_spins(&[1, 1, 1]).unwrap();
        assert!(matches!(overlap(&s, &u), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn configuration_validation() {
        assert!(SpinConfiguration::new(0, 0).is_err());
        assert!(SpinConfiguration::new(21, 0).is_err());
        assert!(SpinConfiguration::new(3, 0b1000).is_err());
        assert!(SpinConfiguration::from_spins(&[1, 0]).is_err());
        let s = SpinConfiguration::from_spins(&[1, -1, -1]).unwrap();
        assert_eq!(s.bits(), 0b110);
        assert_eq!(s.spins(), vec![1, -1, -1]);
    }

    #[test]
    fn caps() {
        let sk = MixingSpec::sk(1.0, 0.5).unwrap();
        assert_eq!(enumeration_cap(&sk), 20);
        let p4 = MixingSpec::new(vec![0.0, 1.0, 0.0, 0.5], 0.3).unwrap();
        assert_eq!(enumeration_cap(&p4), 12);
        assert!(check_cap(&p4, 13).is_err());
        assert!(check_cap(&sk, 20).is_ok());
    }
}
