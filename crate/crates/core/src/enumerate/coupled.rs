use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::MixingSpec;
use crate::numeric::pairwise_sum;
use crate::rng::SeedKey;

use super::disorder::add_uniform_field;
use super::{
    check_cap, overlap_histogram, overlap_histogram_direct, Basis, DisorderRealization, GibbsTable,
    SpinConfiguration,
};

/// Roles of the three independent realizations inside a seed record.
const SHARED: u64 = 0;
const COPY1: u64 = 1;
const COPY2: u64 = 2;

/// Exact restricted sums are used up to this size; above it the histogram
/// comes from the transform and tiny masses lose relative precision.
const EXACT_RESTRICTED_MAX_N: usize = 14;

/// The shared disorder `Y = X + field part` and two independent copies.
#[derive(Clone, Debug)]
pub struct CoupledRealization {
    pub shared: DisorderRealization,
    pub copy1: DisorderRealization,
    pub copy2: DisorderRealization,
}

impl CoupledRealization {
    /// The copies are drawn from `seed` with its role replaced by 0, 1 and 2.
    pub fn sample(spec: &MixingSpec, n: usize, seed: SeedKey) -> Result<Self> {
        check_cap(spec, n)?;
        Self::sample_with_basis(spec, n, seed, Arc::new(Basis::new(n, spec)))
    }

    pub fn sample_with_basis(
        spec: &MixingSpec,
        n: usize,
        seed: SeedKey,
        basis: Arc<Basis>,
    ) -> Result<Self> {
        let draw = |role| {
            DisorderRealization::sample_with_basis(spec, n, seed.with_role(role), basis.clone())
        };
        Ok(Self {
            shared: draw(SHARED)?,
            copy1: draw(COPY1)?,
            copy2: draw(COPY2)?,
        })
    }

    pub fn n(&self) -> usize {
        self.shared.n()
    }

    pub fn spec(&self) -> &MixingSpec {
        self.shared.spec()
    }

    /// Tables of `H_t^1` and `H_t^2`.
    pub fn tables(&self, t: f64) -> Result<(GibbsTable, GibbsTable)> {
        self.tables_ts(t, t)
    }

    /// Tables of the Hamiltonians with interactions interpolated at `s` and
    /// the random field interpolated at `t`.
    pub fn tables_ts(&self, t: f64, s: f64) -> Result<(GibbsTable, GibbsTable)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "[0, 1]",
            });
        }
        if !(0.0..=t).contains(&s) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "[0, t]",
            });
        }
        let one = self.table(&self.copy1, t, s)?;
        let two = self.table(&self.copy2, t, s)?;
        Ok((one, two))
    }

    fn table(&self, copy: &DisorderRealization, t: f64, s: f64) -> Result<GibbsTable> {
        let (rs, rs1, rt, rt1) = (s.sqrt(), (1.0 - s).sqrt(), t.sqrt(), (1.0 - t).sqrt());
        let x0 = self.shared.interaction_coefficients();
        let z0 = self.shared.field_part_coefficients();
        let x1 = copy.interaction_coefficients();
        let z1 = copy.field_part_coefficients();
        let mut c: Vec<f64> = (0..x0.len())
            .map(|k| (rs * x0[k] + rs1 * x1[k]) + (rt * z0[k] + rt1 * z1[k]))
            .collect();
        let basis = self.shared.basis();
        add_uniform_field(basis, &mut c, self.spec().h());
        GibbsTable::from_energies(self.n(), basis.evaluate_all(&c))
    }
}

/// `Σ_{σ,τ} G_1(σ) G_2(τ) obs(σ, τ)` by the exact double sum.
pub fn product_gibbs_expectation<F>(t1: &GibbsTable, t2: &GibbsTable, obs: F) -> Result<f64>
where
    F: Fn(&SpinConfiguration, &SpinConfiguration) -> f64,
{
    if t1.n() != t2.n() {
        return Err(Error::SizeMismatch {
            left: t1.n(),
            right: t2.n(),
        });
    }
    let n = t1.n();
    let w1 = t1.weights();
    let w2 = t2.weights();
    let mut rows = Vec::with_capacity(w1.len());
    for (s, a) in w1.iter().enumerate() {
        let sigma = SpinConfiguration::new(n, s as u32)?;
        let mut acc = 0.0;
        for (t, b) in w2.iter().enumerate() {
            let tau = SpinConfiguration::new(n, t as u32)?;
            acc += b * obs(&sigma, &tau);
        }
        rows.push(a * acc);
    }
    Ok(pairwise_sum(&rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `R > u + ε`
    Above,
    /// `R < u − ε`
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RestrictedFreeEnergy {
    Finite(f64),
    /// No pair of configurations satisfies the restriction.
    Empty,
}

impl RestrictedFreeEnergy {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Empty => None,
        }
    }
}

/// `(1/N) log Σ_{restricted σ,τ} exp(Ĥ_0^1(σ) + Ĥ_0^2(τ))`.
pub fn restricted_free_energy(
    coupled: &CoupledRealization,
    t: f64,
    u: f64,
    epsilon: f64,
    side: Side,
) -> Result<RestrictedFreeEnergy> {
    let n = coupled.n();
    let (a, b) = coupled.tables_ts(t, 0.0)?;
    let hist = if n <= EXACT_RESTRICTED_MAX_N {
        overlap_histogram_direct(&a, &b)?
    } else {
        overlap_histogram(&a, &b)?
    };
    // Compare on the integer scale n·R = n − 2k to avoid rounding at the edge.
    let nf = n as f64;
    let keep = |k: usize| {
        let nr = nf - 2.0 * k as f64;
        match side {
            Side::Above => nr > nf * (u + epsilon),
            Side::Below => nr < nf * (u - epsilon),
        }
    };
    let levels: Vec<usize> = (0..=n).filter(|&k| keep(k)).collect();
    if levels.is_empty() {
        return Ok(RestrictedFreeEnergy::Empty);
    }
    let mass: f64 = levels.iter().map(|&k| hist.masses()[k]).sum();
    if mass <= 0.0 {
        return Ok(RestrictedFreeEnergy::Empty);
    }
    let log_total = a.log_partition() + b.log_partition();
    Ok(RestrictedFreeEnergy::Finite((log_total + mass.ln()) / nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{energy, overlap, overlap_histogram};

    fn coupled(spec: &MixingSpec, n: usize, r: u64) -> CoupledRealization {
        CoupledRealization::sample(spec, n, SeedKey::new(5, 2, r, 0)).unwrap()
    }

    #[test]
    fn endpoint_structure() {
        let spec = MixingSpec::new(vec![0.5, 1.0], 0.3).unwrap();
        let c = coupled(&spec, 6, 1);
        let (a, b) = c.tables(1.0).unwrap();
        assert_eq!(a, b);
        let (a, b) = c.tables_ts(0.7, 0.7).unwrap();
        let (x, y) = c.tables(0.7).unwrap();
        assert_eq!((a, b), (x, y));
        // At t = 0 copy 1 alone determines table 1.
        let (a0, _) = c.tables(0.0).unwrap();
        let mut other = c.clone();
        other.shared = coupled(&spec, 6, 9).shared;
        other.copy2 = coupled(&spec, 6, 10).copy2;
        assert_eq!(other.tables(0.0).unwrap().0, a0);
        assert!(c.tables_ts(0.5, 0.6).is_err());
        assert!(c.tables(1.5).is_err());
    }

    #[test]
    fn t_one_is_the_plain_hamiltonian() {
        let spec = MixingSpec::new(vec![0.5, 1.0], 0.3).unwrap();
        let c = coupled(&spec, 4, 2);
        let (a, _) = c.tables(1.0).unwrap();
        for bits in 0..16 {
            let s = SpinConfiguration::new(4, bits).unwrap();
            let e = energy(&c.shared, &s).unwrap();
            assert!((a.energies()[bits as usize] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn product_expectation_consistency() {
        let spec = MixingSpec::sk(1.0, 0.5).unwrap();
        let c = coupled(&spec, 5, 3);
        let (a, b) = c.tables(0.4).unwrap();
        let one = product_gibbs_expectation(&a, &b, |_, _| 1.0).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let mean_r = product_gibbs_expectation(&a, &b, |s, t| overlap(s, t).unwrap()).unwrap();
        let hist = overlap_histogram(&a, &b).unwrap();
        assert!((hist.mean() - mean_r).abs() < 1e-12);
    }

    #[test]
    fn restricted_edges() {
        let spec = MixingSpec::sk(1.0, 0.5).unwrap();
        let c = coupled(&spec, 4, 4);
        let (a, b) = c.tables_ts(0.5, 0.0).unwrap();
        let full = (a.log_partition() + b.log_partition()) / 4.0;
        let v = restricted_free_energy(&c, 0.5, 0.0, -2.5, Side::Above).unwrap();
        assert!((v.value().unwrap() - full).abs() < 1e-12);
        let e = restricted_free_energy(&c, 0.5, 0.6, 0.4, Side::Above).unwrap();
        assert_eq!(e, RestrictedFreeEnergy::Empty);
    }
}
