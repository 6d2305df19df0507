use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::MixingSpec;
use crate::rng::SeedKey;

use super::{check_cap, Basis, SpinConfiguration};

/// I.i.d. standard Gaussians `g_{i1..ip}` in row-major order over `{0..n}^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingArray {
    pub p: usize,
    pub values: Vec<f64>,
}

/// One draw of every Gaussian in the Hamiltonian of a size-`n` system.
///
/// Besides the raw arrays the realization keeps the reduced polynomial in two
/// pieces: the interaction part `X(σ) = Σ_{p≥2} β_p H_{N,p}(σ)` and the random
/// field part `β_1 Σ g_i σ_i`. The deterministic field `h` is added on demand.
#[derive(Clone, Debug)]
pub struct DisorderRealization {
    n: usize,
    spec: MixingSpec,
    seed: SeedKey,
    couplings: Vec<CouplingArray>,
    field_gaussians: Vec<f64>,
    basis: Arc<Basis>,
    interaction: Vec<f64>,
    field_part: Vec<f64>,
}

/// Stream label of the site Gaussians `g_i`.
pub(crate) const FIELD_STREAM: u64 = 1;

pub fn sample_disorder(spec: &MixingSpec, n: usize, seed: SeedKey) -> Result<DisorderRealization> {
    check_cap(spec, n)?;
    let basis = Arc::new(Basis::new(n, spec));
    DisorderRealization::sample_with_basis(spec, n, seed, basis)
}

impl DisorderRealization {
    /// Samples against a prebuilt basis; the basis must belong to `(spec, n)`.
    pub fn sample_with_basis(
        spec: &MixingSpec,
        n: usize,
        seed: SeedKey,
        basis: Arc<Basis>,
    ) -> Result<Self> {
        check_cap(spec, n)?;
        if basis.n() != n {
            return Err(Error::SizeMismatch {
                left: basis.n(),
                right: n,
            });
        }
        let couplings: Vec<CouplingArray> = spec
            .interaction_orders()
            .map(|p| CouplingArray {
                p,
                values: seed.normals(p as u64, n.pow(p as u32)),
            })
            .collect();
        let field_gaussians = seed.normals(FIELD_STREAM, n);

        let mut interaction = vec![0.0; basis.len()];
        for arr in &couplings {
            let scale = spec.beta(arr.p) * (n as f64).powf(-((arr.p - 1) as f64) / 2.0);
            let mut index = vec![0usize; arr.p];
            for &g in &arr.values {
                let mask = index.iter().fold(0u32, |m, &i| m ^ (1 << i));
                let k = basis.index_of(mask).ok_or_else(|| {
                    Error::InvalidParameter(format!("basis lacks subset {mask:#b}"))
                })?;
                interaction[k] += scale * g;
                // odometer over {0..n}^p, last index fastest
                for slot in index.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        let mut field_part = vec![0.0; basis.len()];
        let b1 = spec.beta(1);
        for (i, g) in field_gaussians.iter().enumerate() {
            field_part[basis.singleton(i)] = b1 * g;
        }
        Ok(Self {
            n,
            spec: spec.clone(),
            seed,
            couplings,
            field_gaussians,
            basis,
            interaction,
            field_part,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &MixingSpec {
        &self.spec
    }

    pub fn seed(&self) -> SeedKey {
        self.seed
    }

    pub fn couplings(&self) -> &[CouplingArray] {
        &self.couplings
    }

    pub fn field_gaussians(&self) -> &[f64] {
        &self.field_gaussians
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    /// Coefficients of `X(σ)` over the basis.
    pub fn interaction_coefficients(&self) -> &[f64] {
        &self.interaction
    }

    /// Coefficients of `β_1 Σ g_i σ_i` over the basis.
    pub fn field_part_coefficients(&self) -> &[f64] {
        &self.field_part
    }

    /// Coefficients of the full Hamiltonian `X + field part + h Σ σ_i`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .interaction
            .iter()
            .zip(&self.field_part)
            .map(|(x, z)| x + z)
            .collect();
        add_uniform_field(&self.basis, &mut c, self.spec.h());
        c
    }
}

pub(crate) fn add_uniform_field(basis: &Basis, coeffs: &mut [f64], h: f64) {
    for i in 0..basis.n() {
        coeffs[basis.singleton(i)] += h;
    }
}

/// `H(σ)` for one configuration.
pub fn energy(real: &DisorderRealization, sigma: &SpinConfiguration) -> Result<f64> {
    if sigma.n() != real.n {
        return Err(Error::SizeMismatch {
            left: real.n,
            right: sigma.n(),
        });
    }
    Ok(real.basis.evaluate(&real.coefficients(), sigma.bits()))
}
