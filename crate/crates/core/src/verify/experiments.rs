use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{
    check_cap, free_energy, overlap_histogram, Basis, CoupledRealization, DisorderRealization,
    FIELD_STREAM,
};
use crate::error::{Error, Result};
use crate::model::MixingSpec;
use crate::numeric::{log_2cosh, log_sum_exp, mean, pairwise_sum};
use crate::parisi::{guerra_bound, DiscreteMeasure, TiltSign, XGrid};
use crate::quadrature::composite_weights;
use crate::rng::SeedKey;

use super::stats::{jackknife_variance, Estimate};

/// Seed families separating the experiments; the system size is mixed into
/// the low byte so different `n` never share disorder.
pub mod family {
    pub const VARIANCE: u64 = 1;
    pub const LEMMA2_CURVE: u64 = 2;
    pub const LEMMA2_VARIANCE: u64 = 3;
    pub const CHAOS: u64 = 4;
    pub const CLT: u64 = 5;
    pub const GUERRA: u64 = 6;
    pub const BOOTSTRAP: u64 = 7;

    pub fn key(base: u64, n: usize) -> u64 {
        (base << 8) | (n as u64 & 0xff)
    }
}

/// Fewest `t` nodes accepted by [`variance_curve`].
pub const MIN_T_NODES: usize = 5;

/// Free energies or derived statistics of `M` independent disorder replicas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub spec: MixingSpec,
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub family: u64,
    pub elapsed_secs: f64,
}

fn check_replicas(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::TooFewSamples { got: m, need: min });
    }
    Ok(())
}

fn replica_key(seed: u64, family: u64, r: usize) -> SeedKey {
    SeedKey::new(seed, family, r as u64, 0)
}

/// `log Z_N` of one replica. Field-only models use the product form
/// `Σ_i log 2cosh(h + β₁ g_i)`, identical to the enumeration but free of the
/// size cap.
fn replica_free_energy(
    spec: &MixingSpec,
    n: usize,
    key: SeedKey,
    basis: &Option<Arc<Basis>>,
) -> Result<f64> {
    match basis {
        None => {
            let b1 = spec.beta(1);
            let h = spec.h();
            let g = key.normals(FIELD_STREAM, n);
            Ok(pairwise_sum(
                &g.iter().map(|x| log_2cosh(h + b1 * x)).collect::<Vec<_>>(),
            ))
        }
        Some(basis) => {
            let real = DisorderRealization::sample_with_basis(spec, n, key, basis.clone())?;
            Ok(free_energy(&real)?.0)
        }
    }
}

/// `M` free energies `log Z_N` for replicas `0..M` of a seed family.
pub fn free_energy_samples(
    spec: &MixingSpec,
    n: usize,
    m: usize,
    seed: u64,
    family: u64,
) -> Result<SampleSet> {
    check_replicas(m, 2)?;
    let basis = if spec.has_interactions() {
        check_cap(spec, n)?;
        Some(Arc::new(Basis::new(n, spec)))
    } else if n == 0 {
        return Err(Error::InvalidParameter(
            "system size must be at least 1".into(),
        ));
    } else {
        None
    };
    let start = Instant::now();
    let values = (0..m)
        .into_par_iter()
        .map(|r| replica_free_energy(spec, n, replica_key(seed, family, r), &basis))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleSet {
        spec: spec.clone(),
        n,
        m,
        values,
        seed,
        family,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub n: usize,
    pub m: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    /// `Var(f_N)/N`.
    pub variance_per_spin: Estimate,
    /// `N ξ(1)`, the Poincaré bound on `Var(f_N)`.
    pub poincare_bound: f64,
    /// `Var ≤ N ξ(1) (1 + 3 rel. s.e.)`.
    pub within_poincare: bool,
    pub positive: bool,
}

pub fn estimate_variance(
    spec: &MixingSpec,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<VarianceReport> {
    let set = free_energy_samples(spec, n, m, seed, family::key(family::VARIANCE, n))?;
    variance_report(spec, &set)
}

pub fn variance_report(spec: &MixingSpec, set: &SampleSet) -> Result<VarianceReport> {
    let n = set.n as f64;
    let variance = jackknife_variance(&set.values)?;
    let bound = n * spec.xi_unchecked(1.0);
    let rel = if variance.value > 0.0 {
        variance.se / variance.value
    } else {
        0.0
    };
    Ok(VarianceReport {
        n: set.n,
        m: set.m,
        mean: Estimate::of_mean(&set.values)?,
        variance,
        variance_per_spin: Estimate {
            value: variance.value / n,
            se: variance.se / n,
        },
        poincare_bound: bound,
        within_poincare: variance.value <= bound * (1.0 + 3.0 * rel),
        positive: variance.value > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    /// `E⟨ξ(R)⟩_t`.
    pub mean: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    pub n: usize,
    pub m: usize,
    pub curve: Vec<CurvePoint>,
    /// `N ∫₀¹ E⟨ξ(R)⟩_t dt` by the composite rule on the nodes.
    pub integral: Estimate,
    /// `Var(f_N)` from an independent seed family.
    pub variance: Estimate,
    pub combined_se: f64,
    pub identity_holds: bool,
    pub nonnegative: bool,
    pub nondecreasing: bool,
}

/// `E⟨ξ(R)⟩_t` on `t_nodes` with common random numbers across `t`, checked
/// against `Var(f_N)` through the interpolation identity.
pub fn variance_curve(
    spec: &MixingSpec,
    n: usize,
    m: usize,
    t_nodes: &[f64],
    seed: u64,
) -> Result<InterpolationReport> {
    if t_nodes.len() < MIN_T_NODES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_T_NODES} t nodes, got {}",
            t_nodes.len()
        )));
    }
    if t_nodes.windows(2).any(|w| w[1] <= w[0])
        || t_nodes[0] < 0.0
        || t_nodes[t_nodes.len() - 1] > 1.0
    {
        return Err(Error::InvalidParameter(
            "t nodes must increase within [0, 1]".into(),
        ));
    }
    check_replicas(m, 3)?;
    check_cap(spec, n)?;
    let basis = Arc::new(Basis::new(n, spec));
    let fam = family::key(family::LEMMA2_CURVE, n);
    // rows[r][j] = ⟨ξ(R)⟩ at t_j for replica r
    let rows = (0..m)
        .into_par_iter()
        .map(|r| {
            let coupled = CoupledRealization::sample_with_basis(
                spec,
                n,
                replica_key(seed, fam, r),
                basis.clone(),
            )?;
            t_nodes
                .iter()
                .map(|&t| {
                    let (a, b) = coupled.tables(t)?;
                    Ok(overlap_histogram(&a, &b)?.expectation(|q| spec.xi_unchecked(q)))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let column = |j: usize| rows.iter().map(|row| row[j]).collect::<Vec<f64>>();
    let mut curve = Vec::with_capacity(t_nodes.len());
    for (j, &t) in t_nodes.iter().enumerate() {
        let e = Estimate::of_mean(&column(j))?;
        curve.push(CurvePoint {
            t,
            mean: e.value,
            se: e.se,
        });
    }
    let w = composite_weights(t_nodes);
    let per_replica: Vec<f64> = rows
        .iter()
        .map(|row| n as f64 * row.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>())
        .collect();
    let integral = Estimate::of_mean(&per_replica)?;
    let set = free_energy_samples(spec, n, m, seed, family::key(family::LEMMA2_VARIANCE, n))?;
    let variance = jackknife_variance(&set.values)?;
    let combined_se = integral.se.hypot(variance.se);
    let nonnegative = curve.iter().all(|p| p.mean >= -2.0 * p.se);
    let nondecreasing = (1..t_nodes.len()).all(|j| {
        let diff: Vec<f64> = rows.iter().map(|row| row[j] - row[j - 1]).collect();
        let d = Estimate::of_mean(&diff).expect("at least three replicas");
        d.value >= -2.0 * d.se
    });
    Ok(InterpolationReport {
        n,
        m,
        curve,
        integral,
        variance,
        combined_se,
        identity_holds: (integral.value - variance.value).abs() <= 3.0 * combined_se,
        nonnegative,
        nondecreasing,
    })
}

/// Which coupled Gibbs measure the chaos check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaosMode {
    /// Interactions and random field both correlated through `t`.
    T,
    /// Interactions independent, random field correlated through `t`.
    Ts0,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosPoint {
    pub n: usize,
    pub m: usize,
    /// `E⟨1{|R − center| ≥ ε}⟩`.
    pub tail: Estimate,
    /// Mean overlap law, indexed by the number of disagreeing spins.
    pub histogram: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosReport {
    pub mode: ChaosMode,
    pub t: f64,
    pub center: f64,
    pub epsilon: f64,
    pub points: Vec<ChaosPoint>,
    /// Each step of the ladder decreases within 2 combined standard errors.
    pub decreasing: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn chaos_check(
    spec: &MixingSpec,
    n: usize,
    m: usize,
    t: f64,
    center: f64,
    epsilon: f64,
    mode: ChaosMode,
    seed: u64,
) -> Result<ChaosPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "[0, 1]",
        });
    }
    if mode == ChaosMode::T && !spec.is_even_only() {
        return Err(Error::ScopeViolation(
            "the u_t chaos check needs a model without odd interactions of order three or more"
                .into(),
        ));
    }
    check_replicas(m, 2)?;
    check_cap(spec, n)?;
    let basis = Arc::new(Basis::new(n, spec));
    let fam = family::key(family::CHAOS, n);
    let hists = (0..m)
        .into_par_iter()
        .map(|r| {
            let coupled = CoupledRealization::sample_with_basis(
                spec,
                n,
                replica_key(seed, fam, r),
                basis.clone(),
            )?;
            let (a, b) = match mode {
                ChaosMode::T => coupled.tables(t)?,
                ChaosMode::Ts0 => coupled.tables_ts(t, 0.0)?,
            };
            overlap_histogram(&a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    let tails: Vec<f64> = hists.iter().map(|h| h.tail_mass(center, epsilon)).collect();
    let histogram = (0..=n)
        .map(|k| pairwise_sum(&hists.iter().map(|h| h.masses()[k]).collect::<Vec<_>>()) / m as f64)
        .collect();
    Ok(ChaosPoint {
        n,
        m,
        tail: Estimate::of_mean(&tails)?,
        histogram,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn chaos_ladder(
    spec: &MixingSpec,
    ns: &[usize],
    m: usize,
    t: f64,
    center: f64,
    epsilon: f64,
    mode: ChaosMode,
    seed: u64,
) -> Result<ChaosReport> {
    let points = ns
        .iter()
        .map(|&n| chaos_check(spec, n, m, t, center, epsilon, mode, seed))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = points
        .windows(2)
        .all(|w| w[1].tail.value <= w[0].tail.value + 2.0 * w[0].tail.se.hypot(w[1].tail.se));
    Ok(ChaosReport {
        mode,
        t,
        center,
        epsilon,
        points,
        decreasing,
    })
}

/// `W = (f − mean f)/√(ν N)` over `M` replicas, centred by the sample mean.
pub fn clt_samples(spec: &MixingSpec, n: usize, m: usize, nu: f64, seed: u64) -> Result<SampleSet> {
    if !spec.validate_for_clt().applies() {
        return Err(Error::ScopeViolation(
            "the CLT needs an external field and no odd interactions of order three or more".into(),
        ));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain {
            what: "nu",
            value: nu,
            domain: "(0, inf)",
        });
    }
    let mut set = free_energy_samples(spec, n, m, seed, family::key(family::CLT, n))?;
    let centre = mean(&set.values);
    let scale = (nu * n as f64).sqrt();
    for v in set.values.iter_mut() {
        *v = (*v - centre) / scale;
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuerraReport {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub t: f64,
    pub sign: f64,
    /// `(1/N) E log Σ_{σ,τ} exp(Ĥ¹(σ) + Ĥ²(τ) ± λ N R)`.
    pub estimate: Estimate,
    pub bound: f64,
    /// `estimate ≤ bound + 3 s.e.`
    pub pass: bool,
}

/// Tilted coupled free energy by enumeration against a precomputed bound.
#[allow(clippy::too_many_arguments)]
pub fn guerra_estimate(
    spec: &MixingSpec,
    n: usize,
    m: usize,
    lambda: f64,
    t: f64,
    sign: TiltSign,
    bound: f64,
    seed: u64,
) -> Result<GuerraReport> {
    if !spec.is_even_only() {
        return Err(Error::ScopeViolation(
            "the coupled bound needs a model without odd interactions of order three or more"
                .into(),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[0, inf)",
        });
    }
    check_replicas(m, 2)?;
    check_cap(spec, n)?;
    let basis = Arc::new(Basis::new(n, spec));
    let fam = family::key(family::GUERRA, n);
    let l = sign.factor() * lambda;
    let values = (0..m)
        .into_par_iter()
        .map(|r| {
            let coupled = CoupledRealization::sample_with_basis(
                spec,
                n,
                replica_key(seed, fam, r),
                basis.clone(),
            )?;
            let (a, b) = coupled.tables_ts(t, 0.0)?;
            let hist = overlap_histogram(&a, &b)?;
            let terms: Vec<f64> = hist
                .masses()
                .iter()
                .enumerate()
                .filter(|(_, mass)| **mass > 0.0)
                .map(|(k, mass)| mass.ln() + l * (n as f64 - 2.0 * k as f64))
                .collect();
            let tilt = log_sum_exp(&terms).0;
            Ok((a.log_partition() + b.log_partition() + tilt) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let estimate = Estimate::of_mean(&values)?;
    Ok(GuerraReport {
        n,
        m,
        lambda,
        t,
        sign: sign.factor(),
        estimate,
        bound,
        pass: estimate.value <= bound + 3.0 * estimate.se,
    })
}

/// Solves for the bound and runs [`guerra_estimate`] against it.
#[allow(clippy::too_many_arguments)]
pub fn guerra_check(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    grid: &XGrid,
    n: usize,
    m: usize,
    lambda: f64,
    t: f64,
    sign: TiltSign,
    seed: u64,
) -> Result<GuerraReport> {
    if !spec.is_even_only() {
        return Err(Error::ScopeViolation(
            "the coupled bound needs a model without odd interactions of order three or more"
                .into(),
        ));
    }
    let bound = guerra_bound(spec, measure, lambda, t, sign, grid)?;
    guerra_estimate(spec, n, m, lambda, t, sign, bound, seed)
}
