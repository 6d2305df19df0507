use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::MixingSpec;

use super::functional::{replica_symmetric_functional, replica_symmetric_overlap};
use super::nelder_mead::{nelder_mead, NmOptions};
use super::{parisi_functional, DiscreteMeasure, XGrid};

/// Largest number of atoms tried.
pub const MAX_ATOMS: usize = 8;

/// Atoms lighter than this are dropped before the Newton polish.
const PRUNE_WEIGHT: f64 = 1e-7;

/// Weight given to a freshly inserted atom.
const NEW_ATOM_WEIGHT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerSettings {
    pub k_start: usize,
    pub k_max: usize,
    /// Stop adding atoms once the functional improves by less than this.
    pub tol: f64,
    /// Budget of functional evaluations per simplex search.
    pub max_evals: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            k_start: 1,
            k_max: MAX_ATOMS,
            tol: 1e-7,
            max_evals: 3000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomStep {
    pub k: usize,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizedMeasure {
    pub measure: DiscreteMeasure,
    pub value: f64,
    /// Best value found for each number of atoms tried.
    pub history: Vec<AtomStep>,
    /// Improvement obtained by the last extra atom; the approximation diagnostic.
    pub gap: f64,
    /// False when the atom cap was reached before the improvement fell below `tol`.
    pub converged: bool,
}

/// Minimizes the Parisi functional over `k`-atom measures for increasing `k`.
pub fn optimize_measure(
    spec: &MixingSpec,
    grid: &XGrid,
    settings: &OptimizerSettings,
) -> Result<OptimizedMeasure> {
    if settings.k_start == 0 || settings.k_start > settings.k_max || settings.k_max > MAX_ATOMS {
        return Err(Error::InvalidParameter(format!(
            "atom counts must satisfy 1 <= k_start <= k_max <= {MAX_ATOMS}"
        )));
    }
    if (0..=20).all(|i| spec.xi_second_unchecked(i as f64 / 20.0) == 0.0) {
        // No interaction: the functional does not depend on the measure.
        let q = replica_symmetric_overlap(spec, grid)?;
        let measure = DiscreteMeasure::delta(q)?;
        let value = parisi_functional(spec, &measure, grid)?;
        return Ok(OptimizedMeasure {
            measure,
            value,
            history: vec![AtomStep {
                k: 1,
                value,
                evaluations: 1,
                converged: true,
            }],
            gap: 0.0,
            converged: true,
        });
    }

    replica_symmetric_functional(spec, 1.0, grid)?;
    let q_rs = golden_section(
        |q| replica_symmetric_functional(spec, q, grid).unwrap_or(f64::INFINITY),
        0.0,
        1.0,
        1e-10,
    );
    let mut history = Vec::new();
    let mut previous: Option<(DiscreteMeasure, f64)> = None;
    for k in settings.k_start..=settings.k_max {
        let starts = starting_points(k, q_rs, previous.as_ref().map(|p| &p.0))?;
        let (measure, value, evals, converged) =
            optimize_k(spec, grid, k, &starts, settings.max_evals)?;
        history.push(AtomStep {
            k,
            value,
            evaluations: evals,
            converged,
        });
        if let Some((prev_m, prev_v)) = previous.take() {
            let gain = prev_v - value;
            if gain < settings.tol {
                return Ok(OptimizedMeasure {
                    measure: prev_m,
                    value: prev_v,
                    history,
                    gap: gain.max(0.0),
                    converged: true,
                });
            }
        }
        previous = Some((measure, value));
    }
    let (measure, value) = previous.expect("at least one atom count tried");
    let gap = match history.as_slice() {
        [.., a, b] => (a.value - b.value).max(0.0),
        _ => f64::NAN,
    };
    Ok(OptimizedMeasure {
        measure,
        value,
        history,
        gap,
        converged: false,
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Deterministic starts for `k` atoms: the previous optimum with one atom
/// split or a new light atom inserted, and quantile-spread atoms.
fn starting_points(
    k: usize,
    q_rs: f64,
    previous: Option<&DiscreteMeasure>,
) -> Result<Vec<Vec<f64>>> {
    let mut starts = Vec::new();
    let clamp = |q: f64| q.clamp(1e-4, 1.0 - 1e-4);
    if k == 1 {
        starts.push(encode(&[clamp(q_rs)], &[1.0]));
    }
    if let Some(prev) = previous.filter(|p| p.len() + 1 == k) {
        let atoms = prev.atoms().to_vec();
        let weights = prev.weights();
        // split the lowest and the highest atom
        for j in [0, atoms.len() - 1] {
            let lo = if j == 0 { 0.0 } else { atoms[j - 1] };
            let hi = atoms.get(j + 1).copied().unwrap_or(1.0);
            let eps = 0.25 * (atoms[j] - lo).min(hi - atoms[j]);
            let mut a = atoms.clone();
            let mut w = weights.clone();
            a[j] -= eps;
            a.insert(j + 1, atoms[j] + eps);
            w[j] *= 0.5;
            w.insert(j + 1, w[j]);
            starts.push(encode(&a, &w));
            if j == atoms.len() - 1 {
                break;
            }
        }
        // a light atom above the top one
        let mut a = atoms.clone();
        a.push(0.5 * (atoms[atoms.len() - 1] + 1.0));
        let mut w = weights.clone();
        w.push(NEW_ATOM_WEIGHT);
        starts.push(encode(&a, &w));
    }
    let spread: Vec<f64> = (1..=k)
        .map(|j| clamp(q_rs * (0.5 + (j as f64) / (k as f64 + 1.0))))
        .collect();
    let mut spread = spread;
    spread.dedup();
    if spread.len() == k && spread.windows(2).all(|w| w[1] > w[0]) {
        starts.push(encode(&spread, &vec![1.0; k]));
    }
    if starts.is_empty() {
        let even: Vec<f64> = (1..=k).map(|j| j as f64 / (k as f64 + 1.0)).collect();
        starts.push(encode(&even, &vec![1.0; k]));
    }
    Ok(starts)
}

/// `θ = (atom logits (k), weight logits (k−1))`, each softmax with a fixed zero logit.
fn encode(atoms: &[f64], weights: &[f64]) -> Vec<f64> {
    let k = atoms.len();
    let mut gaps = Vec::with_capacity(k + 1);
    let mut prev = 0.0;
    for &q in atoms {
        gaps.push((q - prev).max(1e-12));
        prev = q;
    }
    gaps.push((1.0 - prev).max(1e-12));
    let last_gap = gaps[k];
    let mut theta: Vec<f64> = gaps[..k].iter().map(|g| (g / last_gap).ln()).collect();
    let total: f64 = weights.iter().sum();
    let w: Vec<f64> = weights.iter().map(|w| (w / total).max(1e-300)).collect();
    let last_w = w[k - 1];
    theta.extend(w[..k - 1].iter().map(|x| (x / last_w).ln()));
    theta
}

fn softmax_with_zero(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(0.0, f64::max);
    let mut e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    e.push((-max).exp());
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

fn decode(theta: &[f64], k: usize) -> Result<DiscreteMeasure> {
    let gaps = softmax_with_zero(&theta[..k]);
    let mut atoms = Vec::with_capacity(k);
    let mut acc = 0.0;
    for g in &gaps[..k] {
        acc += g;
        atoms.push(acc.min(1.0));
    }
    let weights = softmax_with_zero(&theta[k..]);
    DiscreteMeasure::from_weights(atoms, &weights)
}

fn optimize_k(
    spec: &MixingSpec,
    grid: &XGrid,
    k: usize,
    starts: &[Vec<f64>],
    max_evals: usize,
) -> Result<(DiscreteMeasure, f64, usize, bool)> {
    let objective = |theta: &[f64]| -> f64 {
        decode(theta, k)
            .and_then(|m| parisi_functional(spec, &m, grid))
            .unwrap_or(f64::INFINITY)
    };
    let opts = NmOptions {
        max_evals,
        ftol: 1e-13,
        xtol: 1e-7,
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            let first = nelder_mead(objective, x0, 0.5, opts);
            // restart once from the best vertex to shake off a collapsed simplex
            let second = nelder_mead(objective, &first.x, 0.05, opts);
            (second, first.evals)
        })
        .collect();
    let mut evals = 0;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for (r, e) in runs {
        evals += e + r.evals;
        if best.as_ref().is_none_or(|b| r.fx < b.1) {
            best = Some((r.x, r.fx, r.converged));
        }
    }
    let (theta, value, converged) =
        best.ok_or_else(|| Error::InvalidParameter("no starting point".into()))?;
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            what: "measure optimizer",
            iterations: evals,
            last: value,
            residual: f64::INFINITY,
        });
    }
    let measure = decode(&theta, k)?;
    let (measure, value, polish_evals) = polish(spec, grid, &measure, value)?;
    Ok((measure, value, evals + polish_evals, converged))
}

/// Newton refinement in the physical coordinates `(q_1..q_k, m_1..m_{k−1})`
/// using finite-difference derivatives of the functional.
fn polish(
    spec: &MixingSpec,
    grid: &XGrid,
    measure: &DiscreteMeasure,
    value: f64,
) -> Result<(DiscreteMeasure, f64, usize)> {
    let start = measure.pruned(PRUNE_WEIGHT)?;
    let k = start.len();
    let mut x: Vec<f64> = start.atoms().to_vec();
    x.extend_from_slice(&start.cdf()[1..k]);
    let to_measure = |x: &[f64]| -> Result<DiscreteMeasure> {
        let mut cdf = vec![0.0];
        cdf.extend_from_slice(&x[k..]);
        cdf.push(1.0);
        DiscreteMeasure::new(x[..k].to_vec(), cdf)
    };
    let mut evals = 0usize;
    let mut f = |x: &[f64]| -> f64 {
        evals += 1;
        to_measure(x)
            .and_then(|m| parisi_functional(spec, &m, grid))
            .unwrap_or(f64::INFINITY)
    };
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Ok((measure.clone(), value, evals));
    }
    let dim = x.len();
    for _ in 0..6 {
        // room to every constraint, per coordinate
        let room: Vec<f64> = (0..dim)
            .map(|i| {
                let (lo, hi) = if i < k {
                    (
                        if i == 0 { 0.0 } else { x[i - 1] },
                        if i + 1 < k { x[i + 1] } else { 1.0 },
                    )
                } else {
                    (
                        if i == k { 0.0 } else { x[i - 1] },
                        if i + 1 < dim { x[i + 1] } else { 1.0 },
                    )
                };
                (x[i] - lo).min(hi - x[i])
            })
            .collect();
        let h: Vec<f64> = room.iter().map(|r| (0.25 * r).min(1e-4)).collect();
        if h.iter().any(|&v| v < 1e-9) {
            break;
        }
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mut xp = x.clone();
            xp[i] += h[i];
            plus[i] = f(&xp);
            let mut xm = x.clone();
            xm[i] -= h[i];
            minus[i] = f(&xm);
            grad[i] = (plus[i] - minus[i]) / (2.0 * h[i]);
            hess[(i, i)] = (plus[i] - 2.0 * fx + minus[i]) / (h[i] * h[i]);
        }
        for i in 0..dim {
            for j in 0..i {
                let mut xpp = x.clone();
                xpp[i] += h[i];
                xpp[j] += h[j];
                let fpp = f(&xpp);
                let v = (fpp - plus[i] - plus[j] + fx) / (h[i] * h[j]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        if !grad.iter().chain(hess.iter()).all(|v| v.is_finite()) {
            break;
        }
        let eig = SymmetricEigen::new(hess);
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let floor = (scale * 1e-6).max(1e-12);
        let vt_g = eig.eigenvectors.transpose() * &grad;
        let scaled = DVector::from_iterator(
            dim,
            vt_g.iter()
                .zip(eig.eigenvalues.iter())
                .map(|(g, l)| -g / l.abs().max(floor)),
        );
        let step = &eig.eigenvectors * scaled;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + alpha * s)
                .collect();
            if to_measure(&cand).is_ok() {
                let fc = f(&cand);
                if fc <= fx + 1e-14 * fx.abs().max(1.0) {
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        let size = step.iter().fold(0.0f64, |a, s| a.max(s.abs())) * alpha;
        if !accepted || size < 1e-11 {
            break;
        }
    }
    let polished = to_measure(&x)?;
    if fx <= value {
        Ok((polished, fx, evals))
    } else {
        Ok((measure.clone(), value, evals))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_round_trip() {
        let atoms = [0.1, 0.35, 0.8];
        let weights = [0.2, 0.5, 0.3];
        let m = decode(&encode(&atoms, &weights), 3).unwrap();
        for (a, b) in m.atoms().iter().zip(atoms) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in m.weights().iter().zip(weights) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn golden_section_on_parabola() {
        let x = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
