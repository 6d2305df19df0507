//! Constants of the free-energy central limit theorem: the left edge `d` of
//! the Parisi measure, the fixed points `u_t`, the limiting variance
//! `ν = ∫₀¹ ξ(u_t) dt` and the concentration point `u` of the coupled overlap.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::MixingSpec;
use crate::parisi::{
    optimize_measure, solve_parisi, DiscreteMeasure, OptimizerSettings, ParisiSolution, XGrid,
};
use crate::quadrature::UnitLegendre;

/// Atoms lighter than this do not count as support.
pub const ATOM_WEIGHT_THRESHOLD: f64 = 1e-6;

/// Residual of the `d` fixed point above which the measure is flagged.
pub const D_RESIDUAL_WARNING: f64 = 1e-3;

pub const DEFAULT_T_NODES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct USolverSettings {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for USolverSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UPoint {
    pub t: f64,
    pub u: f64,
    pub iterations: usize,
    /// `|φ_t(u) − u|` at the returned point.
    pub residual: f64,
    /// True when the damped iteration stalled and bracketing finished the job.
    pub bracketed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltDiagnostics {
    pub d_residual: f64,
    pub max_u_residual: f64,
    pub measure_gap: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltConstants {
    pub spec: MixingSpec,
    pub measure: DiscreteMeasure,
    pub d: f64,
    /// `u_t` at the Gauss–Legendre nodes used for `ν`.
    pub u_curve: Vec<UPoint>,
    pub nu: f64,
    pub diagnostics: CltDiagnostics,
}

/// Smallest atom carrying more than [`ATOM_WEIGHT_THRESHOLD`] mass.
pub fn extract_d(measure: &DiscreteMeasure) -> Result<f64> {
    measure
        .atoms()
        .iter()
        .zip(measure.weights())
        .find(|(_, w)| *w > ATOM_WEIGHT_THRESHOLD)
        .map(|(a, _)| *a)
        .ok_or_else(|| Error::DegenerateMeasure("no atom above the weight threshold".into()))
}

/// `∂_xΦ(d, ·)` read from a layer of the solution.
struct DLayer<'a> {
    sol: &'a ParisiSolution,
    idx: usize,
    terminal: bool,
}

impl<'a> DLayer<'a> {
    fn new(sol: &'a ParisiSolution, d: f64) -> Result<Self> {
        let idx = sol.layer_index(d).ok_or(Error::MissingLayer(d))?;
        Ok(Self {
            sol,
            idx,
            terminal: idx + 1 == sol.layers().len(),
        })
    }

    fn dphi(&self, x: f64) -> f64 {
        if self.terminal {
            x.tanh()
        } else {
            self.sol.eval_layer(self.idx, x).1
        }
    }
}

/// `|d − E(∂_xΦ(d, h + χ))²|` with `Var χ = ξ'(d)`.
pub fn check_d_fixed_point(solution: &ParisiSolution, d: f64) -> Result<f64> {
    let layer = DLayer::new(solution, d)?;
    let spec = solution.spec();
    let s = spec.xi_prime(d)?.sqrt();
    let rule = solution.grid().rule_for(s, 0.0)?;
    let h = spec.h();
    Ok((d - rule.expect(|z| layer.dphi(h + s * z).powi(2))).abs())
}

/// `E ∂_xΦ(d, h+χ¹) ∂_xΦ(d, h+χ²)` where `Cov(χ¹, χ²) = t ξ'(s)` and
/// `Var χ^ℓ = ξ'(d)`, computed as `E_z (E_g ∂_xΦ(d, h + αz + βg))²`.
pub fn phi_t(solution: &ParisiSolution, d: f64, t: f64, s: f64) -> Result<f64> {
    let layer = DLayer::new(solution, d)?;
    phi_t_on(&layer, d, t, s)
}

fn phi_t_on(layer: &DLayer<'_>, d: f64, t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "(0, 1]",
        });
    }
    if !(0.0..=d).contains(&s) {
        return Err(Error::Domain {
            what: "s",
            value: s,
            domain: "[0, d]",
        });
    }
    let spec = layer.sol.spec();
    let grid = layer.sol.grid();
    let alpha2 = t * spec.xi_prime(s)?;
    let total = spec.xi_prime(d)?;
    let beta2 = total - alpha2;
    if beta2 < -1e-12 * total.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "covariance t xi'(s) = {alpha2} exceeds the variance xi'(d) = {total}"
        )));
    }
    let (alpha, beta) = (alpha2.sqrt(), beta2.max(0.0).sqrt());
    let h = spec.h();
    let inner = grid.rule_for(beta, 0.0)?;
    let outer = grid.rule_for(alpha, 0.0)?;
    Ok(outer.expect(|z| {
        let c = h + alpha * z;
        inner.expect(|g| layer.dphi(c + beta * g)).powi(2)
    }))
}

/// Fixed point of `s ↦ φ_t(s)` on `[0, d]` by damped iteration from `s = d`,
/// with bisection as the fallback when the iteration does not settle.
pub fn solve_u(
    solution: &ParisiSolution,
    d: f64,
    t: f64,
    settings: &USolverSettings,
) -> Result<UPoint> {
    let layer = DLayer::new(solution, d)?;
    solve_u_on(&layer, d, t, settings)
}

fn solve_u_on(layer: &DLayer<'_>, d: f64, t: f64, settings: &USolverSettings) -> Result<UPoint> {
    let rho = settings.damping;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping {rho} must lie in (0, 1]"
        )));
    }
    let map = |s: f64| phi_t_on(layer, d, t, s.clamp(0.0, d));
    let mut s = d;
    let mut residual = f64::INFINITY;
    for k in 0..settings.max_iter {
        let f = map(s)?;
        residual = (f - s).abs();
        if residual < settings.tol {
            return Ok(UPoint {
                t,
                u: s,
                iterations: k + 1,
                residual,
                bracketed: false,
            });
        }
        s = ((1.0 - rho) * s + rho * f).clamp(0.0, d);
    }
    // φ_t(0) ≥ 0 and φ_t(d) ≤ d bracket the fixed point.
    let g = |s: f64| map(s).map(|v| v - s);
    let (mut lo, mut hi) = (0.0, d);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo < 0.0 || g_hi > 0.0 {
        return Err(Error::NonConvergence {
            what: "u fixed point",
            iterations: settings.max_iter,
            last: s,
            residual,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 0.1 * settings.tol {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    Ok(UPoint {
        t,
        u,
        iterations: settings.max_iter,
        residual: g(u)?.abs(),
        bracketed: true,
    })
}

/// `u_t` at the nodes of an `n`-point Gauss–Legendre rule on `(0, 1)`.
pub fn u_curve(
    solution: &ParisiSolution,
    d: f64,
    n_nodes: usize,
    settings: &USolverSettings,
) -> Result<Vec<UPoint>> {
    let rule = UnitLegendre::new(n_nodes)?;
    let layer = DLayer::new(solution, d)?;
    rule.nodes()
        .par_iter()
        .map(|&t| solve_u_on(&layer, d, t, settings))
        .collect()
}

/// `ν = ∫₀¹ ξ(u_t) dt` by Gauss–Legendre with `n_nodes` nodes.
pub fn compute_nu(
    solution: &ParisiSolution,
    d: f64,
    n_nodes: usize,
    settings: &USolverSettings,
) -> Result<f64> {
    let curve = u_curve(solution, d, n_nodes, settings)?;
    nu_from_curve(solution.spec(), &curve, n_nodes)
}

fn nu_from_curve(spec: &MixingSpec, curve: &[UPoint], n_nodes: usize) -> Result<f64> {
    let rule = UnitLegendre::new(n_nodes)?;
    Ok(rule
        .weights()
        .iter()
        .zip(curve)
        .map(|(w, p)| w * spec.xi_unchecked(p.u))
        .sum())
}

/// `u = E_g (E₁ ∂_xΦ(0, h + β₁√t g + β₁√(1−t) g¹))²`.
pub fn compute_u_prop1(solution: &ParisiSolution, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "(0, 1)",
        });
    }
    let spec = solution.spec();
    let h = spec.h();
    let b1 = spec.beta(1);
    let d0 = |x: f64| solution.eval_layer(0, x).1;
    if b1 == 0.0 {
        return Ok(d0(h).powi(2));
    }
    let (a, b) = (b1 * t.sqrt(), b1 * (1.0 - t).sqrt());
    let outer = solution.grid().rule_for(a, 0.0)?;
    let inner = solution.grid().rule_for(b, 0.0)?;
    Ok(outer.expect(|g| {
        let c = h + a * g;
        inner.expect(|g1| d0(c + b * g1)).powi(2)
    }))
}

/// Full pipeline: optimized measure, its solution, `d`, `u_t` and `ν`.
pub fn clt_constants(
    spec: &MixingSpec,
    grid: &XGrid,
    optimizer: &OptimizerSettings,
    n_nodes: usize,
    u_settings: &USolverSettings,
) -> Result<CltConstants> {
    let opt = optimize_measure(spec, grid, optimizer)?;
    let solution = solve_parisi(spec, &opt.measure, grid)?;
    constants_for(&solution, opt.gap, n_nodes, u_settings)
}

/// Constants for an already solved measure.
pub fn constants_for(
    solution: &ParisiSolution,
    measure_gap: f64,
    n_nodes: usize,
    u_settings: &USolverSettings,
) -> Result<CltConstants> {
    let spec = solution.spec();
    let d = extract_d(solution.measure())?;
    let d_residual = check_d_fixed_point(solution, d)?;
    let curve = u_curve(solution, d, n_nodes, u_settings)?;
    let nu = nu_from_curve(spec, &curve, n_nodes)?;
    let max_u_residual = curve.iter().map(|p| p.residual).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if d_residual > D_RESIDUAL_WARNING {
        warnings.push(format!(
            "fixed-point residual of d is {d_residual:.3e}; the optimized measure may be inaccurate"
        ));
    }
    if curve.iter().any(|p| p.bracketed) {
        warnings.push("damped u iteration stalled at some t; bisection was used".into());
    }
    if curve.windows(2).any(|w| w[1].u < w[0].u - 1e-9) {
        warnings.push("u_t is not nondecreasing in t".into());
    }
    if curve.iter().any(|p| p.u < -1e-12 || p.u > d + 1e-12) {
        warnings.push("u_t left [0, d]".into());
    }
    Ok(CltConstants {
        spec: spec.clone(),
        measure: solution.measure().clone(),
        d,
        u_curve: curve,
        nu,
        diagnostics: CltDiagnostics {
            d_residual,
            max_u_residual,
            measure_gap,
            warnings,
        },
    })
}
