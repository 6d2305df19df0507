use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::MixingSpec;
use crate::numeric::log_cosh;

use super::grid::{fd_slopes, shifts, XGrid};
use super::DiscreteMeasure;

/// Terminal data `(f, f', f'')` at `q = 1`.
pub type Terminal = fn(f64) -> (f64, f64, f64);

/// `log cosh x` with its first two derivatives.
pub fn log_cosh_terminal(x: f64) -> (f64, f64, f64) {
    let t = x.tanh();
    (log_cosh(x), t, 1.0 - t * t)
}

/// `Φ(q, ·)`, `∂_xΦ(q, ·)` and `∂_xxΦ(q, ·)` on the grid at one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub q: f64,
    /// `μ([0, q])`, the exponent used on the segment just above `q`.
    pub m: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
    d2slope: Vec<f64>,
}

impl Layer {
    fn new(q: f64, m: f64, phi: Vec<f64>, dphi: Vec<f64>, d2phi: Vec<f64>, spacing: f64) -> Self {
        let d2slope = fd_slopes(&d2phi, spacing);
        Self {
            q,
            m,
            phi,
            dphi,
            d2phi,
            d2slope,
        }
    }
}

/// Solution of the Parisi recursion for a step-function measure.
#[derive(Clone, Debug)]
pub struct ParisiSolution {
    spec: MixingSpec,
    measure: DiscreteMeasure,
    grid: XGrid,
    terminal: Terminal,
    layers: Vec<Layer>,
}

pub fn solve_parisi(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    grid: &XGrid,
) -> Result<ParisiSolution> {
    solve_parisi_with_terminal(spec, measure, grid, log_cosh_terminal)
}

/// Same recursion from an arbitrary 1-Lipschitz terminal condition whose
/// slope tends to ±1.
pub fn solve_parisi_with_terminal(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    grid: &XGrid,
    terminal: Terminal,
) -> Result<ParisiSolution> {
    let qs = measure.layer_points();
    let xs = grid.nodes();
    let mut top = (Vec::new(), Vec::new(), Vec::new());
    for &x in &xs {
        let (f, d, d2) = terminal(x);
        top.0.push(f);
        top.1.push(d);
        top.2.push(d2);
    }
    let mut layers = vec![Layer::new(1.0, 1.0, top.0, top.1, top.2, grid.spacing())];
    for w in qs.windows(2).rev() {
        let (q, upper_q) = (w[0], w[1]);
        let m = measure.cdf_at(q);
        let a2 = spec.xi_prime_unchecked(upper_q) - spec.xi_prime_unchecked(q);
        let upper = layers.last().expect("terminal layer present");
        let (phi, dphi, d2phi) = convolve_layer(upper, grid, a2.max(0.0).sqrt(), m)?;
        layers.push(Layer::new(q, m, phi, dphi, d2phi, grid.spacing()));
    }
    layers.reverse();
    Ok(ParisiSolution {
        spec: spec.clone(),
        measure: measure.clone(),
        grid: grid.clone(),
        terminal,
        layers,
    })
}

/// Extends a layer past `±L` by the Lipschitz-1 continuation.
fn padded(layer: &Layer, pad: usize, spacing: f64) -> [Vec<f64>; 4] {
    let n = layer.phi.len();
    let len = n + 2 * pad;
    let mut phi = vec![0.0; len];
    let mut dphi = vec![0.0; len];
    let mut d2 = vec![0.0; len];
    phi[pad..pad + n].copy_from_slice(&layer.phi);
    dphi[pad..pad + n].copy_from_slice(&layer.dphi);
    d2[pad..pad + n].copy_from_slice(&layer.d2phi);
    for j in 1..=pad {
        let dist = j as f64 * spacing;
        phi[pad - j] = layer.phi[0] + dist;
        dphi[pad - j] = -1.0;
        phi[pad + n - 1 + j] = layer.phi[n - 1] + dist;
        dphi[pad + n - 1 + j] = 1.0;
    }
    let d2s = fd_slopes(&d2, spacing);
    [phi, dphi, d2, d2s]
}

/// One segment of the recursion: `Φ(q, x) = (1/m) log E exp(m Φ(q', x + a z))`
/// (or the plain average when `m = 0`), with both derivatives pushed forward.
fn convolve_layer(
    upper: &Layer,
    grid: &XGrid,
    a: f64,
    m: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if a == 0.0 {
        return Ok((upper.phi.clone(), upper.dphi.clone(), upper.d2phi.clone()));
    }
    let rule = grid.rule_for(a, m * a)?;
    let spacing = grid.spacing();
    let (list, pad) = shifts(a, spacing, &rule);
    let [phi, dphi, d2, d2s] = padded(upper, pad, spacing);
    let n = upper.phi.len();
    let mut out_phi = vec![0.0; n];
    let mut out_d = vec![0.0; n];
    let mut out_d2 = vec![0.0; n];
    for i in 0..n {
        let base = (i + pad) as isize;
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        if m > 0.0 {
            let c = upper.phi[i];
            for s in &list {
                let j = (base + s.cells) as usize;
                let y = s.value_at(&phi, &dphi, j);
                let y1 = s.value_at(&dphi, &d2, j);
                let y2 = s.value_at(&d2, &d2s, j);
                let e = s.weight * (m * (y - c)).exp();
                s0 += e;
                s1 += e * y1;
                s2 += e * (y2 + m * y1 * y1);
            }
            let g = s1 / s0;
            out_phi[i] = c + s0.ln() / m;
            out_d[i] = g;
            out_d2[i] = s2 / s0 - m * g * g;
        } else {
            for s in &list {
                let j = (base + s.cells) as usize;
                s0 += s.weight * s.value_at(&phi, &dphi, j);
                s1 += s.weight * s.value_at(&dphi, &d2, j);
                s2 += s.weight * s.value_at(&d2, &d2s, j);
            }
            out_phi[i] = s0;
            out_d[i] = s1;
            out_d2[i] = s2;
        }
        if !(out_phi[i].is_finite() && out_d[i].is_finite() && out_d2[i].is_finite()) {
            return Err(Error::NonFinite("Parisi recursion"));
        }
    }
    Ok((out_phi, out_d, out_d2))
}

impl ParisiSolution {
    pub fn spec(&self) -> &MixingSpec {
        &self.spec
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    /// Layers in ascending `q`, from `q = 0` to the terminal layer `q = 1`.
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_index(&self, q: f64) -> Option<usize> {
        self.layers.iter().position(|l| (l.q - q).abs() <= 1e-12)
    }

    pub fn layer(&self, q: f64) -> Result<&Layer> {
        self.layer_index(q)
            .map(|i| &self.layers[i])
            .ok_or(Error::MissingLayer(q))
    }

    /// `(Φ, ∂_xΦ, ∂_xxΦ)` at layer `idx` and any `x`, by cubic Hermite
    /// interpolation inside the grid and the Lipschitz-1 continuation outside.
    pub fn eval_layer(&self, idx: usize, x: f64) -> (f64, f64, f64) {
        let l = &self.layers[idx];
        let big_l = self.grid.half_width();
        let n = l.phi.len();
        if x > big_l {
            return (l.phi[n - 1] + (x - big_l), 1.0, 0.0);
        }
        if x < -big_l {
            return (l.phi[0] + (-big_l - x), -1.0, 0.0);
        }
        let h = self.grid.spacing();
        let s = (x + big_l) / h;
        let j = (s.floor() as usize).min(n - 2);
        let t = s - j as f64;
        let (v, _) = super::grid::hermite_basis(t);
        let herm = |y: &[f64], dy: &[f64]| {
            v[0] * y[j] + v[1] * h * dy[j] + v[2] * y[j + 1] + v[3] * h * dy[j + 1]
        };
        (
            herm(&l.phi, &l.dphi),
            herm(&l.dphi, &l.d2phi),
            herm(&l.d2phi, &l.d2slope),
        )
    }

    /// `(Φ, ∂_xΦ, ∂_xxΦ)` at an arbitrary `q ∈ [0, 1]`, convolving from the
    /// layer above when `q` is not a layer.
    pub fn phi_at(&self, q: f64, x: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain {
                what: "q",
                value: q,
                domain: "[0, 1]",
            });
        }
        if let Some(i) = self.layer_index(q) {
            if i == self.layers.len() - 1 {
                return Ok((self.terminal)(x));
            }
            return Ok(self.eval_layer(i, x));
        }
        let upper = self.layers.partition_point(|l| l.q <= q);
        let m = self.layers[upper - 1].m;
        let a2 =
            self.spec.xi_prime_unchecked(self.layers[upper].q) - self.spec.xi_prime_unchecked(q);
        let a = a2.max(0.0).sqrt();
        let rule = self.grid.rule_for(a, m * a)?;
        let c = self.eval_layer(upper, x).0;
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (z, w) in rule.iter() {
            let (y, y1, y2) = self.eval_layer(upper, x + a * z);
            if m > 0.0 {
                let e = w * (m * (y - c)).exp();
                s0 += e;
                s1 += e * y1;
                s2 += e * (y2 + m * y1 * y1);
            } else {
                s0 += w * y;
                s1 += w * y1;
                s2 += w * y2;
            }
        }
        if m > 0.0 {
            let g = s1 / s0;
            Ok((c + s0.ln() / m, g, s2 / s0 - m * g * g))
        } else {
            Ok((s0, s1, s2))
        }
    }

    /// `∂_xΦ(q, x)` at a layer.
    pub fn dphi(&self, q: f64, x: f64) -> Result<f64> {
        let i = self.layer_index(q).ok_or(Error::MissingLayer(q))?;
        Ok(self.eval_layer(i, x).1)
    }

    /// Finite-difference residual of the Parisi equation at `(q, x)` with step
    /// `h` in both variables. `q ± h` must stay inside one segment.
    pub fn pde_residual(&self, q: f64, x: f64, h: f64) -> Result<f64> {
        let seg = self.layers.partition_point(|l| l.q <= q);
        if seg == 0 || seg >= self.layers.len() {
            return Err(Error::Domain {
                what: "q",
                value: q,
                domain: "[0, 1)",
            });
        }
        let (lo, hi) = (self.layers[seg - 1].q, self.layers[seg].q);
        if q - h < lo || q + h > hi {
            return Err(Error::InvalidParameter(format!(
                "q ± h = {q} ± {h} leaves the segment [{lo}, {hi}]"
            )));
        }
        let m = self.layers[seg - 1].m;
        let f = |qq: f64, xx: f64| self.phi_at(qq, xx).map(|v| v.0);
        let centre = f(q, x)?;
        let dq = (f(q + h, x)? - f(q - h, x)?) / (2.0 * h);
        let (right, left) = (f(q, x + h)?, f(q, x - h)?);
        let dx = (right - left) / (2.0 * h);
        let dxx = (right - 2.0 * centre + left) / (h * h);
        Ok(dq + 0.5 * self.spec.xi_second_unchecked(q) * (dxx + m * dx * dx))
    }

    /// Largest residual over segment midpoints and `|x| ≤ x_max` in steps of 1/4.
    pub fn max_pde_residual(&self, h: f64, x_max: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.layers.windows(2) {
            if w[1].q - w[0].q < 4.0 * h {
                continue;
            }
            let q = 0.5 * (w[0].q + w[1].q);
            let steps = (x_max / 0.25).floor() as i64;
            for k in -steps..=steps {
                let r = self.pde_residual(q, k as f64 * 0.25, h)?;
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }

    /// Layer grids as CSV with header `q_layer,x,phi,dphi`.
    pub fn to_csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("q_layer,x,phi,dphi\n");
        let xs = self.grid.nodes();
        for l in &self.layers {
            for (i, x) in xs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt(l.q),
                    fmt(*x),
                    fmt(l.phi[i]),
                    fmt(l.dphi[i])
                );
            }
        }
        out
    }
}
