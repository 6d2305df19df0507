use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::MixingSpec;

use super::functional::penalty;
use super::grid::{hermite_basis, shifts, Shift, XGrid};
use super::DiscreteMeasure;

/// Default ceiling on the memory held by the 2D layers and work buffers.
pub const DEFAULT_MEMORY_LIMIT: usize = 2 << 30;

/// Largest tilt accepted.
pub const MAX_LAMBDA: f64 = 2.0;

/// `Ψ`, `∂_1Ψ`, `∂_2Ψ` and `∂_1∂_2Ψ` on the square grid at one layer, row-major
/// with `x_1` indexing rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer2 {
    pub q: f64,
    pub m: f64,
    pub psi: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d12: Vec<f64>,
}

/// Solution of the two-replica recursion with tilt `λ`.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    spec: MixingSpec,
    measure: DiscreteMeasure,
    lambda: f64,
    grid: XGrid,
    layers: Vec<Layer2>,
}

/// `log(¼ Σ_{ε₁,ε₂=±1} exp(ε₁x₁ + ε₂x₂ + λε₁ε₂))` with its derivatives
/// `(Ψ, Ψ₁, Ψ₂, Ψ₁₂)`.
pub fn coupled_terminal(lambda: f64, x1: f64, x2: f64) -> (f64, f64, f64, f64) {
    let mut e = [0.0; 4];
    let mut signs = [(0.0, 0.0); 4];
    let mut k = 0;
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            e[k] = s1 * x1 + s2 * x2 + lambda * s1 * s2;
            signs[k] = (s1, s2);
            k += 1;
        }
    }
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let (mut m1, mut m2, mut m12) = (0.0, 0.0, 0.0);
    for (wk, (s1, s2)) in w.iter().zip(signs) {
        let p = wk / total;
        m1 += p * s1;
        m2 += p * s2;
        m12 += p * s1 * s2;
    }
    (max + total.ln() - 4f64.ln(), m1, m2, m12 - m1 * m2)
}

pub fn solve_coupled(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    lambda: f64,
    grid: &XGrid,
) -> Result<CoupledSolution> {
    solve_coupled_with_limit(spec, measure, lambda, grid, DEFAULT_MEMORY_LIMIT)
}

pub fn solve_coupled_with_limit(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    lambda: f64,
    grid: &XGrid,
    memory_limit: usize,
) -> Result<CoupledSolution> {
    if !(lambda.is_finite() && lambda.abs() <= MAX_LAMBDA) {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[-2, 2]",
        });
    }
    let qs = measure.layer_points();
    let n = grid.len();
    let plane = n * n * std::mem::size_of::<f64>();
    let bytes = plane.saturating_mul(4 * (qs.len() + 2));
    if bytes > memory_limit {
        return Err(Error::MemoryGuard {
            bytes,
            limit: memory_limit,
        });
    }
    let xs = grid.nodes();
    let mut top = Layer2 {
        q: 1.0,
        m: 1.0,
        psi: vec![0.0; n * n],
        d1: vec![0.0; n * n],
        d2: vec![0.0; n * n],
        d12: vec![0.0; n * n],
    };
    for (i, &x1) in xs.iter().enumerate() {
        for (j, &x2) in xs.iter().enumerate() {
            let (v, a, b, c) = coupled_terminal(lambda, x1, x2);
            let k = i * n + j;
            top.psi[k] = v;
            top.d1[k] = a;
            top.d2[k] = b;
            top.d12[k] = c;
        }
    }
    let mut layers = vec![top];
    for w in qs.windows(2).rev() {
        let (q, upper_q) = (w[0], w[1]);
        let m = measure.cdf_at(q);
        let a = (spec.xi_prime_unchecked(upper_q) - spec.xi_prime_unchecked(q))
            .max(0.0)
            .sqrt();
        let upper = layers.last().expect("terminal layer present");
        let next = step(upper, q, m, a, grid)?;
        layers.push(next);
    }
    layers.reverse();
    Ok(CoupledSolution {
        spec: spec.clone(),
        measure: measure.clone(),
        lambda,
        grid: grid.clone(),
        layers,
    })
}

/// Four fields on a line, in the order (f, ∂_along f, g, ∂_along g) where
/// `g` is the across-derivative of `f`.
struct LineFields<'a> {
    f: &'a [f64],
    df: &'a [f64],
    g: &'a [f64],
    dg: &'a [f64],
}

/// Convolves one line with all shifts. Returns `(F, F', G, G')` where `F` and
/// `G` are the quadrature sums of the Hermite interpolants of `(f, df)` and
/// `(g, dg)`, and the primes are the sums of the interpolant derivatives.
///
/// `exp_m` selects the continuation past the ends: multiplicative `e^{m s}`
/// when the fields are exponentials of Ψ, additive slope ±1 otherwise.
fn convolve_line(
    line: LineFields<'_>,
    list: &[Shift],
    pad: usize,
    spacing: f64,
    exp_m: Option<f64>,
    out: [&mut [f64]; 4],
) {
    let n = line.f.len();
    let len = n + 2 * pad;
    let mut f = vec![0.0; len];
    let mut df = vec![0.0; len];
    let mut g = vec![0.0; len];
    let mut dg = vec![0.0; len];
    f[pad..pad + n].copy_from_slice(line.f);
    df[pad..pad + n].copy_from_slice(line.df);
    g[pad..pad + n].copy_from_slice(line.g);
    dg[pad..pad + n].copy_from_slice(line.dg);
    for j in 1..=pad {
        let s = j as f64 * spacing;
        let (lo, hi) = (pad - j, pad + n - 1 + j);
        match exp_m {
            Some(m) => {
                let grow = (m * s).exp();
                f[lo] = line.f[0] * grow;
                df[lo] = -m * f[lo];
                g[lo] = line.g[0] * grow;
                dg[lo] = -m * g[lo];
                f[hi] = line.f[n - 1] * grow;
                df[hi] = m * f[hi];
                g[hi] = line.g[n - 1] * grow;
                dg[hi] = m * g[hi];
            }
            None => {
                f[lo] = line.f[0] + s;
                df[lo] = -1.0;
                g[lo] = line.g[0];
                dg[lo] = 0.0;
                f[hi] = line.f[n - 1] + s;
                df[hi] = 1.0;
                g[hi] = line.g[n - 1];
                dg[hi] = 0.0;
            }
        }
    }
    let [o_f, o_df, o_g, o_dg] = out;
    o_f.iter_mut().for_each(|v| *v = 0.0);
    o_df.iter_mut().for_each(|v| *v = 0.0);
    o_g.iter_mut().for_each(|v| *v = 0.0);
    o_dg.iter_mut().for_each(|v| *v = 0.0);
    for s in list {
        let off = pad as isize + s.cells;
        let w = s.weight;
        let (v, d) = (s.value, s.slope);
        let base = off as usize;
        let f0 = &f[base..base + n];
        let f1 = &f[base + 1..base + 1 + n];
        let df0 = &df[base..base + n];
        let df1 = &df[base + 1..base + 1 + n];
        let g0 = &g[base..base + n];
        let g1 = &g[base + 1..base + 1 + n];
        let dg0 = &dg[base..base + n];
        let dg1 = &dg[base + 1..base + 1 + n];
        for i in 0..n {
            o_f[i] += w * (v[0] * f0[i] + v[1] * df0[i] + v[2] * f1[i] + v[3] * df1[i]);
            o_df[i] += w * (d[0] * f0[i] + d[1] * df0[i] + d[2] * f1[i] + d[3] * df1[i]);
            o_g[i] += w * (v[0] * g0[i] + v[1] * dg0[i] + v[2] * g1[i] + v[3] * dg1[i]);
            o_dg[i] += w * (d[0] * g0[i] + d[1] * dg0[i] + d[2] * g1[i] + d[3] * dg1[i]);
        }
    }
}

fn transpose(src: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    out[j * n + i] = src[i * n + j];
                }
            }
        }
    }
    out
}

/// One segment of the recursion as two passes of 1D convolutions: along `x₂`
/// within rows, then along `x₁` within columns (done on transposed planes).
fn step(upper: &Layer2, q: f64, m: f64, a: f64, grid: &XGrid) -> Result<Layer2> {
    if a == 0.0 {
        return Ok(Layer2 {
            q,
            m,
            ..upper.clone()
        });
    }
    let rule = grid.rule_for(a, m * a)?;
    let n = grid.len();
    let spacing = grid.spacing();
    let (list, pad) = shifts(a, spacing, &rule);

    // fields to convolve: (W, W1, W2, W12) with W = e^{m(Ψ − c)} when m > 0
    let shift = upper.psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (w, w1, w2, w12) = if m > 0.0 {
        let w: Vec<f64> = upper.psi.iter().map(|p| (m * (p - shift)).exp()).collect();
        let w1: Vec<f64> = w.iter().zip(&upper.d1).map(|(w, d)| m * w * d).collect();
        let w2: Vec<f64> = w.iter().zip(&upper.d2).map(|(w, d)| m * w * d).collect();
        let w12: Vec<f64> = (0..n * n)
            .map(|k| m * w[k] * (upper.d12[k] + m * upper.d1[k] * upper.d2[k]))
            .collect();
        (w, w1, w2, w12)
    } else {
        (
            upper.psi.clone(),
            upper.d1.clone(),
            upper.d2.clone(),
            upper.d12.clone(),
        )
    };
    let exp_m = (m > 0.0).then_some(m);

    // pass along x2: A = Σ H[W, W2], A2 = Σ H'[W, W2], A1 = Σ H[W1, W12], A12 = Σ H'[W1, W12]
    let mut a_f = vec![0.0; n * n];
    let mut a_2 = vec![0.0; n * n];
    let mut a_1 = vec![0.0; n * n];
    let mut a_12 = vec![0.0; n * n];
    a_f.par_chunks_mut(n)
        .zip(a_2.par_chunks_mut(n))
        .zip(a_1.par_chunks_mut(n))
        .zip(a_12.par_chunks_mut(n))
        .enumerate()
        .for_each(|(i, (((of, od), og), odg))| {
            let r = i * n..(i + 1) * n;
            let line = LineFields {
                f: &w[r.clone()],
                df: &w2[r.clone()],
                g: &w1[r.clone()],
                dg: &w12[r],
            };
            convolve_line(line, &list, pad, spacing, exp_m, [of, od, og, odg]);
        });
    drop((w, w1, w2, w12));

    // pass along x1 on transposed planes: B = Σ H[A, A1], B1 = Σ H'[A, A1],
    // B2 = Σ H[A2, A12], B12 = Σ H'[A2, A12]
    let t_f = transpose(&a_f, n);
    let t_1 = transpose(&a_1, n);
    let t_2 = transpose(&a_2, n);
    let t_12 = transpose(&a_12, n);
    drop((a_f, a_1, a_2, a_12));
    let mut b_f = vec![0.0; n * n];
    let mut b_1 = vec![0.0; n * n];
    let mut b_2 = vec![0.0; n * n];
    let mut b_12 = vec![0.0; n * n];
    b_f.par_chunks_mut(n)
        .zip(b_1.par_chunks_mut(n))
        .zip(b_2.par_chunks_mut(n))
        .zip(b_12.par_chunks_mut(n))
        .enumerate()
        .for_each(|(j, (((of, od), og), odg))| {
            let r = j * n..(j + 1) * n;
            let line = LineFields {
                f: &t_f[r.clone()],
                df: &t_1[r.clone()],
                g: &t_2[r.clone()],
                dg: &t_12[r],
            };
            convolve_line(line, &list, pad, spacing, exp_m, [of, od, og, odg]);
        });
    drop((t_f, t_1, t_2, t_12));
    let (b_f, b_1, b_2, b_12) = (
        transpose(&b_f, n),
        transpose(&b_1, n),
        transpose(&b_2, n),
        transpose(&b_12, n),
    );

    let mut out = Layer2 {
        q,
        m,
        psi: vec![0.0; n * n],
        d1: vec![0.0; n * n],
        d2: vec![0.0; n * n],
        d12: vec![0.0; n * n],
    };
    for k in 0..n * n {
        if m > 0.0 {
            let b = b_f[k];
            let p1 = b_1[k] / (m * b);
            let p2 = b_2[k] / (m * b);
            out.psi[k] = shift + b.ln() / m;
            out.d1[k] = p1;
            out.d2[k] = p2;
            out.d12[k] = b_12[k] / (m * b) - m * p1 * p2;
        } else {
            out.psi[k] = b_f[k];
            out.d1[k] = b_1[k];
            out.d2[k] = b_2[k];
            out.d12[k] = b_12[k];
        }
    }
    if out
        .psi
        .iter()
        .chain(&out.d1)
        .chain(&out.d2)
        .chain(&out.d12)
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("coupled recursion"));
    }
    Ok(out)
}

impl CoupledSolution {
    pub fn spec(&self) -> &MixingSpec {
        &self.spec
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn layers(&self) -> &[Layer2] {
        &self.layers
    }

    /// `Ψ(q = 0; x₁, x₂)` by bicubic Hermite interpolation, continued with
    /// slope one per coordinate outside the grid.
    pub fn psi0(&self, x1: f64, x2: f64) -> f64 {
        let l = &self.layers[0];
        let n = self.grid.len();
        let big_l = self.grid.half_width();
        let h = self.grid.spacing();
        let c1 = x1.clamp(-big_l, big_l);
        let c2 = x2.clamp(-big_l, big_l);
        let excess = (x1 - c1).abs() + (x2 - c2).abs();
        let cell = |x: f64| {
            let s = (x + big_l) / h;
            let j = (s.floor() as usize).min(n - 2);
            (j, s - j as f64)
        };
        let (i, t1) = cell(c1);
        let (j, t2) = cell(c2);
        let (v1, _) = hermite_basis(t1);
        let (v2, _) = hermite_basis(t2);
        // basis per corner offset: value weight and derivative weight (scaled by h)
        let b1 = [(v1[0], v1[1] * h), (v1[2], v1[3] * h)];
        let b2 = [(v2[0], v2[1] * h), (v2[2], v2[3] * h)];
        let mut acc = 0.0;
        for (di, (p1, d1w)) in b1.iter().enumerate() {
            for (dj, (p2, d2w)) in b2.iter().enumerate() {
                let k = (i + di) * n + (j + dj);
                acc += p1 * p2 * l.psi[k]
                    + d1w * p2 * l.d1[k]
                    + p1 * d2w * l.d2[k]
                    + d1w * d2w * l.d12[k];
            }
        }
        acc + excess
    }

    /// `2 log 2 + E Ψ(0, h₁¹, h₁²) − ∫ ξ''(q) q μ([0, q]) dq` with the pair of
    /// fields correlated through `t`.
    pub fn guerra_bound(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "(0, 1)",
            });
        }
        let h = self.spec.h();
        let b1 = self.spec.beta(1);
        let expectation = if b1 == 0.0 {
            self.psi0(h, h)
        } else {
            let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
            let outer = self.grid.rule_for(b1 * st, 0.0)?;
            let rule = self.grid.rule_for(b1 * sr, 0.0)?;
            let mut acc = 0.0;
            for (g, wg) in outer.iter() {
                for (g1, w1) in rule.iter() {
                    let x1 = h + b1 * (st * g + sr * g1);
                    let inner: f64 = rule
                        .iter()
                        .map(|(g2, w2)| w2 * self.psi0(x1, h + b1 * (st * g + sr * g2)))
                        .sum();
                    acc += wg * w1 * inner;
                }
            }
            acc
        };
        Ok(2.0 * std::f64::consts::LN_2 + expectation - 2.0 * penalty(&self.spec, &self.measure))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TiltSign {
    Plus,
    Minus,
}

impl TiltSign {
    pub fn factor(self) -> f64 {
        match self {
            TiltSign::Plus => 1.0,
            TiltSign::Minus => -1.0,
        }
    }
}

/// Coupled upper bound on `E F̂_N^±(λ)`.
pub fn guerra_bound(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    lambda: f64,
    t: f64,
    sign: TiltSign,
    grid: &XGrid,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[0, 2]",
        });
    }
    solve_coupled(spec, measure, sign.factor() * lambda, grid)?.guerra_bound(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_identity() {
        for &(l, x1, x2) in &[(0.0, 0.3, -1.2), (0.7, 2.0, 0.5), (-1.3, -0.4, 3.0)] {
            let (v, ..) = coupled_terminal(l, x1, x2);
            let closed =
                (x1.cosh() * x2.cosh() * f64::cosh(l) + x1.sinh() * x2.sinh() * f64::sinh(l)).ln();
            assert!((v - closed).abs() < 1e-14);
        }
        let (v, a, b, c) = coupled_terminal(0.0, 0.3, -1.2);
        assert!((v - (0.3f64.cosh().ln() + 1.2f64.cosh().ln())).abs() < 1e-15);
        assert!((a - 0.3f64.tanh()).abs() < 1e-15 && (b + 1.2f64.tanh()).abs() < 1e-15);
        assert!(c.abs() < 1e-15);
    }

    #[test]
    fn memory_guard() {
        let spec = MixingSpec::sk(1.0, 0.5).unwrap();
        let m = DiscreteMeasure::delta(0.5).unwrap();
        let g = XGrid::new(8.0, 1.0 / 64.0, 20).unwrap();
        assert!(matches!(
            solve_coupled_with_limit(&spec, &m, 0.1, &g, 1 << 20),
            Err(Error::MemoryGuard { .. })
        ));
        assert!(solve_coupled(&spec, &m, 2.5, &g).is_err());
    }
}
