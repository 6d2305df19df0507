use crate::error::Result;
use crate::model::MixingSpec;
use crate::numeric::log_cosh;

use super::{solve_parisi, DiscreteMeasure, ParisiSolution, XGrid};

/// `½ ∫₀¹ ξ''(q) q μ([0, q]) dq`, exact per segment.
pub fn penalty(spec: &MixingSpec, measure: &DiscreteMeasure) -> f64 {
    measure
        .layer_points()
        .windows(2)
        .map(|w| {
            let m = measure.cdf_at(w[0]);
            m * (spec.penalty_antiderivative(w[1]) - spec.penalty_antiderivative(w[0]))
        })
        .sum::<f64>()
        * 0.5
}

impl ParisiSolution {
    /// `E Φ(0, h + β_1 g)`.
    pub fn field_average(&self) -> Result<f64> {
        let h = self.spec().h();
        let b1 = self.spec().beta(1);
        if b1 == 0.0 {
            return Ok(self.eval_layer(0, h).0);
        }
        let rule = self.grid().rule_for(b1, 0.0)?;
        Ok(rule.expect(|z| self.eval_layer(0, h + b1 * z).0))
    }

    /// Parisi functional of the solved measure.
    pub fn functional(&self) -> Result<f64> {
        Ok(std::f64::consts::LN_2 + self.field_average()? - penalty(self.spec(), self.measure()))
    }
}

pub fn parisi_functional(
    spec: &MixingSpec,
    measure: &DiscreteMeasure,
    grid: &XGrid,
) -> Result<f64> {
    solve_parisi(spec, measure, grid)?.functional()
}

/// Replica-symmetric value `log 2 + E log cosh(h + z√ξ'(q)) + ½(ξ(1) − ξ(q) − (1−q)ξ'(q))`.
pub fn replica_symmetric_functional(spec: &MixingSpec, q: f64, grid: &XGrid) -> Result<f64> {
    let v = spec.xi_prime_unchecked(q).sqrt();
    let h = spec.h();
    let rule = grid.rule_for(v, 0.0)?;
    Ok(std::f64::consts::LN_2
        + rule.expect(|z| log_cosh(h + v * z))
        + 0.5
            * (spec.xi_unchecked(1.0)
                - spec.xi_unchecked(q)
                - (1.0 - q) * spec.xi_prime_unchecked(q)))
}

/// Root of `q = E tanh²(h + z√ξ'(q))`, the stationarity condition of
/// the replica-symmetric functional, by bisection on `[0, 1]`.
pub fn replica_symmetric_overlap(spec: &MixingSpec, grid: &XGrid) -> Result<f64> {
    let h = spec.h();
    let rule = grid.rule_for(spec.xi_prime_unchecked(1.0).sqrt(), 0.0)?;
    let g = |q: f64| {
        let v = spec.xi_prime_unchecked(q).sqrt();
        rule.expect(|z| (h + v * z).tanh().powi(2)) - q
    };
    // g(0) ≥ 0 and g(1) < 0 unless the spins are frozen
    let (mut lo, mut hi) = (0.0, 1.0);
    if g(hi) >= 0.0 {
        return Ok(1.0);
    }
    if g(lo) <= 0.0 && h == 0.0 && spec.beta(1) == 0.0 {
        // q = 0 solves the equation; look for a larger root only if one exists
        let probe = 1e-3;
        if g(probe) <= 0.0 {
            return Ok(0.0);
        }
        lo = probe;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
