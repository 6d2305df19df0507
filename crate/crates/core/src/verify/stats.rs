use rand_distr::{Distribution, Uniform};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum, variance};
use crate::rng::SeedKey;

/// Fewest samples accepted by the distributional tests.
pub const MIN_TEST_SAMPLES: usize = 100;

/// Bootstrap resamples used for standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Critical value of the one-sample Kolmogorov–Smirnov statistic at level 0.01,
/// to be divided by `√M`.
pub const KS_CRITICAL_001: f64 = 1.63;

/// Point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and its standard error.
    pub fn of_mean(xs: &[f64]) -> Result<Self> {
        need(xs, 2)?;
        Ok(Self {
            value: mean(xs),
            se: (variance(xs) / xs.len() as f64).sqrt(),
        })
    }
}

fn need(xs: &[f64], min: usize) -> Result<()> {
    if xs.len() < min {
        return Err(Error::TooFewSamples {
            got: xs.len(),
            need: min,
        });
    }
    Ok(())
}

/// Unbiased sample variance with its delete-one jackknife standard error.
pub fn jackknife_variance(xs: &[f64]) -> Result<Estimate> {
    need(xs, 3)?;
    let m = xs.len() as f64;
    // shifting by a sample first keeps constant data exactly constant
    let shifted: Vec<f64> = xs.iter().map(|x| x - xs[0]).collect();
    let mu = mean(&shifted);
    let dev: Vec<f64> = shifted.iter().map(|x| x - mu).collect();
    let ss = pairwise_sum(&dev.iter().map(|d| d * d).collect::<Vec<_>>());
    let value = ss / (m - 1.0);
    // leaving out x_i: SS_{-i} = SS − d_i² m/(m−1)
    let loo: Vec<f64> = dev
        .iter()
        .map(|d| (ss - d * d * m / (m - 1.0)) / (m - 2.0))
        .collect();
    let loo_mean = mean(&loo);
    let spread = pairwise_sum(
        &loo.iter()
            .map(|v| (v - loo_mean).powi(2))
            .collect::<Vec<_>>(),
    );
    Ok(Estimate {
        value,
        se: ((m - 1.0) / m * spread).sqrt(),
    })
}

/// Bootstrap standard error of `stat` using [`BOOTSTRAP_RESAMPLES`] index
/// resamples drawn from `seed`.
pub fn bootstrap_se<F>(xs: &[f64], seed: SeedKey, stat: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    need(xs, 2)?;
    let mut rng = seed.stream(0);
    let pick = Uniform::new(0, xs.len()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut buf = vec![0.0; xs.len()];
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in buf.iter_mut() {
            *slot = xs[pick.sample(&mut rng)];
        }
        stats.push(stat(&buf));
    }
    Ok(variance(&stats).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and the
/// standard normal, with the level-0.01 threshold `1.63/√M`.
pub fn ks_statistic(xs: &[f64]) -> Result<KsReport> {
    need(xs, MIN_TEST_SAMPLES)?;
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("KS samples"));
    }
    let normal = Normal::standard();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    let threshold = KS_CRITICAL_001 / m.sqrt();
    Ok(KsReport {
        statistic: d,
        threshold,
        pass: d <= threshold,
    })
}

/// Test function of the Stein battery.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SteinTest {
    /// `ψ(w) = 2 tanh(w − a)`.
    Tanh { shift: f64 },
    /// `ψ(w) = w` clipped to `[−c, c]`.
    Clipped { bound: f64 },
}

impl SteinTest {
    fn eval(&self, w: f64) -> (f64, f64) {
        match *self {
            SteinTest::Tanh { shift } => {
                let t = (w - shift).tanh();
                (2.0 * t, 2.0 * (1.0 - t * t))
            }
            SteinTest::Clipped { bound } => {
                if w.abs() < bound {
                    (w, 1.0)
                } else {
                    (w.signum() * bound, 0.0)
                }
            }
        }
    }

    /// `W ψ(W) − ψ'(W)`.
    pub fn term(&self, w: f64) -> f64 {
        let (p, dp) = self.eval(w);
        w * p - dp
    }

    /// Nine shifted tanh tests on `[−2, 2]` and the identity clipped at 4.
    pub fn battery() -> Vec<SteinTest> {
        let mut out: Vec<SteinTest> = (0..9)
            .map(|i| SteinTest::Tanh {
                shift: -2.0 + 0.5 * i as f64,
            })
            .collect();
        out.push(SteinTest::Clipped { bound: 4.0 });
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinEntry {
    pub test: SteinTest,
    /// `mean(Wψ(W)) − mean(ψ'(W))`.
    pub discrepancy: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinReport {
    pub entries: Vec<SteinEntry>,
    pub max_abs: f64,
    /// Standard error of the entry attaining the maximum.
    pub max_se: f64,
    /// Every entry within `k_se` standard errors of zero.
    pub pass: bool,
    pub k_se: f64,
}

/// Stein discrepancies of `xs` over [`SteinTest::battery`] with bootstrap
/// standard errors; `pass` asks every entry to lie within `k_se` of them.
pub fn stein_discrepancy(xs: &[f64], seed: SeedKey, k_se: f64) -> Result<SteinReport> {
    need(xs, MIN_TEST_SAMPLES)?;
    let mut entries = Vec::new();
    for (i, test) in SteinTest::battery().into_iter().enumerate() {
        let terms: Vec<f64> = xs.iter().map(|&w| test.term(w)).collect();
        let discrepancy = mean(&terms);
        let se = bootstrap_se(&terms, seed.with_role(i as u64), mean)?;
        entries.push(SteinEntry {
            test,
            discrepancy,
            se,
        });
    }
    let worst = entries
        .iter()
        .max_by(|a, b| a.discrepancy.abs().total_cmp(&b.discrepancy.abs()))
        .expect("battery is not empty");
    let (max_abs, max_se) = (worst.discrepancy.abs(), worst.se);
    let pass = entries.iter().all(|e| e.discrepancy.abs() <= k_se * e.se);
    Ok(SteinReport {
        entries,
        max_abs,
        max_se,
        pass,
        k_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedKey;

    fn normals(m: usize, seed: u64) -> Vec<f64> {
        SeedKey::new(seed, 0, 0, 0).normals(0, m)
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs = normals(57, 3);
        let est = jackknife_variance(&xs).unwrap();
        assert!((est.value - variance(&xs)).abs() < 1e-12);
        let m = xs.len() as f64;
        let loo: Vec<f64> = (0..xs.len())
            .map(|i| {
                let rest: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| *v)
                    .collect();
                variance(&rest)
            })
            .collect();
        let lm = mean(&loo);
        let se = ((m - 1.0) / m * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt();
        assert!((est.se - se).abs() < 1e-12);
    }

    #[test]
    fn ks_examples() {
        assert!(ks_statistic(&[0.0; 100]).unwrap().statistic == 0.5);
        let xs = normals(10_000, 11);
        let r = ks_statistic(&xs).unwrap();
        assert!((r.threshold - 0.0163).abs() < 1e-12);
        assert!(r.pass, "{}", r.statistic);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 1.0).collect();
        assert!(ks_statistic(&shifted).unwrap().statistic >= 0.33);
        assert!(ks_statistic(&[0.0; 99]).is_err());
    }

    #[test]
    fn stein_examples() {
        let key = SeedKey::new(5, 9, 0, 0);
        let xs = normals(10_000, 21);
        let r = stein_discrepancy(&xs, key, 3.0).unwrap();
        assert_eq!(r.entries.len(), 10);
        assert!(r.pass);
        let zeros = stein_discrepancy(&[0.0; 200], key, 3.0).unwrap();
        assert_eq!(zeros.entries[9].discrepancy, -1.0);
        let wide: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let r = stein_discrepancy(&wide, key, 3.0).unwrap();
        // clipping at 4 = 2σ trims the second moment a little
        assert!((r.entries[9].discrepancy - 3.0).abs() < 0.6);
        assert!(!r.pass);
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let xs = normals(500, 1);
        let key = SeedKey::new(1, 2, 3, 4);
        let a = bootstrap_se(&xs, key, mean).unwrap();
        assert_eq!(a, bootstrap_se(&xs, key, mean).unwrap());
        assert!((a - 1.0 / 500f64.sqrt()).abs() < 0.01);
    }
}
