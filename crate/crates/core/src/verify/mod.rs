//! Monte Carlo experiments over disorder, each replica solved exactly by
//! enumeration, and the statistics used to judge them.
//!
//! Replica `r` of an experiment is keyed by `(seed, family, r)`, so results do
//! not depend on the number of worker threads.

mod experiments;
mod stats;

pub use experiments::{
    chaos_check, chaos_ladder, clt_samples, estimate_variance, family, free_energy_samples,
    guerra_check, guerra_estimate, variance_curve, variance_report, ChaosMode, ChaosPoint,
    ChaosReport, CurvePoint, GuerraReport, InterpolationReport, SampleSet, VarianceReport,
    MIN_T_NODES,
};
pub use stats::{
    bootstrap_se, jackknife_variance, ks_statistic, stein_discrepancy, Estimate, KsReport,
    SteinEntry, SteinReport, SteinTest, BOOTSTRAP_RESAMPLES, KS_CRITICAL_001, MIN_TEST_SAMPLES,
};
