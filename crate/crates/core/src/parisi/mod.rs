//! The Parisi recursion for step-function measures, the Parisi functional and
//! its minimization, and the two-replica recursion behind the coupled bound.
//!
//! For a measure with CDF `m` constant on `[q_j, q_{j+1})` the Parisi equation
//! is solved exactly across the segment by
//! `Φ(q_j, x) = (1/m) log E exp(m Φ(q_{j+1}, x + a z))`, `a² = ξ'(q_{j+1}) − ξ'(q_j)`,
//! and by the heat average when `m = 0`. Expectations over `z` use a
//! trapezoid rule in the Gaussian variable and off-grid values come from cubic Hermite
//! interpolation, with the first two `x`-derivatives carried along exactly.

mod coupled;
mod functional;
mod grid;
mod measure;
mod nelder_mead;
mod optimize;
mod solver;

pub use coupled::{
    coupled_terminal, guerra_bound, solve_coupled, solve_coupled_with_limit, CoupledSolution,
    Layer2, TiltSign, DEFAULT_MEMORY_LIMIT, MAX_LAMBDA,
};
pub use functional::{
    parisi_functional, penalty, replica_symmetric_functional, replica_symmetric_overlap,
};
pub use grid::XGrid;
pub use measure::DiscreteMeasure;
pub use optimize::{optimize_measure, AtomStep, OptimizedMeasure, OptimizerSettings, MAX_ATOMS};
pub use solver::{
    log_cosh_terminal, solve_parisi, solve_parisi_with_terminal, Layer, ParisiSolution, Terminal,
};
