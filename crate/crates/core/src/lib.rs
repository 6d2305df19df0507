//! Fluctuation constants of mixed p-spin glasses with external field, and
//! exact small-N Monte Carlo checks of the variance representation, disorder
//! chaos, the coupled Guerra bound and the central limit theorem for the free
//! energy.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the mixture `(β_p)`, the field `h` and the mixing function `ξ`.
//! * [`enumerate`] samples disorder and enumerates Gibbs measures exactly.
//! * [`parisi`] solves the Parisi recursion for step-function measures, minimizes
//!   the Parisi functional and solves the coupled two-replica recursion.
//! * [`cltvar`] turns an optimized measure into `d`, the curve `u_t` and `ν`.
//! * [`verify`] runs the disorder-averaged experiments and their statistics.

pub mod cltvar;
pub mod enumerate;
pub mod error;
pub mod model;
pub mod numeric;
pub mod parisi;
pub mod quadrature;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use model::{CltScope, MixingSpec};
pub use rng::SeedKey;
