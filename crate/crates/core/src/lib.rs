//! Training-based MIMO links with residual transmit RF impairments (RTRI).
//!
//! The crate covers the whole analysis chain for a point-to-point MIMO link
//! whose transmitter adds Gaussian distortion proportional to the signal power
//! (EVM `delta`):
//!
//! - [`params`]: the system tuple `(Nt, Nr, T, Tp, rho, delta)` and the derived
//!   scalars (estimation quality, effective noise factors).
//! - [`matrix`]: a dense complex matrix type used by the simulator.
//! - [`montecarlo`]: a link-level simulator (training, LMMSE estimation and
//!   ZF/MRC/MMSE combining) that serves as the reference for every closed form.
//! - [`specialfn`]: exponential integrals, Tricomi's confluent hypergeometric
//!   function and the combinatorial coefficient tables of the SINR laws.
//! - [`analytic`]: SINR distributions, outage, ergodic rates and their low/high
//!   SNR limits.
//! - [`asymptotic`]: large-system deterministic equivalents and random-matrix
//!   identity checks.
//! - [`optimizer`]: pilot-length optimization over the coherence block.

pub mod analytic;
pub mod asymptotic;
mod error;
pub mod matrix;
pub mod montecarlo;
pub mod optimizer;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod specialfn;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use params::{db_to_linear, derive_params, linear_to_db, ConfigTemplate, DerivedParams, ReceiverKind, SystemConfig};
pub use rng::RandomStream;
