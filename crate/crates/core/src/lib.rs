//! Secrecy rate-distortion for the Shannon cipher system under list and
//! henchman adversaries.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized bottom-up:
//!
//! - [`prob`]: finite-alphabet distributions, channels, information measures,
//!   types and distortion.
//! - [`rd`]: Blahut–Arimoto solvers for `R(D)`, `D(R)`, the side-information
//!   distortion-rate function and the TV-restricted error exponent.
//! - [`region`]: boundaries of the lossless and lossy achievable regions.
//! - [`cipher`]: random codebooks, likelihood encoders and exact induced /
//!   idealized joint distributions at small blocklength.
//! - [`adversary`]: list/henchman conversions, exhaustive optimal attacks,
//!   the point-to-point attack and the type-covering attack.
//! - [`subproblem`]: compressing a codeword drawn from a random codebook,
//!   the `xi`/`zeta` statistics and Chernoff bounds.
//! - [`types`]: joint-type enumeration, V-shells and greedy type covering.
//! - [`rng`]: the seeded stream generator every randomized routine draws from.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod cipher;
mod error;
pub(crate) mod math;
pub mod prob;
pub mod rd;
pub mod region;
pub mod rng;
pub mod seq;
pub mod subproblem;
pub mod types;

pub use error::{Error, Result};
pub use prob::{
    Channel, Distribution, DistortionMatrix, JointDistribution, JointDistribution3, Sequence,
};
