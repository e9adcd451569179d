//! Quantum-Langevin treatment of a charged oscillator in a heat bath.
//!
//! The crate is `no_std` (it needs `alloc`). Internally everything is
//! expressed through [`PhysicalConstants`], so the natural system
//! `hbar = k_B = c = M = 1` and Gaussian CGS share one code path.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

pub mod constants;
pub mod diffusion;
mod error;
pub mod kernel;
pub mod microscopic;
pub mod motion;
pub mod numerics;
pub mod response;
pub mod thermo;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use kernel::{FormFactor, MemoryKernel};
pub use response::{ParticleModel, PoleReport};

/// Crate version, echoed into run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
