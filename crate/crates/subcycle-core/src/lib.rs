//! Numerical core for subcycle tomography of pulsed squeezed light.
//!
//! The crate follows one chain: a sech drive defines a Bogoliubov kernel,
//! its Bloch-Messiah decomposition gives principal modes, a short gate
//! projects them onto a detected mode, and the detected state is described by
//! characteristic and Wigner functions that can be reconstructed from sampled
//! quadratures.
//!
//! Builds without `std`; enable the `std` feature for `std::error::Error`.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod detection;
pub mod eos;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod metrics;
pub mod phase_space;
pub mod tomography;

pub use error::{Error, Result};
