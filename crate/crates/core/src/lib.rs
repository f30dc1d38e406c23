//! Exact pairwise entanglement dynamics of `n` qubits sharing a Lorentzian
//! (single leaky cavity) environment, with and without repeated
//! non-selective measurements.
//!
//! The survival amplitude E(τ) of the collective W state determines the
//! whole pair state, so the crate is layered as
//!
//! * [`model`]: parameters, spectral density and memory kernel,
//! * [`survival`]: E(τ) by closed form, memory-kernel ODE and a discretized
//!   bath, plus zeros and the asymptotic decay rate,
//! * [`entanglement`]: pair density matrix and Wootters concurrence,
//! * [`zeno`]: measured dynamics, Zeno / anti-Zeno classification and the
//!   threshold interval,
//! * [`sweep`]: scenarios, presets, oracle checks and CSV/JSON output used by
//!   the `qzeno` binary.
//!
//! Rates are in units of κ and times are τ = κt throughout.

pub mod config;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod ode;
pub mod survival;
pub mod sweep;
pub mod zeno;

pub use error::{Error, Result};
pub use model::{DerivedFrequencies, SystemParams};
