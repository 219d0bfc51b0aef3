//! Homodyne detection of optomechanically induced transparency with a
//! quantized probe.
//!
//! A single-mode cavity with one movable mirror is driven by a strong
//! coupling field at `ω_c` and probed by narrowband squeezed vacuum centered
//! at `ω_p = ω_c + ω_m`. The crate linearizes the radiation-pressure
//! dynamics around the classical steady state and evaluates the homodyne
//! spectrum `X(ω)` of the output field, split into squeezed, vacuum and
//! thermal contributions.
//!
//! Module map:
//!
//! - [`params`]: physical inputs, derived rates and the two experimental presets.
//! - [`steadystate`]: classical steady state, self-consistent detuning, stability.
//! - [`spectrum`]: transfer functions, thermal weight, `X(ω)` and its `ω = 0` form.
//! - [`analysis`]: frequency sweeps and EIT-dip extraction.
//! - [`verify`]: internal consistency checks (oracle solve, reductions, residuals).
//! - [`cli`]: the `optoeit` command-line front end.
//!
//! All frequencies and rates are angular (rad/s) internally.

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod error;
pub mod params;
pub mod poly;
pub mod spectrum;
pub mod steadystate;
pub mod verify;

pub use error::{Error, Result};
pub use params::{ParameterSet, Preset};
pub use spectrum::{SpectrumPoint, TransferTriple};
pub use steadystate::{StabilityReport, SteadyState};
