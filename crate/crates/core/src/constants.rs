//! Physical constants (CODATA 2018 exact / recommended values, SI units).

use std::f64::consts::PI;

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum in m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

pub const TWO_PI: f64 = 2.0 * PI;

/// Nanograms to kilograms.
pub const NANOGRAM: f64 = 1e-12;

/// Nanometres to metres.
pub const NANOMETRE: f64 = 1e-9;
