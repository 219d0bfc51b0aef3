//! Internal consistency checks that do not depend on any quoted number.
//!
//! Each check compares two independent routes to the same quantity: the
//! closed-form transfer functions against a direct linear solve, the full
//! `X(ω)` at ω = 0 against its reduced form, the thermal weight's two
//! branches at the switch point, and so on.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::analysis::{sweep, Grid};
use crate::constants::{HBAR, K_B};
use crate::error::Result;
use crate::params::{max_cross_correlation, ParameterSet, SqueezedInput};
use crate::spectrum::{
    homodyne_spectrum, thermal_weight, x_at_zero, LinearResponse, COTH_SERIES_SWITCH,
};
use crate::steadystate::{is_stable, steady_state, ROOT_RESIDUAL_TOLERANCE};

pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const REDUCTION_TOLERANCE: f64 = 1e-10;
pub const LORENTZIAN_TOLERANCE: f64 = 1e-12;
pub const CONTINUITY_TOLERANCE: f64 = 1e-8;
pub const REALNESS_TOLERANCE: f64 = 1e-10;
pub const NONNEGATIVITY_FLOOR: f64 = -1e-10;

const SEED: u64 = 0x5eed_0e17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl Check {
    /// Passes when `worst < tolerance`.
    fn below(name: &'static str, worst: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name,
            passed: worst < tolerance,
            worst,
            tolerance,
            samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Closed-form V, E, F against the 4×4 linear solve at `samples` random
/// ω ∈ [−3ω_m, 3ω_m]. Returns the worst relative deviation.
pub fn oracle_deviation(params: &ParameterSet, samples: usize, seed: u64) -> Result<f64> {
    let ss = steady_state(params, params.mechanical.omega_m);
    let response = LinearResponse::new(params, &ss);
    let wm = params.mechanical.omega_m;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let w = rng.random_range(-3.0..3.0) * wm;
        let a = response.transfer(w)?;
        let b = response.oracle(w)?;
        worst = worst
            .max(rel(a.v, b.v))
            .max(rel(a.e, b.e))
            .max(rel(a.f, b.f));
    }
    Ok(worst)
}

/// `X(0)` from the full assembly against the reduced form, over random
/// drives, photon numbers, correlations and temperatures. Half the draws
/// use M = N exactly.
pub fn reduction_deviation(base: &ParameterSet, draws: usize, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..draws {
        let photons = rng.random_range(0.0..12.0);
        let correlation = if k % 2 == 0 {
            photons
        } else {
            rng.random_range(0.0..=1.0) * max_cross_correlation(photons)
        };
        let params = base
            .with_power(rng.random_range(0.0..25e-3))
            .with_temperature(rng.random_range(0.0..0.5))
            .with_squeezed(SqueezedInput {
                photons,
                correlation,
                bandwidth: base.cavity.kappa * rng.random_range(0.5..4.0),
            });
        let ss = steady_state(&params, params.mechanical.omega_m);
        let full = homodyne_spectrum(&params, &ss, &params.squeezed, &params.bath, 0.0)?;
        let reduced = x_at_zero(&params, &ss, &params.squeezed, &params.bath)?;
        let d = (full.total - reduced.total).abs() / full.total.abs().max(reduced.total.abs());
        worst = worst.max(d);
    }
    Ok(worst)
}

/// At zero drive `|E(ω+ω_m)|² = 4κ² / (κ² + (ω + ω_m − Δ)²)` for any Δ.
pub fn lorentzian_deviation(base: &ParameterSet, seed: u64) -> Result<f64> {
    let params = base.with_power(0.0);
    let (wm, k) = (params.mechanical.omega_m, params.cavity.kappa);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let delta = rng.random_range(-2.0..2.0) * wm;
        let response = LinearResponse::new(&params, &steady_state(&params, delta));
        for _ in 0..10 {
            let w = rng.random_range(-2.0..2.0) * wm;
            let e = response.transfer(w + wm)?.e.norm_sqr();
            let closed = 4.0 * k * k / (k * k + (w + wm - delta).powi(2));
            worst = worst.max((e - closed).abs() / closed);
        }
    }
    Ok(worst)
}

/// Value and slope mismatch of the two thermal-weight branches at the
/// switch point, as relative deviations.
pub fn thermal_branch_mismatch(temperature: f64, gamma_m: f64, omega_m: f64) -> (f64, f64) {
    let switch = COTH_SERIES_SWITCH * 2.0 * K_B * temperature / HBAR;
    let pre = 2.0 * gamma_m / omega_m;
    let series = |w: f64| {
        let x = HBAR * w / (2.0 * K_B * temperature);
        pre * (w + 2.0 * K_B * temperature / HBAR + w * x / 3.0)
    };
    let direct = |w: f64| {
        let x = HBAR * w / (2.0 * K_B * temperature);
        pre * w * (1.0 + 1.0 / x.tanh())
    };
    let value = (series(switch) - direct(switch)).abs() / direct(switch).abs();
    let h = 1e-2 * switch;
    let slope = |f: &dyn Fn(f64) -> f64| (f(switch + h) - f(switch - h)) / (2.0 * h);
    let (ds, dd) = (slope(&series), slope(&direct));
    // the library function must sit on the direct branch just above the switch
    let lib = thermal_weight(switch * (1.0 + 1e-12), temperature, gamma_m, omega_m);
    let value = value.max((lib - direct(switch * (1.0 + 1e-12))).abs() / lib.abs());
    (value, (ds - dd).abs() / dd.abs())
}

/// Realness residue, minimum of X and stability residual on one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepHealth {
    pub max_relative_imaginary: f64,
    pub min_total: f64,
    pub stable: bool,
    pub max_root_residual: f64,
}

pub fn sweep_health(params: &ParameterSet, grid: &Grid) -> Result<SweepHealth> {
    let table = sweep(params, grid)?;
    let ss = steady_state(params, table.scenario.detuning_rad_s);
    let stability = is_stable(params, &ss)?;
    let max_relative_imaginary = table
        .rows
        .iter()
        .map(|r| r.point.imaginary_residue / r.point.total.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(SweepHealth {
        max_relative_imaginary,
        min_total: table.min_total(),
        stable: table.stable,
        max_root_residual: stability.max_residual,
    })
}

/// Runs every check on `params` (its hardware values; scenario fields are
/// varied by the checks themselves).
pub fn run_verify(params: &ParameterSet) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut worst_oracle = 0.0f64;
    for (i, power) in [0.0, 10e-3, 20e-3].into_iter().enumerate() {
        worst_oracle = worst_oracle.max(oracle_deviation(
            &params.with_power(power),
            100,
            SEED + i as u64,
        )?);
    }
    checks.push(Check::below(
        "oracle_transfer",
        worst_oracle,
        ORACLE_TOLERANCE,
        300,
    ));

    checks.push(Check::below(
        "zero_frequency_reduction",
        reduction_deviation(params, 50, SEED)?,
        REDUCTION_TOLERANCE,
        50,
    ));
    checks.push(Check::below(
        "empty_cavity_lorentzian",
        lorentzian_deviation(params, SEED)?,
        LORENTZIAN_TOLERANCE,
        200,
    ));

    let (gm, wm) = (params.mechanical.gamma_m, params.mechanical.omega_m);
    let mismatch = [0.02, 0.1, 0.3]
        .into_iter()
        .map(|t| {
            let (v, s) = thermal_branch_mismatch(t, gm, wm);
            v.max(s)
        })
        .fold(0.0, f64::max);
    checks.push(Check::below(
        "thermal_branch_continuity",
        mismatch,
        CONTINUITY_TOLERANCE,
        3,
    ));

    let grid = Grid::new(-1.0, 1.0, 401)?;
    let mut imag = 0.0f64;
    let mut floor = f64::INFINITY;
    let mut residual = 0.0f64;
    let mut all_stable = true;
    let mut samples = 0;
    for power in [0.0, 10e-3, 20e-3] {
        for (photons, temperature) in [(0.0, 0.0), (1.0, 0.1), (5.0, 0.02), (10.0, 0.3)] {
            let p = params
                .with_power(power)
                .with_temperature(temperature)
                .with_squeezed(SqueezedInput::pure(photons, params.squeezed.bandwidth));
            let h = sweep_health(&p, &grid)?;
            imag = imag.max(h.max_relative_imaginary);
            floor = floor.min(h.min_total);
            residual = residual.max(h.max_root_residual);
            all_stable &= h.stable;
            samples += grid.count;
        }
    }
    checks.push(Check::below("realness", imag, REALNESS_TOLERANCE, samples));
    checks.push(Check {
        name: "nonnegativity",
        passed: floor >= NONNEGATIVITY_FLOOR,
        worst: floor,
        tolerance: NONNEGATIVITY_FLOOR,
        samples,
    });
    checks.push(Check {
        name: "stability_root_residual",
        passed: all_stable && residual < ROOT_RESIDUAL_TOLERANCE,
        worst: residual,
        tolerance: ROOT_RESIDUAL_TOLERANCE,
        samples: 12,
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::load_preset;

    #[test]
    fn branches_meet_at_switch() {
        for t in [0.001, 0.02, 0.1, 1.0] {
            let (v, s) = thermal_branch_mismatch(t, 2.5e5, 3.2e8);
            assert!(v < CONTINUITY_TOLERANCE, "value {v} at {t}");
            assert!(s < CONTINUITY_TOLERANCE, "slope {s} at {t}");
        }
    }

    #[test]
    fn both_presets_verify() {
        for name in ["weis", "aspelmeyer"] {
            let report = run_verify(&load_preset(name).unwrap()).unwrap();
            for c in &report.checks {
                assert!(c.passed, "{name}: {c:?}");
            }
            assert!(report.passed);
        }
    }
}
