//! Classical steady state, self-consistent detuning and linear stability.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Detuning, ParameterSet};
use crate::poly;
use crate::spectrum::LinearResponse;

/// Stable iff `max Im(root) < −STABILITY_TOLERANCE · ω_m`.
pub const STABILITY_TOLERANCE: f64 = 1e-9;

/// Bound on `|d(root)| / max(|root|, ω_m)⁴` for an accepted root of d(ω).
pub const ROOT_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Bound on the relative residual of a self-consistent detuning root.
pub const CUBIC_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Mean values around which fluctuations are linearized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    /// Intracavity amplitude c_s (dimensionless).
    pub amplitude: Complex64,
    /// Dimensionless mirror displacement Q_s.
    pub displacement: f64,
    /// Dimensionless mirror momentum P_s (always 0).
    pub momentum: f64,
    /// Effective detuning Δ in rad/s.
    pub detuning: f64,
}

impl SteadyState {
    /// |c_s|², the mean intracavity photon number.
    pub fn photons(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Steady state for a given effective detuning Δ:
/// c_s = ε / (κ + iΔ), Q_s = 2g|c_s|²/ω_m, P_s = 0.
pub fn steady_state(params: &ParameterSet, detuning: f64) -> SteadyState {
    let amplitude = params.epsilon() / Complex64::new(params.cavity.kappa, detuning);
    SteadyState {
        amplitude,
        displacement: 2.0 * params.g() * amplitude.norm_sqr() / params.mechanical.omega_m,
        momentum: 0.0,
        detuning,
    }
}

/// One real solution of the detuning self-consistency cubic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuningRoot {
    /// Effective detuning Δ in rad/s.
    pub detuning: f64,
    pub relative_residual: f64,
    pub stability: StabilityReport,
}

/// Ascending coefficients of
/// `Δ³ − bΔ² + κ²Δ − bκ² + 2g²ε²/ω_m`, with `b = ω_0 − ω_c`.
pub fn detuning_cubic(params: &ParameterSet, bare: f64) -> [f64; 4] {
    let k2 = params.cavity.kappa.powi(2);
    let g = params.g();
    let eps = params.epsilon();
    let shift = 2.0 * g * g * eps * eps / params.mechanical.omega_m;
    [shift - bare * k2, k2, -bare, 1.0]
}

/// All real effective detunings consistent with the radiation-pressure
/// shift, ascending, each with its stability report. One or three roots.
pub fn self_consistent_detunings(params: &ParameterSet, bare: f64) -> Result<Vec<DetuningRoot>> {
    let cubic = detuning_cubic(params, bare);
    let scale = cubic[0]
        .abs()
        .cbrt()
        .max(cubic[1].sqrt())
        .max(bare.abs())
        .max(f64::MIN_POSITIVE);

    // discriminant of the monic cubic in the scaled variable Δ = s·z
    let (a0, a1, a2) = (
        cubic[0] / scale.powi(3),
        cubic[1] / scale.powi(2),
        cubic[2] / scale,
    );
    let disc = 18.0 * a2 * a1 * a0 - 4.0 * a2.powi(3) * a0 + a2 * a2 * a1 * a1
        - 4.0 * a1.powi(3)
        - 27.0 * a0 * a0;

    let complex: Vec<Complex64> = cubic.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut eig = poly::roots(&complex, scale)?;
    eig.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()));
    let count = if disc > 0.0 { 3 } else { 1 };

    let mut real: Vec<f64> = eig
        .iter()
        .take(count)
        .map(|z| polish_real(&cubic, z.re))
        .collect();
    real.sort_by(f64::total_cmp);

    real.into_iter()
        .map(|delta| {
            let residual = cubic_residual(&cubic, delta);
            if residual.is_nan() || residual >= CUBIC_RESIDUAL_TOLERANCE {
                return Err(Error::RootResidual {
                    residual,
                    tolerance: CUBIC_RESIDUAL_TOLERANCE,
                });
            }
            let ss = steady_state(params, delta);
            Ok(DetuningRoot {
                detuning: delta,
                relative_residual: residual,
                stability: is_stable(params, &ss)?,
            })
        })
        .collect()
}

fn cubic_eval(c: &[f64; 4], x: f64) -> (f64, f64) {
    let value = ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
    let slope = (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
    (value, slope)
}

fn cubic_residual(c: &[f64; 4], x: f64) -> f64 {
    let terms = c[0].abs() + (c[1] * x).abs() + (c[2] * x * x).abs() + (c[3] * x.powi(3)).abs();
    let (value, _) = cubic_eval(c, x);
    if terms == 0.0 {
        value.abs()
    } else {
        value.abs() / terms
    }
}

fn polish_real(c: &[f64; 4], mut x: f64) -> f64 {
    for _ in 0..6 {
        let (value, slope) = cubic_eval(c, x);
        if slope == 0.0 {
            break;
        }
        let next = x - value / slope;
        if cubic_residual(c, next) >= cubic_residual(c, x) {
            break;
        }
        x = next;
    }
    x
}

/// Steady state for the detuning mode stored in `params`.
///
/// In self-consistent mode the unique stable root is used; several stable
/// roots are reported as ambiguous.
pub fn resolve(params: &ParameterSet) -> Result<SteadyState> {
    match params.drive.detuning {
        Detuning::Resonant => Ok(steady_state(params, params.mechanical.omega_m)),
        Detuning::Fixed(delta) => Ok(steady_state(params, delta)),
        Detuning::SelfConsistent { bare } => {
            let roots = self_consistent_detunings(params, bare)?;
            let stable: Vec<f64> = roots
                .iter()
                .filter(|r| r.stability.stable)
                .map(|r| r.detuning)
                .collect();
            match stable.as_slice() {
                [delta] => Ok(steady_state(params, *delta)),
                [] => Err(Error::NoStableDetuning(
                    roots.iter().map(|r| r.detuning).collect(),
                )),
                _ => Err(Error::AmbiguousDetuning(stable)),
            }
        }
    }
}

/// Ascending coefficients of d(ω) as a quartic in ω.
pub fn characteristic_polynomial(params: &ParameterSet, ss: &SteadyState) -> [Complex64; 5] {
    let c = Complex64::new;
    let (wm, gm, k, delta) = (
        params.mechanical.omega_m,
        params.mechanical.gamma_m,
        params.cavity.kappa,
        ss.detuning,
    );
    let g = params.g();
    // (ω_m² − iγ_mω − ω²) · (κ² + Δ² − 2iκω − ω²)
    let mechanical = [c(wm * wm, 0.0), c(0.0, -gm), c(-1.0, 0.0)];
    let cavity = [
        c(k * k + delta * delta, 0.0),
        c(0.0, -2.0 * k),
        c(-1.0, 0.0),
    ];
    let product = poly::multiply(&mechanical, &cavity);
    let mut out = [c(0.0, 0.0); 5];
    out.copy_from_slice(&product);
    out[0] -= 4.0 * wm * delta * g * g * ss.photons();
    out
}

/// Roots of d(ω) and the stability verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Ascending coefficients of d(ω).
    pub coefficients: Vec<Complex64>,
    /// Zeros of d(ω), sorted by real part.
    pub roots: Vec<Complex64>,
    pub stable: bool,
    /// max Im(root) in rad/s; negative when fluctuations decay.
    pub margin: f64,
    /// Largest `|d(root)| / max(|root|, ω_m)⁴` with d evaluated directly.
    pub max_residual: f64,
}

/// Fluctuations evolve as e^{−iωt}, so every zero of d(ω) must lie in the
/// lower half plane.
pub fn is_stable(params: &ParameterSet, ss: &SteadyState) -> Result<StabilityReport> {
    let wm = params.mechanical.omega_m;
    let coefficients = characteristic_polynomial(params, ss);
    let mut roots = poly::roots(&coefficients, wm)?;
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let response = LinearResponse::new(params, ss);
    let lead = coefficients[4].norm();
    let max_residual = roots
        .iter()
        .map(|z| response.d_complex(*z).norm() / (lead * z.norm().max(wm).powi(4)))
        .fold(0.0, f64::max);
    if max_residual.is_nan() || max_residual >= ROOT_RESIDUAL_TOLERANCE {
        return Err(Error::RootResidual {
            residual: max_residual,
            tolerance: ROOT_RESIDUAL_TOLERANCE,
        });
    }
    let margin = roots.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        coefficients: coefficients.to_vec(),
        roots,
        stable: margin < -STABILITY_TOLERANCE * wm,
        margin,
        max_residual,
    })
}
