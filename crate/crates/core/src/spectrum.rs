//! Linear response of the output field and the homodyne spectrum `X(ω)`.
//!
//! The output fluctuation is
//! `δc̃_out(ω) = V(ω) ξ(ω) + E(ω) c_in(ω) + F(ω) c_in†(−ω)`, with ξ the
//! thermal force on the mirror and `c_in` the squeezed input. All
//! frequencies passed in here are offsets in the frame rotating at ω_c,
//! with the Fourier convention `f(t) = (1/2π) ∫ f(ω) e^{−iωt} dω`.
//!
//! [`transfer`] uses the closed forms; [`oracle_transfer`] solves the 4×4
//! linearized Langevin system directly and shares no algebra with it.

use nalgebra::{Complex, Matrix4, Matrix4x3};
use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::params::{Bath, ParameterSet, SqueezedInput};
use crate::steadystate::SteadyState;

/// `|d(ω)|` below this fraction of `max(ω, ω_m, κ, |Δ|)⁴` is a pole hit.
pub const POLE_GUARD: f64 = 1e-30;

/// Below this `|ħω / (2 k_B T)|` the thermal weight uses the series of coth.
pub const COTH_SERIES_SWITCH: f64 = 1e-3;

/// Response amplitudes V, E, F at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferTriple {
    pub omega: f64,
    pub v: Complex64,
    pub e: Complex64,
    pub f: Complex64,
}

/// `X(ω)` split by noise source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    /// Offset from the probe frequency ω_p, rad/s.
    pub omega: f64,
    pub squeezed: f64,
    pub vacuum: f64,
    pub thermal: f64,
    pub total: f64,
    /// `|Im|` of the assembled (complex) expression.
    pub imaginary_residue: f64,
}

impl SpectrumPoint {
    fn from_parts(omega: f64, squeezed: f64, vacuum: f64, thermal: f64, residue: f64) -> Self {
        Self {
            omega,
            squeezed,
            vacuum,
            thermal,
            total: squeezed + vacuum + thermal,
            imaginary_residue: residue,
        }
    }
}

/// Rates entering the linearized dynamics, collected once per steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponse {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa: f64,
    pub delta: f64,
    pub g: f64,
    pub c_s: Complex64,
}

impl LinearResponse {
    pub fn new(params: &ParameterSet, ss: &SteadyState) -> Self {
        Self {
            omega_m: params.mechanical.omega_m,
            gamma_m: params.mechanical.gamma_m,
            kappa: params.cavity.kappa,
            delta: ss.detuning,
            g: params.g(),
            c_s: ss.amplitude,
        }
    }

    /// g²|c_s|², the squared effective optomechanical coupling.
    fn coupling_sq(&self) -> f64 {
        self.g * self.g * self.c_s.norm_sqr()
    }

    fn mechanical_factor(&self, omega: f64) -> Complex64 {
        Complex64::new(
            self.omega_m * self.omega_m - omega * omega,
            -self.gamma_m * omega,
        )
    }

    /// d(ω) = −4ω_mΔg²|c_s|² + (ω_m² − ω² − iγ_mω)[(κ − iω)² + Δ²].
    pub fn d(&self, omega: f64) -> Complex64 {
        self.d_complex(Complex64::new(omega, 0.0))
    }

    /// d at complex ω, used to check roots of the expanded quartic.
    pub fn d_complex(&self, omega: Complex64) -> Complex64 {
        let i = Complex64::i();
        let mechanical = self.omega_m * self.omega_m - omega * omega - i * self.gamma_m * omega;
        let cav = self.kappa - i * omega;
        -4.0 * self.omega_m * self.delta * self.coupling_sq()
            + mechanical * (cav * cav + self.delta * self.delta)
    }

    fn pole_scale(&self, omega: f64) -> f64 {
        omega
            .abs()
            .max(self.omega_m)
            .max(self.kappa)
            .max(self.delta.abs())
            .powi(4)
    }

    pub fn transfer(&self, omega: f64) -> Result<TransferTriple> {
        let d = self.d(omega);
        if d.norm().is_nan() || d.norm() < POLE_GUARD * self.pole_scale(omega) {
            return Err(Error::Pole {
                omega,
                magnitude: d.norm(),
            });
        }
        let i = Complex64::i();
        let k = self.kappa;
        let lorentz = Complex64::new(k, -(omega + self.delta));
        let v = i * (2.0 * k).sqrt() * self.g * self.c_s * self.omega_m * lorentz / d;
        let e = 2.0 * k / d
            * (2.0 * i * self.coupling_sq() * self.omega_m
                + self.mechanical_factor(omega) * lorentz);
        let f = 4.0 * k / d * self.omega_m * self.g * self.g * self.c_s * self.c_s * i;
        Ok(TransferTriple { omega, v, e, f })
    }

    /// Direct solve of the linearized equations for
    /// `(δQ(ω), δP(ω), δc(ω), δc†(−ω))` driven by unit `ξ`, `c_in`, `c_in†`.
    pub fn oracle(&self, omega: f64) -> Result<TransferTriple> {
        let c = |re: f64, im: f64| Complex::new(re, im);
        let z = c(0.0, 0.0);
        let (wm, gm, k, delta) = (self.omega_m, self.gamma_m, self.kappa, self.delta);
        let gc = self.g * self.c_s;
        let i = c(0.0, 1.0);
        // Drift matrix of d/dt (δQ, δP, δc, δc†).
        #[rustfmt::skip]
        let drift = Matrix4::new(
            z, c(wm, 0.0), z, z,
            c(-wm, 0.0), c(-gm, 0.0), 2.0 * self.g * self.c_s.conj(), 2.0 * gc,
            i * gc, z, c(-k, -delta), z,
            -i * gc.conj(), z, z, c(-k, delta),
        );
        // d/dt → −iω
        let system = Matrix4::from_diagonal_element(c(0.0, -omega)) - drift;
        let root = (2.0 * k).sqrt();
        #[rustfmt::skip]
        let inputs = Matrix4x3::new(
            z, z, z,
            c(1.0, 0.0), z, z,
            z, c(root, 0.0), z,
            z, z, c(root, 0.0),
        );
        let x = system
            .lu()
            .solve(&inputs)
            .filter(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
            .ok_or(Error::SingularSystem { omega })?;
        // c̃_out = c_out + c_in = √(2κ) δc
        Ok(TransferTriple {
            omega,
            v: root * x[(2, 0)],
            e: root * x[(2, 1)],
            f: root * x[(2, 2)],
        })
    }
}

pub fn d_of_omega(params: &ParameterSet, ss: &SteadyState, omega: f64) -> Complex64 {
    LinearResponse::new(params, ss).d(omega)
}

pub fn transfer(params: &ParameterSet, ss: &SteadyState, omega: f64) -> Result<TransferTriple> {
    LinearResponse::new(params, ss).transfer(omega)
}

pub fn oracle_transfer(
    params: &ParameterSet,
    ss: &SteadyState,
    omega: f64,
) -> Result<TransferTriple> {
    LinearResponse::new(params, ss).oracle(omega)
}

/// Spectral weight of the mirror's thermal force,
/// `2γ_m (ω/ω_m) {1 + coth[ħω / (2 k_B T)]}`.
///
/// Near ω = 0 the product ω·coth is finite (→ 2k_BT/ħ) and is taken from the
/// series `coth x ≈ 1/x + x/3`. At T = 0, coth → sign(ω).
pub fn thermal_weight(omega: f64, temperature: f64, gamma_m: f64, omega_m: f64) -> f64 {
    let pre = 2.0 * gamma_m / omega_m;
    if temperature == 0.0 {
        return if omega > 0.0 { 2.0 * pre * omega } else { 0.0 };
    }
    let x = HBAR * omega / (2.0 * K_B * temperature);
    if x.abs() < COTH_SERIES_SWITCH {
        pre * (omega + 2.0 * K_B * temperature / HBAR + omega * x / 3.0)
    } else {
        // 1 + coth x = 2 / (1 − e^{−2x})
        pre * omega * (-2.0 / (-2.0 * x).exp_m1())
    }
}

fn coth_or_sign(x: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        x.signum()
    } else {
        1.0 / (HBAR * x / (2.0 * K_B * temperature)).tanh()
    }
}

/// `X(ω)` for offset ω from the probe frequency.
///
/// The thermal pair is `|V(ω+ω_m)|² w(ω+ω_m) + |V(−ω+ω_m)|² w(ω−ω_m)` with
/// `w` = [`thermal_weight`]; fast terms at ±2ω_m are not included.
pub fn homodyne_spectrum(
    params: &ParameterSet,
    ss: &SteadyState,
    sq: &SqueezedInput,
    bath: &Bath,
    omega: f64,
) -> Result<SpectrumPoint> {
    let resp = LinearResponse::new(params, ss);
    homodyne_point(&resp, sq, bath, omega)
}

pub(crate) fn homodyne_point(
    resp: &LinearResponse,
    sq: &SqueezedInput,
    bath: &Bath,
    omega: f64,
) -> Result<SpectrumPoint> {
    let wm = resp.omega_m;
    let upper = resp.transfer(omega + wm)?;
    let lower = resp.transfer(-omega + wm)?;
    let gamma_sq = sq.bandwidth * sq.bandwidth;
    let profile = gamma_sq / (gamma_sq + omega * omega);

    let cross = upper.e * lower.e * (sq.correlation * profile);
    let cross_conj = lower.e.conj() * upper.e.conj() * (sq.correlation * profile);
    let incoherent = (upper.e.norm_sqr() + lower.e.norm_sqr()) * sq.photons * profile;
    let squeezed = cross + cross_conj + incoherent;

    let vacuum = upper.e.norm_sqr() + lower.f.norm_sqr();
    let t = bath.temperature;
    let thermal = upper.v.norm_sqr() * thermal_weight(omega + wm, t, resp.gamma_m, wm)
        + lower.v.norm_sqr() * thermal_weight(omega - wm, t, resp.gamma_m, wm);

    Ok(SpectrumPoint::from_parts(
        omega,
        squeezed.re,
        vacuum,
        thermal,
        squeezed.im.abs(),
    ))
}

/// `X(0)` from the transfer functions at ω_m alone:
/// squeezed `M(E² + E*²) + 2N|E|²`, vacuum `|E|² + |F|²`,
/// thermal `4|V|²γ_m coth[ħω_m / (2k_BT)]`. For M = N the squeezed part is
/// `N(E + E*)²`.
pub fn x_at_zero(
    params: &ParameterSet,
    ss: &SteadyState,
    sq: &SqueezedInput,
    bath: &Bath,
) -> Result<SpectrumPoint> {
    let resp = LinearResponse::new(params, ss);
    let wm = resp.omega_m;
    let tr = resp.transfer(wm)?;
    let e = tr.e;
    let squeezed = sq.correlation * (e * e + e.conj() * e.conj()) + 2.0 * sq.photons * e.norm_sqr();
    let vacuum = e.norm_sqr() + tr.f.norm_sqr();
    let thermal = 4.0 * tr.v.norm_sqr() * resp.gamma_m * coth_or_sign(wm, bath.temperature);
    Ok(SpectrumPoint::from_parts(
        0.0,
        squeezed.re,
        vacuum,
        thermal,
        squeezed.im.abs(),
    ))
}
