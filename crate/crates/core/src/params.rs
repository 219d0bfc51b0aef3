//! Physical inputs of the optomechanical cavity and the experimental presets.
//!
//! Every frequency and rate is stored as an angular quantity in rad/s. The
//! JSON document form ([`ParameterDocument`]) carries unit-annotated keys and
//! an explicit flag saying whether the `*_hz` values are cycle frequencies
//! (multiplied by 2π on load) or already angular.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, HBAR, NANOGRAM, NANOMETRE, TWO_PI};
use crate::error::{Error, Result};

/// Movable mirror modeled as a damped harmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalOscillator {
    /// Mass in kg.
    pub mass: f64,
    /// Angular frequency ω_m in rad/s.
    pub omega_m: f64,
    /// Energy damping rate γ_m in rad/s.
    pub gamma_m: f64,
}

impl MechanicalOscillator {
    /// Q′ = ω_m / γ_m.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Zero-point length scale √(ħ / (2 m ω_m)) in metres.
    pub fn zero_point_length(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega_m)).sqrt()
    }
}

/// How the frequency pull per unit displacement, ω_c / L, is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingGeometry {
    /// Cavity length L in metres; the prefactor is ω_c / L.
    Length(f64),
    /// Prefactor ω_c / L given directly, in rad/s per metre.
    Prefactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cavity {
    /// Coupling-field angular frequency ω_c in rad/s.
    pub omega_c: f64,
    pub geometry: CouplingGeometry,
    /// Amplitude decay rate κ in rad/s.
    pub kappa: f64,
}

impl Cavity {
    pub fn from_wavelength(wavelength: f64, geometry: CouplingGeometry, kappa: f64) -> Self {
        Self {
            omega_c: TWO_PI * C_LIGHT / wavelength,
            geometry,
            kappa,
        }
    }

    /// λ = 2πc / ω_c in metres.
    pub fn wavelength(&self) -> f64 {
        TWO_PI * C_LIGHT / self.omega_c
    }

    /// ω_c / L in rad/s per metre.
    pub fn coupling_prefactor(&self) -> f64 {
        match self.geometry {
            CouplingGeometry::Length(length) => self.omega_c / length,
            CouplingGeometry::Prefactor(prefactor) => prefactor,
        }
    }
}

/// Choice of the effective detuning Δ used for linearization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Detuning {
    /// Δ = ω_m, the resonant operating point.
    #[default]
    Resonant,
    /// A fixed effective detuning in rad/s.
    Fixed(f64),
    /// Δ solved self-consistently from the bare detuning ω_0 − ω_c (rad/s).
    SelfConsistent { bare: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// Coupling-field power in W.
    pub power: f64,
    pub detuning: Detuning,
}

/// Narrowband squeezed vacuum centered at ω_p = ω_c + ω_m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedInput {
    /// Mean photon number N.
    pub photons: f64,
    /// Phase-sensitive correlation M, 0 ≤ M ≤ √(N(N+1)).
    pub correlation: f64,
    /// Bandwidth Γ in rad/s.
    pub bandwidth: f64,
}

impl SqueezedInput {
    /// Squeezed input with the maximal correlation M = √(N(N+1)).
    pub fn pure(photons: f64, bandwidth: f64) -> Self {
        Self {
            photons,
            correlation: max_cross_correlation(photons),
            bandwidth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bath {
    /// Temperature in K.
    pub temperature: f64,
}

/// Complete set of physical inputs for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    pub mechanical: MechanicalOscillator,
    pub cavity: Cavity,
    pub drive: Drive,
    pub squeezed: SqueezedInput,
    pub bath: Bath,
}

/// Coupling rate together with its geometric prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// ω_c / L in rad/s per metre.
    pub prefactor: f64,
    /// g in rad/s.
    pub g: f64,
}

/// g = (ω_c / L) · √(ħ / (2 m ω_m)).
pub fn derive_coupling(cavity: &Cavity, mech: &MechanicalOscillator) -> Coupling {
    let prefactor = cavity.coupling_prefactor();
    Coupling {
        prefactor,
        g: prefactor * mech.zero_point_length(),
    }
}

/// Drive amplitude ε = √(2κ℘ / (ħ ω_c)) in s⁻¹.
pub fn drive_amplitude(power: f64, kappa: f64, omega_c: f64) -> f64 {
    (2.0 * kappa * power / (HBAR * omega_c)).sqrt()
}

/// Largest physical phase-sensitive correlation, √(N(N+1)).
pub fn max_cross_correlation(photons: f64) -> f64 {
    (photons * (photons + 1.0)).sqrt()
}

impl ParameterSet {
    pub fn coupling(&self) -> Coupling {
        derive_coupling(&self.cavity, &self.mechanical)
    }

    /// g in rad/s.
    pub fn g(&self) -> f64 {
        self.coupling().g
    }

    /// ε in s⁻¹.
    pub fn epsilon(&self) -> f64 {
        drive_amplitude(self.drive.power, self.cavity.kappa, self.cavity.omega_c)
    }

    pub fn quality_factor(&self) -> f64 {
        self.mechanical.quality_factor()
    }

    pub fn kappa_over_omega_m(&self) -> f64 {
        self.cavity.kappa / self.mechanical.omega_m
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.drive.power = power;
        self
    }

    pub fn with_squeezed(mut self, squeezed: SqueezedInput) -> Self {
        self.squeezed = squeezed;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.bath.temperature = temperature;
        self
    }

    pub fn with_detuning(mut self, detuning: Detuning) -> Self {
        self.drive.detuning = detuning;
        self
    }

    /// Returns `self` if every invariant holds, otherwise the violation list.
    pub fn checked(self) -> Result<Self> {
        let report = validate(&self);
        if report.violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParameters(report.violations))
        }
    }
}

/// The two experimental parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Silica microtoroid (λ = 775 nm, ω_m = 2π × 51.8 MHz).
    Weis,
    /// Micromirror Fabry-Perot (λ = 1064 nm, L = 25 mm, ω_m = 2π × 947 kHz).
    Aspelmeyer,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Weis, Preset::Aspelmeyer];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Weis => "weis",
            Preset::Aspelmeyer => "aspelmeyer",
        }
    }

    /// Hardware parameters with Γ = 2κ, Δ = ω_m, no drive, no squeezing and
    /// a zero-temperature bath. Scenario values are set by the caller.
    pub fn parameters(self) -> ParameterSet {
        let (mechanical, cavity) = match self {
            Preset::Weis => (
                MechanicalOscillator {
                    mass: 20.0 * NANOGRAM,
                    omega_m: TWO_PI * 51.8e6,
                    gamma_m: TWO_PI * 41e3,
                },
                Cavity::from_wavelength(
                    775.0 * NANOMETRE,
                    // 2π × 12 GHz/nm
                    CouplingGeometry::Prefactor(TWO_PI * 12e9 / NANOMETRE),
                    TWO_PI * 15e6,
                ),
            ),
            Preset::Aspelmeyer => (
                MechanicalOscillator {
                    mass: 145.0 * NANOGRAM,
                    omega_m: TWO_PI * 947e3,
                    gamma_m: TWO_PI * 141.0,
                },
                Cavity::from_wavelength(
                    1064.0 * NANOMETRE,
                    CouplingGeometry::Length(25e-3),
                    TWO_PI * 215e3,
                ),
            ),
        };
        ParameterSet {
            mechanical,
            cavity,
            drive: Drive {
                power: 0.0,
                detuning: Detuning::Resonant,
            },
            squeezed: SqueezedInput {
                photons: 0.0,
                correlation: 0.0,
                bandwidth: 2.0 * cavity.kappa,
            },
            bath: Bath { temperature: 0.0 },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownPreset {
                name: s.to_string(),
                valid: Preset::ALL.map(Preset::name).join(", "),
            })
    }
}

pub fn load_preset(name: &str) -> Result<ParameterSet> {
    name.parse::<Preset>().map(Preset::parameters)
}

/// Diagnostic summary of a parameter set. Produced by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub quality_factor: f64,
    pub kappa_over_omega_m: f64,
    pub gamma_over_kappa: f64,
    pub coupling_g_rad_s: f64,
    pub coupling_prefactor_hz_per_nm: f64,
    pub notes: Vec<String>,
    pub violations: Vec<String>,
}

pub fn validate(params: &ParameterSet) -> Diagnostics {
    let mut violations = Vec::new();
    let mut check = |ok: bool, msg: &str| {
        if !ok {
            violations.push(msg.to_string());
        }
    };
    let positive = |x: f64| x.is_finite() && x > 0.0;
    let mech = &params.mechanical;
    let cav = &params.cavity;
    let sq = &params.squeezed;

    check(positive(mech.mass), "mass must be positive");
    check(positive(mech.omega_m), "omega_m must be positive");
    check(positive(mech.gamma_m), "gamma_m must be positive");
    check(positive(cav.omega_c), "omega_c must be positive");
    check(positive(cav.kappa), "kappa must be positive");
    match cav.geometry {
        CouplingGeometry::Length(l) => check(positive(l), "cavity length must be positive"),
        CouplingGeometry::Prefactor(p) => check(positive(p), "coupling prefactor must be positive"),
    }
    check(
        params.drive.power.is_finite() && params.drive.power >= 0.0,
        "power must be non-negative",
    );
    match params.drive.detuning {
        Detuning::Fixed(d) => check(d.is_finite(), "fixed detuning must be finite"),
        Detuning::SelfConsistent { bare } => {
            check(bare.is_finite(), "bare detuning must be finite")
        }
        Detuning::Resonant => {}
    }
    check(
        sq.photons.is_finite() && sq.photons >= 0.0,
        "photon number N must be non-negative",
    );
    let m_max = max_cross_correlation(sq.photons.max(0.0));
    check(
        sq.correlation.is_finite() && sq.correlation >= 0.0,
        "correlation M must be non-negative",
    );
    check(
        sq.correlation <= m_max * (1.0 + 1e-12),
        &format!(
            "correlation M = {} exceeds sqrt(N(N+1)) = {}",
            sq.correlation, m_max
        ),
    );
    check(positive(sq.bandwidth), "bandwidth Gamma must be positive");
    check(
        params.bath.temperature.is_finite() && params.bath.temperature >= 0.0,
        "temperature must be non-negative",
    );

    let kappa_over_omega_m = params.kappa_over_omega_m();
    let gamma_over_kappa = sq.bandwidth / cav.kappa;
    let mut notes = Vec::new();
    if kappa_over_omega_m < 1.0 {
        notes.push(format!(
            "resolved sideband regime (kappa/omega_m = {kappa_over_omega_m:.3})"
        ));
    } else {
        notes.push(format!(
            "unresolved sidebands (kappa/omega_m = {kappa_over_omega_m:.3})"
        ));
    }
    notes.push(format!(
        "squeezed bandwidth Gamma = {:.3} kappa = {:.3} omega_m",
        gamma_over_kappa,
        sq.bandwidth / mech.omega_m
    ));
    if sq.bandwidth < mech.omega_m {
        notes.push("squeezed vacuum bandwidth resolved within the mechanical sideband".into());
    }

    let coupling = params.coupling();
    Diagnostics {
        quality_factor: params.quality_factor(),
        kappa_over_omega_m,
        gamma_over_kappa,
        coupling_g_rad_s: coupling.g,
        coupling_prefactor_hz_per_nm: coupling.prefactor / TWO_PI * NANOMETRE,
        notes,
        violations,
    }
}

/// Detuning mode in a [`ParameterDocument`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetuningDocument {
    #[default]
    Resonant,
    Fixed {
        delta_hz: f64,
    },
    SelfConsistent {
        bare_hz: f64,
    },
}

fn default_true() -> bool {
    true
}

/// JSON form of a [`ParameterSet`].
///
/// Keys ending in `_hz` are frequencies. With `two_pi_convention = true`
/// (the default) a value `v` means ω = 2π·v; with `false` it is taken as
/// rad/s directly. Exactly one of `cavity_length_m` and
/// `coupling_prefactor_hz_per_m` must be present. A missing
/// `bandwidth_hz` defaults to Γ = 2κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDocument {
    #[serde(default = "default_true")]
    pub two_pi_convention: bool,
    pub mass_kg: f64,
    pub omega_m_hz: f64,
    pub gamma_m_hz: f64,
    pub wavelength_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_length_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_prefactor_hz_per_m: Option<f64>,
    pub kappa_hz: f64,
    #[serde(default)]
    pub power_w: f64,
    #[serde(default)]
    pub detuning: DetuningDocument,
    #[serde(default)]
    pub n_photons: f64,
    #[serde(default)]
    pub m_correlation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(default)]
    pub temperature_k: f64,
}

impl ParameterDocument {
    pub fn from_parameters(params: &ParameterSet) -> Self {
        let hz = |w: f64| w / TWO_PI;
        let (cavity_length_m, coupling_prefactor_hz_per_m) = match params.cavity.geometry {
            CouplingGeometry::Length(l) => (Some(l), None),
            CouplingGeometry::Prefactor(p) => (None, Some(hz(p))),
        };
        let detuning = match params.drive.detuning {
            Detuning::Resonant => DetuningDocument::Resonant,
            Detuning::Fixed(d) => DetuningDocument::Fixed { delta_hz: hz(d) },
            Detuning::SelfConsistent { bare } => {
                DetuningDocument::SelfConsistent { bare_hz: hz(bare) }
            }
        };
        Self {
            two_pi_convention: true,
            mass_kg: params.mechanical.mass,
            omega_m_hz: hz(params.mechanical.omega_m),
            gamma_m_hz: hz(params.mechanical.gamma_m),
            wavelength_m: params.cavity.wavelength(),
            cavity_length_m,
            coupling_prefactor_hz_per_m,
            kappa_hz: hz(params.cavity.kappa),
            power_w: params.drive.power,
            detuning,
            n_photons: params.squeezed.photons,
            m_correlation: params.squeezed.correlation,
            bandwidth_hz: Some(hz(params.squeezed.bandwidth)),
            temperature_k: params.bath.temperature,
        }
    }

    pub fn to_parameters(&self) -> Result<ParameterSet> {
        let scale = if self.two_pi_convention { TWO_PI } else { 1.0 };
        let geometry =
            match (self.cavity_length_m, self.coupling_prefactor_hz_per_m) {
                (Some(l), None) => CouplingGeometry::Length(l),
                (None, Some(p)) => CouplingGeometry::Prefactor(scale * p),
                _ => return Err(Error::Config(
                    "exactly one of cavity_length_m and coupling_prefactor_hz_per_m is required"
                        .into(),
                )),
            };
        let kappa = scale * self.kappa_hz;
        let detuning = match self.detuning {
            DetuningDocument::Resonant => Detuning::Resonant,
            DetuningDocument::Fixed { delta_hz } => Detuning::Fixed(scale * delta_hz),
            DetuningDocument::SelfConsistent { bare_hz } => Detuning::SelfConsistent {
                bare: scale * bare_hz,
            },
        };
        ParameterSet {
            mechanical: MechanicalOscillator {
                mass: self.mass_kg,
                omega_m: scale * self.omega_m_hz,
                gamma_m: scale * self.gamma_m_hz,
            },
            cavity: Cavity::from_wavelength(self.wavelength_m, geometry, kappa),
            drive: Drive {
                power: self.power_w,
                detuning,
            },
            squeezed: SqueezedInput {
                photons: self.n_photons,
                correlation: self.m_correlation,
                bandwidth: self.bandwidth_hz.map_or(2.0 * kappa, |b| scale * b),
            },
            bath: Bath {
                temperature: self.temperature_k,
            },
        }
        .checked()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weis_ratios() {
        let p = load_preset("weis").unwrap();
        // 15 / 51.8 = 0.28958..., quoted as 0.289
        assert!((p.kappa_over_omega_m() / 0.289 - 1.0).abs() < 5e-3);
        assert_eq!(p.quality_factor().round(), 1263.0);
    }

    #[test]
    fn aspelmeyer_prefactor_and_q() {
        let p = load_preset("aspelmeyer").unwrap();
        let per_nm = p.coupling().prefactor / TWO_PI * NANOMETRE;
        assert!((per_nm / 11.28e6 - 1.0).abs() < 0.005, "{per_nm}");
        assert!((p.quality_factor() / 6700.0 - 1.0).abs() < 0.01);
        assert!((p.kappa_over_omega_m() - 0.227).abs() < 5e-4);
    }

    #[test]
    fn unknown_preset_names_valid_set() {
        let err = load_preset("unknown").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weis") && msg.contains("aspelmeyer"), "{msg}");
        assert_eq!("AspelMeyer".parse::<Preset>().unwrap(), Preset::Aspelmeyer);
    }

    #[test]
    fn coupling_golden_values() {
        // Frozen from direct evaluation of (ω_c/L)·√(ħ/(2mω_m)) with CODATA ħ.
        let weis = load_preset("weis").unwrap();
        assert_relative_eq!(weis.g(), 6786.008278079441, max_relative = 1e-12);
        let asp = load_preset("aspelmeyer").unwrap();
        assert_relative_eq!(asp.g(), 17.50624864000651, max_relative = 1e-12);
    }

    #[test]
    fn coupling_scaling() {
        let p = load_preset("weis").unwrap();
        let mut heavy = p.mechanical;
        heavy.mass *= 4.0;
        let g0 = derive_coupling(&p.cavity, &p.mechanical).g;
        let g1 = derive_coupling(&p.cavity, &heavy).g;
        assert_relative_eq!(g1, g0 / 2.0, max_relative = 1e-14);

        let mut cav = p.cavity;
        cav.geometry = CouplingGeometry::Prefactor(2.0 * p.cavity.coupling_prefactor());
        assert_relative_eq!(
            derive_coupling(&cav, &p.mechanical).g,
            2.0 * g0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn drive_amplitude_values() {
        let p = load_preset("weis").unwrap();
        let (k, wc) = (p.cavity.kappa, p.cavity.omega_c);
        assert_eq!(drive_amplitude(0.0, k, wc), 0.0);
        assert_relative_eq!(
            drive_amplitude(20e-3, k, wc),
            3835111938536.5127,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            drive_amplitude(80e-3, k, wc),
            2.0 * drive_amplitude(20e-3, k, wc),
            max_relative = 1e-14
        );
    }

    #[test]
    fn cross_correlation() {
        assert_eq!(max_cross_correlation(0.0), 0.0);
        assert_eq!(max_cross_correlation(5.0), 30f64.sqrt());
        let m10 = max_cross_correlation(10.0);
        assert!((m10 - 10.488).abs() < 1e-3);
        assert_eq!(m10.round(), 10.0);
    }

    #[test]
    fn validate_reports() {
        let p = load_preset("weis").unwrap();
        let d = validate(&p);
        assert!(d.violations.is_empty());
        assert_eq!(d.quality_factor.round(), 1263.0);
        assert_relative_eq!(d.gamma_over_kappa, 2.0);
        assert!(d.notes.iter().any(|n| n.contains("resolved sideband")));
        assert!(d.notes.iter().any(|n| n.contains("bandwidth")));

        let bad = p.with_squeezed(SqueezedInput {
            photons: 1.0,
            correlation: 2.0,
            bandwidth: p.squeezed.bandwidth,
        });
        let d = validate(&bad);
        assert_eq!(d.violations.len(), 1);
        assert!(d.violations[0].contains("exceeds"));
        assert!(bad.checked().is_err());
    }

    #[test]
    fn document_roundtrip_preserves_parameters() {
        for preset in Preset::ALL {
            let p = preset
                .parameters()
                .with_power(0.01)
                .with_squeezed(SqueezedInput::pure(5.0, 3e7))
                .with_temperature(0.1)
                .with_detuning(Detuning::SelfConsistent { bare: 1e8 });
            let doc = ParameterDocument::from_parameters(&p);
            let text = serde_json::to_string(&doc).unwrap();
            let back: ParameterDocument = serde_json::from_str(&text).unwrap();
            let q = back.to_parameters().unwrap();
            assert_relative_eq!(q.g(), p.g(), max_relative = 1e-12);
            assert_relative_eq!(q.cavity.omega_c, p.cavity.omega_c, max_relative = 1e-12);
            assert_relative_eq!(
                q.squeezed.bandwidth,
                p.squeezed.bandwidth,
                max_relative = 1e-12
            );
            match q.drive.detuning {
                Detuning::SelfConsistent { bare } => {
                    assert_relative_eq!(bare, 1e8, max_relative = 1e-12)
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn document_angular_flag_and_defaults() {
        let text = r#"{
            "two_pi_convention": false,
            "mass_kg": 2e-11,
            "omega_m_hz": 3.0e8,
            "gamma_m_hz": 2.0e5,
            "wavelength_m": 7.75e-7,
            "coupling_prefactor_hz_per_m": 7.5e19,
            "kappa_hz": 9.0e7
        }"#;
        let doc: ParameterDocument = serde_json::from_str(text).unwrap();
        let p = doc.to_parameters().unwrap();
        assert_eq!(p.mechanical.omega_m, 3.0e8);
        assert_eq!(p.squeezed.bandwidth, 1.8e8);
        assert_eq!(p.drive.detuning, Detuning::Resonant);

        let both = text.replace("\"kappa_hz\"", "\"cavity_length_m\": 0.01, \"kappa_hz\"");
        let doc: ParameterDocument = serde_json::from_str(&both).unwrap();
        assert!(doc.to_parameters().is_err());
    }
}
