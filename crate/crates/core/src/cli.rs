//! `optoeit` command-line front end.
//!
//! Scenario values come from a preset or a JSON config file, with flags
//! taking precedence. Power is given in mW and temperature in mK.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{dip_metrics, sweep_at, Grid};
use crate::error::{Error, Result};
use crate::params::{
    max_cross_correlation, validate, Detuning, ParameterDocument, ParameterSet, Preset,
};
use crate::spectrum::x_at_zero;
use crate::steadystate::{is_stable, resolve, self_consistent_detunings, steady_state};
use crate::verify::run_verify;

#[derive(Debug, Parser)]
#[command(
    name = "optoeit",
    version,
    about = "Homodyne spectra of optomechanical EIT with squeezed probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep X(ω) over a grid in ω/ω_m.
    Spectrum(ScenarioArgs),
    /// Decompose X(0) into squeezed, vacuum and thermal parts.
    X0(ScenarioArgs),
    /// Locate the transparency dip and measure its width.
    Dip(ScenarioArgs),
    /// Roots of the characteristic polynomial and the stability verdict.
    Stability(ScenarioArgs),
    /// Run the internal consistency checks.
    Verify(ScenarioArgs),
    /// List the built-in parameter presets.
    Presets(FormatArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Phase-sensitive correlation: `max` = √(N(N+1)), `zero`, or a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationMode {
    Max,
    Zero,
    Value(f64),
}

impl CorrelationMode {
    pub fn resolve(self, photons: f64) -> f64 {
        match self {
            CorrelationMode::Max => max_cross_correlation(photons),
            CorrelationMode::Zero => 0.0,
            CorrelationMode::Value(m) => m,
        }
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max" => Ok(Self::Max),
            "zero" => Ok(Self::Zero),
            v => v.parse().map(Self::Value).map_err(|_| {
                Error::Config(format!("--m expects max, zero or a number, got `{s}`"))
            }),
        }
    }
}

/// `omega_m`, a fixed Δ in rad/s, or `self-consistent:<bare rad/s>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningArg(pub Detuning);

impl FromStr for DetuningArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::Config(format!(
                "--delta expects omega_m, <rad/s> or self-consistent:<rad/s>, got `{s}`"
            ))
        };
        if s == "omega_m" {
            return Ok(Self(Detuning::Resonant));
        }
        if let Some(rest) = s.strip_prefix("self-consistent:") {
            let bare = rest.trim().parse().map_err(|_| bad())?;
            return Ok(Self(Detuning::SelfConsistent { bare }));
        }
        s.parse()
            .map(|d| Self(Detuning::Fixed(d)))
            .map_err(|_| bad())
    }
}

/// Squeezed bandwidth: `<x>kappa` (multiple of κ) or rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthArg {
    KappaMultiple(f64),
    RadPerSecond(f64),
}

impl FromStr for BandwidthArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("--gamma expects <x>kappa or <rad/s>, got `{s}`"));
        if let Some(mult) = s.strip_suffix("kappa") {
            let mult = if mult.is_empty() {
                1.0
            } else {
                mult.parse().map_err(|_| bad())?
            };
            return Ok(Self::KappaMultiple(mult));
        }
        s.parse().map(Self::RadPerSecond).map_err(|_| bad())
    }
}

fn parse_with<T: FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Built-in parameter set (weis | aspelmeyer).
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling-field power in mW.
    #[arg(long = "power-mw")]
    pub power_mw: Option<f64>,
    /// Squeezed-vacuum photon number N.
    #[arg(long = "n")]
    pub photons: Option<f64>,
    /// Correlation M: max | zero | <value>.
    #[arg(long = "m", value_parser = parse_with::<CorrelationMode>)]
    pub correlation: Option<CorrelationMode>,
    /// Bath temperature in mK.
    #[arg(long = "temp-mk")]
    pub temp_mk: Option<f64>,
    /// Effective detuning: omega_m | <rad/s> | self-consistent:<bare rad/s>.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_with::<DetuningArg>)]
    pub delta: Option<DetuningArg>,
    /// Squeezed bandwidth: <x>kappa | <rad/s> (default 2kappa).
    #[arg(long, value_parser = parse_with::<BandwidthArg>)]
    pub gamma: Option<BandwidthArg>,
    /// Grid min:max:count in units of ω_m.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_with::<Grid>)]
    pub grid: Option<Grid>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output here (atomically) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Proceed even when the steady state is unstable.
    #[arg(long = "allow-unstable")]
    pub allow_unstable: bool,
}

/// JSON config file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub preset: Option<String>,
    pub parameters: Option<ParameterDocument>,
    pub power_mw: Option<f64>,
    pub n: Option<f64>,
    /// "max", "zero" or a number.
    pub m: Option<serde_json::Value>,
    pub temp_mk: Option<f64>,
    pub delta: Option<String>,
    pub gamma: Option<String>,
    pub grid: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub allow_unstable: Option<bool>,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub params: ParameterSet,
    pub grid: Grid,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub allow_unstable: bool,
}

impl ScenarioConfig {
    pub fn resolve(args: &ScenarioArgs) -> Result<Self> {
        let doc: ScenarioDocument = match &args.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => ScenarioDocument::default(),
        };
        let from_doc = |v: &Option<String>| -> Option<String> { v.clone() };

        let mut params = if let Some(name) = args.preset.as_ref().or(doc.preset.as_ref()) {
            name.parse::<Preset>()?.parameters()
        } else if let Some(p) = &doc.parameters {
            p.to_parameters()?
        } else {
            return Err(Error::Config(
                "no parameters: pass --preset <weis|aspelmeyer> or --config with a preset or parameters block".into(),
            ));
        };
        if args.preset.is_none() && doc.preset.is_some() && doc.parameters.is_some() {
            return Err(Error::Config(
                "config gives both preset and parameters".into(),
            ));
        }

        if let Some(mw) = args.power_mw.or(doc.power_mw) {
            params.drive.power = mw * 1e-3;
        }
        if let Some(mk) = args.temp_mk.or(doc.temp_mk) {
            params.bath.temperature = mk * 1e-3;
        }
        let photons_given = args.photons.or(doc.n);
        if let Some(n) = photons_given {
            params.squeezed.photons = n;
        }
        let mode = match (args.correlation, &doc.m) {
            (Some(m), _) => Some(m),
            (None, Some(serde_json::Value::String(s))) => Some(s.parse()?),
            (None, Some(serde_json::Value::Number(n))) => {
                Some(CorrelationMode::Value(n.as_f64().unwrap_or(f64::NAN)))
            }
            (None, Some(other)) => {
                return Err(Error::Config(format!(
                    "m must be max, zero or a number, got {other}"
                )))
            }
            // a bare preset defaults to the fully squeezed input
            (None, None) if photons_given.is_some() || doc.parameters.is_none() => {
                Some(CorrelationMode::Max)
            }
            (None, None) => None,
        };
        if let Some(mode) = mode {
            params.squeezed.correlation = mode.resolve(params.squeezed.photons);
        }
        let delta = match (args.delta, from_doc(&doc.delta)) {
            (Some(d), _) => Some(d),
            (None, Some(s)) => Some(s.parse()?),
            (None, None) => None,
        };
        if let Some(DetuningArg(d)) = delta {
            params.drive.detuning = d;
        }
        let gamma = match (args.gamma, from_doc(&doc.gamma)) {
            (Some(g), _) => Some(g),
            (None, Some(s)) => Some(s.parse()?),
            (None, None) => None,
        };
        match gamma {
            Some(BandwidthArg::KappaMultiple(x)) => {
                params.squeezed.bandwidth = x * params.cavity.kappa
            }
            Some(BandwidthArg::RadPerSecond(b)) => params.squeezed.bandwidth = b,
            None => {}
        }
        let grid = match (args.grid, from_doc(&doc.grid)) {
            (Some(g), _) => g,
            (None, Some(s)) => s.parse()?,
            (None, None) => Grid::default(),
        };

        Ok(Self {
            params: params.checked()?,
            grid,
            format: args.format.or(doc.format),
            out: args.out.clone().or(doc.out),
            allow_unstable: args.allow_unstable || doc.allow_unstable.unwrap_or(false),
        })
    }
}

/// Formats with 12 significant digits; identical inputs give identical bytes.
fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub const CSV_HEADER: &str = "omega_over_omega_m,x_total,x_squeezed,x_vacuum,x_thermal";

fn emit(out: Option<&Path>, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => {
            stdout.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("--out `{}` has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn to_json(value: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn echo(params: &ParameterSet) -> serde_json::Value {
    json!({
        "parameters": ParameterDocument::from_parameters(params),
        "derived": validate(params),
    })
}

/// Executes one subcommand. Returns the process exit code; data goes to
/// `stdout` (or `--out`), the parameter echo and warnings to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Presets(args) => run_presets(args.format.unwrap_or(Format::Text), stdout),
        Command::Spectrum(args) => run_spectrum(&ScenarioConfig::resolve(args)?, stdout, stderr),
        Command::X0(args) => run_x0(&ScenarioConfig::resolve(args)?, stdout),
        Command::Dip(args) => run_dip(&ScenarioConfig::resolve(args)?, stdout),
        Command::Stability(args) => run_stability(&ScenarioConfig::resolve(args)?, stdout),
        Command::Verify(args) => {
            let args = if args.preset.is_none() && args.config.is_none() {
                return Err(Error::Config("verify needs --preset or --config".into()));
            } else {
                args
            };
            run_verify_cmd(&ScenarioConfig::resolve(args)?, stdout)
        }
    }
}

fn checked_steady_state(cfg: &ScenarioConfig) -> Result<(crate::steadystate::SteadyState, bool)> {
    let ss = resolve(&cfg.params)?;
    let report = is_stable(&cfg.params, &ss)?;
    if !report.stable && !cfg.allow_unstable {
        return Err(Error::Unstable {
            margin: report.margin,
        });
    }
    Ok((ss, report.stable))
}

pub fn run_spectrum(
    cfg: &ScenarioConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (ss, _) = checked_steady_state(cfg)?;
    let table = sweep_at(&cfg.params, &ss, &cfg.grid)?;
    let negative = table.negative_thermal();
    if !negative.is_empty() {
        writeln!(
            stderr,
            "warning: thermal part negative at {} grid points (first at omega/omega_m = {})",
            negative.len(),
            negative[0]
        )?;
    }
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(stderr, "{}", serde_json::to_string(&echo(&cfg.params))?)?;
            let mut s = String::with_capacity(80 * table.rows.len());
            s.push_str(CSV_HEADER);
            s.push('\n');
            for r in &table.rows {
                let p = &r.point;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    sci(r.omega_over_omega_m),
                    sci(p.total),
                    sci(p.squeezed),
                    sci(p.vacuum),
                    sci(p.thermal)
                );
            }
            s
        }
        Format::Json | Format::Text => {
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "omega_over_omega_m": r.omega_over_omega_m,
                        "x_total": r.point.total,
                        "x_squeezed": r.point.squeezed,
                        "x_vacuum": r.point.vacuum,
                        "x_thermal": r.point.thermal,
                    })
                })
                .collect();
            let mut v = echo(&cfg.params);
            v["scenario"] = serde_json::to_value(&table.scenario)?;
            v["grid"] = serde_json::to_value(table.grid)?;
            v["stable"] = json!(table.stable);
            v["stability_margin_rad_s"] = json!(table.stability_margin);
            v["rows"] = json!(rows);
            to_json(&v)?
        }
    };
    emit(cfg.out.as_deref(), &body, stdout)?;
    Ok(0)
}

pub fn run_x0(cfg: &ScenarioConfig, stdout: &mut dyn Write) -> Result<i32> {
    let (ss, stable) = checked_steady_state(cfg)?;
    let p = &cfg.params;
    let point = x_at_zero(p, &ss, &p.squeezed, &p.bath)?;
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Text | Format::Csv => format!(
            "squeezed {}\nvacuum   {}\nthermal  {}\ntotal    {}\n",
            sci(point.squeezed),
            sci(point.vacuum),
            sci(point.thermal),
            sci(point.total)
        ),
        Format::Json => {
            let mut v = echo(p);
            v["stable"] = json!(stable);
            v["x0"] = json!({
                "squeezed": point.squeezed,
                "vacuum": point.vacuum,
                "thermal": point.thermal,
                "total": point.total,
            });
            to_json(&v)?
        }
    };
    emit(cfg.out.as_deref(), &body, stdout)?;
    Ok(0)
}

pub fn run_dip(cfg: &ScenarioConfig, stdout: &mut dyn Write) -> Result<i32> {
    let (ss, _) = checked_steady_state(cfg)?;
    let table = sweep_at(&cfg.params, &ss, &cfg.grid)?;
    let dip = dip_metrics(&table)?;
    let mut v = echo(&cfg.params);
    v["grid"] = serde_json::to_value(table.grid)?;
    v["stable"] = json!(table.stable);
    v["dip"] = serde_json::to_value(&dip)?;
    emit(cfg.out.as_deref(), &to_json(&v)?, stdout)?;
    Ok(0)
}

pub fn run_stability(cfg: &ScenarioConfig, stdout: &mut dyn Write) -> Result<i32> {
    let p = &cfg.params;
    let entries = match p.drive.detuning {
        Detuning::SelfConsistent { bare } => self_consistent_detunings(p, bare)?
            .into_iter()
            .map(|r| (r.detuning, r.stability))
            .collect::<Vec<_>>(),
        _ => {
            let ss = resolve(p)?;
            vec![(ss.detuning, is_stable(p, &ss)?)]
        }
    };
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json | Format::Csv => {
            let list: Vec<_> = entries
                .iter()
                .map(|(delta, rep)| {
                    let ss = steady_state(p, *delta);
                    json!({
                        "detuning_rad_s": delta,
                        "intracavity_photons": ss.photons(),
                        "displacement": ss.displacement,
                        "roots": rep.roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                        "margin_rad_s": rep.margin,
                        "max_residual": rep.max_residual,
                        "stable": rep.stable,
                    })
                })
                .collect();
            let mut v = echo(p);
            v["steady_states"] = json!(list);
            to_json(&v)?
        }
        Format::Text => {
            let mut s = String::new();
            for (delta, rep) in &entries {
                let _ = writeln!(s, "delta      {:>20} rad/s", sci(*delta));
                for z in &rep.roots {
                    let _ = writeln!(s, "root       {:>20} {:>20}i", sci(z.re), sci(z.im));
                }
                let _ = writeln!(s, "margin     {:>20} rad/s", sci(rep.margin));
                let _ = writeln!(s, "residual   {:>20}", sci(rep.max_residual));
                let _ = writeln!(
                    s,
                    "verdict    {:>20}",
                    if rep.stable { "stable" } else { "unstable" }
                );
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &body, stdout)?;
    Ok(0)
}

pub fn run_verify_cmd(cfg: &ScenarioConfig, stdout: &mut dyn Write) -> Result<i32> {
    let report = run_verify(&cfg.params)?;
    let mut v = echo(&cfg.params);
    v["checks"] = serde_json::to_value(&report.checks)?;
    v["passed"] = json!(report.passed);
    emit(cfg.out.as_deref(), &to_json(&v)?, stdout)?;
    Ok(if report.passed { 0 } else { 1 })
}

pub fn run_presets(format: Format, stdout: &mut dyn Write) -> Result<i32> {
    let body = match format {
        Format::Json | Format::Csv => {
            let list: Vec<_> = Preset::ALL
                .iter()
                .map(|p| {
                    let params = p.parameters();
                    json!({
                        "name": p.name(),
                        "parameters": ParameterDocument::from_parameters(&params),
                        "derived": validate(&params),
                    })
                })
                .collect();
            to_json(&json!(list))?
        }
        Format::Text => {
            let mut s = format!(
                "{:<12}{:>12}{:>14}{:>14}{:>14}{:>10}{:>10}\n",
                "name", "lambda_nm", "omega_m/2pi", "kappa/2pi", "gamma_m/2pi", "kappa/wm", "Q'"
            );
            for p in Preset::ALL {
                let q = p.parameters();
                let two_pi = crate::constants::TWO_PI;
                let _ = writeln!(
                    s,
                    "{:<12}{:>12.1}{:>14.4e}{:>14.4e}{:>14.4e}{:>10.4}{:>10.0}",
                    p.name(),
                    q.cavity.wavelength() * 1e9,
                    q.mechanical.omega_m / two_pi,
                    q.cavity.kappa / two_pi,
                    q.mechanical.gamma_m / two_pi,
                    q.kappa_over_omega_m(),
                    q.quality_factor()
                );
            }
            s
        }
    };
    stdout.write_all(body.as_bytes())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(preset: &str) -> ScenarioArgs {
        ScenarioArgs {
            preset: Some(preset.into()),
            ..Default::default()
        }
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(
            "max".parse::<CorrelationMode>().unwrap(),
            CorrelationMode::Max
        );
        assert_eq!(
            "0.5".parse::<CorrelationMode>().unwrap(),
            CorrelationMode::Value(0.5)
        );
        assert!("most".parse::<CorrelationMode>().is_err());
        assert_eq!(
            "omega_m".parse::<DetuningArg>().unwrap().0,
            Detuning::Resonant
        );
        assert_eq!(
            "self-consistent:1e8".parse::<DetuningArg>().unwrap().0,
            Detuning::SelfConsistent { bare: 1e8 }
        );
        assert_eq!(
            "3e8".parse::<DetuningArg>().unwrap().0,
            Detuning::Fixed(3e8)
        );
        assert_eq!(
            "2kappa".parse::<BandwidthArg>().unwrap(),
            BandwidthArg::KappaMultiple(2.0)
        );
        assert_eq!(
            "1e7".parse::<BandwidthArg>().unwrap(),
            BandwidthArg::RadPerSecond(1e7)
        );
    }

    #[test]
    fn scenario_units_and_defaults() {
        let mut a = args("weis");
        a.power_mw = Some(20.0);
        a.temp_mk = Some(20.0);
        a.photons = Some(5.0);
        let cfg = ScenarioConfig::resolve(&a).unwrap();
        assert_eq!(cfg.params.drive.power, 0.02);
        assert_eq!(cfg.params.bath.temperature, 0.02);
        assert_eq!(cfg.params.squeezed.correlation, 30f64.sqrt());
        assert_eq!(cfg.params.squeezed.bandwidth, 2.0 * cfg.params.cavity.kappa);
        assert_eq!(cfg.grid, Grid::default());

        a.correlation = Some(CorrelationMode::Zero);
        a.gamma = Some(BandwidthArg::KappaMultiple(1.0));
        let cfg = ScenarioConfig::resolve(&a).unwrap();
        assert_eq!(cfg.params.squeezed.correlation, 0.0);
        assert_eq!(cfg.params.squeezed.bandwidth, cfg.params.cavity.kappa);
    }

    #[test]
    fn missing_parameters_is_an_error() {
        let err = ScenarioConfig::resolve(&ScenarioArgs::default()).unwrap_err();
        assert!(err.to_string().contains("--preset"));
    }

    #[test]
    fn invalid_correlation_rejected() {
        let mut a = args("weis");
        a.photons = Some(1.0);
        a.correlation = Some(CorrelationMode::Value(3.0));
        assert!(matches!(
            ScenarioConfig::resolve(&a),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn unstable_needs_override() {
        let mut a = args("weis");
        a.power_mw = Some(20.0);
        a.delta = Some(DetuningArg(Detuning::Fixed(-3.2546899e8)));
        let cfg = ScenarioConfig::resolve(&a).unwrap();
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert!(matches!(
            run_x0(&cfg, &mut out),
            Err(Error::Unstable { .. })
        ));
        a.allow_unstable = true;
        let cfg = ScenarioConfig::resolve(&a).unwrap();
        assert_eq!(run_x0(&cfg, &mut out).unwrap(), 0);
        let _ = run_spectrum(&cfg, &mut out, &mut err);
    }

    #[test]
    fn csv_number_format() {
        assert_eq!(sci(0.22), "2.20000000000e-1");
        assert_eq!(sci(-1.0), "-1.00000000000e0");
    }
}
