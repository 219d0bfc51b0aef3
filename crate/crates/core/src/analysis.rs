//! Frequency sweeps of `X(ω)` and extraction of the transparency dip.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{max_cross_correlation, ParameterSet, SqueezedInput};
use crate::spectrum::{homodyne_point, LinearResponse, SpectrumPoint};
use crate::steadystate::{is_stable, resolve, SteadyState};

/// Uniform grid in ω/ω_m, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!("count {count} < 2")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidGrid(format!(
                "need finite min < max, got {min}:{max}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Same span with twice the intervals.
    pub fn refined(&self) -> Self {
        Self {
            count: 2 * self.count - 1,
            ..*self
        }
    }
}

impl Default for Grid {
    /// 1601 points over ω/ω_m ∈ [−1, 1].
    fn default() -> Self {
        Self {
            min: -1.0,
            max: 1.0,
            count: 1601,
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// `min:max:count`, in units of ω_m.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidGrid(format!("expected min:max:count, got `{s}`"));
        let [min, max, count] = parts.as_slice() else {
            return Err(bad());
        };
        Grid::new(
            min.trim().parse().map_err(|_| bad())?,
            max.trim().parse().map_err(|_| bad())?,
            count.trim().parse().map_err(|_| bad())?,
        )
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

/// Scenario values echoed alongside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub power_w: f64,
    pub photons: f64,
    pub correlation: f64,
    pub temperature_k: f64,
    pub detuning_rad_s: f64,
    pub bandwidth_rad_s: f64,
}

impl Scenario {
    fn new(params: &ParameterSet, ss: &SteadyState) -> Self {
        Self {
            power_w: params.drive.power,
            photons: params.squeezed.photons,
            correlation: params.squeezed.correlation,
            temperature_k: params.bath.temperature,
            detuning_rad_s: ss.detuning,
            bandwidth_rad_s: params.squeezed.bandwidth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega_over_omega_m: f64,
    #[serde(flatten)]
    pub point: SpectrumPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub grid: Grid,
    pub scenario: Scenario,
    pub stable: bool,
    pub stability_margin: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn totals(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.point.total)
    }

    pub fn max_total(&self) -> f64 {
        self.totals().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_total(&self) -> f64 {
        self.totals().fold(f64::INFINITY, f64::min)
    }

    /// Grid positions where the printed thermal pair came out negative.
    pub fn negative_thermal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.point.thermal < 0.0)
            .map(|r| r.omega_over_omega_m)
            .collect()
    }
}

/// Evaluates `X(ω)` over `grid` with the steady state resolved from
/// `params`. Grid points may be evaluated concurrently; rows are always in
/// grid order.
pub fn sweep(params: &ParameterSet, grid: &Grid) -> Result<SweepTable> {
    let ss = resolve(params)?;
    sweep_at(params, &ss, grid)
}

pub fn sweep_at(params: &ParameterSet, ss: &SteadyState, grid: &Grid) -> Result<SweepTable> {
    let stability = is_stable(params, ss)?;
    let response = LinearResponse::new(params, ss);
    let wm = params.mechanical.omega_m;
    let rows = (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            homodyne_point(&response, &params.squeezed, &params.bath, x * wm)
                .map(|point| SweepRow {
                    omega_over_omega_m: x,
                    point,
                })
                .map_err(|e| Error::AtGridPoint {
                    omega_over_omega_m: x,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        grid: *grid,
        scenario: Scenario::new(params, ss),
        stable: stability.stable,
        stability_margin: stability.margin,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub omega_over_omega_m: f64,
    pub value: f64,
}

/// Depth and width of the transparency dip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipReport {
    pub x_min: f64,
    pub omega_min_over_omega_m: f64,
    /// Full width at the half-depth level, in units of ω_m.
    pub width_over_omega_m: f64,
    pub half_depth_level: f64,
    pub left_peak: Peak,
    pub right_peak: Peak,
    pub baseline: &'static str,
}

pub const DIP_BASELINE: &str =
    "full width where X crosses x_min + (X_peak - x_min)/2, X_peak = mean of the two flanking maxima";

/// Locates the lowest interior local minimum of `total` that has a local
/// maximum on each side, and measures its full width at half depth.
///
/// The flanking maxima are the largest local maxima on each side (ties go
/// to the one nearer the dip). Crossings are linearly interpolated.
pub fn dip_metrics(table: &SweepTable) -> Result<DipReport> {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.omega_over_omega_m).collect();
    let ys: Vec<f64> = table.totals().collect();
    find_dip(&xs, &ys)
}

pub(crate) fn find_dip(xs: &[f64], ys: &[f64]) -> Result<DipReport> {
    let n = ys.len();
    if n < 3 {
        return Err(Error::NoDip(format!("{n} grid points")));
    }
    let maxima: Vec<usize> = (1..n - 1)
        .filter(|&j| ys[j] > ys[j - 1] && ys[j] >= ys[j + 1])
        .collect();
    let (Some(&first_max), Some(&last_max)) = (maxima.first(), maxima.last()) else {
        return Err(Error::NoDip("no interior local maximum".into()));
    };
    let dip = (1..n - 1)
        .filter(|&j| ys[j] < ys[j - 1] && ys[j] <= ys[j + 1])
        .filter(|&j| first_max < j && j < last_max)
        .min_by(|&a, &b| ys[a].total_cmp(&ys[b]))
        .ok_or_else(|| Error::NoDip("no local minimum flanked by maxima".into()))?;

    // Ties resolved toward the dip: scanning outward, keep the first strict best.
    let left = maxima
        .iter()
        .rev()
        .filter(|&&j| j < dip)
        .fold(None, |best: Option<usize>, &j| match best {
            Some(b) if ys[b] >= ys[j] => Some(b),
            _ => Some(j),
        })
        .expect("dip lies right of a maximum");
    let right = maxima
        .iter()
        .filter(|&&j| j > dip)
        .fold(None, |best: Option<usize>, &j| match best {
            Some(b) if ys[b] >= ys[j] => Some(b),
            _ => Some(j),
        })
        .expect("dip lies left of a maximum");

    let x_min = ys[dip];
    let peak = 0.5 * (ys[left] + ys[right]);
    let half = x_min + 0.5 * (peak - x_min);
    let lerp = |a: usize, b: usize| xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a]);

    let lo = (left..dip)
        .rev()
        .find(|&j| ys[j] >= half)
        .ok_or_else(|| Error::NoDip("left flank never reaches half depth".into()))?;
    let hi = (dip + 1..=right)
        .find(|&j| ys[j] >= half)
        .ok_or_else(|| Error::NoDip("right flank never reaches half depth".into()))?;
    let width = lerp(hi - 1, hi) - lerp(lo, lo + 1);

    Ok(DipReport {
        x_min,
        omega_min_over_omega_m: xs[dip],
        width_over_omega_m: width,
        half_depth_level: half,
        left_peak: Peak {
            omega_over_omega_m: xs[left],
            value: ys[left],
        },
        right_peak: Peak {
            omega_over_omega_m: xs[right],
            value: ys[right],
        },
        baseline: DIP_BASELINE,
    })
}

/// Phase-sensitive (M = √(N(N+1))) against phase-insensitive (M = 0) input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseComparison {
    pub squeezed: SweepTable,
    pub phase_insensitive: SweepTable,
    /// max X (M = 0) / max X (M = √(N(N+1))).
    pub peak_ratio: f64,
}

pub fn compare_phase_sensitivity(
    params: &ParameterSet,
    power: f64,
    photons: f64,
    temperature: f64,
    grid: &Grid,
) -> Result<PhaseComparison> {
    let bandwidth = params.squeezed.bandwidth;
    let base = params.with_power(power).with_temperature(temperature);
    let squeezed = sweep(
        &base.with_squeezed(SqueezedInput::pure(photons, bandwidth)),
        grid,
    )?;
    let phase_insensitive = sweep(
        &base.with_squeezed(SqueezedInput {
            photons,
            correlation: 0.0,
            bandwidth,
        }),
        grid,
    )?;
    let peak_ratio = phase_insensitive.max_total() / squeezed.max_total();
    Ok(PhaseComparison {
        squeezed,
        phase_insensitive,
        peak_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperaturePoint {
    pub temperature_k: f64,
    pub dip: DipReport,
}

/// Relative change of the dip between consecutive temperatures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureStep {
    pub from_k: f64,
    pub to_k: f64,
    pub x_min_change: f64,
    pub width_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureScan {
    pub points: Vec<TemperaturePoint>,
    pub steps: Vec<TemperatureStep>,
}

pub fn temperature_scan(
    params: &ParameterSet,
    power: f64,
    photons: f64,
    correlation: f64,
    temperatures: &[f64],
    grid: &Grid,
) -> Result<TemperatureScan> {
    let base = params.with_power(power).with_squeezed(SqueezedInput {
        photons,
        correlation,
        bandwidth: params.squeezed.bandwidth,
    });
    let points = temperatures
        .iter()
        .map(|&t| {
            let table = sweep(&base.with_temperature(t), grid)?;
            Ok(TemperaturePoint {
                temperature_k: t,
                dip: dip_metrics(&table)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = points
        .windows(2)
        .map(|w| TemperatureStep {
            from_k: w[0].temperature_k,
            to_k: w[1].temperature_k,
            x_min_change: w[1].dip.x_min / w[0].dip.x_min - 1.0,
            width_change: w[1].dip.width_over_omega_m / w[0].dip.width_over_omega_m - 1.0,
        })
        .collect();
    Ok(TemperatureScan { points, steps })
}

/// Squeezed input with maximal correlation, convenience for scenarios.
pub fn pure_squeezing(params: &ParameterSet, photons: f64) -> SqueezedInput {
    SqueezedInput {
        photons,
        correlation: max_cross_correlation(photons),
        bandwidth: params.squeezed.bandwidth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::load_preset;

    fn xs(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn grid_parsing_and_endpoints() {
        let g: Grid = "-1:1:5".parse().unwrap();
        assert_eq!(
            g.points().collect::<Vec<_>>(),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
        assert!("1:1:5".parse::<Grid>().is_err());
        assert!("-1:1:1".parse::<Grid>().is_err());
        assert!("-1:1".parse::<Grid>().is_err());
        assert_eq!(g.refined().count, 9);
    }

    #[test]
    fn synthetic_dip_width() {
        // Two Gaussian peaks at ±0.5 with a Lorentzian-free floor; dip at 0.
        let x = xs(2001);
        let y: Vec<f64> = x
            .iter()
            .map(|&t| {
                10.0 * (-(t - 0.5f64).powi(2) / 0.02).exp()
                    + 10.0 * (-(t + 0.5f64).powi(2) / 0.02).exp()
            })
            .collect();
        let d = find_dip(&x, &y).unwrap();
        assert!(d.omega_min_over_omega_m.abs() < 1e-12);
        // half level ≈ 5: crossings where the inner tails equal 5
        let inner = 0.5 - (0.02 * 2f64.ln()).sqrt();
        assert!(
            (d.width_over_omega_m - 2.0 * inner).abs() < 1e-3,
            "{}",
            d.width_over_omega_m
        );
    }

    #[test]
    fn monotone_has_no_dip() {
        let x = xs(101);
        let y: Vec<f64> = x.iter().map(|t| t * 3.0 + 1.0).collect();
        assert!(matches!(find_dip(&x, &y), Err(Error::NoDip(_))));
        assert!(find_dip(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn edge_minimum_is_not_the_dip() {
        // global minimum at the right edge; the dip is the interior one
        let x = xs(401);
        let y: Vec<f64> = x
            .iter()
            .map(|&t| {
                5.0 * (-(t - 0.2f64).powi(2) / 0.01).exp()
                    + 5.0 * (-(t + 0.2f64).powi(2) / 0.01).exp()
                    + 0.5
                    - 0.4 * t
            })
            .collect();
        let d = find_dip(&x, &y).unwrap();
        assert!(d.omega_min_over_omega_m.abs() < 0.05);
    }

    #[test]
    fn two_point_sweep_has_no_dip() {
        let p = load_preset("weis").unwrap();
        let t = sweep(&p, &Grid::new(-1.0, 1.0, 2).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(dip_metrics(&t).is_err());
    }

    #[test]
    fn undriven_spectrum_is_single_peaked() {
        let p = load_preset("weis").unwrap();
        let p = p
            .with_squeezed(pure_squeezing(&p, 5.0))
            .with_temperature(0.02);
        let t = sweep(&p, &Grid::new(-1.0, 1.0, 801).unwrap()).unwrap();
        assert!(t.stable);
        assert!(dip_metrics(&t).is_err());
        let peak = t
            .rows
            .iter()
            .max_by(|a, b| a.point.total.total_cmp(&b.point.total))
            .unwrap();
        assert_eq!(peak.omega_over_omega_m, 0.0);
    }

    #[test]
    fn zero_photons_comparison_is_identical() {
        let p = load_preset("weis").unwrap();
        let grid = Grid::new(-1.0, 1.0, 101).unwrap();
        let c = compare_phase_sensitivity(&p, 10e-3, 0.0, 0.02, &grid).unwrap();
        assert_eq!(c.squeezed.rows, c.phase_insensitive.rows);
        assert_eq!(c.peak_ratio, 1.0);
    }
}
