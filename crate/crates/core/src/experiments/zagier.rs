//! Equidistribution of long horocycles in genus 1 for `f = y¹²|Δ|²`.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fit::{ci_half_width, envelope_fit, oscillation_fit};
use super::horocycle::{horocycle_average_g1, HorocycleAverage};
use super::report::{Check, ExperimentReport, FitParameter, SeriesPoint, TargetConstant};
use crate::domain::integrate_domain_g1;
use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::quadrature::QuadratureSpec;
use crate::special::zeta_zero;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZagierConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub y_points: usize,
    /// Height of the limit check `|A(y)/T − 1|`.
    pub limit_y: f64,
    pub limit_tolerance: f64,
    /// Half-width in `ln y` of the windows selecting envelope maxima.
    pub envelope_window: f64,
    pub exponent_min: f64,
    pub exponent_max: f64,
    /// Allowed relative deviation of the fitted frequency from `t₁/2`.
    pub frequency_tolerance: f64,
    /// Frequency search range in `ln y`.
    pub omega_min: f64,
    pub omega_max: f64,
    pub domain: QuadratureSpec,
}

impl Default for ZagierConfig {
    fn default() -> Self {
        Self {
            y_min: 1e-4,
            y_max: 1e-1,
            y_points: 121,
            limit_y: 1e-3,
            limit_tolerance: 0.01,
            envelope_window: 0.25,
            exponent_min: 0.65,
            exponent_max: 0.85,
            frequency_tolerance: 0.05,
            omega_min: 2.0,
            omega_max: 15.0,
            domain: QuadratureSpec {
                order: 24,
                panels: 2,
                y_max: 20.0,
                tolerance: 1e-8,
                ..QuadratureSpec::default()
            },
        }
    }
}

impl ZagierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_min > 0.0 && self.y_max > self.y_min) {
            return Err(Error::Config(format!(
                "need 0 < y_min < y_max, got {} and {}",
                self.y_min, self.y_max
            )));
        }
        if (self.y_max / self.y_min).log10() < 3.0 - 1e-9 {
            return Err(Error::Config("the y grid must span at least three decades".into()));
        }
        if self.y_points < 10 {
            return Err(Error::Config(format!("need at least 10 grid points, got {}", self.y_points)));
        }
        if !(self.limit_y > 0.0 && self.envelope_window > 0.0 && self.omega_min > 0.0 && self.omega_max > self.omega_min)
        {
            return Err(Error::Config("limit height, window and frequency range must be positive".into()));
        }
        self.domain.validate()
    }

    /// Decreasing, logarithmically spaced heights from `y_max` to `y_min`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.y_points;
        let ratio = (self.y_min / self.y_max).ln();
        (0..n)
            .map(|k| self.y_max * (ratio * k as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

/// `T = (3/π)·∫_{D₁} f dμ`, the limit of horocycle averages.
pub fn zagier_target(f: &InvariantFunction, spec: &QuadratureSpec) -> Result<TargetConstant> {
    let d = integrate_domain_g1(f, spec)?;
    let k = 3.0 / PI;
    Ok(TargetConstant {
        name: "(3/pi) * integral of f over the genus-1 domain".into(),
        value: k * d.value,
        error: k * (d.error + d.tail),
        method: format!(
            "Gauss-Legendre panels in x and ln y, order {}, y_max {}",
            2 * spec.order,
            spec.y_max
        ),
    })
}

fn sign_changes_per_decade(ys: &[f64], es: &[f64]) -> Vec<(f64, usize)> {
    let top = ys[0].log10().floor() as i32;
    let bottom = ys[ys.len() - 1].log10().floor() as i32;
    (bottom..top)
        .rev()
        .map(|d| {
            let (hi, lo) = (10f64.powi(d + 1), 10f64.powi(d));
            let idx: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] <= hi && ys[i] >= lo).collect();
            let changes = idx.windows(2).filter(|w| es[w[0]] * es[w[1]] < 0.0).count();
            (lo, changes)
        })
        .collect()
}

pub fn zagier_experiment(config: &ZagierConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let f = InvariantFunction::delta_g1();
    let target = zagier_target(&f, &config.domain)?;
    let t = target.value;

    let grid = config.grid();
    let averages: Vec<HorocycleAverage> = grid
        .par_iter()
        .map(|&y| horocycle_average_g1(&f, y))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = averages.iter().map(|a| a.value - t).collect();

    let limit = horocycle_average_g1(&f, config.limit_y)?;
    let limit_deviation = (limit.value / t - 1.0).abs();

    let (envelope, peaks) = envelope_fit(&grid, &errors, config.envelope_window)?;
    let oscillation = oscillation_fit(&grid, &errors, 0.75, config.omega_min, config.omega_max)?;
    let expected_frequency = 0.5 * zeta_zero(1)?;
    let frequency_deviation = (oscillation.frequency / expected_frequency - 1.0).abs();

    let mut report = ExperimentReport::new("zagier", serde_json::to_value(config).expect("serializable config"));
    report.series = grid
        .iter()
        .zip(&averages)
        .zip(&errors)
        .map(|((&y, a), &e)| SeriesPoint {
            x: y,
            value: a.value,
            error: e,
            fit_residual: Some(e - oscillation.model(y, 0.75)),
        })
        .collect();
    report.grid = grid.clone();
    report.target = Some(target);
    report.fits = vec![
        FitParameter::new("envelope_exponent", envelope.slope, envelope.slope_half_width()),
        FitParameter::new("envelope_log_amplitude", envelope.intercept, 0.0),
        FitParameter::new(
            "oscillation_frequency",
            oscillation.frequency,
            ci_half_width(oscillation.frequency_stderr),
        ),
        FitParameter::new("oscillation_amplitude", oscillation.amplitude, 0.0),
        FitParameter::new("oscillation_phase", oscillation.phase, 0.0),
    ];
    let mut frequency_check = Check::at_most(
        "oscillation_frequency_relative_deviation",
        frequency_deviation,
        config.frequency_tolerance,
    )
    .informational();
    frequency_check.passed &= oscillation.converged;
    report.checks = vec![
        Check::at_most("limit_relative_deviation", limit_deviation, config.limit_tolerance),
        Check::within("envelope_exponent", envelope.slope, config.exponent_min, config.exponent_max),
        frequency_check,
    ];
    report.details = json!({
        "limit": limit,
        "expected_frequency": expected_frequency,
        "oscillation": oscillation,
        "envelope_maxima": peaks.iter().map(|&i| grid[i]).collect::<Vec<_>>(),
        "sign_changes_per_decade": sign_changes_per_decade(&grid, &errors),
        "series_terms_at_smallest_y": averages.last().map(|a| a.terms),
    });
    Ok(report.finish(start))
}
