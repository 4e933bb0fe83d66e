//! Invariance of genus-2 cell averages under the genus-1 modular group.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{Check, ExperimentReport, SeriesPoint};
use crate::average::{cell_average_refined, CellAverageRequest, InvarianceResidual};
use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::quadrature::QuadratureSpec;
use crate::symplectic::{mobius_act, random_gamma, SiegelPoint, SymplecticMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem1Config {
    pub cases: usize,
    pub v1_values: Vec<f64>,
    pub max_word_length: usize,
    pub seed: u64,
    /// Largest admissible relative quadrature error `ε_quad`.
    pub quad_tolerance: f64,
    /// Gauss–Legendre panels per dimension are raised up to this count
    /// until each average meets `quad.tolerance`.
    pub max_panels: usize,
    pub quad: QuadratureSpec,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            cases: 10,
            v1_values: vec![0.25, 0.5, 1.0],
            max_word_length: 6,
            seed: 0,
            quad_tolerance: 1e-4,
            max_panels: 3,
            quad: QuadratureSpec {
                tolerance: 1e-4,
                ..QuadratureSpec::default()
            },
        }
    }
}

impl Theorem1Config {
    pub fn validate(&self) -> Result<()> {
        if self.cases == 0 || self.v1_values.is_empty() || self.v1_values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("need at least one case and positive v1 values".into()));
        }
        if !(self.quad_tolerance > 0.0) || self.max_panels < self.quad.panels {
            return Err(Error::Config(
                "quadrature tolerance must be positive and max_panels at least quad.panels".into(),
            ));
        }
        self.quad.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Case {
    /// Row-major integer entries of `γ`.
    pub gamma: Vec<i64>,
    pub base: [f64; 2],
    pub v1: f64,
    pub result: InvarianceResidual,
    pub quad_error: f64,
    pub within_contract: bool,
}

/// A base point with `|x| ≤ ½` and `y ∈ [0.8, 1.6]`.
fn random_base(rng: &mut ChaCha8Rng) -> SiegelPoint {
    let z = num_complex::Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.8..1.6));
    SiegelPoint::scalar(z).expect("positive imaginary part")
}

/// Cell averages at `base` and `γ·base`, each refined independently.
pub fn invariance_case(
    f: &InvariantFunction,
    gamma: &SymplecticMatrix,
    base: &SiegelPoint,
    v1: f64,
    quad: &QuadratureSpec,
    max_panels: usize,
) -> Result<InvarianceResidual> {
    let request = |b: SiegelPoint| CellAverageRequest {
        f: f.clone(),
        v1,
        base: Some(b),
        quad: quad.clone(),
    };
    let at_base = cell_average_refined(&request(base.clone()), max_panels)?;
    let at_image = cell_average_refined(&request(mobius_act(gamma, base)?), max_panels)?;
    Ok(InvarianceResidual {
        residual: (at_base.value - at_image.value).abs() / (at_base.value.abs() + 1e-30),
        at_base,
        at_image,
    })
}

pub fn theorem1_experiment_g2(config: &Theorem1Config) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let f = InvariantFunction::chi_g2();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cases = Vec::with_capacity(config.cases);
    for k in 0..config.cases {
        let gamma = random_gamma(1, config.max_word_length, &mut rng);
        let base = random_base(&mut rng);
        let v1 = config.v1_values[k % config.v1_values.len()];
        let result = invariance_case(&f, &gamma, &base, v1, &config.quad, config.max_panels)?;
        let z = base.z();
        cases.push(Theorem1Case {
            gamma: gamma
                .to_integer()
                .expect("integral word")
                .transpose()
                .iter()
                .copied()
                .collect(),
            base: [z.re, z.im],
            v1,
            quad_error: result.combined_error(),
            within_contract: result.within_contract(),
            result,
        });
    }
    let worst_error = cases.iter().map(|c| c.quad_error).fold(0.0, f64::max);
    let worst_ratio = cases
        .iter()
        .map(|c| c.result.residual / (3.0 * c.quad_error))
        .fold(0.0, f64::max);

    let mut report = ExperimentReport::new("theorem1-g2", serde_json::to_value(config).expect("serializable config"));
    report.grid = cases.iter().map(|c| c.v1).collect();
    report.series = cases
        .iter()
        .map(|c| SeriesPoint {
            x: c.v1,
            value: c.result.at_base.value,
            error: c.result.residual,
            fit_residual: None,
        })
        .collect();
    report.checks = vec![
        Check::at_most("max_residual_over_3_eps_quad", worst_ratio, 1.0),
        Check::at_most("max_eps_quad", worst_error, config.quad_tolerance),
    ];
    report.details = json!({ "cases": cases });
    Ok(report.finish(start))
}
