//! Two evaluations of `I(s) = ∫_{D₁} f·E(·, s) dμ` for `f = k·y¹²|Δ|²`:
//! domain quadrature against the truncated Eisenstein series, and the
//! unfolded Dirichlet series `k·Γ(s+11) Σ τ(n)²/(4πn)^{s+11}`.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{Check, ExperimentReport, SeriesPoint, TargetConstant};
use super::zagier::zagier_target;
use crate::domain::integrate_domain_g1;
use crate::eisenstein::{eisenstein_sum, eisenstein_tail, EisensteinSpec};
use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::linalg::pairwise_sum;
use crate::quadrature::QuadratureSpec;
use crate::ramanujan::tau_table;
use crate::special::ln_gamma;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnfoldingConfig {
    pub s_values: Vec<f64>,
    /// Eisenstein truncation `Q ≤ radius²`.
    pub radius: f64,
    /// Add the asymptotic tail estimate to the truncated Eisenstein series.
    pub tail_correction: bool,
    /// Terms of the Dirichlet series before its tail estimate.
    pub dirichlet_terms: usize,
    /// Multiple `k` of `y¹²|Δ|²`.
    pub scale: f64,
    pub tolerance: f64,
    /// Offsets `ε` for the residue estimate `lim ε·I(1+ε)`.
    pub residue_offsets: [f64; 2],
    pub domain: QuadratureSpec,
}

impl Default for UnfoldingConfig {
    fn default() -> Self {
        Self {
            s_values: vec![2.0, 3.0, 4.0],
            radius: 30.0,
            tail_correction: true,
            dirichlet_terms: 1 << 18,
            scale: 1.0,
            tolerance: 1e-4,
            residue_offsets: [0.1, 0.05],
            domain: QuadratureSpec {
                order: 16,
                panels: 1,
                y_max: 12.0,
                tolerance: 1e-8,
                ..QuadratureSpec::default()
            },
        }
    }
}

impl UnfoldingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s_values.is_empty() || self.s_values.iter().any(|s| !(*s > 1.0)) {
            return Err(Error::Config("every s must exceed 1".into()));
        }
        if !(self.radius > 0.0 && self.tolerance > 0.0) || self.dirichlet_terms < 16 {
            return Err(Error::Config("radius, tolerance and Dirichlet terms must be positive".into()));
        }
        if self.residue_offsets.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("residue offsets must be positive".into()));
        }
        self.domain.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedValue {
    pub value: f64,
    /// Tail of the series beyond the last term, as estimated and added.
    pub tail: f64,
    pub terms: usize,
}

/// `k·Γ(s+11)(4π)^{−s−11} Σ τ(n)² n^{−s−11}`. The tail `Σ_{n>N}` is
/// estimated as `C·N^{1−s}/(s−1)` with `C` the mean of `τ(n)²/n¹¹` over
/// `N/2 < n ≤ N`.
pub fn unfolded_integral(s: f64, scale: f64, terms: usize) -> Result<UnfoldedValue> {
    if !(s > 1.0) {
        return Err(Error::ConvergenceRegion { re_s: s, genus: 1 });
    }
    let tau = tau_table(terms)?;
    let normalized = |n: usize| {
        let t = tau[n];
        t * t / (n as f64).powi(11)
    };
    let head: Vec<f64> = (1..=terms).map(|n| normalized(n) * (n as f64).powf(-s)).collect();
    let head = pairwise_sum(&head);
    let half = terms / 2;
    let mean: Vec<f64> = (half + 1..=terms).map(normalized).collect();
    let mean = pairwise_sum(&mean) / (terms - half) as f64;
    let tail = mean * (terms as f64).powf(1.0 - s) / (s - 1.0);
    let factor = scale * (ln_gamma(s + 11.0) - (s + 11.0) * (4.0 * PI).ln()).exp();
    Ok(UnfoldedValue {
        value: factor * (head + tail),
        tail: factor * tail,
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPairing {
    pub value: f64,
    pub error: f64,
    pub tail: f64,
    /// Relative size of the Eisenstein truncation tail at the bottom of
    /// the domain.
    pub eisenstein_tail: f64,
}

/// `∫_{D₁} f·E(·, s) dμ` with `E` truncated at `Q ≤ radius²`.
pub fn domain_pairing(
    f: &InvariantFunction,
    s: f64,
    radius: f64,
    tail_correction: bool,
    spec: &QuadratureSpec,
) -> Result<DomainPairing> {
    let eis = EisensteinSpec::real(1, s, radius)?;
    let tail = eisenstein_tail(1, s, radius);
    let correction = if tail_correction { tail } else { 0.0 };
    let inner = f.clone();
    let product = InvariantFunction::new(1, format!("{} * E(s={s})", f.name()), f.decay().clone(), move |t| {
        let e = eisenstein_sum(t, &eis).expect("valid Eisenstein truncation").value.re;
        inner.evaluate(t) * (e + correction)
    });
    let d = integrate_domain_g1(&product, spec)?;
    Ok(DomainPairing {
        value: d.value,
        error: d.error,
        tail: d.tail,
        eisenstein_tail: tail,
    })
}

pub fn unfolding_crosscheck_g1(config: &UnfoldingConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let f = InvariantFunction::delta_g1().scaled(config.scale);
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut checks = Vec::new();
    for &s in &config.s_values {
        let a = domain_pairing(&f, s, config.radius, config.tail_correction, &config.domain)?;
        let b = unfolded_integral(s, config.scale, config.dirichlet_terms)?;
        let discrepancy = (a.value - b.value).abs() / b.value.abs();
        checks.push(Check::at_most(format!("relative_discrepancy_s={s}"), discrepancy, config.tolerance));
        series.push(SeriesPoint {
            x: s,
            value: b.value,
            error: a.value - b.value,
            fit_residual: None,
        });
        rows.push(json!({"s": s, "domain": a, "unfolded": b, "relative_discrepancy": discrepancy}));
    }

    // lim_{ε→0} ε·I(1+ε) = k·T, extrapolated linearly in ε.
    let [e1, e2] = config.residue_offsets;
    let r1 = e1 * unfolded_integral(1.0 + e1, config.scale, config.dirichlet_terms)?.value;
    let r2 = e2 * unfolded_integral(1.0 + e2, config.scale, config.dirichlet_terms)?.value;
    let residue = (e1 * r2 - e2 * r1) / (e1 - e2);
    let target = zagier_target(&f, &QuadratureSpec {
        order: 24,
        panels: 2,
        y_max: 20.0,
        tolerance: 1e-8,
        ..QuadratureSpec::default()
    })?;
    let residue_deviation = (residue / target.value - 1.0).abs();
    checks.push(Check::at_most("residue_vs_domain_target", residue_deviation, 0.05).informational());

    let mut report = ExperimentReport::new("unfold-check", serde_json::to_value(config).expect("serializable config"));
    report.grid = config.s_values.clone();
    report.series = series;
    report.target = Some(TargetConstant {
        name: "residue at s = 1 of the unfolded series".into(),
        value: residue,
        error: (r1 - r2).abs(),
        method: format!("linear extrapolation of eps * I(1 + eps) from eps = {e1}, {e2}"),
    });
    report.checks = checks;
    report.details = json!({"rows": rows, "domain_target": target});
    Ok(report.finish(start))
}
