//! One function per subcommand, each producing an [`ExperimentReport`].

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use siegel_core::average::{cell_average, CellAverageRequest};
use siegel_core::domain::integrate_domain_g1;
use siegel_core::eisenstein::{eisenstein_sum, EisensteinSpec};
use siegel_core::experiments::report::{Check, SeriesPoint, TargetConstant};
use siegel_core::experiments::theorem1::invariance_case;
use siegel_core::experiments::{
    theorem1_experiment_g2, unfolding_crosscheck_g1, zagier_experiment, ExperimentReport,
};
use siegel_core::invariants::InvariantFunction;
use siegel_core::iwasawa::{decompose_symplectic, from_coords, jacobian, measure_density, to_coords, CoordsRecord};
use siegel_core::linalg::{max_abs, max_abs_complex};
use siegel_core::quadrature::QuadratureSpec;
use siegel_core::special::siegel_volume;
use siegel_core::spectral::{eigenvalue_check, eisenstein_eigenvalue, laplace_beltrami, DEFAULT_STEP};
use siegel_core::symplectic::{automorphy_factor, mobius_act, random_gamma, random_point, rmat};
use siegel_core::{IwasawaCoords, SiegelPoint, SymplecticMatrix};

use crate::config::RunConfig;

/// Why a command could not produce a report.
#[derive(Debug)]
pub enum Failure {
    /// The configuration is unusable (exit 2).
    Config(String),
    /// A numerical routine failed (exit 1).
    Run(siegel_core::Error),
}

impl From<siegel_core::Error> for Failure {
    fn from(e: siegel_core::Error) -> Self {
        match e {
            siegel_core::Error::Config(msg) => Failure::Config(msg),
            other => Failure::Run(other),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::Run(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<ExperimentReport, Failure>;

fn echo(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn new_report(name: &str, cfg: &RunConfig) -> ExperimentReport {
    ExperimentReport::new(name, echo(cfg))
}

fn point_or(cfg: &RunConfig, genus: usize, default: impl FnOnce(usize) -> SiegelPoint) -> Result<SiegelPoint, Failure> {
    match &cfg.tau {
        Some(p) => {
            let tau = p.to_point().map_err(Failure::Config)?;
            if tau.genus() != genus {
                return Err(Failure::Config(format!("tau has genus {} but --g is {genus}", tau.genus())));
            }
            Ok(tau)
        }
        None => Ok(default(genus)),
    }
}

fn genus_of(cfg: &RunConfig, fallback: usize) -> Result<usize, Failure> {
    let g = cfg
        .genus
        .or_else(|| cfg.tau.as_ref().and_then(|p| p.to_point().ok()).map(|t| t.genus()))
        .unwrap_or(fallback);
    if g == 0 {
        return Err(Failure::Config("genus must be at least 1".into()));
    }
    Ok(g)
}

fn relative_point_error(a: &SiegelPoint, b: &SiegelPoint) -> f64 {
    max_abs_complex(&(a.tau() - b.tau())) / max_abs_complex(b.tau())
}

pub fn decompose(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let mut report = new_report("decompose", cfg);
    if let Some(entries) = &cfg.matrix {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n == 0 || !n.is_multiple_of(2) || n * n != entries.len() {
            return Err(Failure::Config(format!("matrix needs 2g x 2g entries, got {}", entries.len())));
        }
        let m = SymplecticMatrix::new(rmat(n, n, entries), 1e-10).map_err(|e| Failure::Config(e.to_string()))?;
        let d = decompose_symplectic(&m)?;
        let residual = max_abs(&(d.rebuild() - m.entries())) / max_abs(m.entries());
        report.checks.push(Check::at_most("rebuild_relative_residual", residual, cfg.tolerances.roundtrip));
        report.details = json!({
            "coords": CoordsRecord::from(&d.coords),
            "k_is_orthogonal": d.k.is_orthogonal(1e-10),
        });
        return Ok(report.finish(start));
    }
    let g = genus_of(cfg, 2)?;
    let tau = point_or(cfg, g, |g| SiegelPoint::scaled_identity(g, 1.0))?;
    let coords = to_coords(&tau)?;
    let residual = relative_point_error(&from_coords(&coords), &tau);
    report.checks.push(Check::at_most("roundtrip_relative_residual", residual, cfg.tolerances.roundtrip));
    report.details = json!({
        "coords": CoordsRecord::from(&coords),
        "flat": coords.to_flat(),
        "det_im": coords.det_im(),
        "measure_density": measure_density(&coords),
    });
    Ok(report.finish(start))
}

pub fn measure_check(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let genera: Vec<usize> = match cfg.genus {
        Some(0) => return Err(Failure::Config("genus must be at least 1".into())),
        Some(g) => vec![g],
        None => vec![1, 2, 3],
    };
    let samples = cfg.samples.unwrap_or(1000);
    let tol = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = new_report("measure-check", cfg);
    let mut rows = Vec::new();
    for &g in &genera {
        let (mut roundtrip, mut det, mut density, mut covariance) = (0f64, 0f64, 0f64, 0f64);
        for _ in 0..samples {
            let tau = random_point(g, &mut rng);
            let c = to_coords(&tau)?;
            roundtrip = roundtrip.max(relative_point_error(&from_coords(&c), &tau));
            let prod: f64 = c.v().iter().product();
            det = det.max((tau.det_im() / prod - 1.0).abs());
            let c = IwasawaCoords::random(g, &mut rng);
            let d: f64 = c.v().iter().product();
            density = density.max((measure_density(&c) * d.powi(g as i32 + 1) / jacobian(&c) - 1.0).abs());
            let gamma = random_gamma(g, 6, &mut rng);
            let image = mobius_act(&gamma, &tau)?;
            let j = automorphy_factor(&gamma, &tau).norm_sqr();
            covariance = covariance.max((image.det_im() * j / tau.det_im() - 1.0).abs());
        }
        report.checks.extend([
            Check::at_most(format!("g={g} roundtrip"), roundtrip, tol.roundtrip),
            Check::at_most(format!("g={g} det_im_product"), det, tol.density),
            Check::at_most(format!("g={g} density_jacobian"), density, tol.density),
            Check::at_most(format!("g={g} covariance"), covariance, tol.covariance),
        ]);
        rows.push(json!({"genus": g, "samples": samples, "roundtrip": roundtrip, "det_im_product": det,
            "density_jacobian": density, "covariance": covariance}));
    }
    report.grid = genera.iter().map(|&g| g as f64).collect();
    report.details = json!({ "rows": rows });
    Ok(report.finish(start))
}

fn default_s(g: usize) -> f64 {
    match g {
        1 => 3.0,
        2 => 3.5,
        _ => g as f64 + 1.5,
    }
}

fn default_radius(g: usize) -> f64 {
    match g {
        1 => 50.0,
        2 => 8.0,
        _ => 4.0,
    }
}

pub fn eisenstein(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let g = genus_of(cfg, 2)?;
    let s = cfg.s.unwrap_or_else(|| default_s(g));
    let radius = cfg.radius.unwrap_or_else(|| default_radius(g));
    let tau = point_or(cfg, g, |g| SiegelPoint::scaled_identity(g, 1.0))?;
    let spec = EisensteinSpec::real(g, s, radius).map_err(|e| Failure::Config(e.to_string()))?;
    let sum = eisenstein_sum(&tau, &spec)?;
    let relative_tail = sum.tail / sum.value.norm();
    let mut report = new_report("eisenstein", cfg);
    report.target = Some(TargetConstant {
        name: format!("truncated corank-1 Eisenstein series, genus {g}, s = {s}"),
        value: sum.value.re,
        error: sum.tail,
        method: format!("primitive rows with Q <= {radius}^2, tail from the lattice-point asymptotic"),
    });
    report.checks.push(Check::at_most("relative_tail", relative_tail, cfg.tolerances.eisenstein_tail));
    report.details = json!({ "value": [sum.value.re, sum.value.im], "tail": sum.tail, "terms": sum.terms });
    Ok(report.finish(start))
}

fn invariant_for(g: usize) -> Result<InvariantFunction, Failure> {
    match g {
        1 => Ok(InvariantFunction::delta_g1()),
        2 => Ok(InvariantFunction::chi_g2()),
        _ => Err(Failure::Config(format!("no invariant test function at genus {g}; use 1 or 2"))),
    }
}

pub fn average(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let g = genus_of(cfg, 2)?;
    let f = invariant_for(g)?;
    let v1 = cfg.v1.unwrap_or(0.7);
    let base = match (g, &cfg.base) {
        (1, _) => None,
        (_, Some(p)) => Some(p.to_point().map_err(Failure::Config)?),
        (_, None) => Some(SiegelPoint::scalar(Complex64::new(0.3, 1.1)).expect("valid point")),
    };
    let quad = cfg.quadrature.clone();
    let req = CellAverageRequest {
        f: f.clone(),
        v1,
        base: base.clone(),
        quad: quad.clone(),
    };
    let avg = cell_average(&req)?;
    let mut report = new_report("average", cfg);
    report.target = Some(TargetConstant {
        name: format!("unipotent cell average of {} at v1 = {v1}", f.name()),
        value: avg.value,
        error: avg.error,
        method: format!("{:?} rule in dimension {}", quad.rule_for(avg.dimension), avg.dimension),
    });
    report.checks.push(Check::at_most("relative_error", avg.relative_error(), quad.tolerance));
    let mut details = json!({ "average": avg });
    if let Some(base) = base {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let gamma = random_gamma(base.genus(), 6, &mut rng);
        let r = invariance_case(&f, &gamma, &base, v1, &quad, quad.panels + 2)?;
        report
            .checks
            .push(Check::at_most("invariance_residual_over_3_eps", r.residual / (3.0 * r.combined_error()), 1.0));
        details["invariance"] = json!({
            "gamma": gamma.entries().transpose().iter().copied().collect::<Vec<f64>>(),
            "residual": r.residual,
            "at_image": r.at_image,
        });
    }
    report.details = details;
    Ok(report.finish(start))
}

pub fn laplacian_check(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let g = genus_of(cfg, 2)?;
    let s = cfg.s.unwrap_or_else(|| default_s(g));
    let radius = cfg.radius.unwrap_or_else(|| default_radius(g));
    let step = cfg.step.unwrap_or(DEFAULT_STEP);
    let tau = point_or(cfg, g, |g| match g {
        1 => SiegelPoint::scalar(Complex64::new(0.2, 1.4)).expect("valid point"),
        _ => {
            let mut re = rmat(g, g, &vec![0.05; g * g]);
            let mut im = rmat(g, g, &vec![0.3; g * g]);
            for i in 0..g {
                re[(i, i)] = 0.1;
                im[(i, i)] = 1.2;
            }
            SiegelPoint::from_re_im(&re, &im).expect("valid point")
        }
    })?;
    let spec = EisensteinSpec::real(g, s, radius).map_err(|e| Failure::Config(e.to_string()))?;
    let check = eigenvalue_check(&tau, s, &spec, step)?;
    let tolerance = if g == 1 { cfg.tolerances.eigenvalue_g1 } else { cfg.tolerances.eigenvalue_g2 };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coords = IwasawaCoords::random(g, &mut rng);
    let power = |x: &[f64]| x[0].powf(s);
    let lap = laplace_beltrami(&power, &coords, step)?;
    let expected = eisenstein_eigenvalue(g, s) * coords.v()[0].powf(s);
    let power_residual = (lap.value - expected).abs() / expected.abs();

    let mut report = new_report("laplacian-check", cfg);
    report.checks = vec![
        Check::at_most("eisenstein_residual", check.residual, tolerance.max(10.0 * check.relative_tail)),
        Check::at_most("v1_power_residual", power_residual, cfg.tolerances.power_eigenvalue),
    ];
    report.details = json!({ "eisenstein": check, "v1_power": {"coords": coords.to_flat(), "laplacian": lap, "expected": expected} });
    Ok(report.finish(start))
}

pub fn volume(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let top = genus_of(cfg, 3)?;
    let tol = &cfg.tolerances;
    let mut report = new_report("volume", cfg);
    report.grid = (1..=top).map(|g| g as f64).collect();
    report.series = (1..=top)
        .map(|g| SeriesPoint {
            x: g as f64,
            value: siegel_volume(g),
            error: 0.0,
            fit_residual: None,
        })
        .collect();
    let closed = [PI / 3.0, PI.powi(3) / 270.0];
    for (g, exact) in closed.iter().enumerate().take(top) {
        let rel = (siegel_volume(g + 1) / exact - 1.0).abs();
        report.checks.push(Check::at_most(format!("g={} closed_form", g + 1), rel, tol.volume_table));
    }
    let spec = QuadratureSpec {
        y_max: 1000.0,
        tolerance: tol.volume_domain,
        ..cfg.quadrature.clone()
    };
    let domain = integrate_domain_g1(&InvariantFunction::constant(1, 1.0), &spec)?;
    let rel = (domain.value / (PI / 3.0) - 1.0).abs();
    report.checks.push(Check::at_most("g=1 domain_quadrature", rel, tol.volume_domain));
    report.details = json!({ "domain_integral": domain, "domain_spec": spec });
    Ok(report.finish(start))
}

pub fn zagier(cfg: &RunConfig) -> Outcome {
    let mut report = zagier_experiment(&cfg.zagier)?;
    report.config = echo(cfg);
    Ok(report)
}

pub fn unfold_check(cfg: &RunConfig) -> Outcome {
    let mut report = unfolding_crosscheck_g1(&cfg.unfolding)?;
    report.config = echo(cfg);
    Ok(report)
}

pub fn theorem1_g2(cfg: &RunConfig) -> Outcome {
    let mut report = theorem1_experiment_g2(&cfg.theorem1)?;
    report.config = echo(cfg);
    Ok(report)
}
