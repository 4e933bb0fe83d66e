//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//! Run with `cargo test --release -p siegel-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegel_core::eisenstein::{complete_primitive_row, eisenstein_sum, eisenstein_term, EisensteinSpec};
use siegel_core::experiments::{
    mellin_invert_rational, theorem1_experiment_g2, unfolding_crosscheck_g1, zagier_experiment, ExperimentReport,
    Pole, Theorem1Config, UnfoldingConfig, ZagierConfig,
};
use siegel_core::domain::integrate_domain_g1;
use siegel_core::invariants::InvariantFunction;
use siegel_core::iwasawa::{from_coords, jacobian, measure_density, to_coords};
use siegel_core::linalg::{gcd_all, max_abs_complex};
use siegel_core::parabolic::{act, assemble, factor, ParabolicElement};
use siegel_core::quadrature::QuadratureSpec;
use siegel_core::special::siegel_volume;
use siegel_core::spectral::{eigenvalue_check, eisenstein_eigenvalue, laplace_beltrami, DEFAULT_STEP};
use siegel_core::symplectic::{automorphy_factor, random_gamma, random_point, rmat};
use siegel_core::{IwasawaCoords, SiegelPoint};
use support::RationalTerm;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
        }
    }
}

fn rel_point(a: &siegel_core::linalg::CMat, b: &siegel_core::linalg::CMat) -> f64 {
    max_abs_complex(&(a - b)) / max_abs_complex(b)
}

fn iwasawa_roundtrips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0f64;
    for g in 1..=3 {
        for _ in 0..1000 {
            let tau = random_point(g, &mut rng);
            worst = worst.max(rel_point(from_coords(&to_coords(&tau).unwrap()).tau(), tau.tau()));
            let c = IwasawaCoords::random(g, &mut rng);
            let (x, y) = (c.to_flat(), to_coords(&from_coords(&c)).unwrap().to_flat());
            let scale = x.iter().fold(1f64, |m, v| m.max(v.abs()));
            worst = worst.max(x.iter().zip(&y).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max));
        }
    }
    Outcome::new(worst <= 1e-10, format!("max relative residual {worst:.2e} <= 1e-10"))
}

fn measure_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0f64;
    for g in 1..=3 {
        for _ in 0..1000 {
            let c = IwasawaCoords::random(g, &mut rng);
            let det: f64 = c.v().iter().product();
            worst = worst.max((from_coords(&c).det_im() / det - 1.0).abs());
            let u: Vec<f64> = (0..g).flat_map(|i| (i + 1..g).map(move |j| (i, j))).map(|(i, j)| c.u()[(i, j)]).collect();
            worst = worst.max((jacobian(&c) / support::im_jacobian(c.v(), &u) - 1.0).abs());
            worst = worst.max((measure_density(&c) * det.powi(g as i32 + 1) / jacobian(&c) - 1.0).abs());
        }
    }
    Outcome::new(worst <= 1e-12, format!("max relative deviation {worst:.2e} <= 1e-12"))
}

fn measure_covariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0f64;
    for g in 1..=2 {
        for _ in 0..500 {
            let gamma = random_gamma(g, 6, &mut rng);
            let tau = random_point(g, &mut rng);
            let image = support::mobius(gamma.entries(), tau.tau());
            let lhs = support::im(&image).determinant() * automorphy_factor(&gamma, &tau).norm_sqr();
            worst = worst.max((lhs / tau.det_im() - 1.0).abs());
        }
    }
    Outcome::new(worst <= 1e-10, format!("max relative deviation {worst:.2e} <= 1e-10"))
}

fn parabolic_factorization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut exact, mut worst) = (true, 0f64);
    for k in 0..1000 {
        let g = 2 + k % 2;
        let p = ParabolicElement::random(g, 5, 5, &mut rng);
        let m = assemble(&p).unwrap();
        exact &= factor(&m).unwrap() == p;
        let tau = random_point(g, &mut rng);
        worst = worst.max(rel_point(act(&p, &tau).unwrap().tau(), &support::mobius(m.entries(), tau.tau())));
    }
    Outcome::new(
        exact && worst <= 1e-10,
        format!("factorization exact: {exact}; closed-form vs Mobius {worst:.2e} <= 1e-10"),
    )
}

fn eisenstein_cosets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    let mut cases = 0;
    while cases < 200 {
        let g = 1 + cases % 2;
        let cd: Vec<i64> = (0..2 * g).map(|_| rng.random_range(-7..=7)).collect();
        if gcd_all(&cd) != 1 {
            continue;
        }
        let tau = random_point(g, &mut rng);
        let gamma = complete_primitive_row(&cd).unwrap();
        let oracle = support::det_ratio(gamma.entries(), tau.tau());
        worst = worst.max((eisenstein_term(&cd, &tau).unwrap() / oracle - 1.0).abs());
        cases += 1;
    }
    let i = SiegelPoint::scalar(Complex64::new(0.0, 1.0)).unwrap();
    let sum = eisenstein_sum(&i, &EisensteinSpec::real(1, 3.0, 2f64.sqrt()).unwrap()).unwrap().value.re;
    let oracle: f64 = support::primitive_pairs(2).iter().map(|(c, d)| ((c * c + d * d) as f64).powi(-3)).sum();
    Outcome::new(
        worst <= 1e-10 && sum == 2.25 && oracle == 2.25,
        format!("coset ratio {worst:.2e} <= 1e-10; truncated sum at i = {sum}"),
    )
}

fn eigenvalues() -> Outcome {
    let spec1 = EisensteinSpec::real(1, 3.0, 50.0).unwrap();
    let tau1 = SiegelPoint::scalar(Complex64::new(0.2, 1.4)).unwrap();
    let r3 = eigenvalue_check(&tau1, 3.0, &spec1, DEFAULT_STEP).unwrap();
    let r5 = eigenvalue_check(&tau1, 5.0, &spec1, DEFAULT_STEP).unwrap();
    let tau2 = SiegelPoint::from_re_im(&rmat(2, 2, &[0.1, 0.05, 0.05, -0.2]), &rmat(2, 2, &[1.2, 0.3, 0.3, 1.1])).unwrap();
    let spec2 = EisensteinSpec::real(2, 3.5, 8.0).unwrap();
    let r35 = eigenvalue_check(&tau2, 3.5, &spec2, DEFAULT_STEP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut power = 0f64;
    for g in 1..=2 {
        for s in [0.7, 3.0] {
            let c = IwasawaCoords::random(g, &mut rng);
            let f = move |x: &[f64]| x[0].powf(s);
            let lap = laplace_beltrami(&f, &c, DEFAULT_STEP).unwrap().value;
            let expected = eisenstein_eigenvalue(g, s) * c.v()[0].powf(s);
            power = power.max((lap - expected).abs() / expected.abs());
        }
    }
    let passed = r3.residual <= 1e-3 && r5.residual <= 1e-3 && r35.passes(1e-2) && power <= 1e-3;
    Outcome::new(
        passed,
        format!(
            "g=1 s=3 {:.1e}, s=5 {:.1e} (<= 1e-3); g=2 s=3.5 {:.1e} (<= 1e-2); v1^s {power:.1e} (<= 1e-3)",
            r3.residual, r5.residual, r35.residual
        ),
    )
}

fn report_line(report: &ExperimentReport) -> String {
    report
        .checks
        .iter()
        .map(|c| format!("{} = {:.3e} {}{}", c.name, c.value, c.bound, if c.informational { " [data]" } else { "" }))
        .collect::<Vec<_>>()
        .join("; ")
}

fn theorem1() -> Outcome {
    let report = theorem1_experiment_g2(&Theorem1Config::default()).unwrap();
    Outcome::new(report.passed, report_line(&report))
}

fn volumes() -> Outcome {
    let spec = QuadratureSpec {
        y_max: 1000.0,
        tolerance: 5e-3,
        ..QuadratureSpec::default()
    };
    let d = integrate_domain_g1(&InvariantFunction::constant(1, 1.0), &spec).unwrap();
    let domain = (d.value / (PI / 3.0) - 1.0).abs();
    let t1 = (siegel_volume(1) / (PI / 3.0) - 1.0).abs();
    let t2 = (siegel_volume(2) / (PI.powi(3) / 270.0) - 1.0).abs();
    Outcome::new(
        domain <= 5e-3 && t1 <= 1e-12 && t2 <= 1e-12,
        format!("domain quadrature {domain:.2e} <= 5e-3; table {t1:.1e}, {t2:.1e} <= 1e-12"),
    )
}

fn zagier() -> Outcome {
    let report = zagier_experiment(&ZagierConfig::default()).unwrap();
    Outcome::new(report.passed, report_line(&report))
}

fn unfolding() -> Outcome {
    let report = unfolding_crosscheck_g1(&UnfoldingConfig::default()).unwrap();
    Outcome::new(report.passed, report_line(&report))
}

fn mellin_battery() -> Outcome {
    let pole_sets: [&[(f64, u32, f64)]; 5] = [
        &[(2.0, 1, 1.0)],
        &[(1.0, 2, 1.0)],
        &[(0.5, 3, -1.5), (1.5, 1, 2.0)],
        &[(-1.0, 2, 0.7), (0.25, 1, -0.3), (2.0, 3, 0.1)],
        &[(1.0, 1, 1.0), (1.0, 2, -2.0)],
    ];
    let heights = [0.1, 0.45, 0.8, 2.5];
    let mut worst = 0f64;
    for set in pole_sets {
        let terms: Vec<RationalTerm> =
            set.iter().map(|&(location, order, coefficient)| RationalTerm { location, order, coefficient }).collect();
        let poles: Vec<Pole> = set.iter().map(|&(a, n, c)| Pole::new(a, n, c)).collect();
        for y in heights {
            let helper = mellin_invert_rational(&poles, y);
            let oracle = support::mellin_contour(&terms, y);
            worst = worst.max((helper - oracle).abs() / helper.abs().max(1.0));
        }
    }
    Outcome::new(worst <= 1e-6, format!("20 cases, max deviation {worst:.2e} <= 1e-6"))
}

fn run_cli(args: &[&str], out: &Path) -> (serde_json::Value, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    assert!(status.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&status.stderr));
    let mut json: serde_json::Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
    let _: ExperimentReport = serde_json::from_value(json.clone()).expect("report matches the schema");
    json.as_object_mut().unwrap().remove("timestamp");
    (json, std::fs::read(out.with_extension("csv")).unwrap())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "seed = 11\n[theorem1]\ncases = 2\nv1_values = [0.5]\n[theorem1.quad]\norder = 8\ntolerance = 1e-2\n").unwrap();
    let config = config.to_str().unwrap();
    let runs: [&[&str]; 5] = [
        &["measure-check", "--g", "2", "--seed", "7"],
        &["laplacian-check", "--g", "1", "--seed", "3"],
        &["zagier"],
        &["average", "--g", "2", "--seed", "5"],
        &["theorem1-g2", "--config", config],
    ];
    let mut identical = 0;
    for (k, args) in runs.iter().enumerate() {
        let a = run_cli(&[args, &["--threads", "1"][..]].concat(), &dir.path().join(format!("a{k}.json")));
        let b = run_cli(&[args, &["--threads", "2"][..]].concat(), &dir.path().join(format!("b{k}.json")));
        if serde_json::to_string(&a.0).unwrap() == serde_json::to_string(&b.0).unwrap() && a.1 == b.1 {
            identical += 1;
        }
    }
    Outcome::new(identical == runs.len(), format!("{identical}/{} commands byte-identical across reruns", runs.len()))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("Iwasawa roundtrips", Duration::from_secs(10), iwasawa_roundtrips),
        ("determinant, Jacobian and density", Duration::from_secs(5), measure_battery),
        ("measure covariance", Duration::from_secs(10), measure_covariance),
        ("parabolic factorization", Duration::from_secs(10), parabolic_factorization),
        ("Eisenstein coset oracle", Duration::from_secs(30), eisenstein_cosets),
        ("Laplacian eigenvalues", Duration::from_secs(300), eigenvalues),
        ("genus-2 invariance of cell averages", Duration::from_secs(600), theorem1),
        ("volume formula", Duration::from_secs(60), volumes),
        ("horocycle equidistribution", Duration::from_secs(900), zagier),
        ("unfolding cross-check", Duration::from_secs(300), unfolding),
        ("inverse Mellin battery", Duration::from_secs(60), mellin_battery),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = 0;
    for (k, (name, budget, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let elapsed = start.elapsed();
        let passed = outcome.passed && elapsed <= *budget;
        failures += usize::from(!passed);
        println!(
            "{} criterion {:2} {name}: {} [{:.1} s, budget {} s]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            outcome.summary,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
