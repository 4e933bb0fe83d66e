//! Deterministic quadrature: Gauss–Legendre panels, tensor rules on the unit
//! cube and randomly shifted rank-1 lattice rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    GaussLegendre,
    QmcLattice,
}

/// Integration plan shared by cell averages and domain integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// `None` picks tensor Gauss–Legendre up to dimension 3 and the lattice
    /// rule beyond.
    #[serde(default)]
    pub rule: Option<Rule>,
    /// Gauss–Legendre nodes per panel and dimension.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Gauss–Legendre panels per dimension.
    #[serde(default = "default_panels")]
    pub panels: usize,
    /// Lattice-rule points per shift.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Random shifts of the lattice rule.
    #[serde(default = "default_shifts")]
    pub shifts: usize,
    /// Upper cutoff of the `y` integral on the genus-1 domain.
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    #[serde(default)]
    pub seed: u64,
    /// Relative tolerance for error estimates and tails.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_order() -> usize {
    16
}
fn default_panels() -> usize {
    1
}
fn default_points() -> usize {
    4093
}
fn default_shifts() -> usize {
    8
}
fn default_y_max() -> f64 {
    100.0
}
fn default_tolerance() -> f64 {
    1e-4
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: None,
            order: default_order(),
            panels: default_panels(),
            points: default_points(),
            shifts: default_shifts(),
            y_max: default_y_max(),
            seed: 0,
            tolerance: default_tolerance(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.panels == 0 || self.points < 2 || self.shifts < 2 {
            return Err(Error::Config(
                "order, panels must be positive; points and shifts at least 2".into(),
            ));
        }
        if !(self.y_max > 1.0) || !(self.tolerance > 0.0) {
            return Err(Error::Config("y_max must exceed 1 and tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn rule_for(&self, dim: usize) -> Rule {
        self.rule.unwrap_or(if dim <= 3 {
            Rule::GaussLegendre
        } else {
            Rule::QmcLattice
        })
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with equal panels.
pub fn composite_rule(a: f64, b: f64, order: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// `∫_a^b f` by a composite Gauss–Legendre rule.
pub fn integrate_1d(f: impl Fn(f64) -> f64 + Sync, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (x, w) = composite_rule(a, b, order, panels);
    let terms: Vec<f64> = x.par_iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeIntegral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tensor Gauss–Legendre over `[0, 1)^dim` with `order` nodes in each of
/// `panels` panels per axis. Summation is pairwise in node-index order.
pub fn tensor_gauss_legendre(f: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize, order: usize, panels: usize) -> f64 {
    let (x, w) = composite_rule(0.0, 1.0, order, panels);
    let m = x.len();
    let total = m.pow(dim as u32);
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut point = vec![0.0; dim];
            let mut weight = 1.0;
            for p in point.iter_mut() {
                let k = idx % m;
                idx /= m;
                *p = x[k];
                weight *= w[k];
            }
            weight * f(&point)
        })
        .collect();
    pairwise_sum(&terms)
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest prime not exceeding `n` (at least 2).
pub fn prime_at_most(n: usize) -> usize {
    (2..=n.max(2)).rev().find(|&p| is_prime(p)).unwrap_or(2)
}

/// Korobov generating vector `(1, a, a², …) mod n`, choosing `a` among a
/// fixed candidate set to minimize the `P₂` worst-case error for periodic
/// integrands.
pub fn korobov_vector(n: usize, dim: usize) -> Vec<usize> {
    let vector = |a: usize| {
        let mut z = Vec::with_capacity(dim);
        let mut c = 1usize;
        for _ in 0..dim {
            z.push(c);
            c = c * a % n;
        }
        z
    };
    if dim <= 1 || n < 4 {
        return vector(1);
    }
    let b2 = |x: f64| x * x - x + 1.0 / 6.0;
    let candidates = 64.min(n - 2);
    let mut best = (f64::INFINITY, 1);
    for k in 0..candidates {
        let a = 2 + k * (n - 3) / candidates.max(1);
        let z = vector(a);
        let terms: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                z.iter()
                    .map(|zj| 1.0 + 2.0 * std::f64::consts::PI.powi(2) * b2(((i * zj) % n) as f64 / n as f64))
                    .product::<f64>()
                    - 1.0
            })
            .collect();
        let p2 = pairwise_sum(&terms) / n as f64;
        if p2 < best.0 {
            best = (p2, a);
        }
    }
    vector(best.1)
}

/// Rank-1 lattice rule with `shifts` random shifts; returns the mean and
/// the standard error across shifts.
pub fn shifted_lattice(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    points: usize,
    shifts: usize,
    seed: u64,
) -> (f64, f64) {
    let n = prime_at_most(points);
    let z = korobov_vector(n, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift_vectors: Vec<Vec<f64>> = (0..shifts)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let estimates: Vec<f64> = shift_vectors
        .iter()
        .map(|shift| {
            let terms: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let point: Vec<f64> = z
                        .iter()
                        .zip(shift)
                        .map(|(zj, sj)| ((i * zj % n) as f64 / n as f64 + sj).fract())
                        .collect();
                    f(&point)
                })
                .collect();
            pairwise_sum(&terms) / n as f64
        })
        .collect();
    let mean = pairwise_sum(&estimates) / shifts as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (shifts * (shifts - 1)) as f64;
    (mean, var.sqrt())
}

/// `∫_{[0,1)^dim} f` under `spec`, with an error estimate from refinement:
/// Gauss–Legendre compares `order` against `2·order`; the lattice rule
/// compares `points/2` against `points` and includes the shift spread.
pub fn integrate_cube(f: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize, spec: &QuadratureSpec) -> Result<CubeIntegral> {
    spec.validate()?;
    if dim == 0 {
        return Ok(CubeIntegral {
            value: f(&[]),
            error: 0.0,
            evaluations: 1,
        });
    }
    Ok(match spec.rule_for(dim) {
        Rule::GaussLegendre => {
            let coarse = tensor_gauss_legendre(f, dim, spec.order, spec.panels);
            let fine = tensor_gauss_legendre(f, dim, 2 * spec.order, spec.panels);
            let m = spec.order * spec.panels;
            CubeIntegral {
                value: fine,
                error: (fine - coarse).abs(),
                evaluations: m.pow(dim as u32) + (2 * m).pow(dim as u32),
            }
        }
        Rule::QmcLattice => {
            let (coarse, _) = shifted_lattice(f, dim, spec.points / 2, spec.shifts, spec.seed);
            let (fine, spread) = shifted_lattice(f, dim, spec.points, spec.shifts, spec.seed.wrapping_add(1));
            CubeIntegral {
                value: fine,
                error: (fine - coarse).abs().max(3.0 * spread),
                evaluations: spec.shifts * (prime_at_most(spec.points) + prime_at_most(spec.points / 2)),
            }
        }
    })
}
