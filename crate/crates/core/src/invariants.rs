//! Modular-invariant functions of rapid decay: `y¹²|Δ(τ)|²` in genus 1 and
//! `(det Im τ)¹⁰·|∏θ_even(τ)|⁴` in genus 2, plus theta constants.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice;
use crate::linalg::smallest_eigenvalue;
use crate::symplectic::{mobius_act, SiegelPoint, SymplecticMatrix};

/// Declared decay: `f(τ) ≤ C·exp(−rate·λ_min(Im τ))` away from a compact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub description: String,
    pub rate: f64,
}

type Evaluator = dyn Fn(&SiegelPoint) -> f64 + Send + Sync;

/// A `Γ_g`-invariant function, shareable across threads.
#[derive(Clone)]
pub struct InvariantFunction {
    genus: usize,
    name: String,
    decay: DecayCertificate,
    /// `Some(k)` when the function is `k·y¹²|Δ|²`, enabling the Fourier
    /// series for horocycle averages.
    delta_multiple: Option<f64>,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for InvariantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantFunction")
            .field("genus", &self.genus)
            .field("name", &self.name)
            .field("decay", &self.decay)
            .finish()
    }
}

impl InvariantFunction {
    pub fn new(
        genus: usize,
        name: impl Into<String>,
        decay: DecayCertificate,
        eval: impl Fn(&SiegelPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            genus,
            name: name.into(),
            decay,
            delta_multiple: None,
            eval: Arc::new(eval),
        }
    }

    /// `y¹²|Δ(τ)|²`.
    pub fn delta_g1() -> Self {
        let mut f = Self::new(
            1,
            "y^12 |Delta|^2",
            DecayCertificate {
                description: "y^12 exp(-4 pi y) at the cusp".into(),
                rate: 4.0 * PI,
            },
            |t| delta_invariant_g1(t.z()),
        );
        f.delta_multiple = Some(1.0);
        f
    }

    /// `(det Im τ)¹⁰·|∏θ_even|⁴`.
    pub fn chi_g2() -> Self {
        Self::new(
            2,
            "det(Im)^10 |prod theta_even|^4",
            DecayCertificate {
                description: "at least exp(-pi lambda_min) towards every boundary component".into(),
                rate: PI,
            },
            |t| chi_invariant_g2_reduced(t).expect("genus-2 point"),
        )
    }

    /// The constant function; invariant but not of rapid decay, used only
    /// to check volumes and cell measures.
    pub fn constant(genus: usize, value: f64) -> Self {
        Self::new(
            genus,
            format!("constant {value}"),
            DecayCertificate {
                description: "none (constant)".into(),
                rate: 0.0,
            },
            move |_| value,
        )
    }

    pub fn genus(&self) -> usize {
        self.genus
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn decay(&self) -> &DecayCertificate {
        &self.decay
    }

    pub fn delta_multiple(&self) -> Option<f64> {
        self.delta_multiple
    }

    pub fn evaluate(&self, tau: &SiegelPoint) -> f64 {
        (self.eval)(tau)
    }

    /// `k·f`.
    pub fn scaled(&self, k: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        let mut f = Self::new(self.genus, format!("{k} * {}", self.name), self.decay.clone(), move |t| {
            k * inner(t)
        });
        f.delta_multiple = self.delta_multiple.map(|m| k * m);
        f
    }

    /// `f ∘ γ`; equal to `f` for invariant `f`.
    pub fn precomposed(&self, gamma: SymplecticMatrix) -> Self {
        let inner = Arc::clone(&self.eval);
        Self::new(
            self.genus,
            format!("{} o gamma", self.name),
            self.decay.clone(),
            move |t| inner(&mobius_act(&gamma, t).expect("gamma preserves H_g")),
        )
    }
}

/// `y¹²|Δ(x+iy)|²` from `ln|Δ| = −2πy + 24 Σ ln|1 − qⁿ|`. Terms stop once
/// the remaining sum is below `1e−17` in the logarithm.
pub fn delta_invariant_g1(z: Complex64) -> f64 {
    (12.0 * z.im.ln() + 2.0 * ln_abs_delta(z)).exp()
}

/// `ln|Δ(τ)|` evaluated directly from the product.
pub fn ln_abs_delta(z: Complex64) -> f64 {
    let y = z.im;
    let r = (-2.0 * PI * y).exp();
    let x = z.re - z.re.floor();
    let mut acc = 0.0;
    let mut rn = r;
    let mut n = 1u64;
    loop {
        let phase = 2.0 * PI * ((n as f64 * x).fract());
        let re = rn * phase.cos();
        // |1 − qⁿ|² = 1 − 2 Re qⁿ + |qⁿ|²
        acc += 0.5 * (-2.0 * re + rn * rn).ln_1p();
        if 48.0 * rn / (1.0 - r) < 1e-17 {
            break;
        }
        n += 1;
        rn *= r;
    }
    -2.0 * PI * y + 24.0 * acc
}

/// Theta characteristic `[a; b]` with entries in `{0, ½}`, stored as bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Characteristic {
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

impl Characteristic {
    pub fn new(a: Vec<u8>, b: Vec<u8>) -> Result<Self> {
        if a.len() != b.len() || a.iter().chain(&b).any(|x| *x > 1) {
            return Err(Error::Domain("characteristic entries must be 0 or 1 (halves)".into()));
        }
        Ok(Self { a, b })
    }

    pub fn zero(genus: usize) -> Self {
        Self {
            a: vec![0; genus],
            b: vec![0; genus],
        }
    }

    /// Even iff `4a·b` is even.
    pub fn is_even(&self) -> bool {
        self.a.iter().zip(&self.b).map(|(x, y)| u32::from(x & y)).sum::<u32>() % 2 == 0
    }
}

/// All even characteristics of genus `g` (`2^{g−1}(2^g + 1)` of them).
pub fn even_characteristics(genus: usize) -> Vec<Characteristic> {
    let bits = |k: usize| (0..genus).map(|i| ((k >> i) & 1) as u8).collect::<Vec<_>>();
    let mut out = Vec::new();
    for ka in 0..1usize << genus {
        for kb in 0..1usize << genus {
            let c = Characteristic {
                a: bits(ka),
                b: bits(kb),
            };
            if c.is_even() {
                out.push(c);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Bound on the omitted terms relative to the largest term.
    pub tail: f64,
    pub terms: usize,
}

/// Extra room in `ξ Y ξᵗ` beyond the dominant term; `e^{−π·14} ≈ 8e−20`.
const THETA_MARGIN: f64 = 14.0;

/// `θ[a;b](τ) = Σ_n exp(πi ξτξᵗ + 2πi ξ·b)` with `ξ = n + a`, over all `n`
/// with `ξ Y ξᵗ ≤ max(radius², Q_a + 14)`, `Q_a = a Y aᵗ`.
pub fn theta_constant(chr: &Characteristic, tau: &SiegelPoint, radius: Option<f64>) -> Result<ThetaValue> {
    let g = tau.genus();
    if chr.a.len() != g {
        return Err(Error::Dimension(format!(
            "characteristic of genus {} at a point of genus {g}",
            chr.a.len()
        )));
    }
    if !chr.is_even() {
        return Err(Error::OddCharacteristic);
    }
    let y = tau.im();
    let x = tau.re();
    let a: Vec<f64> = chr.a.iter().map(|v| 0.5 * *v as f64).collect();
    let b: Vec<f64> = chr.b.iter().map(|v| 0.5 * *v as f64).collect();
    let qa: f64 = (0..g).map(|i| (0..g).map(|j| a[i] * y[(i, j)] * a[j]).sum::<f64>()).sum();
    let bound = (qa + THETA_MARGIN).max(radius.map_or(0.0, |r| r * r));
    let center: Vec<f64> = a.iter().map(|v| -v).collect();
    let points = lattice::enumerate(&y, &center, bound)?;
    let mut re = Vec::with_capacity(points.len());
    let mut im = Vec::with_capacity(points.len());
    let mut q_min = f64::INFINITY;
    for p in &points {
        let xi: Vec<f64> = p.x.iter().zip(&a).map(|(n, ai)| *n as f64 + ai).collect();
        let mut phase = 0.0;
        for i in 0..g {
            phase += 2.0 * xi[i] * b[i];
            for j in 0..g {
                phase += xi[i] * x[(i, j)] * xi[j];
            }
        }
        let z = Complex64::from_polar((-PI * p.norm).exp(), PI * phase);
        re.push(z.re);
        im.push(z.im);
        q_min = q_min.min(p.norm);
    }
    let value = Complex64::new(crate::linalg::pairwise_sum(&re), crate::linalg::pairwise_sum(&im));
    // Terms beyond the bound are below e^{−π·bound}; their count grows
    // polynomially, absorbed by a factor (1 + bound)^g.
    let tail = (-PI * (bound - q_min)).exp() * (1.0 + bound).powi(g as i32);
    Ok(ThetaValue {
        value,
        tail,
        terms: points.len(),
    })
}

/// Every even theta constant at `τ` from a single enumeration of the
/// half-integer lattice `ξ ∈ (½Z)^g`, each `ξ` contributing to the
/// characteristics with `a = ξ mod 1`. Same truncation as
/// [`theta_constant`] with `radius = None`.
pub fn even_theta_constants(tau: &SiegelPoint) -> Result<Vec<(Characteristic, Complex64)>> {
    let g = tau.genus();
    let y = tau.im();
    let x = tau.re();
    let chars = even_characteristics(g);
    let q = |xi: &[f64], m: &crate::linalg::RMat| -> f64 {
        (0..g).map(|i| (0..g).map(|j| xi[i] * m[(i, j)] * xi[j]).sum::<f64>()).sum()
    };
    let bound = chars
        .iter()
        .map(|c| q(&c.a.iter().map(|v| 0.5 * *v as f64).collect::<Vec<_>>(), &y))
        .fold(0.0, f64::max)
        + THETA_MARGIN;
    let quarter = &y * 0.25;
    let points = lattice::enumerate(&quarter, &vec![0.0; g], bound)?;
    let mut sums: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); chars.len()];
    for p in &points {
        let xi: Vec<f64> = p.x.iter().map(|m| 0.5 * *m as f64).collect();
        let a: Vec<u8> = p.x.iter().map(|m| m.rem_euclid(2) as u8).collect();
        let base_phase = q(&xi, &x);
        let modulus = (-PI * p.norm).exp();
        for (k, c) in chars.iter().enumerate() {
            if c.a != a {
                continue;
            }
            let shift: f64 = xi.iter().zip(&c.b).map(|(v, b)| v * *b as f64).sum();
            let z = Complex64::from_polar(modulus, PI * (base_phase + shift));
            sums[k].0.push(z.re);
            sums[k].1.push(z.im);
        }
    }
    Ok(chars
        .into_iter()
        .zip(sums)
        .map(|(c, (re, im))| {
            let v = Complex64::new(crate::linalg::pairwise_sum(&re), crate::linalg::pairwise_sum(&im));
            (c, v)
        })
        .collect())
}

/// `(det Im τ)¹⁰ · |∏_{10 even [a;b]} θ[a;b](τ)|⁴`, evaluated in logarithms.
pub fn chi_invariant_g2(tau: &SiegelPoint) -> Result<f64> {
    if tau.genus() != 2 {
        return Err(Error::Dimension(format!("genus-2 invariant at genus {}", tau.genus())));
    }
    let mut log = 10.0 * tau.det_im().ln();
    for (_, theta) in even_theta_constants(tau)? {
        log += 4.0 * theta.norm().ln();
    }
    Ok(log.exp())
}

/// Below this `λ_min(Im τ)` the theta sums are cheaper after reduction.
const REDUCE_BELOW: f64 = 0.6;

/// [`chi_invariant_g2`] evaluated at a `Γ₂`-equivalent point with larger
/// imaginary part when `Im τ` is small; the value is unchanged up to
/// rounding.
pub fn chi_invariant_g2_reduced(tau: &SiegelPoint) -> Result<f64> {
    if tau.genus() == 2 && min_im_eigenvalue(tau) < REDUCE_BELOW {
        let reduced = crate::domain::reduce_g2_best_effort(tau, 50)?;
        return chi_invariant_g2(&reduced.point);
    }
    chi_invariant_g2(tau)
}

/// `λ_min(Im τ)`, the scale entering decay certificates.
pub fn min_im_eigenvalue(tau: &SiegelPoint) -> f64 {
    smallest_eigenvalue(&tau.im())
}
