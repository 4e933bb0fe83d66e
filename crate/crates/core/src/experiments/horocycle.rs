//! Horocycle averages `A(y) = ∫₀¹ f(x + iy) dx` in genus 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::linalg::pairwise_sum;
use crate::quadrature::integrate_1d;
use crate::ramanujan::{tau_table, TAU_TABLE_LIMIT};
use crate::symplectic::SiegelPoint;

/// Relative size of the omitted series tail.
pub const SERIES_TAIL: f64 = 1e-14;

/// Largest number of series terms attempted.
pub const MAX_SERIES_TERMS: usize = TAU_TABLE_LIMIT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorocycleMethod {
    Series,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorocycleAverage {
    pub y: f64,
    pub value: f64,
    /// Series tail bound, or the quadrature refinement estimate.
    pub error: f64,
    pub terms: usize,
    pub method: HorocycleMethod,
}

/// Bound on `Σ_{n>N} 4n¹² e^{−cn}`, using `|τ(n)| ≤ d(n) n^{11/2}` and
/// `d(n)² ≤ 4n`.
fn deligne_tail(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    let ratio = ((nf + 1.0) / nf).powi(12) * (-c).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    4.0 * (nf + 1.0).powi(12) * (-c * (nf + 1.0)).exp() / (1.0 - ratio)
}

/// Number of terms after which the tail bound drops below `SERIES_TAIL`
/// times the head.
fn series_terms(y: f64) -> Result<usize> {
    let c = 4.0 * PI * y;
    // The head is at least its first term, e^{−c}.
    let head = (-c).exp();
    let mut n = ((12.0 / c).ceil() as usize).max(1);
    while deligne_tail(n, c) > SERIES_TAIL * head {
        n = n + n / 8 + 1;
        if n > MAX_SERIES_TERMS {
            return Err(Error::Scale {
                terms: n as u64,
                limit: MAX_SERIES_TERMS as u64,
            });
        }
    }
    Ok(n)
}

/// `y¹² Σ τ(n)² e^{−4πny}`, the Fourier expansion of the average of
/// `y¹²|Δ|²`.
pub fn delta_horocycle_series(y: f64) -> Result<HorocycleAverage> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("horocycle height must be positive, got {y}")));
    }
    let n = series_terms(y)?;
    let tau = tau_table(n)?;
    let c = 4.0 * PI * y;
    let terms: Vec<f64> = (1..=n)
        .map(|k| {
            let t = tau[k];
            t * t * (-c * k as f64).exp()
        })
        .collect();
    let head = pairwise_sum(&terms);
    let scale = y.powi(12);
    Ok(HorocycleAverage {
        y,
        value: scale * head,
        error: scale * deligne_tail(n, c),
        terms: n,
        method: HorocycleMethod::Series,
    })
}

/// `∫₀¹ f(x + iy) dx` by Gauss–Legendre panels, compared against a rule of
/// twice the order. The panel count grows like `1/y` so that each panel
/// covers a bounded number of oscillations.
pub fn horocycle_quadrature(f: &InvariantFunction, y: f64, order: usize) -> Result<HorocycleAverage> {
    if f.genus() != 1 {
        return Err(Error::Dimension(format!("horocycle average of a genus-{} function", f.genus())));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("horocycle height must be positive, got {y}")));
    }
    let panels = ((1.0 / y).ceil() as usize).max(1);
    let g = |x: f64| f.evaluate(&SiegelPoint::scalar(Complex64::new(x, y)).expect("y > 0"));
    let coarse = integrate_1d(g, 0.0, 1.0, order, panels);
    let fine = integrate_1d(g, 0.0, 1.0, 2 * order, panels);
    Ok(HorocycleAverage {
        y,
        value: fine,
        error: (fine - coarse).abs(),
        terms: 2 * order * panels,
        method: HorocycleMethod::Quadrature,
    })
}

/// Series when `f` is a multiple of `y¹²|Δ|²`, quadrature otherwise.
pub fn horocycle_average_g1(f: &InvariantFunction, y: f64) -> Result<HorocycleAverage> {
    match f.delta_multiple() {
        Some(k) if f.genus() == 1 => {
            let mut r = delta_horocycle_series(y)?;
            r.value *= k;
            r.error *= k.abs();
            Ok(r)
        }
        _ => horocycle_quadrature(f, y, 24),
    }
}
