//! Unipotent cell averages
//! `⟨f⟩_{v₁}(τ_{g−1}) = ∫_{[0,1)^{2g−1}} f(τ(v₁, w₁₁, w, u; τ_{g−1})) dw₁₁ dw du`
//! and their iterates.
//!
//! The unit cube is a fundamental cell for the integer translations of the
//! parabolic factors `g₂` and `g₃`, which act on `(w₁₁, w, u)` by unit
//! shifts; a `Γ_g`-invariant integrand is therefore periodic on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::iwasawa::Corank1Embedding;
use crate::quadrature::{integrate_cube, QuadratureSpec};
use crate::symplectic::{mobius_act, SiegelPoint, SymplecticMatrix};

/// Relative floor on error estimates, covering evaluation roundoff.
const ROUNDOFF_FLOOR: f64 = 1e-12;
/// Largest integration dimension attempted without an explicit override.
pub const MAX_DESK_DIMENSION: usize = 6;

#[derive(Clone, Debug)]
pub struct CellAverageRequest {
    pub f: InvariantFunction,
    pub v1: f64,
    /// The genus `g − 1` base point; `None` when `g = 1`.
    pub base: Option<SiegelPoint>,
    pub quad: QuadratureSpec,
}

impl CellAverageRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.v1 > 0.0) {
            return Err(Error::Domain(format!("v1 must be positive, got {}", self.v1)));
        }
        let base_genus = self.base.as_ref().map_or(0, SiegelPoint::genus);
        if self.f.genus() != base_genus + 1 {
            return Err(Error::Dimension(format!(
                "function of genus {} over a base of genus {base_genus}",
                self.f.genus()
            )));
        }
        self.quad.validate()
    }

    pub fn dimension(&self) -> usize {
        2 * self.f.genus() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAverage {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub dimension: usize,
}

impl CellAverage {
    pub fn relative_error(&self) -> f64 {
        self.error / (self.value.abs() + 1e-300)
    }
}

fn check_accuracy(result: CellAverage, tolerance: f64) -> Result<CellAverage> {
    if result.error > tolerance * result.value.abs() && result.error > 1e-300 {
        return Err(Error::Accuracy {
            value: result.value,
            estimate: result.error,
        });
    }
    Ok(result)
}

type CubeIntegrand<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

/// Integrand on the unit cube with coordinates `(w₁₁, w, u)`.
fn fiber_integrand<'a>(
    f: &'a InvariantFunction,
    v1: f64,
    base: Option<&SiegelPoint>,
) -> Result<CubeIntegrand<'a>> {
    Ok(match base {
        None => Box::new(move |p: &[f64]| {
            let tau = SiegelPoint::scalar(Complex64::new(p[0], v1)).expect("v1 > 0");
            f.evaluate(&tau)
        }),
        Some(base) => {
            let embedding = Corank1Embedding::new(base)?;
            let h = base.genus();
            Box::new(move |p: &[f64]| {
                let tau = embedding
                    .embed(v1, p[0], &p[1..=h], &p[h + 1..=2 * h])
                    .expect("embedding of valid fiber coordinates");
                f.evaluate(&tau)
            })
        }
    })
}

pub fn cell_average(req: &CellAverageRequest) -> Result<CellAverage> {
    req.validate()?;
    let integrand = fiber_integrand(&req.f, req.v1, req.base.as_ref())?;
    let dim = req.dimension();
    let r = integrate_cube(&*integrand, dim, &req.quad)?;
    let result = CellAverage {
        value: r.value,
        error: r.error.max(ROUNDOFF_FLOOR * r.value.abs()),
        evaluations: r.evaluations,
        dimension: dim,
    };
    check_accuracy(result, req.quad.tolerance)
}

/// [`cell_average`] with the panel count raised one step at a time, up to
/// `max_panels`, until the error estimate meets the tolerance.
pub fn cell_average_refined(req: &CellAverageRequest, max_panels: usize) -> Result<CellAverage> {
    req.validate()?;
    let integrand = fiber_integrand(&req.f, req.v1, req.base.as_ref())?;
    let dim = req.dimension();
    let mut quad = req.quad.clone();
    let mut evaluations = 0;
    loop {
        let r = integrate_cube(&*integrand, dim, &quad)?;
        evaluations += r.evaluations;
        let result = CellAverage {
            value: r.value,
            error: r.error.max(ROUNDOFF_FLOOR * r.value.abs()),
            evaluations,
            dimension: dim,
        };
        if result.error <= quad.tolerance * result.value.abs() || quad.panels >= max_panels {
            return check_accuracy(result, quad.tolerance);
        }
        quad.panels += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceResidual {
    pub residual: f64,
    pub at_base: CellAverage,
    pub at_image: CellAverage,
}

impl InvarianceResidual {
    /// Combined relative quadrature error of both averages.
    pub fn combined_error(&self) -> f64 {
        (self.at_base.error + self.at_image.error) / (self.at_base.value.abs() + 1e-30)
    }

    /// The contract `residual ≤ 3 × combined error`.
    pub fn within_contract(&self) -> bool {
        self.residual <= 3.0 * self.combined_error()
    }
}

/// Relative difference of the cell averages at `base` and at `γ·base`.
pub fn invariance_residual(req: &CellAverageRequest, gamma: &SymplecticMatrix) -> Result<InvarianceResidual> {
    let base = req
        .base
        .as_ref()
        .ok_or_else(|| Error::Dimension("invariance needs a base point of genus at least 1".into()))?;
    let at_base = cell_average(req)?;
    let moved = CellAverageRequest {
        base: Some(mobius_act(gamma, base)?),
        ..req.clone()
    };
    let at_image = cell_average(&moved)?;
    Ok(InvarianceResidual {
        residual: (at_base.value - at_image.value).abs() / (at_base.value.abs() + 1e-30),
        at_base,
        at_image,
    })
}

/// Dimension `Σ_{k=g−r+1}^{g} (2k − 1) = g² − (g − r)²` of the `r`-fold
/// iterated unipotent integral.
pub fn iterated_dimension(genus: usize, r: usize) -> usize {
    genus * genus - (genus - r) * (genus - r)
}

/// `r`-fold average: `v = (v₁, …, v_r)`, the outermost fiber first, over a
/// base of genus `g − r`. Refuses dimensions above
/// [`MAX_DESK_DIMENSION`] unless `allow_large` is set.
pub fn iterated_average(
    f: &InvariantFunction,
    v: &[f64],
    base: &SiegelPoint,
    quad: &QuadratureSpec,
    allow_large: bool,
) -> Result<CellAverage> {
    let g = f.genus();
    let r = v.len();
    if r == 0 || r >= g {
        return Err(Error::Index {
            index: r,
            range: format!("1..{g}"),
        });
    }
    if base.genus() != g - r {
        return Err(Error::Dimension(format!(
            "base of genus {} for {r} iterations at genus {g}",
            base.genus()
        )));
    }
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::Domain(format!("v entries must be positive, got {bad}")));
    }
    let dim = iterated_dimension(g, r);
    if dim > MAX_DESK_DIMENSION && !allow_large {
        return Err(Error::DimensionGuard {
            dim,
            limit: MAX_DESK_DIMENSION,
        });
    }
    quad.validate()?;
    let base_embedding = Corank1Embedding::new(base)?;
    let integrand = |p: &[f64]| -> f64 {
        let mut offset = dim;
        let mut current: Option<SiegelPoint> = None;
        for k in (0..r).rev() {
            let h = g - k - 1;
            let span = 2 * h + 1;
            offset -= span;
            let q = &p[offset..offset + span];
            let tau = match &current {
                None => base_embedding.embed(v[k], q[0], &q[1..=h], &q[h + 1..]),
                Some(inner) => Corank1Embedding::new(inner)
                    .and_then(|e| e.embed(v[k], q[0], &q[1..=h], &q[h + 1..])),
            }
            .expect("embedding of valid fiber coordinates");
            current = Some(tau);
        }
        f.evaluate(current.as_ref().expect("r >= 1"))
    };
    let res = integrate_cube(&integrand, dim, quad)?;
    let result = CellAverage {
        value: res.value,
        error: res.error.max(ROUNDOFF_FLOOR * res.value.abs()),
        evaluations: res.evaluations,
        dimension: dim,
    };
    check_accuracy(result, quad.tolerance)
}
