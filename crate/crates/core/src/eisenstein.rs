//! The corank-1 Eisenstein series
//! `E_{g,1}(τ, s) = Σ_{(c,d) primitive mod ±} (det Im γτ / det Im (γτ)₂₂)^s`
//! in its convergence region `Re s > g`.
//!
//! The summand depends on the coset only through the first row `(c, d)` of
//! the lower block pair of `γ`: with `r = cτ + d`,
//! `det Im γτ / det Im (γτ)₂₂ = 1 / (r·Y⁻¹·r̄ᵗ)` where `Y = Im τ`.
//! Truncation keeps the rows with `Q(c, d) = r·Y⁻¹·r̄ᵗ ≤ radius²`; `Q` is a
//! positive quadratic form of determinant 1 on `Z^{2g}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice;
use crate::linalg::{gcd_all, pairwise_sum, IMat, RMat};
use crate::special::{gamma, zeta_real};
use crate::symplectic::{block_split, mobius_act, SiegelPoint, SymplecticMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EisensteinSpec {
    pub genus: usize,
    pub s: Complex64,
    pub radius: f64,
}

impl EisensteinSpec {
    pub fn new(genus: usize, s: Complex64, radius: f64) -> Result<Self> {
        let spec = Self { genus, s, radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn real(genus: usize, s: f64, radius: f64) -> Result<Self> {
        Self::new(genus, Complex64::new(s, 0.0), radius)
    }

    pub fn validate(&self) -> Result<()> {
        if self.genus == 0 {
            return Err(Error::Dimension("genus must be positive".into()));
        }
        if !(self.s.re > self.genus as f64) {
            return Err(Error::ConvergenceRegion {
                re_s: self.s.re,
                genus: self.genus,
            });
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinSum {
    pub value: Complex64,
    /// Bound on the omitted terms from the lattice-point count asymptotics.
    pub tail: f64,
    pub terms: usize,
}

fn check_primitive(cd: &[i64]) -> Result<()> {
    if cd.is_empty() || !cd.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!("row of length {} is not a (c, d) pair", cd.len())));
    }
    if gcd_all(cd) != 1 {
        return Err(Error::NotPrimitive(cd.to_vec()));
    }
    Ok(())
}

fn inverse_im(tau: &SiegelPoint) -> Result<RMat> {
    tau.im()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Degenerate("Im tau is not positive definite".into()))
}

/// `r·Y⁻¹·r̄ᵗ` for `r = cτ + d`.
fn row_norm(cd: &[i64], tau: &SiegelPoint, y_inv: &RMat) -> f64 {
    let g = tau.genus();
    let t = tau.tau();
    let r: Vec<Complex64> = (0..g)
        .map(|j| {
            let ct: Complex64 = (0..g).map(|i| t[(i, j)] * cd[i] as f64).sum();
            ct + cd[g + j] as f64
        })
        .collect();
    let mut q = 0.0;
    for i in 0..g {
        for j in 0..g {
            q += y_inv[(i, j)] * (r[i] * r[j].conj()).re;
        }
    }
    q
}

/// `det Im γτ / det Im (γτ)₂₂` for any `γ` whose lower-block first row is `cd`.
pub fn eisenstein_term(cd: &[i64], tau: &SiegelPoint) -> Result<f64> {
    check_primitive(cd)?;
    if cd.len() != 2 * tau.genus() {
        return Err(Error::Dimension(format!(
            "row of length {} for genus {}",
            cd.len(),
            tau.genus()
        )));
    }
    Ok(1.0 / row_norm(cd, tau, &inverse_im(tau)?))
}

/// Gram matrix of `Q` on `x = (c, d)`:
/// `[[X Y⁻¹ X + Y, X Y⁻¹], [Y⁻¹ X, Y⁻¹]]`.
pub fn quadratic_gram(tau: &SiegelPoint) -> Result<RMat> {
    let g = tau.genus();
    let x = tau.re();
    let y = tau.im();
    let yi = inverse_im(tau)?;
    let xyi = &x * &yi;
    let mut q = RMat::zeros(2 * g, 2 * g);
    q.view_mut((0, 0), (g, g)).copy_from(&(&xyi * &x + &y));
    q.view_mut((0, g), (g, g)).copy_from(&xyi);
    q.view_mut((g, 0), (g, g)).copy_from(&xyi.transpose());
    q.view_mut((g, g), (g, g)).copy_from(&yi);
    Ok(crate::linalg::symmetrize(&q))
}

/// Primitive rows with `Q ≤ radius²`, one representative per `±` pair (first
/// nonzero entry positive), with their `Q` values.
pub fn primitive_rows(tau: &SiegelPoint, radius: f64) -> Result<Vec<(Vec<i64>, f64)>> {
    let gram = quadratic_gram(tau)?;
    let n = gram.nrows();
    let points = lattice::enumerate(&gram, &vec![0.0; n], radius * radius)?;
    Ok(points
        .into_iter()
        .filter(|p| {
            let first = p.x.iter().find(|v| **v != 0);
            matches!(first, Some(v) if *v > 0) && gcd_all(&p.x) == 1
        })
        .map(|p| (p.x, p.norm))
        .collect())
}

/// `Σ Q^{−σ}` over `Q > radius²`, estimated from the volume
/// `π^g/g!·t^g` of `{Q ≤ t}` and the density `1/(2ζ(2g))` of primitive
/// rows modulo sign.
pub fn eisenstein_tail(genus: usize, sigma: f64, radius: f64) -> f64 {
    let g = genus as f64;
    let ball = std::f64::consts::PI.powf(g) / gamma(g + 1.0);
    let zeta = zeta_real(2.0 * g).expect("2g > 1");
    ball * g * (radius * radius).powf(g - sigma) / (2.0 * (sigma - g) * zeta)
}

pub fn eisenstein_sum(tau: &SiegelPoint, spec: &EisensteinSpec) -> Result<EisensteinSum> {
    spec.validate()?;
    if spec.genus != tau.genus() {
        return Err(Error::Dimension(format!(
            "spec of genus {} at a point of genus {}",
            spec.genus,
            tau.genus()
        )));
    }
    let rows = primitive_rows(tau, spec.radius)?;
    let s = spec.s;
    let re: Vec<f64>;
    let im: Vec<f64>;
    if s.im == 0.0 {
        re = rows.par_iter().map(|(_, q)| q.powf(-s.re)).collect();
        im = Vec::new();
    } else {
        let terms: Vec<Complex64> = rows.par_iter().map(|(_, q)| (-s * q.ln()).exp()).collect();
        re = terms.iter().map(|z| z.re).collect();
        im = terms.iter().map(|z| z.im).collect();
    }
    Ok(EisensteinSum {
        value: Complex64::new(pairwise_sum(&re), pairwise_sum(&im)),
        tail: eisenstein_tail(spec.genus, s.re, spec.radius),
        terms: rows.len(),
    })
}

/// The truncated series over a fixed set of rows, evaluated at any point.
/// Each term is an exact eigenfunction of the invariant Laplacian, so a
/// fixed row set avoids truncation jumps under small displacements.
#[derive(Clone, Debug)]
pub struct FrozenEisenstein {
    rows: Vec<Vec<i64>>,
    s: f64,
}

impl FrozenEisenstein {
    pub fn new(center: &SiegelPoint, spec: &EisensteinSpec) -> Result<Self> {
        spec.validate()?;
        if spec.s.im != 0.0 {
            return Err(Error::Domain("frozen series needs real s".into()));
        }
        let rows = primitive_rows(center, spec.radius)?
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        Ok(Self { rows, s: spec.s.re })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn evaluate(&self, tau: &SiegelPoint) -> Result<f64> {
        let gram = quadratic_gram(tau)?;
        let n = gram.nrows();
        let terms: Vec<f64> = self
            .rows
            .iter()
            .map(|x| {
                let mut q = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += gram[(i, j)] * x[j] as f64;
                    }
                    q += x[i] as f64 * row;
                }
                q.powf(-self.s)
            })
            .collect();
        Ok(pairwise_sum(&terms))
    }
}

/// An element of `Sp(2g, Z)` whose row `g` (the first row of `(c d)`) is `cd`.
///
/// Reduces `cd` to `e_g` by right multiplication with elementary generators
/// and returns the inverse of the accumulated product.
pub fn complete_primitive_row(cd: &[i64]) -> Result<SymplecticMatrix> {
    check_primitive(cd)?;
    let g = cd.len() / 2;
    let n = 2 * g;
    let mut x = cd.to_vec();
    let mut m = IMat::identity(n, n);
    let mut apply = |gen: IMat, x: &mut Vec<i64>| {
        let row = IMat::from_row_slice(1, n, x) * &gen;
        x.copy_from_slice(row.as_slice());
        m *= gen;
    };
    let shear = |i: usize, k: i64, upper: bool| {
        let mut e = IMat::identity(n, n);
        if upper {
            e[(i, g + i)] = k;
        } else {
            e[(g + i, i)] = k;
        }
        e
    };
    let gl = |a_inv_t: &IMat| {
        let a = a_inv_t
            .map(|v| v as f64)
            .try_inverse()
            .expect("unimodular")
            .transpose()
            .map(|v| v.round() as i64);
        let mut e = IMat::zeros(n, n);
        e.view_mut((0, 0), (g, g)).copy_from(&a);
        e.view_mut((g, g), (g, g)).copy_from(a_inv_t);
        e
    };

    for i in 0..g {
        while x[i] != 0 {
            let (c, d) = (x[i], x[g + i]);
            if d == 0 {
                apply(shear(i, 1, true), &mut x);
                continue;
            }
            let k = c / d;
            if k != 0 {
                apply(shear(i, -k, false), &mut x);
            }
            let (c, d) = (x[i], x[g + i]);
            if c != 0 {
                apply(shear(i, -(d / c), true), &mut x);
            }
        }
    }

    loop {
        let nonzero: Vec<usize> = (0..g).filter(|&j| x[g + j] != 0).collect();
        if nonzero.len() <= 1 {
            break;
        }
        let p = *nonzero.iter().min_by_key(|&&j| x[g + j].abs()).expect("nonempty");
        for &j in &nonzero {
            if j != p {
                let k = x[g + j] / x[g + p];
                let mut e = IMat::identity(g, g);
                e[(p, j)] = -k;
                apply(gl(&e), &mut x);
            }
        }
    }
    let p = (0..g).find(|&j| x[g + j] != 0).expect("primitive row is nonzero");
    if p != 0 {
        let mut perm = IMat::identity(g, g);
        perm[(0, 0)] = 0;
        perm[(p, p)] = 0;
        perm[(0, p)] = 1;
        perm[(p, 0)] = 1;
        apply(gl(&perm), &mut x);
    }
    if x[g] < 0 {
        let mut flip = IMat::identity(g, g);
        flip[(0, 0)] = -1;
        apply(gl(&flip), &mut x);
    }
    debug_assert!(x.iter().enumerate().all(|(j, v)| *v == i64::from(j == g)));
    Ok(SymplecticMatrix::from_integer(&m)?.inverse())
}

/// `det Im γτ / det Im (γτ)₂₂` computed by acting with `γ`.
pub fn det_ratio_via_gamma(gamma: &SymplecticMatrix, tau: &SiegelPoint) -> Result<f64> {
    let image = mobius_act(gamma, tau)?;
    if image.genus() == 1 {
        return Ok(image.det_im());
    }
    let tail = block_split(&image, 1)?.tau22.map(|z| z.im);
    Ok(image.det_im() / tail.determinant())
}
