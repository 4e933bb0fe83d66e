//! The invariant metric in Iwasawa coordinates and the Laplace–Beltrami
//! operator `Δ = −(1/√G) ∂_I √G G^{IJ} ∂_J`.
//!
//! With `h(X) = 𝐔·diag(V, V⁻¹)` (so `h·iI = τ`), the metric is
//! `G_{kl} = κ Tr(J_k J_l)` where `J_k` is the symmetric part of
//! `h⁻¹ ∂_k h`. The normalization `κ/2 = 2^{−(g−1)/(g+1)}` makes
//! `√det G` equal the measure density `∏ vᵢ^{i−g−2}`.
//!
//! Coordinates are ordered as in [`IwasawaCoords::to_flat`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eisenstein::{EisensteinSpec, FrozenEisenstein};
use crate::error::{Error, Result};
use crate::iwasawa::{from_coords, to_coords, IwasawaCoords};
use crate::linalg::RMat;
use crate::symplectic::SiegelPoint;

/// Default stencil step; the Richardson partner uses half of it.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `κ = 2·2^{−(g−1)/(g+1)}`.
pub fn kappa(genus: usize) -> f64 {
    let g = genus as f64;
    2.0 * 2f64.powf(-(g - 1.0) / (g + 1.0))
}

/// Eigenvalue `2^{(g−1)/(g+1)} s(g − s)` of `Δ` on `v₁^s` and on `E_{g,1}(·, s)`.
pub fn eisenstein_eigenvalue(genus: usize, s: f64) -> f64 {
    let g = genus as f64;
    2f64.powf((g - 1.0) / (g + 1.0)) * s * (g - s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricAtPoint {
    pub coords: IwasawaCoords,
    pub metric: RMat,
    pub kappa: f64,
}

impl MetricAtPoint {
    pub fn sqrt_det(&self) -> f64 {
        self.metric.determinant().sqrt()
    }

    pub fn inverse(&self) -> Result<RMat> {
        self.metric
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::Degenerate("metric is not positive definite".into()))
    }
}

struct Frame {
    /// `h⁻¹`.
    h_inv: RMat,
    /// `∂h/∂X_k` in flat-coordinate order.
    derivatives: Vec<RMat>,
}

fn frame(c: &IwasawaCoords) -> Frame {
    let g = c.genus();
    let u = c.unitriangular();
    let u_inv = u.clone().try_inverse().expect("unitriangular");
    let u_inv_t = u_inv.transpose();
    let w = c.w();
    let sqrt_v: Vec<f64> = c.v().iter().map(|x| x.sqrt()).collect();
    let diag = |d: &dyn Fn(usize) -> f64| {
        let mut m = RMat::zeros(g, g);
        for i in 0..g {
            m[(i, i)] = d(i);
        }
        m
    };
    let vmat = diag(&|i| sqrt_v[i]);
    let vinv = diag(&|i| 1.0 / sqrt_v[i]);

    // h⁻¹ = A⁻¹·[[U⁻¹, −U⁻¹W], [0, Uᵗ]]
    let mut h_inv = RMat::zeros(2 * g, 2 * g);
    h_inv.view_mut((0, 0), (g, g)).copy_from(&(&vinv * &u_inv));
    h_inv.view_mut((0, g), (g, g)).copy_from(&(-(&vinv * &u_inv * w)));
    h_inv.view_mut((g, g), (g, g)).copy_from(&(&vmat * u.transpose()));

    let block = |tl: Option<RMat>, tr: Option<RMat>, br: Option<RMat>| {
        let mut m = RMat::zeros(2 * g, 2 * g);
        if let Some(x) = tl {
            m.view_mut((0, 0), (g, g)).copy_from(&x);
        }
        if let Some(x) = tr {
            m.view_mut((0, g), (g, g)).copy_from(&x);
        }
        if let Some(x) = br {
            m.view_mut((g, g), (g, g)).copy_from(&x);
        }
        m
    };
    let unit = |i: usize, j: usize| {
        let mut e = RMat::zeros(g, g);
        e[(i, j)] = 1.0;
        e
    };

    let mut derivatives = Vec::with_capacity(IwasawaCoords::dimension(g));
    // h = [[U V, W U⁻ᵗ V⁻¹], [0, U⁻ᵗ V⁻¹]]
    for i in 0..g {
        let dv = unit(i, i) * (0.5 / sqrt_v[i]);
        let dvinv = unit(i, i) * (-0.5 / (c.v()[i] * sqrt_v[i]));
        derivatives.push(block(
            Some(&u * dv),
            Some(w * &u_inv_t * &dvinv),
            Some(&u_inv_t * &dvinv),
        ));
    }
    for i in 0..g {
        for j in i..g {
            let mut dw = unit(i, j);
            if i != j {
                dw[(j, i)] = 1.0;
            }
            derivatives.push(block(None, Some(dw * &u_inv_t * &vinv), None));
        }
    }
    for i in 0..g {
        for j in i + 1..g {
            let du = unit(i, j);
            let d_uinv_t = -(&u_inv_t * du.transpose() * &u_inv_t);
            derivatives.push(block(
                Some(&du * &vmat),
                Some(w * &d_uinv_t * &vinv),
                Some(&d_uinv_t * &vinv),
            ));
        }
    }
    Frame { h_inv, derivatives }
}

pub fn metric_at(c: &IwasawaCoords) -> MetricAtPoint {
    let g = c.genus();
    let fr = frame(c);
    let forms: Vec<RMat> = fr
        .derivatives
        .iter()
        .map(|d| {
            let m = &fr.h_inv * d;
            (&m + m.transpose()) * 0.5
        })
        .collect();
    let n = forms.len();
    let k = kappa(g);
    let mut metric = RMat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let t = k * forms[a].component_mul(&forms[b].transpose()).sum();
            metric[(a, b)] = t;
            metric[(b, a)] = t;
        }
    }
    MetricAtPoint {
        coords: c.clone(),
        metric,
        kappa: k,
    }
}

/// `√G·G⁻¹` at flat coordinates `x`.
fn flux_tensor(genus: usize, x: &[f64]) -> Result<(RMat, f64)> {
    let c = IwasawaCoords::from_flat(genus, x)?;
    let m = metric_at(&c);
    let sqrt_det = m.sqrt_det();
    Ok((m.inverse()? * sqrt_det, sqrt_det))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianValue {
    /// Richardson-extrapolated value.
    pub value: f64,
    /// `|extrapolated − value at h/2|`.
    pub error: f64,
    pub step: f64,
}

/// Second-order divergence-form stencil at step `h`.
fn stencil(f: &(dyn Fn(&[f64]) -> f64 + Sync), genus: usize, x0: &[f64], h: f64) -> Result<f64> {
    let n = x0.len();
    let shifted = |moves: &[(usize, f64)]| {
        let mut x = x0.to_vec();
        for &(k, d) in moves {
            x[k] += d;
        }
        x
    };
    let (_, sqrt_det0) = flux_tensor(genus, x0)?;
    let f0 = f(x0);
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            // Diagonal flux through the faces at ±h/2.
            let (ap, _) = flux_tensor(genus, &shifted(&[(i, 0.5 * h)]))?;
            let (am, _) = flux_tensor(genus, &shifted(&[(i, -0.5 * h)]))?;
            let fp = f(&shifted(&[(i, h)]));
            let fm = f(&shifted(&[(i, -h)]));
            acc += (ap[(i, i)] * (fp - f0) - am[(i, i)] * (f0 - fm)) / (h * h);
            // Mixed fluxes: ∂_i (A^{ij} ∂_j f) by central differences.
            let (bp, _) = flux_tensor(genus, &shifted(&[(i, h)]))?;
            let (bm, _) = flux_tensor(genus, &shifted(&[(i, -h)]))?;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dj_plus = (f(&shifted(&[(i, h), (j, h)])) - f(&shifted(&[(i, h), (j, -h)]))) / (2.0 * h);
                let dj_minus = (f(&shifted(&[(i, -h), (j, h)])) - f(&shifted(&[(i, -h), (j, -h)]))) / (2.0 * h);
                acc += (bp[(i, j)] * dj_plus - bm[(i, j)] * dj_minus) / (2.0 * h);
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(-total / sqrt_det0)
}

/// `Δf` at `coords` for `f` given on flat coordinates, from the stencil at
/// `h` and `h/2` combined by Richardson extrapolation.
pub fn laplace_beltrami(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    coords: &IwasawaCoords,
    h: f64,
) -> Result<LaplacianValue> {
    if !(h > 0.0) || coords.v().iter().any(|v| *v <= 2.0 * h) {
        return Err(Error::Step { step: h });
    }
    let g = coords.genus();
    let x0 = coords.to_flat();
    let coarse = stencil(f, g, &x0, h)?;
    let fine = stencil(f, g, &x0, 0.5 * h)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(LaplacianValue {
        value,
        error: (value - fine).abs(),
        step: h,
    })
}

/// Lifts a function of points to flat Iwasawa coordinates.
pub fn on_coordinates<'a>(
    genus: usize,
    f: impl Fn(&SiegelPoint) -> f64 + Sync + 'a,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |x: &[f64]| {
        let c = IwasawaCoords::from_flat(genus, x).expect("stencil stays in the coordinate domain");
        f(&from_coords(&c))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueCheck {
    pub residual: f64,
    pub laplacian: LaplacianValue,
    pub eigenvalue: f64,
    pub value: f64,
    /// Truncation tail of the series relative to its value.
    pub relative_tail: f64,
    pub terms: usize,
}

impl EigenvalueCheck {
    /// `residual ≤ max(floor, 10·tail/|E|)`.
    pub fn passes(&self, floor: f64) -> bool {
        self.residual <= floor.max(10.0 * self.relative_tail)
    }
}

/// `|ΔE − λE| / |λE|` for the series truncated to the rows with
/// `Q ≤ radius²` at `τ`, the row set held fixed across the stencil.
pub fn eigenvalue_check(tau: &SiegelPoint, s: f64, spec: &EisensteinSpec, h: f64) -> Result<EigenvalueCheck> {
    let g = tau.genus();
    let spec = EisensteinSpec::real(g, s, spec.radius)?;
    let series = FrozenEisenstein::new(tau, &spec)?;
    let f = on_coordinates(g, |p| series.evaluate(p).expect("valid point"));
    let coords = to_coords(tau)?;
    let lap = laplace_beltrami(&f, &coords, h)?;
    let value = series.evaluate(tau)?;
    let eigenvalue = eisenstein_eigenvalue(g, s);
    let tail = crate::eisenstein::eisenstein_tail(g, s, spec.radius);
    Ok(EigenvalueCheck {
        residual: (lap.value - eigenvalue * value).abs() / (eigenvalue * value).abs(),
        laplacian: lap,
        eigenvalue,
        value,
        relative_tail: tail / value.abs(),
        terms: series.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iwasawa::measure_density;
    use crate::symplectic::{mobius_act, random_gamma};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn genus_one_metric_is_hyperbolic() {
        let c = IwasawaCoords::from_flat(1, &[2.5, 0.3]).unwrap();
        let m = metric_at(&c);
        assert!((m.kappa - 2.0).abs() < 1e-15);
        assert!((m.metric[(0, 0)] - 1.0 / 6.25).abs() < 1e-15);
        assert!((m.metric[(1, 1)] - 1.0 / 6.25).abs() < 1e-15);
        assert!(m.metric[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn v_slots_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for g in 1..=3 {
            for _ in 0..100 {
                let c = IwasawaCoords::random(g, &mut rng);
                let m = metric_at(&c);
                let inv = m.inverse().unwrap();
                for (i, v) in c.v().iter().enumerate() {
                    let expected = 2f64.powf((g as f64 - 1.0) / (g as f64 + 1.0)) * v * v;
                    assert!((inv[(i, i)] - expected).abs() <= 1e-12 * expected);
                    assert!((m.metric[(i, i)] - 0.5 * m.kappa / (v * v)).abs() <= 1e-12 * m.metric[(i, i)]);
                }
                let ratio = m.sqrt_det() / measure_density(&c);
                assert!((ratio - 1.0).abs() < 1e-10, "g={g}: {ratio}");
            }
        }
    }

    #[test]
    fn metric_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (g, tol) in [(1usize, 1e-5), (2, 1e-3)] {
            for _ in 0..5 {
                let gamma = random_gamma(g, 3, &mut rng);
                let c = IwasawaCoords::random(g, &mut rng);
                let x0 = c.to_flat();
                let n = x0.len();
                let phi = |x: &[f64]| {
                    let p = from_coords(&IwasawaCoords::from_flat(g, x).unwrap());
                    to_coords(&mobius_act(&gamma, &p).unwrap()).unwrap().to_flat()
                };
                let mut jac = RMat::zeros(n, n);
                let step = 1e-6;
                for k in 0..n {
                    let mut xp = x0.clone();
                    let mut xm = x0.clone();
                    xp[k] += step;
                    xm[k] -= step;
                    let (fp, fm) = (phi(&xp), phi(&xm));
                    for i in 0..n {
                        jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * step);
                    }
                }
                let image = IwasawaCoords::from_flat(g, &phi(&x0)).unwrap();
                let pulled = jac.transpose() * metric_at(&image).metric * &jac;
                let here = metric_at(&c).metric;
                let scale = crate::linalg::max_abs(&here);
                assert!(crate::linalg::max_abs(&(pulled - &here)) <= tol * scale);
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let c = IwasawaCoords::identity(1);
        let f = |x: &[f64]| x[0].powf(0.7);
        let r = laplace_beltrami(&f, &c, 1e-3).unwrap();
        assert!((r.value - 0.21).abs() < 1e-5, "{r:?}");

        let constant = |_: &[f64]| 3.0;
        for g in 1..=2 {
            let r = laplace_beltrami(&constant, &IwasawaCoords::identity(g), 1e-3).unwrap();
            assert!(r.value.abs() < 1e-9);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = IwasawaCoords::random(2, &mut rng);
        let f = |x: &[f64]| x[0].powi(3);
        let r = laplace_beltrami(&f, &c, 1e-3).unwrap();
        let expected = -3.0 * 2f64.powf(1.0 / 3.0) * c.v()[0].powi(3);
        assert!((r.value - expected).abs() <= 1e-3 * expected.abs(), "{} vs {expected}", r.value);

        assert!(matches!(
            laplace_beltrami(&f, &IwasawaCoords::from_flat(1, &[0.001, 0.0]).unwrap(), 1e-3),
            Err(Error::Step { .. })
        ));
    }

    #[test]
    fn laplacian_commutes_with_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gamma = random_gamma(1, 4, &mut rng);
        let test_fn = |p: &SiegelPoint| {
            let z = p.z();
            (z.im).powf(1.3) * (1.0 + 0.2 * (2.0 * std::f64::consts::PI * z.re).cos())
        };
        let composed = on_coordinates(1, |p| test_fn(&mobius_act(&gamma, p).unwrap()));
        let plain = on_coordinates(1, test_fn);
        let c = IwasawaCoords::from_flat(1, &[1.3, 0.2]).unwrap();
        let lhs = laplace_beltrami(&composed, &c, 1e-3).unwrap();
        let image = to_coords(&mobius_act(&gamma, &from_coords(&c)).unwrap()).unwrap();
        let h = 1e-3 * image.v()[0].min(1.0);
        let rhs = laplace_beltrami(&plain, &image, h).unwrap();
        assert!((lhs.value - rhs.value).abs() <= 1e-5 * (1.0 + rhs.value.abs()), "{lhs:?} {rhs:?}");
    }

    #[test]
    fn eisenstein_eigenvalues_genus_one() {
        let tau = SiegelPoint::scalar(num_complex::Complex64::new(0.2, 1.4)).unwrap();
        let spec = EisensteinSpec::real(1, 3.0, 50.0).unwrap();
        let r = eigenvalue_check(&tau, 3.0, &spec, DEFAULT_STEP).unwrap();
        assert!(r.residual <= 1e-3 && r.passes(1e-3), "{r:?}");
        let r = eigenvalue_check(&tau, 5.0, &spec, DEFAULT_STEP).unwrap();
        assert!(r.residual <= 1e-4, "{r:?}");
    }

    #[test]
    fn eisenstein_eigenvalue_genus_two() {
        use crate::symplectic::rmat;
        let re = rmat(2, 2, &[0.1, 0.05, 0.05, -0.2]);
        let im = rmat(2, 2, &[1.2, 0.3, 0.3, 1.1]);
        let tau = SiegelPoint::from_re_im(&re, &im).unwrap();
        let spec = EisensteinSpec::real(2, 3.5, 8.0).unwrap();
        let r = eigenvalue_check(&tau, 3.5, &spec, DEFAULT_STEP).unwrap();
        assert!(r.passes(1e-2) && r.residual < 1e-6, "{r:?}");
    }
}
