//! Fundamental-domain reduction (exact in genus 1, best effort in genus 2)
//! and quadrature over the standard genus-1 fundamental domain.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::InvariantFunction;
use crate::linalg::{pairwise_sum, IMat};
use crate::quadrature::{composite_rule, QuadratureSpec};
use crate::symplectic::{automorphy_factor, mobius_act, SiegelPoint, SymplecticMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    pub point: SiegelPoint,
    /// The element `γ` with `γ·original = point`.
    pub word: SymplecticMatrix,
    pub steps: usize,
    /// `false` when the iteration limit stopped a genus-2 reduction early.
    pub converged: bool,
}

fn integer_point(word: &IMat, original: &SiegelPoint) -> Result<(SymplecticMatrix, SiegelPoint)> {
    let w = SymplecticMatrix::from_integer(word)?;
    let p = mobius_act(&w, original)?;
    Ok((w, p))
}

/// Standard `SL(2, Z)` reduction into `|Re τ| ≤ ½`, `|τ| ≥ 1`.
pub fn reduce_g1(tau: &SiegelPoint) -> Result<ReductionResult> {
    if tau.genus() != 1 {
        return Err(Error::Dimension(format!("genus-1 reduction at genus {}", tau.genus())));
    }
    let mut word = IMat::identity(2, 2);
    let mut z = tau.z();
    let mut steps = 0;
    loop {
        let k = z.re.round();
        if k != 0.0 {
            z -= k;
            word = IMat::from_row_slice(2, 2, &[1, -(k as i64), 0, 1]) * word;
            steps += 1;
        }
        if z.norm_sqr() < 1.0 - 1e-14 {
            z = -1.0 / z;
            word = IMat::from_row_slice(2, 2, &[0, -1, 1, 0]) * word;
            steps += 1;
        } else {
            break;
        }
    }
    let (word, point) = integer_point(&word, tau)?;
    Ok(ReductionResult {
        point,
        word,
        steps,
        converged: true,
    })
}

/// Generators tried in each genus-2 sweep: six single-coordinate inversions
/// `τᵢᵢ ↦ −1/(τᵢᵢ + d)`, nine `[[0, −I], [I, S]]` with diagonal
/// `S ∈ {0, ±1}²`, and four with `S = ±[[0,1],[1,0]], ±[[1,−1],[−1,1]]`.
/// The sweep is not a certified Gottschling set.
pub fn gottschling_type_generators() -> Vec<IMat> {
    let mut out = Vec::with_capacity(19);
    for i in 0..2 {
        for d in [-1i64, 0, 1] {
            let mut m = IMat::identity(4, 4);
            m[(i, i)] = 0;
            m[(i, 2 + i)] = -1;
            m[(2 + i, i)] = 1;
            m[(2 + i, 2 + i)] = d;
            out.push(m);
        }
    }
    let mut inversion = |s: [i64; 4]| {
        let mut m = IMat::zeros(4, 4);
        m[(0, 2)] = -1;
        m[(1, 3)] = -1;
        m[(2, 0)] = 1;
        m[(3, 1)] = 1;
        m[(2, 2)] = s[0];
        m[(2, 3)] = s[1];
        m[(3, 2)] = s[2];
        m[(3, 3)] = s[3];
        out.push(m);
    };
    for a in [-1i64, 0, 1] {
        for b in [-1i64, 0, 1] {
            inversion([a, 0, 0, b]);
        }
    }
    for sign in [1i64, -1] {
        inversion([0, sign, sign, 0]);
        inversion([sign, -sign, -sign, sign]);
    }
    out
}

fn gl_block(a: [i64; 4]) -> IMat {
    let a = IMat::from_row_slice(2, 2, &a);
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let inv_t = IMat::from_row_slice(2, 2, &[a[(1, 1)], -a[(1, 0)], -a[(0, 1)], a[(0, 0)]]) * det;
    let mut m = IMat::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&a);
    m.view_mut((2, 2), (2, 2)).copy_from(&inv_t);
    m
}

/// Gauss reduction of `Im τ` under `τ ↦ AτAᵗ`, giving
/// `0 ≤ 2y₁₂ ≤ y₁₁ ≤ y₂₂`.
fn reduce_imaginary(tau: &SiegelPoint) -> IMat {
    let mut total = IMat::identity(4, 4);
    let mut y = tau.im();
    let mut apply = |m: IMat, y: &mut crate::linalg::RMat| {
        let a = m.view((0, 0), (2, 2)).map(|v| v as f64);
        *y = &a * &*y * a.transpose();
        total = &m * &total;
    };
    for _ in 0..200 {
        if y[(0, 0)] > y[(1, 1)] {
            apply(gl_block([0, 1, 1, 0]), &mut y);
        }
        let k = (y[(0, 1)] / y[(0, 0)]).round() as i64;
        if k == 0 {
            break;
        }
        apply(gl_block([1, 0, -k, 1]), &mut y);
    }
    if y[(0, 1)] < 0.0 {
        apply(gl_block([1, 0, 0, -1]), &mut y);
    }
    total
}

fn reduce_real(tau: &SiegelPoint) -> IMat {
    let x = tau.re();
    let mut m = IMat::identity(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, 2 + j)] = -(x[(i, j)].round() as i64);
        }
    }
    m
}

/// Alternates Minkowski reduction of `Im τ`, integer translation of `Re τ`
/// into `[−½, ½]`, and the generator sweep, applying the generator with the
/// smallest `|det(Cτ + D)| < 1` until none remains or `max_iters` passes.
/// `det Im τ` never decreases.
pub fn reduce_g2_best_effort(tau: &SiegelPoint, max_iters: usize) -> Result<ReductionResult> {
    if tau.genus() != 2 {
        return Err(Error::Dimension(format!("genus-2 reduction at genus {}", tau.genus())));
    }
    let generators: Vec<SymplecticMatrix> = gottschling_type_generators()
        .iter()
        .map(SymplecticMatrix::from_integer)
        .collect::<Result<_>>()?;
    let mut word = IMat::identity(4, 4);
    let mut point = tau.clone();
    let mut steps = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        for reduce in [reduce_imaginary, reduce_real] {
            let m = reduce(&point);
            if m != IMat::identity(4, 4) {
                word = m * word;
                steps += 1;
                point = integer_point(&word, tau)?.1;
            }
        }
        let best = generators
            .iter()
            .zip(gottschling_type_generators())
            .map(|(g, gi)| (automorphy_factor(g, &point).norm(), gi))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("nonempty generator set");
        if best.0 >= 1.0 - 1e-12 {
            converged = true;
            break;
        }
        word = best.1 * word;
        steps += 1;
        point = integer_point(&word, tau)?.1;
    }
    let (word, point) = integer_point(&word, tau)?;
    Ok(ReductionResult {
        point,
        word,
        steps,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainIntegral {
    pub value: f64,
    /// Refinement estimate `|Q(2·order) − Q(order)|`.
    pub error: f64,
    /// Estimate `Y_max⁻¹·∫ f(x + iY_max) dx` of the omitted region `y > Y_max`.
    pub tail: f64,
}

/// Width in `ln y` of each `y`-panel.
const LOG_Y_PANEL: f64 = 0.5;

fn domain_rule(f: &InvariantFunction, spec: &QuadratureSpec, order: usize) -> f64 {
    let (xs, wx) = composite_rule(-0.5, 0.5, order, spec.panels);
    let top = spec.y_max.ln();
    let terms: Vec<f64> = xs
        .par_iter()
        .zip(&wx)
        .map(|(&x, &w)| {
            let bottom = 0.5 * (1.0 - x * x).ln();
            let panels = (((top - bottom) / LOG_Y_PANEL).ceil() as usize).max(1) * spec.panels;
            let (ts, wt) = composite_rule(bottom, top, order, panels);
            let column: Vec<f64> = ts
                .iter()
                .zip(&wt)
                .map(|(&t, &v)| {
                    let y = t.exp();
                    let p = SiegelPoint::scalar(Complex64::new(x, y)).expect("y > 0");
                    // dμ = dx dy / y² = dx e^{−t} dt
                    v * f.evaluate(&p) / y
                })
                .collect();
            w * pairwise_sum(&column)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `∫_{D₁} f dμ` over `{|x| ≤ ½, √(1−x²) ≤ y ≤ Y_max}` with Gauss–Legendre
/// panels in `x` and `ln y`. Fails with [`Error::Tail`] when the tail
/// estimate exceeds `spec.tolerance` relative to the value.
pub fn integrate_domain_g1(f: &InvariantFunction, spec: &QuadratureSpec) -> Result<DomainIntegral> {
    spec.validate()?;
    if f.genus() != 1 {
        return Err(Error::Dimension(format!("genus-1 domain with a genus-{} function", f.genus())));
    }
    let coarse = domain_rule(f, spec, spec.order);
    let value = domain_rule(f, spec, 2 * spec.order);
    let (xs, wx) = composite_rule(-0.5, 0.5, 2 * spec.order, spec.panels);
    let edge: Vec<f64> = xs
        .iter()
        .zip(&wx)
        .map(|(&x, &w)| {
            let p = SiegelPoint::scalar(Complex64::new(x, spec.y_max)).expect("y_max > 0");
            w * f.evaluate(&p)
        })
        .collect();
    let tail = pairwise_sum(&edge).abs() / spec.y_max;
    if tail > spec.tolerance * value.abs() && tail > 0.0 {
        return Err(Error::Tail {
            tail,
            tolerance: spec.tolerance * value.abs(),
        });
    }
    Ok(DomainIntegral {
        value,
        error: (value - coarse).abs(),
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;
    use crate::special::siegel_volume;
    use crate::symplectic::{random_gamma, random_point, rmat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reduce_g1_examples() {
        let r = reduce_g1(&SiegelPoint::scalar(Complex64::new(0.6, 2.0)).unwrap()).unwrap();
        assert!((r.point.z() - Complex64::new(-0.4, 2.0)).norm() < 1e-15);
        assert_eq!(r.steps, 1);

        let r = reduce_g1(&SiegelPoint::scalar(Complex64::new(0.1, 0.1)).unwrap()).unwrap();
        assert!(r.point.z().im >= 3f64.sqrt() / 2.0 - 1e-12);

        let reduced = SiegelPoint::scalar(Complex64::new(0.2, 1.5)).unwrap();
        let r = reduce_g1(&reduced).unwrap();
        assert_eq!(r.word, SymplecticMatrix::identity(1));
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn reduce_g1_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let gamma = random_gamma(1, 8, &mut rng);
            let tau = mobius_act(&gamma, &random_point(1, &mut rng)).unwrap();
            let r = reduce_g1(&tau).unwrap();
            let z = r.point.z();
            assert!(z.re.abs() <= 0.5 + 1e-12 && z.norm() >= 1.0 - 1e-12);
            let again = mobius_act(&r.word, &tau).unwrap();
            assert!((again.z() - z).norm() <= 1e-10 * z.norm());
        }
    }

    #[test]
    fn reduce_g2_examples() {
        let id = SiegelPoint::scaled_identity(2, 1.0);
        let r = reduce_g2_best_effort(&id, 50).unwrap();
        assert_eq!(r.word, SymplecticMatrix::identity(2));
        assert!(r.converged);

        let shifted = SiegelPoint::from_re_im(&RMat::from_element(2, 2, 0.7), &rmat(2, 2, &[1.0, 0.0, 0.0, 1.2])).unwrap();
        let r = reduce_g2_best_effort(&shifted, 50).unwrap();
        assert!(r.point.re().iter().all(|x| x.abs() <= 0.5 + 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let gamma = random_gamma(2, 6, &mut rng);
            let tau = mobius_act(&gamma, &random_point(2, &mut rng)).unwrap();
            let r = reduce_g2_best_effort(&tau, 100).unwrap();
            assert!(r.point.det_im() >= tau.det_im() - 1e-12);
            let y = r.point.im();
            assert!(r.point.re().iter().all(|x| x.abs() <= 0.5 + 1e-9));
            assert!(0.0 <= 2.0 * y[(0, 1)] + 1e-9 && 2.0 * y[(0, 1)] <= y[(0, 0)] + 1e-9);
            assert!(y[(0, 0)] <= y[(1, 1)] + 1e-9);
            assert!(r.converged);
            for g in gottschling_type_generators() {
                let g = SymplecticMatrix::from_integer(&g).unwrap();
                assert!(automorphy_factor(&g, &r.point).norm() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn generator_set_is_symplectic() {
        let gens = gottschling_type_generators();
        assert_eq!(gens.len(), 19);
        for g in &gens {
            SymplecticMatrix::from_integer(g).unwrap();
        }
    }

    #[test]
    fn constant_function_volume() {
        let spec = QuadratureSpec {
            y_max: 1000.0,
            tolerance: 5e-3,
            ..QuadratureSpec::default()
        };
        let r = integrate_domain_g1(&InvariantFunction::constant(1, 1.0), &spec).unwrap();
        assert!((r.value - (siegel_volume(1) - 1e-3)).abs() < 1e-12);
        assert!((r.tail - 1e-3).abs() < 1e-15);
        assert!((r.value - siegel_volume(1)).abs() < 5e-3 * siegel_volume(1));
    }

    #[test]
    fn zero_function() {
        let r = integrate_domain_g1(&InvariantFunction::constant(1, 0.0), &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn delta_integral_and_invariance() {
        let f = InvariantFunction::delta_g1();
        let spec = QuadratureSpec {
            tolerance: 1e-12,
            ..QuadratureSpec::default()
        };
        let r = integrate_domain_g1(&f, &spec).unwrap();
        assert!((r.value - 1.0354e-6).abs() < 1e-4 * 1.0354e-6, "{}", r.value);
        let finer = integrate_domain_g1(&f, &QuadratureSpec { order: 2 * spec.order, ..spec.clone() }).unwrap();
        assert!((finer.value - r.value).abs() <= r.error.max(1e-13 * r.value), "{} {} {}", finer.value, r.value, r.error);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let moved = integrate_domain_g1(&f.precomposed(random_gamma(1, 5, &mut rng)), &spec).unwrap();
            assert!((moved.value - r.value).abs() <= 1e-6 * r.value);
        }
    }
}
