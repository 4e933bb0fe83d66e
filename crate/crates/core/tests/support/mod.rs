//! Independent reference computations used by the integration and
//! acceptance tests. Nothing here calls the library's numerics.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Real = DMatrix<f64>;
pub type Complex = DMatrix<Complex64>;

/// `(Aτ + B)(Cτ + D)⁻¹` from the raw block entries of `γ`.
pub fn mobius(gamma: &Real, tau: &Complex) -> Complex {
    let g = tau.nrows();
    let block = |r: usize, c: usize| gamma.view((r, c), (g, g)).map(|x| Complex64::new(x, 0.0));
    let num = block(0, 0) * tau + block(0, g);
    let den = block(g, 0) * tau + block(g, g);
    num * den.try_inverse().expect("Cτ + D is invertible on the Siegel space")
}

pub fn im(tau: &Complex) -> Real {
    tau.map(|z| z.im)
}

/// `det Im γτ / det Im (γτ)₂₂` by direct evaluation.
pub fn det_ratio(gamma: &Real, tau: &Complex) -> f64 {
    let y = im(&mobius(gamma, tau));
    let g = y.nrows();
    if g == 1 {
        return y[(0, 0)];
    }
    y.determinant() / y.view((1, 1), (g - 1, g - 1)).into_owned().determinant()
}

/// Forward-mode dual number.
#[derive(Clone, Copy, Debug)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }
    pub fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

/// `Y = U·diag(v)·Uᵗ` over dual numbers, `U` unit upper triangular with
/// the strictly upper entries `u` listed row by row.
fn im_from_v_u(v: &[Dual], u: &[Dual]) -> Vec<Vec<Dual>> {
    let g = v.len();
    let mut umat = vec![vec![Dual::constant(0.0); g]; g];
    let mut k = 0;
    for (i, row) in umat.iter_mut().enumerate() {
        row[i] = Dual::constant(1.0);
        for entry in row.iter_mut().skip(i + 1) {
            *entry = u[k];
            k += 1;
        }
    }
    let mut y = vec![vec![Dual::constant(0.0); g]; g];
    for i in 0..g {
        for j in 0..g {
            let mut acc = Dual::constant(0.0);
            for l in 0..g {
                acc = acc.add(umat[i][l].mul(v[l]).mul(umat[j][l]));
            }
            y[i][j] = acc;
        }
    }
    y
}

/// `|det ∂(Y_{ij}, i ≤ j)/∂(v, u)|` by forward differentiation.
pub fn im_jacobian(v: &[f64], u: &[f64]) -> f64 {
    let g = v.len();
    let n = g * (g + 1) / 2;
    let mut jac = Real::zeros(n, n);
    for col in 0..n {
        let dv: Vec<Dual> = (0..g)
            .map(|i| if i == col { Dual::variable(v[i]) } else { Dual::constant(v[i]) })
            .collect();
        let du: Vec<Dual> = (0..u.len())
            .map(|i| if g + i == col { Dual::variable(u[i]) } else { Dual::constant(u[i]) })
            .collect();
        let y = im_from_v_u(&dv, &du);
        let mut row = 0;
        for i in 0..g {
            for j in i..g {
                jac[(row, col)] = y[i][j].eps;
                row += 1;
            }
        }
    }
    jac.determinant().abs()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// A term `coefficient / (s − location)^order`.
#[derive(Clone, Copy, Debug)]
pub struct RationalTerm {
    pub location: f64,
    pub order: u32,
    pub coefficient: f64,
}

/// `k`-th derivative of `Σ C/(s − a)^n` at complex `s`.
fn rational_derivative(terms: &[RationalTerm], s: Complex64, k: u32) -> Complex64 {
    terms
        .iter()
        .map(|t| {
            let rising: f64 = (0..k).map(|j| f64::from(t.order + j)).product();
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * rising * t.coefficient / (s - t.location).powi((t.order + k) as i32)
        })
        .sum()
}

/// `(1/2πi) ∫_{(c)} F(s) y^{−s} ds` on the line `c = max(location) + 1`:
/// Gauss–Legendre panels on `|t| ≤ cutoff` and an integration-by-parts
/// asymptotic series for the two tails. Needs `y ≠ 1`.
pub fn mellin_contour(terms: &[RationalTerm], y: f64) -> f64 {
    assert!(y > 0.0 && y != 1.0);
    let c = terms.iter().map(|t| t.location).fold(f64::NEG_INFINITY, f64::max).max(0.0) + 1.0;
    let omega = y.ln();
    let scale = y.powf(-c);
    let integrand = |t: f64| {
        let s = Complex64::new(c, t);
        rational_derivative(terms, s, 0) * scale * Complex64::new(0.0, -omega * t).exp()
    };
    let cutoff = 400.0;
    let panels = 1600;
    let (xs, ws) = gauss_legendre(20);
    let width = 2.0 * cutoff / panels as f64;
    let mut body = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = -cutoff + (p as f64 + 0.5) * width;
        for (x, w) in xs.iter().zip(&ws) {
            body += integrand(mid + 0.5 * width * x) * (0.5 * width * w);
        }
    }
    // ∫_T^∞ G e^{−iωt} dt = Σ_k G^{(k)}(T) e^{−iωT}/(iω)^{k+1}, and the
    // mirror image on (−∞, −T].
    let i_omega = Complex64::new(0.0, omega);
    let mut tails = Complex64::new(0.0, 0.0);
    for k in 0..30u32 {
        let ik = Complex64::new(0.0, 1.0).powu(k);
        let upper = ik * rational_derivative(terms, Complex64::new(c, cutoff), k) * scale;
        let lower = ik * rational_derivative(terms, Complex64::new(c, -cutoff), k) * scale;
        let denom = i_omega.powu(k + 1);
        tails += upper * Complex64::new(0.0, -omega * cutoff).exp() / denom;
        tails -= lower * Complex64::new(0.0, omega * cutoff).exp() / denom;
    }
    ((body + tails) / (2.0 * PI)).re
}

/// Primitive `(c, d)` with `c² + d² ≤ bound`, first nonzero entry positive.
pub fn primitive_pairs(bound: i64) -> Vec<(i64, i64)> {
    let r = (bound as f64).sqrt() as i64 + 1;
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    };
    let mut out = Vec::new();
    for c in -r..=r {
        for d in -r..=r {
            let positive = c > 0 || (c == 0 && d > 0);
            if positive && c * c + d * d <= bound && gcd(c, d) == 1 {
                out.push((c, d));
            }
        }
    }
    out
}
