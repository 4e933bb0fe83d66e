//! Fincke–Pohst enumeration of integer vectors in an ellipsoid
//! `(x − c)ᵗ G (x − c) ≤ bound`.

use crate::error::{Error, Result};
use crate::linalg::RMat;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub x: Vec<i64>,
    /// `(x − c)ᵗ G (x − c)` evaluated directly from `G`.
    pub norm: f64,
}

/// All `x ∈ Zⁿ` with `(x − c)ᵗ G (x − c) ≤ bound`, in depth-first order
/// (last coordinate outermost). Deterministic for a given input.
pub fn enumerate(gram: &RMat, center: &[f64], bound: f64) -> Result<Vec<LatticePoint>> {
    let n = gram.nrows();
    if !gram.is_square() || center.len() != n {
        return Err(Error::Dimension(format!(
            "Gram matrix {}x{} with center of length {}",
            gram.nrows(),
            gram.ncols(),
            center.len()
        )));
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("Gram matrix is not positive definite".into()))?;
    let r = chol.l().transpose();
    let diag: Vec<f64> = (0..n).map(|i| r[(i, i)] * r[(i, i)]).collect();
    let mut coef = RMat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            coef[(i, j)] = r[(i, j)] / r[(i, i)];
        }
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let slack = bound.abs() * 1e-12 + 1e-300;
    let mut search = Search {
        gram,
        center,
        diag: &diag,
        coef: &coef,
        bound,
        slack,
        out: &mut out,
    };
    if n > 0 {
        search.descend(n - 1, bound + slack, &mut x);
    }
    Ok(out)
}

struct Search<'a> {
    gram: &'a RMat,
    center: &'a [f64],
    diag: &'a [f64],
    coef: &'a RMat,
    bound: f64,
    slack: f64,
    out: &'a mut Vec<LatticePoint>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, budget: f64, x: &mut [i64]) {
        let n = x.len();
        let shift: f64 = (i + 1..n)
            .map(|j| self.coef[(i, j)] * (x[j] as f64 - self.center[j]))
            .sum();
        let mid = self.center[i] - shift;
        let half = (budget.max(0.0) / self.diag[i]).sqrt();
        let lo = (mid - half).ceil() as i64;
        let hi = (mid + half).floor() as i64;
        for k in lo..=hi {
            let t = k as f64 - mid;
            let rest = budget - self.diag[i] * t * t;
            if rest < -self.slack {
                continue;
            }
            x[i] = k;
            if i == 0 {
                let norm = self.direct_norm(x);
                if norm <= self.bound + self.slack {
                    self.out.push(LatticePoint { x: x.to_vec(), norm });
                }
            } else {
                self.descend(i - 1, rest, x);
            }
        }
        x[i] = 0;
    }

    fn direct_norm(&self, x: &[i64]) -> f64 {
        let n = x.len();
        let y: Vec<f64> = (0..n).map(|i| x[i] as f64 - self.center[i]).collect();
        let mut s = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.gram[(i, j)] * y[j];
            }
            s += y[i] * row;
        }
        s
    }
}
