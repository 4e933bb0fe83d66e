//! Inverse Mellin transform of rational functions by residues.

use serde::{Deserialize, Serialize};

/// The term `coefficient / (s − location)^order`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub location: f64,
    pub order: u32,
    pub coefficient: f64,
}

impl Pole {
    pub fn new(location: f64, order: u32, coefficient: f64) -> Self {
        Self {
            location,
            order,
            coefficient,
        }
    }
}

/// `(1/2πi) ∫_{(c)} F(s) y^{−s} ds` for `F(s) = Σ Cᵢ/(s − aᵢ)^{nᵢ}` and `c`
/// to the right of every pole.
///
/// For `y < 1` the contour closes to the left and a pole of order `n` at `a`
/// contributes `C·(−ln y)^{n−1}·y^{−a}/(n−1)!`. For `y > 1` it closes to the
/// right and the result is `0`. At `y = 1` only simple poles survive, each
/// with half its residue (the symmetric principal value).
pub fn mellin_invert_rational(poles: &[Pole], y: f64) -> f64 {
    assert!(y > 0.0, "Mellin inversion needs y > 0");
    if y > 1.0 {
        return 0.0;
    }
    let log = -y.ln();
    poles
        .iter()
        .filter(|p| p.order > 0)
        .map(|p| {
            if y == 1.0 {
                return if p.order == 1 { 0.5 * p.coefficient } else { 0.0 };
            }
            let n = p.order as i32 - 1;
            let factorial: f64 = (1..=n).map(f64::from).product();
            p.coefficient * log.powi(n) * y.powf(-p.location) / factorial
        })
        .sum()
}
