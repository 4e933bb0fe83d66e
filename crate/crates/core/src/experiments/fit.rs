//! Least-squares fits for decay envelopes and damped oscillations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn slope_half_width(&self) -> f64 {
        Z95 * self.slope_stderr
    }
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::Dimension(format!("regression needs matching series of length >= 2, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("regression abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if n > 2 { (rss / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        points: n,
    })
}

/// Indices `i` where `values[i]` is the maximum over all samples with
/// `|xs[j] − xs[i]| ≤ half_width`, skipping samples whose window is cut off
/// by either end of the grid. `xs` must be monotone.
pub fn local_maxima(xs: &[f64], values: &[f64], half_width: f64) -> Vec<usize> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let (lo, hi) = (xs[0].min(xs[n - 1]), xs[0].max(xs[n - 1]));
    (0..n)
        .filter(|&i| {
            let x = xs[i];
            if x - half_width < lo || x + half_width > hi {
                return false;
            }
            (0..n)
                .filter(|&j| (xs[j] - x).abs() <= half_width)
                .all(|j| values[j] <= values[i])
        })
        .collect()
}

/// Slope of `ln|e|` against `ln y` through the local maxima of `|e|`.
pub fn envelope_fit(ys: &[f64], errors: &[f64], half_width: f64) -> Result<(LinearFit, Vec<usize>)> {
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mags: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let peaks: Vec<usize> = local_maxima(&logs, &mags, half_width)
        .into_iter()
        .filter(|&i| mags[i] > 0.0)
        .collect();
    if peaks.len() < 2 {
        return Err(Error::Degenerate(format!("only {} envelope maxima found", peaks.len())));
    }
    let px: Vec<f64> = peaks.iter().map(|&i| logs[i]).collect();
    let py: Vec<f64> = peaks.iter().map(|&i| mags[i].ln()).collect();
    Ok((linear_regression(&px, &py)?, peaks))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub frequency_stderr: f64,
    /// Fraction of `Σ (e/y^p)²` explained by the model.
    pub r_squared: f64,
    pub converged: bool,
}

impl OscillationFit {
    /// `a·y^p·cos(ω ln y + φ)`.
    pub fn model(&self, y: f64, power: f64) -> f64 {
        self.amplitude * y.powf(power) * (self.frequency * y.ln() + self.phase).cos()
    }
}

/// Linear least squares for `(A, B)` in `A cos(ωx) + B sin(ωx)`.
fn best_phase(xs: &[f64], zs: &[f64], omega: f64) -> (f64, f64, f64) {
    let (mut cc, mut cs, mut ss, mut zc, mut zsn) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &z) in xs.iter().zip(zs) {
        let (s, c) = (omega * x).sin_cos();
        cc += c * c;
        cs += c * s;
        ss += s * s;
        zc += z * c;
        zsn += z * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-300 {
        return (0.0, 0.0, zs.iter().map(|z| z * z).sum());
    }
    let a = (zc * ss - zsn * cs) / det;
    let b = (zsn * cc - zc * cs) / det;
    let rss = xs
        .iter()
        .zip(zs)
        .map(|(&x, &z)| {
            let (s, c) = (omega * x).sin_cos();
            (z - a * c - b * s).powi(2)
        })
        .sum();
    (a, b, rss)
}

/// Fits `e(y) ≈ a·y^p·cos(ω ln y + φ)` by a scan of `ω` over
/// `[omega_min, omega_max]` followed by golden-section refinement. The fit
/// counts as converged when the optimum is interior and explains at least
/// half of the normalized signal.
pub fn oscillation_fit(ys: &[f64], errors: &[f64], power: f64, omega_min: f64, omega_max: f64) -> Result<OscillationFit> {
    let n = ys.len();
    if n < 5 || errors.len() != n || !(omega_max > omega_min && omega_min > 0.0) {
        return Err(Error::Domain("oscillation fit needs >= 5 points and 0 < omega_min < omega_max".into()));
    }
    let xs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let zs: Vec<f64> = ys.iter().zip(errors).map(|(y, e)| e / y.powf(power)).collect();
    let total: f64 = zs.iter().map(|z| z * z).sum();
    let rss = |w: f64| best_phase(&xs, &zs, w).2;

    let steps = 2000;
    let h = (omega_max - omega_min) / steps as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..=steps {
        let r = rss(omega_min + k as f64 * h);
        if r < best.1 {
            best = (k, r);
        }
    }
    let interior = best.0 > 0 && best.0 < steps;
    let centre = omega_min + best.0 as f64 * h;
    let (mut a, mut b) = ((centre - h).max(omega_min), (centre + h).min(omega_max));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if rss(c) < rss(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    let (ca, cb, r) = best_phase(&xs, &zs, omega);
    let r_squared = if total > 0.0 { 1.0 - r / total } else { 0.0 };

    // Curvature of the residual sum gives the variance of ω.
    let dw = 1e-4 * omega.max(1.0);
    let curvature = (rss(omega + dw) - 2.0 * r + rss(omega - dw)) / (dw * dw);
    let sigma2 = r / (n as f64 - 3.0);
    let frequency_stderr = if curvature > 0.0 { (2.0 * sigma2 / curvature).sqrt() } else { f64::INFINITY };

    Ok(OscillationFit {
        amplitude: ca.hypot(cb),
        frequency: omega,
        phase: (-cb).atan2(ca),
        frequency_stderr,
        r_squared,
        converged: interior && r_squared >= 0.5 && frequency_stderr.is_finite(),
    })
}

pub fn ci_half_width(stderr: f64) -> f64 {
    Z95 * stderr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.75 * x).collect();
        let fit = linear_regression(&xs, &ys).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-14 && (fit.intercept - 2.0).abs() < 1e-13);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn oscillation_and_envelope() {
        let ys: Vec<f64> = (0..241).map(|k| 10f64.powf(-1.0 - 3.0 * k as f64 / 240.0)).collect();
        let es: Vec<f64> = ys.iter().map(|y| 3.0 * y.powf(0.75) * (7.0 * y.ln() + 0.4).cos()).collect();
        let fit = oscillation_fit(&ys, &es, 0.75, 2.0, 15.0).unwrap();
        assert!(fit.converged);
        assert!((fit.frequency - 7.0).abs() < 1e-8 && (fit.amplitude - 3.0).abs() < 1e-8);
        assert!((fit.phase - 0.4).abs() < 1e-8);
        let (env, peaks) = envelope_fit(&ys, &es, 0.25).unwrap();
        assert!(peaks.len() >= 8);
        assert!((env.slope - 0.75).abs() < 0.02, "{env:?}");
    }

    #[test]
    fn maxima_skip_truncated_windows() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let v = [5.0, 1.0, 3.0, 1.0, 9.0];
        assert_eq!(local_maxima(&xs, &v, 1.0), vec![2]);
    }
}
