//! Gamma, Riemann zeta, the completed zeta `ζ*(s) = π^{−s/2}Γ(s/2)ζ(s)`,
//! the Siegel volume `2∏ζ*(2k)` and zeros on the critical line.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Number of Bernoulli corrections in the Euler–Maclaurin tail.
const EM_TERMS: usize = 10;
/// Minimum number of directly summed terms.
const EM_MIN_N: usize = 20;

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let sum = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0));
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let sum = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0));
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

pub fn gamma_complex(s: Complex64) -> Complex64 {
    if s.re < 0.5 {
        return PI / ((PI * s).sin() * gamma_complex(1.0 - s));
    }
    let z = s - 1.0;
    let sum = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(Complex64::new(LANCZOS[0], 0.0), |acc, (i, c)| {
            acc + c / (z + i as f64 + 1.0)
        });
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * (t.ln() * (z + 0.5) - t).exp() * sum
}

/// Even-index Bernoulli numbers `B₀, B₂, …, B_{2·EM_TERMS+2}`.
fn bernoulli_even() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 2 * EM_TERMS + 2;
        let mut b = vec![0.0_f64; n + 1];
        b[0] = 1.0;
        for m in 1..=n {
            // Σ_{j=0}^{m} C(m+1, j) B_j = 0.
            let mut binom = 1.0;
            let mut acc = 0.0;
            for (j, bj) in b.iter().enumerate().take(m) {
                acc += binom * bj;
                binom *= (m + 1 - j) as f64 / (j + 1) as f64;
            }
            b[m] = -acc / (m + 1) as f64;
        }
        b.into_iter().step_by(2).collect()
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Riemann zeta by Euler–Maclaurin summation.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("1".into()));
    }
    let n = EM_MIN_N.max(s.norm().ceil() as usize);
    let nf = n as f64;
    let mut head = Complex64::new(0.0, 0.0);
    for k in 1..n {
        head += (-s * (k as f64).ln()).exp();
    }
    let n_pow = (-s * nf.ln()).exp();
    let mut total = head + n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    let bern = bernoulli_even();
    // rising = s(s+1)…(s+2k−2), power = N^{−s−2k+1}
    let mut rising = s;
    let mut power = n_pow / nf;
    for k in 1..=EM_TERMS {
        total += bern[k] / factorial(2 * k) * rising * power;
        rising *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        power /= nf * nf;
    }
    Ok(total)
}

pub fn zeta_real(s: f64) -> Result<f64> {
    Ok(zeta(Complex64::new(s, 0.0))?.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaMethod {
    EulerMaclaurin,
    KnownEven,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletedZetaValue {
    pub s: Complex64,
    pub value: Complex64,
    pub method: ZetaMethod,
}

/// `ζ(2k) = (−1)^{k+1} B_{2k} (2π)^{2k} / (2·(2k)!)`.
fn zeta_even(k: usize) -> f64 {
    let b = bernoulli_even()[k];
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * b * (2.0 * PI).powi(2 * k as i32) / (2.0 * factorial(2 * k))
}

pub fn zeta_star(s: Complex64) -> Result<CompletedZetaValue> {
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole(format!("{}", s.re)));
    }
    let k = (s.re / 2.0).round();
    if s.im == 0.0 && s.re == 2.0 * k && k >= 1.0 && (k as usize) < bernoulli_even().len() {
        let k = k as usize;
        let value = PI.powi(-(k as i32)) * factorial(k - 1) * zeta_even(k);
        return Ok(CompletedZetaValue {
            s,
            value: Complex64::new(value, 0.0),
            method: ZetaMethod::KnownEven,
        });
    }
    let value = (-s / 2.0 * PI.ln()).exp() * gamma_complex(s / 2.0) * zeta(s)?;
    Ok(CompletedZetaValue {
        s,
        value,
        method: ZetaMethod::EulerMaclaurin,
    })
}

/// `Vol(D_g) = 2∏_{k=1}^{g} ζ*(2k)`, with `Vol(D₀) = 2`.
pub fn siegel_volume(genus: usize) -> f64 {
    (1..=genus).fold(2.0, |acc, k| {
        acc * zeta_star(Complex64::new(2.0 * k as f64, 0.0))
            .expect("even integers are regular")
            .value
            .re
    })
}

/// Hardy's `Z(t)`: real, with `|Z(t)| = |ζ(½ + it)|` and zeros at the
/// nontrivial zeros on the critical line.
pub fn hardy_z(t: f64) -> f64 {
    let s = Complex64::new(0.5, t);
    let factor = (-s / 2.0 * PI.ln()).exp() * gamma_complex(s / 2.0);
    let zs = factor * zeta(s).expect("critical line avoids the pole");
    zs.re / factor.norm()
}

pub const MAX_ZERO_INDEX: usize = 10;
const ZERO_SCAN_START: f64 = 10.0;
const ZERO_SCAN_STEP: f64 = 0.05;

fn zero_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut zeros = Vec::with_capacity(MAX_ZERO_INDEX);
        let mut t = ZERO_SCAN_START;
        let mut z = hardy_z(t);
        while zeros.len() < MAX_ZERO_INDEX {
            let t_next = t + ZERO_SCAN_STEP;
            let z_next = hardy_z(t_next);
            if z.signum() != z_next.signum() {
                zeros.push(bisect(hardy_z, t, t_next, z));
            }
            t = t_next;
            z = z_next;
        }
        zeros
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Imaginary part of the `k`-th nontrivial zero, `1 ≤ k ≤ 10`.
pub fn zeta_zero(k: usize) -> Result<f64> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::Index {
            index: k,
            range: format!("1..={MAX_ZERO_INDEX}"),
        });
    }
    Ok(zero_table()[k - 1])
}
