//! Ramanujan's `τ(n)` from `Δ = q·(η³/q^{1/8})⁸`, with Jacobi's identity
//! `η³/q^{1/8} = Σ_{k≥0} (−1)^k (2k+1) q^{k(k+1)/2}`. The eighth power is
//! three NTT squarings modulo five primes, recombined by Garner's algorithm.

use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest supported `n`; the series in the experiments refuses more terms.
pub const TAU_TABLE_LIMIT: usize = 1 << 22;

/// `(p, primitive root)`, each `p − 1` divisible by `2^23`.
const PRIMES: [(u64, u64); 5] = [
    (998_244_353, 3),
    (167_772_161, 3),
    (469_762_049, 3),
    (754_974_721, 11),
    (2_013_265_921, 31),
];

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn ntt(a: &mut [u64], invert: bool, p: u64, root: u64) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(root, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        for chunk in a.chunks_mut(len) {
            let mut wn = 1;
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let u = *x;
                let v = *y * wn % p;
                *x = if u + v >= p { u + v - p } else { u + v };
                *y = if u >= v { u - v } else { u + p - v };
                wn = wn * w % p;
            }
        }
        len <<= 1;
    }
    if invert {
        let inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * inv % p;
        }
    }
}

/// `a²` truncated to `a.len()` coefficients, modulo `p`.
fn square_truncated(a: &[u64], p: u64, root: u64) -> Vec<u64> {
    let len = a.len();
    let size = (2 * len).next_power_of_two();
    let mut f = a.to_vec();
    f.resize(size, 0);
    ntt(&mut f, false, p, root);
    for x in f.iter_mut() {
        *x = *x * *x % p;
    }
    ntt(&mut f, true, p, root);
    f.truncate(len);
    f
}

/// Signed integer with the given residues, as `f64`.
fn garner(residues: &[u64]) -> f64 {
    let k = residues.len();
    let mut digits = vec![0u64; k];
    for i in 0..k {
        let p = PRIMES[i].0;
        let mut t = residues[i] % p;
        for j in 0..i {
            let inv = pow_mod(PRIMES[j].0 % p, p - 2, p);
            t = (t + p - digits[j] % p) % p * inv % p;
        }
        digits[i] = t;
    }
    let top = PRIMES[k - 1].0;
    let negative = digits[k - 1] > top / 2;
    // Horner from the top digit: x = d₀ + p₀(d₁ + p₁(d₂ + …)).
    let mut value = 0.0;
    for i in (0..k).rev() {
        let d = if negative { PRIMES[i].0 - 1 - digits[i] } else { digits[i] };
        value = if i + 1 < k { value * PRIMES[i].0 as f64 } else { value };
        value += d as f64;
    }
    if negative {
        -(value + 1.0)
    } else {
        value
    }
}

fn compute(len: usize) -> Vec<f64> {
    let jacobi = |p: u64| {
        let mut a = vec![0u64; len];
        let mut k = 0u64;
        loop {
            let e = (k * (k + 1) / 2) as usize;
            if e >= len {
                break;
            }
            let c = (2 * k + 1) % p;
            a[e] = if k.is_multiple_of(2) { c } else { (p - c) % p };
            k += 1;
        }
        a
    };
    let residues: Vec<Vec<u64>> = PRIMES
        .par_iter()
        .map(|&(p, root)| {
            let mut a = jacobi(p);
            for _ in 0..3 {
                a = square_truncated(&a, p, root);
            }
            a
        })
        .collect();
    let mut table = vec![0.0; len + 1];
    let values: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|m| garner(&residues.iter().map(|r| r[m]).collect::<Vec<_>>()))
        .collect();
    table[1..].copy_from_slice(&values);
    table
}

fn cache() -> &'static Mutex<Arc<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<Arc<Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Arc::new(vec![0.0])))
}

/// `τ(0..=n)` with `τ(0) = 0`, shared and grown in powers of two.
pub fn tau_table(n: usize) -> Result<Arc<Vec<f64>>> {
    if n > TAU_TABLE_LIMIT {
        return Err(Error::Scale {
            terms: n as u64,
            limit: TAU_TABLE_LIMIT as u64,
        });
    }
    let mut guard = cache().lock().expect("tau cache poisoned");
    if guard.len() <= n {
        let len = (n.max(1024)).next_power_of_two();
        *guard = Arc::new(compute(len));
    }
    Ok(Arc::clone(&guard))
}

pub fn ramanujan_tau(n: usize) -> Result<f64> {
    Ok(tau_table(n)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `q∏(1 − qⁿ)²⁴` by repeated polynomial multiplication in i128.
    fn convolution_oracle(len: usize) -> Vec<i128> {
        let mut poly = vec![0i128; len];
        poly[0] = 1;
        for n in 1..len {
            for _ in 0..24 {
                for k in (n..len).rev() {
                    poly[k] -= poly[k - n];
                }
            }
        }
        let mut out = vec![0i128; len + 1];
        out[1..].copy_from_slice(&poly);
        out
    }

    #[test]
    fn leading_coefficients() {
        let t = tau_table(10).unwrap();
        assert_eq!(&t[1..=5], &[1.0, -24.0, 252.0, -1472.0, 4830.0]);
    }

    #[test]
    fn matches_product_expansion() {
        let oracle = convolution_oracle(120);
        let t = tau_table(120).unwrap();
        for n in 1..=120 {
            assert_eq!(t[n], oracle[n] as f64, "n = {n}");
        }
    }

    #[test]
    fn hecke_relations_at_large_arguments() {
        let t = tau_table(1 << 17).unwrap();
        for p in [2usize, 3, 101, 211, 307] {
            let lhs = t[p * p];
            let rhs = t[p] * t[p] - (p as f64).powi(11);
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs().max(1.0), "p = {p}");
        }
        for (m, n) in [(13usize, 10007usize), (101, 1231), (64, 1999)] {
            let lhs = t[m * n];
            let rhs = t[m] * t[n];
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs(), "{m}·{n}");
        }
    }

    #[test]
    fn ntt_square_matches_naive() {
        let a: Vec<u64> = (0..50).map(|i| (i * i + 3) % 97).collect();
        for &(p, root) in &PRIMES {
            let fast = square_truncated(&a, p, root);
            for k in 0..a.len() {
                let naive = (0..=k).map(|i| a[i] * a[k - i] % p).fold(0, |s, x| (s + x) % p);
                assert_eq!(fast[k], naive);
            }
        }
    }

    #[test]
    fn refuses_oversized_tables() {
        assert!(matches!(tau_table(TAU_TABLE_LIMIT + 1), Err(Error::Scale { .. })));
    }
}
