//! Small dense helpers on top of nalgebra used by every other module.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type IMat = DMatrix<i64>;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn to_real(m: &IMat) -> RMat {
    m.map(|x| x as f64)
}

pub fn compose(re: &RMat, im: &RMat) -> CMat {
    re.zip_map(im, Complex64::new)
}

pub fn re_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn im_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

/// Solves `x * a = b` for `x` with partial pivoting.
pub fn solve_right(a: &CMat, b: &CMat) -> Option<CMat> {
    let lu = a.transpose().lu();
    lu.solve(&b.transpose()).map(|x| x.transpose())
}

pub fn det_complex(a: &CMat) -> Complex64 {
    a.clone().lu().determinant()
}

/// Positive-definiteness certified by a Cholesky attempt.
pub fn is_positive_definite(y: &RMat) -> bool {
    y.is_square() && y.clone().cholesky().is_some()
}

pub fn symmetrize_complex(m: &CMat) -> CMat {
    (m + m.transpose()).map(|z| z * 0.5)
}

pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_complex(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Pairwise summation in index order; the result does not depend on how the
/// input was produced, only on its order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

pub fn smallest_eigenvalue(y: &RMat) -> f64 {
    y.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_all(xs: &[i64]) -> i64 {
    xs.iter().fold(0, |acc, &x| gcd(acc, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn solve_right_inverts() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 1.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        );
        let b = CMat::identity(2, 2);
        let x = solve_right(&a, &b).unwrap();
        let r = &x * &a - CMat::identity(2, 2);
        assert!(max_abs_complex(&r) < 1e-14);
    }

    #[test]
    fn gcd_of_rows() {
        assert_eq!(gcd_all(&[6, -4, 10]), 2);
        assert_eq!(gcd_all(&[0, 0, 1]), 1);
        assert_eq!(gcd_all(&[0, 0]), 0);
    }
}
