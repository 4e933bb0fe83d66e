//! Symplectic matrices, points of the Siegel upper half-space and the
//! fractional-linear action between them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    compose, im_part, is_positive_definite, max_abs, max_abs_complex, re_part, solve_right,
    symmetrize_complex, to_complex, to_real, CMat, IMat, RMat,
};

/// Default relative tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The standard symplectic form `J = [[0, I], [-I, 0]]` of size `2g`.
pub fn standard_form(genus: usize) -> RMat {
    let n = 2 * genus;
    let mut j = RMat::zeros(n, n);
    for i in 0..genus {
        j[(i, genus + i)] = 1.0;
        j[(genus + i, i)] = -1.0;
    }
    j
}

/// `true` iff `‖MᵗJM − J‖_∞ ≤ tol`.
pub fn is_symplectic(m: &RMat, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(m)? <= tol)
}

fn symplectic_residual(m: &RMat) -> Result<f64> {
    if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "symplectic check needs an even square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let j = standard_form(m.nrows() / 2);
    Ok(max_abs(&(m.transpose() * &j * m - &j)))
}

/// A real `2g × 2g` matrix `M` with `MᵗJM = J`, stored together with its
/// genus and a flag recording whether every entry is an integer.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    genus: usize,
    entries: RMat,
    integer: bool,
}

impl SymplecticMatrix {
    /// Validates `entries`. The symplectic residual is compared against
    /// `tol · max(1, ‖M‖²)` so that long integer words are not rejected for
    /// roundoff alone.
    pub fn new(entries: RMat, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&entries)?;
        let scale = max_abs(&entries).max(1.0);
        if residual > tol * scale * scale {
            return Err(Error::NotSymplectic { residual });
        }
        let integer = entries.iter().all(|x| (x - x.round()).abs() <= 1e-12);
        Ok(Self {
            genus: entries.nrows() / 2,
            entries,
            integer,
        })
    }

    /// Exact construction from an integer matrix.
    pub fn from_integer(m: &IMat) -> Result<Self> {
        if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected an even square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let g = m.nrows() / 2;
        let j = standard_int_form(g);
        if m.transpose() * &j * m != j {
            let residual = symplectic_residual(&to_real(m))?;
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self {
            genus: g,
            entries: to_real(m),
            integer: true,
        })
    }

    pub fn identity(genus: usize) -> Self {
        Self {
            genus,
            entries: RMat::identity(2 * genus, 2 * genus),
            integer: true,
        }
    }

    pub fn standard_j(genus: usize) -> Self {
        Self {
            genus,
            entries: standard_form(genus),
            integer: true,
        }
    }

    /// `[[I, B], [0, I]]` for symmetric integer `B`.
    pub fn translation(b: &IMat) -> Result<Self> {
        let g = b.nrows();
        let mut m = IMat::identity(2 * g, 2 * g);
        m.view_mut((0, g), (g, g)).copy_from(b);
        Self::from_integer(&m)
    }

    /// `[[I, 0], [C, I]]` for symmetric integer `C`.
    pub fn lower_translation(c: &IMat) -> Result<Self> {
        let g = c.nrows();
        let mut m = IMat::identity(2 * g, 2 * g);
        m.view_mut((g, 0), (g, g)).copy_from(c);
        Self::from_integer(&m)
    }

    /// `[[A, 0], [0, A⁻ᵗ]]` for `A ∈ GL(g, Z)`; the caller supplies `A⁻¹`.
    pub fn gl_embedding(a: &IMat, a_inv: &IMat) -> Result<Self> {
        let g = a.nrows();
        if a * a_inv != IMat::identity(g, g) {
            return Err(Error::Domain("a_inv is not the inverse of a".into()));
        }
        let mut m = IMat::zeros(2 * g, 2 * g);
        m.view_mut((0, 0), (g, g)).copy_from(a);
        m.view_mut((g, g), (g, g)).copy_from(&a_inv.transpose());
        Self::from_integer(&m)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entries(&self) -> &RMat {
        &self.entries
    }

    pub fn is_integer(&self) -> bool {
        self.integer
    }

    pub fn to_integer(&self) -> Option<IMat> {
        self.integer.then(|| self.entries.map(|x| x.round() as i64))
    }

    fn block(&self, r: usize, c: usize) -> RMat {
        let g = self.genus;
        self.entries.view((r * g, c * g), (g, g)).into_owned()
    }

    pub fn a(&self) -> RMat {
        self.block(0, 0)
    }
    pub fn b(&self) -> RMat {
        self.block(0, 1)
    }
    pub fn c(&self) -> RMat {
        self.block(1, 0)
    }
    pub fn d(&self) -> RMat {
        self.block(1, 1)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.genus != other.genus {
            return Err(Error::Dimension(format!(
                "genus {} times genus {}",
                self.genus, other.genus
            )));
        }
        if let (Some(x), Some(y)) = (self.to_integer(), other.to_integer()) {
            return Self::from_integer(&(x * y));
        }
        Ok(Self {
            genus: self.genus,
            entries: &self.entries * &other.entries,
            integer: false,
        })
    }

    /// Symplectic inverse `[[dᵗ, −bᵗ], [−cᵗ, aᵗ]]`, exact for integer input.
    pub fn inverse(&self) -> Self {
        let g = self.genus;
        let mut inv = RMat::zeros(2 * g, 2 * g);
        inv.view_mut((0, 0), (g, g)).copy_from(&self.d().transpose());
        inv.view_mut((0, g), (g, g)).copy_from(&(-self.b().transpose()));
        inv.view_mut((g, 0), (g, g)).copy_from(&(-self.c().transpose()));
        inv.view_mut((g, g), (g, g)).copy_from(&self.a().transpose());
        Self {
            genus: g,
            entries: inv,
            integer: self.integer,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            genus: self.genus,
            entries: -&self.entries,
            integer: self.integer,
        }
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = 2 * self.genus;
        max_abs(&(self.entries.transpose() * &self.entries - RMat::identity(n, n))) <= tol
    }
}

pub(crate) fn standard_int_form(genus: usize) -> IMat {
    let n = 2 * genus;
    let mut j = IMat::zeros(n, n);
    for i in 0..genus {
        j[(i, genus + i)] = 1;
        j[(genus + i, i)] = -1;
    }
    j
}

/// A complex symmetric `g × g` matrix with positive-definite imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    tau: CMat,
}

impl SiegelPoint {
    /// Validates symmetry (to `1e-12 · ‖τ‖`) and positivity of `Im τ`; the
    /// stored matrix is exactly symmetric.
    pub fn new(tau: CMat) -> Result<Self> {
        if !tau.is_square() || tau.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "tau must be square and non-empty, got {}x{}",
                tau.nrows(),
                tau.ncols()
            )));
        }
        let scale = max_abs_complex(&tau).max(f64::MIN_POSITIVE);
        let asym = max_abs_complex(&(&tau - tau.transpose()));
        if asym > 1e-12 * scale {
            return Err(Error::NotSiegel(format!("asymmetry {asym:.3e}")));
        }
        let tau = symmetrize_complex(&tau);
        if !is_positive_definite(&im_part(&tau)) {
            return Err(Error::NotSiegel("imaginary part is not positive definite".into()));
        }
        Ok(Self { tau })
    }

    pub fn from_re_im(re: &RMat, im: &RMat) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Dimension("real and imaginary parts differ in shape".into()));
        }
        Self::new(compose(re, im))
    }

    /// Genus-one point `z` with `Im z > 0`.
    pub fn scalar(z: Complex64) -> Result<Self> {
        Self::new(CMat::from_element(1, 1, z))
    }

    /// `i·t·I_g`.
    pub fn scaled_identity(genus: usize, t: f64) -> Self {
        Self {
            tau: CMat::from_diagonal_element(genus, genus, Complex64::new(0.0, t)),
        }
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn tau(&self) -> &CMat {
        &self.tau
    }

    pub fn re(&self) -> RMat {
        re_part(&self.tau)
    }

    pub fn im(&self) -> RMat {
        im_part(&self.tau)
    }

    pub fn det_im(&self) -> f64 {
        self.im().determinant()
    }

    /// Entry `(0,0)` for genus-one points.
    pub fn z(&self) -> Complex64 {
        self.tau[(0, 0)]
    }
}

/// `τ ↦ (aτ + b)(cτ + d)⁻¹`.
pub fn mobius_act(gamma: &SymplecticMatrix, tau: &SiegelPoint) -> Result<SiegelPoint> {
    if gamma.genus() != tau.genus() {
        return Err(Error::Dimension(format!(
            "matrix of genus {} acting on a point of genus {}",
            gamma.genus(),
            tau.genus()
        )));
    }
    let t = tau.tau();
    let num = to_complex(&gamma.a()) * t + to_complex(&gamma.b());
    let den = to_complex(&gamma.c()) * t + to_complex(&gamma.d());
    let x = solve_right(&den, &num)
        .ok_or_else(|| Error::Degenerate("c·tau + d is singular".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Degenerate("non-finite image".into()));
    }
    SiegelPoint::new(symmetrize_complex(&x))
        .map_err(|e| Error::Degenerate(format!("image failed validation: {e}")))
}

/// `det(cτ + d)`.
pub fn automorphy_factor(gamma: &SymplecticMatrix, tau: &SiegelPoint) -> Complex64 {
    let den = to_complex(&gamma.c()) * tau.tau() + to_complex(&gamma.d());
    den.lu().determinant()
}

/// Corank decomposition `τ = [[τ11, τ2], [τ2ᵗ, τ22]]` with `τ11` of size `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSplit {
    pub r: usize,
    pub tau11: CMat,
    pub tau2: CMat,
    pub tau22: CMat,
}

pub fn block_split(tau: &SiegelPoint, r: usize) -> Result<BlockSplit> {
    let g = tau.genus();
    if r == 0 || r >= g {
        return Err(Error::Index {
            index: r,
            range: format!("1..{g}"),
        });
    }
    let t = tau.tau();
    Ok(BlockSplit {
        r,
        tau11: t.view((0, 0), (r, r)).into_owned(),
        tau2: t.view((0, r), (r, g - r)).into_owned(),
        tau22: t.view((r, r), (g - r, g - r)).into_owned(),
    })
}

pub fn block_join(split: &BlockSplit) -> Result<SiegelPoint> {
    let r = split.tau11.nrows();
    let s = split.tau22.nrows();
    if split.tau11.ncols() != r || split.tau22.ncols() != s || split.tau2.shape() != (r, s) {
        return Err(Error::Dimension("inconsistent block shapes".into()));
    }
    let mut t = CMat::zeros(r + s, r + s);
    t.view_mut((0, 0), (r, r)).copy_from(&split.tau11);
    t.view_mut((0, r), (r, s)).copy_from(&split.tau2);
    t.view_mut((r, 0), (s, r)).copy_from(&split.tau2.transpose());
    t.view_mut((r, r), (s, s)).copy_from(&split.tau22);
    SiegelPoint::new(t)
}

/// Random element of `Sp(2g, Z)` as a word of length at most `max_len` in
/// `J`, elementary symmetric translations (upper and lower) and elementary
/// `GL(g, Z)` embeddings, together with their inverses.
pub fn random_gamma<R: Rng + ?Sized>(genus: usize, max_len: usize, rng: &mut R) -> SymplecticMatrix {
    let len = rng.random_range(0..=max_len);
    let mut word = IMat::identity(2 * genus, 2 * genus);
    for _ in 0..len {
        word *= random_generator(genus, rng);
    }
    SymplecticMatrix::from_integer(&word).expect("generator words are symplectic")
}

fn random_generator<R: Rng + ?Sized>(g: usize, rng: &mut R) -> IMat {
    let n = 2 * g;
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    match rng.random_range(0..4) {
        0 => {
            let j = standard_int_form(g);
            if sign > 0 {
                j
            } else {
                -j
            }
        }
        kind @ (1 | 2) => {
            let (i, k) = (rng.random_range(0..g), rng.random_range(0..g));
            let mut b = IMat::zeros(g, g);
            b[(i, k)] = sign;
            b[(k, i)] = sign;
            let mut m = IMat::identity(n, n);
            let origin = if kind == 1 { (0, g) } else { (g, 0) };
            m.view_mut(origin, (g, g)).copy_from(&b);
            m
        }
        _ => {
            let mut a = IMat::identity(g, g);
            let mut a_inv_t = IMat::identity(g, g);
            if g == 1 {
                a[(0, 0)] = sign;
                a_inv_t[(0, 0)] = sign;
            } else {
                let i = rng.random_range(0..g);
                let k = (i + rng.random_range(1..g)) % g;
                a[(i, k)] = sign;
                a_inv_t[(k, i)] = -sign;
            }
            let mut m = IMat::zeros(n, n);
            m.view_mut((0, 0), (g, g)).copy_from(&a);
            m.view_mut((g, g), (g, g)).copy_from(&a_inv_t);
            m
        }
    }
}

/// Random point with `Im τ = L Lᵗ + δ I`, real part uniform in `[-1, 1]`.
pub fn random_point<R: Rng + ?Sized>(genus: usize, rng: &mut R) -> SiegelPoint {
    let mut l = RMat::zeros(genus, genus);
    for i in 0..genus {
        for k in 0..=i {
            l[(i, k)] = if i == k {
                rng.random_range(0.6..1.6)
            } else {
                rng.random_range(-0.5..0.5)
            };
        }
    }
    let im = &l * l.transpose() + RMat::identity(genus, genus) * 0.05;
    let mut re = RMat::zeros(genus, genus);
    for i in 0..genus {
        for k in i..genus {
            let x = rng.random_range(-1.0..1.0);
            re[(i, k)] = x;
            re[(k, i)] = x;
        }
    }
    SiegelPoint::from_re_im(&re, &im).expect("construction is positive definite")
}

/// Row-major JSON record `{genus, re, im}`; `im` is empty for real matrices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub genus: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

fn row_major(m: &RMat) -> Vec<f64> {
    m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect()
}

impl From<&SiegelPoint> for MatrixRecord {
    fn from(p: &SiegelPoint) -> Self {
        Self {
            genus: p.genus(),
            re: row_major(&p.re()),
            im: row_major(&p.im()),
        }
    }
}

impl TryFrom<MatrixRecord> for SiegelPoint {
    type Error = Error;
    fn try_from(r: MatrixRecord) -> Result<Self> {
        let g = r.genus;
        if r.re.len() != g * g || r.im.len() != g * g {
            return Err(Error::Dimension(format!("record for genus {g} has wrong length")));
        }
        SiegelPoint::from_re_im(
            &RMat::from_row_slice(g, g, &r.re),
            &RMat::from_row_slice(g, g, &r.im),
        )
    }
}

impl From<&SymplecticMatrix> for MatrixRecord {
    fn from(m: &SymplecticMatrix) -> Self {
        Self {
            genus: m.genus(),
            re: row_major(m.entries()),
            im: Vec::new(),
        }
    }
}

impl TryFrom<MatrixRecord> for SymplecticMatrix {
    type Error = Error;
    fn try_from(r: MatrixRecord) -> Result<Self> {
        let n = 2 * r.genus;
        if r.re.len() != n * n || r.im.iter().any(|x| *x != 0.0) {
            return Err(Error::Dimension(format!(
                "record for genus {} has wrong length or a non-zero imaginary part",
                r.genus
            )));
        }
        SymplecticMatrix::new(RMat::from_row_slice(n, n, &r.re), DEFAULT_TOL)
    }
}

impl Serialize for SiegelPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRecord::deserialize(d)?;
        SiegelPoint::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl Serialize for SymplecticMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymplecticMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRecord::deserialize(d)?;
        SymplecticMatrix::try_from(r).map_err(serde::de::Error::custom)
    }
}

/// Convenience for tests and callers that build real matrices inline.
pub fn rmat(rows: usize, cols: usize, data: &[f64]) -> RMat {
    DMatrix::from_row_slice(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&RMat::identity(2, 2), 1e-12).unwrap());
        assert!(is_symplectic(&rmat(2, 2, &[0.0, -1.0, 1.0, 0.0]), 1e-12).unwrap());
        assert!(!is_symplectic(&rmat(2, 2, &[2.0, 0.0, 0.0, 1.0]), 1e-12).unwrap());
        assert!(matches!(
            is_symplectic(&RMat::identity(3, 3), 1e-12),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mobius_examples() {
        let inv = SymplecticMatrix::new(rmat(2, 2, &[0.0, -1.0, 1.0, 0.0]), 1e-12).unwrap();
        let i = SiegelPoint::scalar(c(0.0, 1.0)).unwrap();
        let out = mobius_act(&inv, &i).unwrap();
        assert!((out.z() - c(0.0, 1.0)).norm() < 1e-15);

        let t = SymplecticMatrix::new(rmat(2, 2, &[1.0, 1.0, 0.0, 1.0]), 1e-12).unwrap();
        assert!((mobius_act(&t, &i).unwrap().z() - c(1.0, 1.0)).norm() < 1e-15);

        let two_i = SiegelPoint::scalar(c(0.0, 2.0)).unwrap();
        let out = mobius_act(&inv, &two_i).unwrap();
        assert!((out.z() - c(0.0, 0.5)).norm() < 1e-15);
        let factor = automorphy_factor(&inv, &two_i).norm_sqr();
        assert!((out.det_im() - two_i.det_im() / factor).abs() < 1e-15);
    }

    #[test]
    fn minus_identity_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in 1..=3 {
            let tau = random_point(g, &mut rng);
            let out = mobius_act(&SymplecticMatrix::identity(g).neg(), &tau).unwrap();
            assert!(max_abs_complex(&(out.tau() - tau.tau())) < 1e-14);
        }
    }

    #[test]
    fn block_examples() {
        let tau = SiegelPoint::scaled_identity(2, 1.0);
        let s = block_split(&tau, 1).unwrap();
        assert_eq!(s.tau11[(0, 0)], c(0.0, 1.0));
        assert_eq!(s.tau2[(0, 0)], c(0.0, 0.0));
        assert_eq!(s.tau22[(0, 0)], c(0.0, 1.0));
        assert_eq!(block_join(&s).unwrap(), tau);
        assert!(matches!(block_split(&tau, 2), Err(Error::Index { .. })));
        assert!(matches!(block_split(&tau, 0), Err(Error::Index { .. })));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_point(3, &mut rng);
        assert_eq!(block_join(&block_split(&p, 1).unwrap()).unwrap(), p);
        assert_eq!(block_join(&block_split(&p, 2).unwrap()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_points() {
        let bad = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert!(matches!(SiegelPoint::new(bad), Err(Error::NotSiegel(_))));
        assert!(SiegelPoint::scalar(c(0.3, -1.0)).is_err());
    }

    #[test]
    fn generator_words_are_integral_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in 1..=3 {
            for _ in 0..50 {
                let m = random_gamma(g, 8, &mut rng);
                assert!(m.is_integer());
                let prod = m.mul(&m.inverse()).unwrap();
                assert_eq!(prod, SymplecticMatrix::identity(g));
            }
        }
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_point(3, &mut rng);
        let text = serde_json::to_string(&p).unwrap();
        let back: SiegelPoint = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let m = random_gamma(2, 6, &mut rng);
        let back: SymplecticMatrix =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
