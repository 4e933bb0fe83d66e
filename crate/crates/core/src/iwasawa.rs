//! Iwasawa coordinates `τ = W + i·U·V²·Uᵗ` on the Siegel upper half-space.
//!
//! `V² = diag(v₁, …, v_g)` with `vᵢ > 0`, `U` is upper unitriangular (only its
//! strictly upper part `u` is stored) and `W` is real symmetric. In these
//! coordinates `det Im τ = ∏ vᵢ`, the Jacobian of `(v, u) ↦ Im τ` is
//! `∏ vᵢ^{i−1}`, and the invariant measure has density `∏ vᵢ^{i−g−2}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compose, max_abs, CMat, RMat};
use crate::symplectic::{mobius_act, SiegelPoint, SymplecticMatrix, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaCoords {
    v: Vec<f64>,
    u: RMat,
    w: RMat,
}

impl IwasawaCoords {
    pub fn new(v: Vec<f64>, u: RMat, w: RMat) -> Result<Self> {
        let g = v.len();
        if g == 0 || u.shape() != (g, g) || w.shape() != (g, g) {
            return Err(Error::Dimension(format!("coordinates of genus {g} need {g}x{g} u and w")));
        }
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("v entries must be positive, got {bad}")));
        }
        for i in 0..g {
            for j in 0..=i {
                if u[(i, j)] != 0.0 {
                    return Err(Error::Domain("u must be strictly upper triangular".into()));
                }
            }
        }
        if w != w.transpose() {
            return Err(Error::Domain("w must be symmetric".into()));
        }
        Ok(Self { v, u, w })
    }

    /// `v = 1…1`, `u = 0`, `w = 0`, i.e. `τ = i·I`.
    pub fn identity(genus: usize) -> Self {
        Self {
            v: vec![1.0; genus],
            u: RMat::zeros(genus, genus),
            w: RMat::zeros(genus, genus),
        }
    }

    pub fn genus(&self) -> usize {
        self.v.len()
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn u(&self) -> &RMat {
        &self.u
    }
    pub fn w(&self) -> &RMat {
        &self.w
    }

    /// The unitriangular matrix `U = I + u`.
    pub fn unitriangular(&self) -> RMat {
        let g = self.genus();
        RMat::identity(g, g) + &self.u
    }

    pub fn det_im(&self) -> f64 {
        self.v.iter().product()
    }

    /// Number of real coordinates, `g(g+1)`.
    pub fn dimension(genus: usize) -> usize {
        genus * (genus + 1)
    }

    /// Flat vector in the fixed order `(v₁…v_g, w₁₁, w₁₂…, w_gg, u₁₂…)`,
    /// with `w` and `u` enumerated row by row.
    pub fn to_flat(&self) -> Vec<f64> {
        let g = self.genus();
        let mut out = self.v.clone();
        for i in 0..g {
            for j in i..g {
                out.push(self.w[(i, j)]);
            }
        }
        for i in 0..g {
            for j in i + 1..g {
                out.push(self.u[(i, j)]);
            }
        }
        out
    }

    pub fn from_flat(genus: usize, x: &[f64]) -> Result<Self> {
        let g = genus;
        if x.len() != Self::dimension(g) {
            return Err(Error::Dimension(format!(
                "flat coordinates of genus {g} need {} entries, got {}",
                Self::dimension(g),
                x.len()
            )));
        }
        let v = x[..g].to_vec();
        let mut k = g;
        let mut w = RMat::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                w[(i, j)] = x[k];
                w[(j, i)] = x[k];
                k += 1;
            }
        }
        let mut u = RMat::zeros(g, g);
        for i in 0..g {
            for j in i + 1..g {
                u[(i, j)] = x[k];
                k += 1;
            }
        }
        Self::new(v, u, w)
    }

    /// Random coordinates with `v ∈ [0.2, 3]` and `u, w ∈ [−1, 1]`.
    pub fn random<R: Rng + ?Sized>(genus: usize, rng: &mut R) -> Self {
        let g = genus;
        let v = (0..g).map(|_| rng.random_range(0.2..3.0)).collect();
        let mut u = RMat::zeros(g, g);
        let mut w = RMat::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let x = rng.random_range(-1.0..1.0);
                w[(i, j)] = x;
                w[(j, i)] = x;
                if j > i {
                    u[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
        }
        Self { v, u, w }
    }
}

/// `τ = W + i·U·V²·Uᵗ`.
pub fn from_coords(c: &IwasawaCoords) -> SiegelPoint {
    let u = c.unitriangular();
    let g = c.genus();
    let mut im = RMat::zeros(g, g);
    for i in 0..g {
        for j in i..g {
            let s: f64 = (j..g).map(|k| u[(i, k)] * c.v[k] * u[(j, k)]).sum();
            im[(i, j)] = s;
            im[(j, i)] = s;
        }
    }
    SiegelPoint::from_re_im(&c.w, &im).expect("U V² Uᵗ is positive definite for v > 0")
}

/// Factorizes `Im τ = U·V²·Uᵗ`, last pivot first.
pub fn to_coords(tau: &SiegelPoint) -> Result<IwasawaCoords> {
    let (v, u) = udu_factor(&tau.im())?;
    Ok(IwasawaCoords { v, u, w: tau.re() })
}

pub(crate) fn udu_factor(y: &RMat) -> Result<(Vec<f64>, RMat)> {
    let g = y.nrows();
    let mut a = y.clone();
    let mut v = vec![0.0; g];
    let mut u = RMat::zeros(g, g);
    for k in (0..g).rev() {
        let d = a[(k, k)];
        if !(d > 0.0) {
            return Err(Error::Degenerate(format!(
                "pivot {k} of Im tau is {d}; not positive definite"
            )));
        }
        v[k] = d;
        for i in 0..k {
            u[(i, k)] = a[(i, k)] / d;
        }
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] -= d * u[(i, k)] * u[(j, k)];
            }
        }
    }
    Ok((v, u))
}

/// Density `∏ vᵢ^{i−g−2}` of the invariant measure in Iwasawa coordinates.
pub fn measure_density(c: &IwasawaCoords) -> f64 {
    let g = c.genus() as i32;
    c.v.iter()
        .enumerate()
        .map(|(k, v)| v.powi(k as i32 + 1 - g - 2))
        .product()
}

/// Jacobian `∏ vᵢ^{i−1}` of `(v, u) ↦ Im τ`, from the recurrence
/// `J_g = v_g^{g−1} J_{g−1}`.
pub fn jacobian(c: &IwasawaCoords) -> f64 {
    c.v.iter()
        .enumerate()
        .map(|(k, v)| v.powi(k as i32))
        .product()
}

/// `m = 𝐔 · diag(V, V⁻¹) · K` with `K` orthosymplectic.
#[derive(Clone, Debug)]
pub struct IwasawaDecomposition {
    pub coords: IwasawaCoords,
    /// `[[U, W·U⁻ᵗ], [0, U⁻ᵗ]]`.
    pub unipotent: RMat,
    /// `diag(V, V⁻¹)` with `V = diag(√vᵢ)`.
    pub abelian: RMat,
    pub k: SymplecticMatrix,
}

impl IwasawaDecomposition {
    pub fn rebuild(&self) -> RMat {
        &self.unipotent * &self.abelian * self.k.entries()
    }
}

pub fn decompose_symplectic(m: &SymplecticMatrix) -> Result<IwasawaDecomposition> {
    let g = m.genus();
    let coords = to_coords(&mobius_act(m, &SiegelPoint::scaled_identity(g, 1.0))?)?;
    let unipotent = unipotent_matrix(&coords);
    let mut abelian = RMat::zeros(2 * g, 2 * g);
    for (i, v) in coords.v.iter().enumerate() {
        abelian[(i, i)] = v.sqrt();
        abelian[(g + i, g + i)] = 1.0 / v.sqrt();
    }
    let ua = &unipotent * &abelian;
    let ua_inv = ua
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("U·A is singular".into()))?;
    let k_entries = ua_inv * m.entries();
    let k = SymplecticMatrix::new(k_entries, DEFAULT_TOL)?;
    if !k.is_orthogonal(DEFAULT_TOL * max_abs(m.entries()).max(1.0).powi(2)) {
        return Err(Error::Degenerate("compact factor is not orthogonal".into()));
    }
    Ok(IwasawaDecomposition {
        coords,
        unipotent,
        abelian,
        k,
    })
}

fn unipotent_matrix(c: &IwasawaCoords) -> RMat {
    let g = c.genus();
    let u = c.unitriangular();
    let u_inv_t = u
        .clone()
        .try_inverse()
        .expect("unitriangular matrices are invertible")
        .transpose();
    let mut m = RMat::zeros(2 * g, 2 * g);
    m.view_mut((0, 0), (g, g)).copy_from(&u);
    m.view_mut((0, g), (g, g)).copy_from(&(&c.w * &u_inv_t));
    m.view_mut((g, g), (g, g)).copy_from(&u_inv_t);
    m
}

/// Unipotent fiber over a genus `g−1` base point: the first row of `U` and
/// `W` together with the leading pivot `v₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Corank1Fiber {
    pub v1: f64,
    pub w11: f64,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub base: SiegelPoint,
}

pub fn corank1_embed(f: &Corank1Fiber) -> Result<SiegelPoint> {
    Corank1Embedding::new(&f.base)?.embed(f.v1, f.w11, &f.w, &f.u)
}

/// Reusable embedding over a fixed base; caches the base's Iwasawa data.
#[derive(Clone, Debug)]
pub struct Corank1Embedding {
    base: SiegelPoint,
    /// `V²·Uᵗ` of the base, so that `Im τ₂ = u·(V²Uᵗ)`.
    v2_ut: RMat,
    /// `V²` of the base.
    v2: Vec<f64>,
}

impl Corank1Embedding {
    pub fn new(base: &SiegelPoint) -> Result<Self> {
        let c = to_coords(base)?;
        let ut = c.unitriangular().transpose();
        let mut v2_ut = ut.clone();
        for (i, v) in c.v.iter().enumerate() {
            v2_ut.row_mut(i).scale_mut(*v);
        }
        Ok(Self {
            base: base.clone(),
            v2_ut,
            v2: c.v,
        })
    }

    pub fn base(&self) -> &SiegelPoint {
        &self.base
    }

    pub fn fiber_dimension(&self) -> usize {
        2 * self.base.genus() + 1
    }

    pub fn embed(&self, v1: f64, w11: f64, w: &[f64], u: &[f64]) -> Result<SiegelPoint> {
        let h = self.base.genus();
        if w.len() != h || u.len() != h {
            return Err(Error::Dimension(format!("fiber vectors must have length {h}")));
        }
        if !(v1 > 0.0) {
            return Err(Error::Domain(format!("v1 must be positive, got {v1}")));
        }
        let g = h + 1;
        let mut t = CMat::zeros(g, g);
        let top = v1 + (0..h).map(|k| u[k] * u[k] * self.v2[k]).sum::<f64>();
        t[(0, 0)] = num_complex::Complex64::new(w11, top);
        for j in 0..h {
            let im: f64 = (0..h).map(|k| u[k] * self.v2_ut[(k, j)]).sum();
            let z = num_complex::Complex64::new(w[j], im);
            t[(0, j + 1)] = z;
            t[(j + 1, 0)] = z;
        }
        t.view_mut((1, 1), (h, h)).copy_from(self.base.tau());
        SiegelPoint::new(t)
    }
}

/// Finite-difference check of measure invariance: returns
/// `|det DΦ(c)| · density(Φ(c)) / density(c)` for `Φ = to_coords ∘ γ ∘ from_coords`,
/// which is 1 for an invariant measure.
pub fn measure_pullback_ratio(gamma: &SymplecticMatrix, c: &IwasawaCoords, step: f64) -> Result<f64> {
    let g = c.genus();
    let n = IwasawaCoords::dimension(g);
    let x0 = c.to_flat();
    let phi = |x: &[f64]| -> Result<Vec<f64>> {
        let p = from_coords(&IwasawaCoords::from_flat(g, x)?);
        Ok(to_coords(&mobius_act(gamma, &p)?)?.to_flat())
    };
    let mut jac = RMat::zeros(n, n);
    for k in 0..n {
        let h = step * x0[k].abs().max(1.0);
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (phi(&xp)?, phi(&xm)?);
        for i in 0..n {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let image = IwasawaCoords::from_flat(g, &phi(&x0)?)?;
    Ok(jac.determinant().abs() * measure_density(&image) / measure_density(c))
}

/// JSON record `{genus, v, u: [[i, j, value]…], w: [[i, j, value]…]}` with
/// 1-based indices; `u` lists `i < j`, `w` lists `i ≤ j`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoordsRecord {
    pub genus: usize,
    pub v: Vec<f64>,
    pub u: Vec<(usize, usize, f64)>,
    pub w: Vec<(usize, usize, f64)>,
}

impl From<&IwasawaCoords> for CoordsRecord {
    fn from(c: &IwasawaCoords) -> Self {
        let g = c.genus();
        let mut u = Vec::new();
        let mut w = Vec::new();
        for i in 0..g {
            for j in i..g {
                w.push((i + 1, j + 1, c.w[(i, j)]));
                if j > i {
                    u.push((i + 1, j + 1, c.u[(i, j)]));
                }
            }
        }
        Self {
            genus: g,
            v: c.v.clone(),
            u,
            w,
        }
    }
}

impl TryFrom<CoordsRecord> for IwasawaCoords {
    type Error = Error;
    fn try_from(r: CoordsRecord) -> Result<Self> {
        let g = r.genus;
        let mut u = RMat::zeros(g, g);
        let mut w = RMat::zeros(g, g);
        for &(i, j, x) in &r.u {
            if i == 0 || j > g || i >= j {
                return Err(Error::Index {
                    index: j,
                    range: format!("u index ({i},{j}) for genus {g}"),
                });
            }
            u[(i - 1, j - 1)] = x;
        }
        for &(i, j, x) in &r.w {
            if i == 0 || j > g || i > j {
                return Err(Error::Index {
                    index: j,
                    range: format!("w index ({i},{j}) for genus {g}"),
                });
            }
            w[(i - 1, j - 1)] = x;
            w[(j - 1, i - 1)] = x;
        }
        if r.v.len() != g {
            return Err(Error::Dimension(format!("v must have {g} entries")));
        }
        IwasawaCoords::new(r.v, u, w)
    }
}

impl Serialize for IwasawaCoords {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoordsRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IwasawaCoords {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        IwasawaCoords::try_from(CoordsRecord::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Relative distance between two points, `‖τ₁ − τ₂‖_∞ / max(1, ‖τ₂‖_∞)`.
pub fn point_distance(a: &SiegelPoint, b: &SiegelPoint) -> f64 {
    let diff = compose(&(a.re() - b.re()), &(a.im() - b.im()));
    let scale = crate::linalg::max_abs_complex(b.tau()).max(1.0);
    crate::linalg::max_abs_complex(&diff) / scale
}
