//! Integer points of the corank-1 parabolic subgroup `P_{g,1}`, their
//! factorization `g₁·g₂·g₃` and the closed-form actions of each factor.
//!
//! Blocks are ordered `(1, g−1, 1, g−1)`. The assembled matrix is
//!
//! ```text
//! [ 1  m  q          n ]
//! [ 0  a  a·nᵗ − b·mᵗ  b ]
//! [ 0  0  1          0 ]
//! [ 0  c  c·nᵗ − d·mᵗ  d ]
//! ```
//!
//! which is the exact product of the three factors; for `(a, b, c, d) = I`
//! the middle column reduces to `(q, nᵗ, 1, −mᵗ)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_right, symmetrize_complex, to_complex, CMat, IMat};
use crate::symplectic::{block_join, block_split, random_gamma, BlockSplit, SiegelPoint, SymplecticMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "ParabolicRecord")]
pub struct ParabolicElement {
    pub genus: usize,
    pub gamma_sub: SymplecticMatrix,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub q: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParabolicRecord {
    genus: usize,
    gamma_sub: SymplecticMatrix,
    m: Vec<i64>,
    n: Vec<i64>,
    q: i64,
}

impl TryFrom<ParabolicRecord> for ParabolicElement {
    type Error = Error;
    fn try_from(r: ParabolicRecord) -> Result<Self> {
        if r.genus != r.gamma_sub.genus() + 1 {
            return Err(Error::Dimension(format!(
                "genus {} does not match a sub-matrix of genus {}",
                r.genus,
                r.gamma_sub.genus()
            )));
        }
        Self::new(r.gamma_sub, r.m, r.n, r.q)
    }
}

impl ParabolicElement {
    pub fn new(gamma_sub: SymplecticMatrix, m: Vec<i64>, n: Vec<i64>, q: i64) -> Result<Self> {
        let h = gamma_sub.genus();
        if m.len() != h || n.len() != h {
            return Err(Error::Dimension(format!("m and n must have length {h}")));
        }
        if gamma_sub.to_integer().is_none() {
            return Err(Error::NotInteger {
                value: gamma_sub
                    .entries()
                    .iter()
                    .copied()
                    .find(|x| x.fract() != 0.0)
                    .unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            genus: h + 1,
            gamma_sub,
            m,
            n,
            q,
        })
    }

    pub fn trivial(genus: usize) -> Self {
        let h = genus - 1;
        Self {
            genus,
            gamma_sub: SymplecticMatrix::identity(h),
            m: vec![0; h],
            n: vec![0; h],
            q: 0,
        }
    }

    /// Random element with `m`, `n`, `q` in `[−bound, bound]` and `gamma_sub`
    /// a generator word of length at most `word_len`.
    pub fn random<R: Rng + ?Sized>(genus: usize, bound: i64, word_len: usize, rng: &mut R) -> Self {
        let h = genus - 1;
        let mut draw = || rng.random_range(-bound..=bound);
        let m = (0..h).map(|_| draw()).collect();
        let n = (0..h).map(|_| draw()).collect();
        let q = draw();
        Self {
            genus,
            gamma_sub: random_gamma(h, word_len, rng),
            m,
            n,
            q,
        }
    }
}

fn sub_blocks(gamma: &SymplecticMatrix) -> [IMat; 4] {
    let h = gamma.genus();
    let x = gamma.to_integer().expect("integer sub-matrix");
    [
        x.view((0, 0), (h, h)).into_owned(),
        x.view((0, h), (h, h)).into_owned(),
        x.view((h, 0), (h, h)).into_owned(),
        x.view((h, h), (h, h)).into_owned(),
    ]
}

fn assemble_integer(p: &ParabolicElement) -> IMat {
    let h = p.genus - 1;
    let g = p.genus;
    let [a, b, c, d] = sub_blocks(&p.gamma_sub);
    let m = IMat::from_row_slice(h, 1, &p.m);
    let n = IMat::from_row_slice(h, 1, &p.n);
    let mut x = IMat::zeros(2 * g, 2 * g);
    x[(0, 0)] = 1;
    x[(g, g)] = 1;
    x[(0, g)] = p.q;
    for j in 0..h {
        x[(0, 1 + j)] = p.m[j];
        x[(0, g + 1 + j)] = p.n[j];
    }
    let upper = &a * &n - &b * &m;
    let lower = &c * &n - &d * &m;
    x.view_mut((1, 1), (h, h)).copy_from(&a);
    x.view_mut((1, g + 1), (h, h)).copy_from(&b);
    x.view_mut((g + 1, 1), (h, h)).copy_from(&c);
    x.view_mut((g + 1, g + 1), (h, h)).copy_from(&d);
    x.view_mut((1, g), (h, 1)).copy_from(&upper);
    x.view_mut((g + 1, g), (h, 1)).copy_from(&lower);
    x
}

pub fn assemble(p: &ParabolicElement) -> Result<SymplecticMatrix> {
    SymplecticMatrix::from_integer(&assemble_integer(p))
}

/// The three factors `(g₁, g₂, g₃)` of `p`, in product order.
pub fn factors(p: &ParabolicElement) -> Result<[SymplecticMatrix; 3]> {
    let g = p.genus;
    let h = g - 1;
    let g1 = embed_gamma(&p.gamma_sub)?;
    let g2 = assemble(&ParabolicElement {
        gamma_sub: SymplecticMatrix::identity(h),
        q: 0,
        ..p.clone()
    })?;
    let g3 = assemble(&ParabolicElement {
        q: p.q,
        ..ParabolicElement::trivial(g)
    })?;
    Ok([g1, g2, g3])
}

pub fn factor(x: &SymplecticMatrix) -> Result<ParabolicElement> {
    let g = x.genus();
    if g < 2 {
        return Err(Error::NotParabolic("genus must be at least 2".into()));
    }
    let xi = x
        .to_integer()
        .ok_or_else(|| Error::NotParabolic("matrix is not integral".into()))?;
    let h = g - 1;
    for i in 0..2 * g {
        if xi[(i, 0)] != i64::from(i == 0) {
            return Err(Error::NotParabolic("first column is not e1".into()));
        }
    }
    let pick = |r0: usize, c0: usize| xi.view((r0, c0), (h, h)).into_owned();
    let mut sub = IMat::zeros(2 * h, 2 * h);
    sub.view_mut((0, 0), (h, h)).copy_from(&pick(1, 1));
    sub.view_mut((0, h), (h, h)).copy_from(&pick(1, g + 1));
    sub.view_mut((h, 0), (h, h)).copy_from(&pick(g + 1, 1));
    sub.view_mut((h, h), (h, h)).copy_from(&pick(g + 1, g + 1));
    let gamma_sub = SymplecticMatrix::from_integer(&sub)
        .map_err(|_| Error::NotParabolic("inner block is not symplectic".into()))?;
    let p = ParabolicElement {
        genus: g,
        gamma_sub,
        m: (0..h).map(|j| xi[(0, 1 + j)]).collect(),
        n: (0..h).map(|j| xi[(0, g + 1 + j)]).collect(),
        q: xi[(0, g)],
    };
    if assemble_integer(&p) != xi {
        return Err(Error::NotParabolic("matrix does not have the parabolic pattern".into()));
    }
    Ok(p)
}

/// `Γ_{g−1} ↪ Γ_g` as the factor `g₁`.
pub fn embed_gamma(gamma: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let h = gamma.genus();
    let g = h + 1;
    let mut x = nalgebra::DMatrix::<f64>::identity(2 * g, 2 * g);
    let e = gamma.entries();
    let idx = |k: usize| if k < h { 1 + k } else { g + 1 + (k - h) };
    for i in 0..2 * h {
        for j in 0..2 * h {
            x[(idx(i), idx(j))] = e[(i, j)];
        }
    }
    SymplecticMatrix::new(x, crate::symplectic::DEFAULT_TOL)
}

fn corank1(tau: &SiegelPoint) -> Result<BlockSplit> {
    block_split(tau, 1)
}

fn check_sub_genus(gamma: &SymplecticMatrix, tau: &SiegelPoint) -> Result<()> {
    if gamma.genus() + 1 != tau.genus() {
        return Err(Error::Dimension(format!(
            "genus {} element cannot act through g1 on genus {}",
            gamma.genus(),
            tau.genus()
        )));
    }
    Ok(())
}

/// `τ₁ ↦ τ₁ − τ₂M⁻¹cτ₂ᵗ`, `τ₂ ↦ τ₂M⁻¹`, `τ₃ ↦ (aτ₃+b)M⁻¹` with `M = cτ₃ + d`.
pub fn act_g1(gamma: &SymplecticMatrix, tau: &SiegelPoint) -> Result<SiegelPoint> {
    check_sub_genus(gamma, tau)?;
    let s = corank1(tau)?;
    let (a, b, c, d) = (
        to_complex(&gamma.a()),
        to_complex(&gamma.b()),
        to_complex(&gamma.c()),
        to_complex(&gamma.d()),
    );
    let den = &c * &s.tau22 + d;
    let singular = || Error::Degenerate("c·tau3 + d is singular".into());
    let tau2 = solve_right(&den, &s.tau2).ok_or_else(singular)?;
    let tau11 = &s.tau11 - &tau2 * &c * s.tau2.transpose();
    let tau22 = solve_right(&den, &(a * &s.tau22 + b)).ok_or_else(singular)?;
    block_join(&BlockSplit {
        r: 1,
        tau11,
        tau2,
        tau22: symmetrize_complex(&tau22),
    })
}

/// `τ₁ ↦ τ₁ + mτ₂ᵗ + τ₂mᵗ + mτ₃mᵗ + nmᵗ`, `τ₂ ↦ τ₂ + mτ₃ + n`.
pub fn act_g2(m: &[i64], n: &[i64], tau: &SiegelPoint) -> Result<SiegelPoint> {
    let h = tau.genus() - 1;
    if m.len() != h || n.len() != h {
        return Err(Error::Dimension(format!("m and n must have length {h}")));
    }
    let s = corank1(tau)?;
    let row = |v: &[i64]| CMat::from_row_iterator(1, h, v.iter().map(|x| Complex64::new(*x as f64, 0.0)));
    let (mr, nr) = (row(m), row(n));
    let m_tau3 = &mr * &s.tau22;
    let tau11 = &s.tau11
        + &mr * s.tau2.transpose()
        + &s.tau2 * mr.transpose()
        + &m_tau3 * mr.transpose()
        + &nr * mr.transpose();
    let tau2 = &s.tau2 + m_tau3 + nr;
    block_join(&BlockSplit {
        r: 1,
        tau11,
        tau2,
        tau22: s.tau22,
    })
}

/// `τ₁ ↦ τ₁ + q`.
pub fn act_g3(q: i64, tau: &SiegelPoint) -> Result<SiegelPoint> {
    let mut t = tau.tau().clone();
    t[(0, 0)] += Complex64::new(q as f64, 0.0);
    SiegelPoint::new(t)
}

/// `g₁(g₂(g₃(τ)))` through the closed forms.
pub fn act(p: &ParabolicElement, tau: &SiegelPoint) -> Result<SiegelPoint> {
    let t = act_g3(p.q, tau)?;
    let t = act_g2(&p.m, &p.n, &t)?;
    act_g1(&p.gamma_sub, &t)
}
