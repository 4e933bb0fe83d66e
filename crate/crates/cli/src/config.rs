//! Run configuration: a TOML file overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use siegel_core::experiments::{Theorem1Config, UnfoldingConfig, ZagierConfig};
use siegel_core::quadrature::QuadratureSpec;
use siegel_core::symplectic::{rmat, SiegelPoint};

use crate::Flags;

/// A point of the Siegel space given by row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PointConfig {
    pub fn to_point(&self) -> Result<SiegelPoint, String> {
        let n = self.re.len();
        let g = (n as f64).sqrt().round() as usize;
        if g == 0 || g * g != n || self.im.len() != n {
            return Err(format!("tau needs two square row-major matrices, got {} and {} entries", n, self.im.len()));
        }
        SiegelPoint::from_re_im(&rmat(g, g, &self.re), &rmat(g, g, &self.im)).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub roundtrip: f64,
    pub density: f64,
    pub covariance: f64,
    /// Largest Eisenstein tail relative to the truncated sum.
    pub eisenstein_tail: f64,
    pub eigenvalue_g1: f64,
    pub eigenvalue_g2: f64,
    pub power_eigenvalue: f64,
    pub volume_table: f64,
    /// Relative accuracy of the constant-function domain integral.
    pub volume_domain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            roundtrip: 1e-10,
            density: 1e-12,
            covariance: 1e-10,
            eisenstein_tail: 1e-2,
            eigenvalue_g1: 1e-3,
            eigenvalue_g2: 1e-2,
            power_eigenvalue: 1e-3,
            volume_table: 1e-12,
            volume_domain: 5e-3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub genus: Option<usize>,
    pub s: Option<f64>,
    pub radius: Option<f64>,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Point for `decompose`, `eisenstein` and `laplacian-check`.
    pub tau: Option<PointConfig>,
    /// Row-major symplectic matrix for `decompose`.
    pub matrix: Option<Vec<f64>>,
    /// Base point of genus `g − 1` for `average`.
    pub base: Option<PointConfig>,
    pub v1: Option<f64>,
    /// Sample count per genus for `measure-check`.
    pub samples: Option<usize>,
    /// Finite-difference step for `laplacian-check`.
    pub step: Option<f64>,
    pub tolerances: Tolerances,
    pub quadrature: QuadratureSpec,
    pub zagier: ZagierConfig,
    pub unfolding: UnfoldingConfig,
    pub theorem1: Theorem1Config,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Applies flags on top of the file; flags win.
    pub fn apply(&mut self, command: &str, flags: &Flags) {
        self.command = Some(command.to_string());
        if let Some(g) = flags.g {
            self.genus = Some(g);
        }
        if let Some(s) = flags.s {
            self.s = Some(s);
            self.unfolding.s_values = vec![s];
        }
        if let Some(r) = flags.radius {
            self.radius = Some(r);
            self.unfolding.radius = r;
        }
        if let Some(y) = flags.y_min {
            self.zagier.y_min = y;
        }
        if let Some(y) = flags.y_max {
            self.zagier.y_max = y;
        }
        if let Some(n) = flags.y_points {
            self.zagier.y_points = n;
        }
        if let Some(seed) = flags.seed {
            self.seed = seed;
        }
        if flags.seed.is_some() || self.seed != 0 {
            self.quadrature.seed = self.seed;
            self.theorem1.seed = self.seed;
        }
        if let Some(t) = flags.threads {
            self.threads = Some(t);
        }
        if let Some(out) = &flags.out {
            self.out = Some(out.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<RunConfig>("genus = 2\nbogus = 1").is_err());
        assert!(toml::from_str::<RunConfig>("[zagier]\ny_points = 50\nextra = 2").is_err());
        let c: RunConfig = toml::from_str("genus = 2\n[quadrature]\norder = 8").unwrap();
        assert_eq!(c.genus, Some(2));
        assert_eq!(c.quadrature.order, 8);
    }

    #[test]
    fn point_parsing() {
        let p = PointConfig { re: vec![0.0; 4], im: vec![1.0, 0.0, 0.0, 1.0] };
        assert_eq!(p.to_point().unwrap().genus(), 2);
        assert!(PointConfig { re: vec![0.0; 3], im: vec![1.0; 3] }.to_point().is_err());
    }
}
