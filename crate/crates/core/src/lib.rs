//! Numerics on the Siegel upper half-space: symplectic actions, Iwasawa
//! coordinates, corank-1 Eisenstein series, unipotent averages, the invariant
//! Laplacian and equidistribution experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod average;
pub mod domain;
pub mod eisenstein;
pub mod error;
pub mod experiments;
pub mod invariants;
pub mod iwasawa;
pub mod lattice;
pub mod linalg;
pub mod parabolic;
pub mod quadrature;
pub mod ramanujan;
pub mod special;
pub mod spectral;
pub mod symplectic;

pub use error::{Error, Result};
pub use iwasawa::{Corank1Fiber, IwasawaCoords};
pub use symplectic::{SiegelPoint, SymplecticMatrix};
