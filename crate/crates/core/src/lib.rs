//! Equivariant η, ξ and complex ξ̃ invariants of Dolbeault–Dirac operators
//! on model cones, computed both from link spectra and from local
//! cohomology characters.

pub mod char_algebra;
pub mod error;
pub mod gelfand_robbin;
pub mod lefschetz;
pub mod model_cones;
pub mod quadrature;
pub mod regularize;
pub mod spectral_partition;

pub mod cli;

pub use error::{Error, Result};

pub type Rational = num_rational::Ratio<i64>;
