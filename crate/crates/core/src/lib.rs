//! Fractal zeta functions: geometric zeta functions of fractal strings,
//! distance and tube zeta functions of bounded sets in R and R^2, their
//! complex dimensions, residues and Minkowski contents.
//!
//! The crate is split in four layers:
//!
//! * [`strings`]: fractal strings, their algebra and certified Dirichlet sums.
//! * [`merofunc`]: closed-form meromorphic zeta functions with pole catalogs,
//!   plus contour machinery that works on any evaluable function.
//! * [`geometry`]: concrete sets, tube functions and quadrature for the
//!   distance and tube zeta functions.
//! * [`analysis`]: Minkowski fits, periodic profiles, Moran roots and the
//!   verification harness.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod merofunc;
pub mod numeric;
pub mod strings;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: &str = "1.0";
