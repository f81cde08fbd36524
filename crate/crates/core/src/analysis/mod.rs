//! Estimators read off sampled tube functions and the checks that tie them
//! to the zeta functions: Minkowski fits, periodic profiles and their Fourier
//! residues, Moran roots, lattice density and the verification reports.

mod fit;
mod lattice;
mod profile;
mod verify;

pub use fit::{detect_period, fit_minkowski, Branch, MinkowskiFit, PERIODIC_CV};
pub use lattice::{hyperfractal_density, hyperfractal_gaps, moran_roots, LatticeCheck, MoranRoots};
pub use profile::{
    distance_residues_from_tube, extract_g, extract_g_with, fourier_residues, PeriodicProfile,
    FOLD_RTOL, PROFILE_GRID,
};
pub use verify::{verify_functional_equation, verify_residue_content, Defect, Report};
