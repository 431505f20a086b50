//! Steklov and mixed Steklov–Neumann–Dirichlet eigenvalues of planar domains.

pub mod geometry;
pub mod quadrature;
pub mod model_spectra;
pub mod dtn;
pub mod linalg;
pub mod symmetry;
pub mod experiments;
pub mod asymptotics;
pub mod cli;
