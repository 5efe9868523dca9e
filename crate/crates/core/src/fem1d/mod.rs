//! Uniform 1D P1 finite elements: mesh, quadrature, assembly and banded solves.
//!
//! All integrals use 3-point Gauss-Legendre per element. Weighted operators take
//! the weight as values at the quadrature points ([`QuadValues`]), so nonlinear
//! coefficients such as `h^3` are evaluated pointwise from the interpolated field
//! rather than interpolated nodally.

mod assembly;
mod banded;
mod mesh;

pub use assembly::{
    assemble_load, assemble_load_quad, assemble_mass, assemble_stiffness,
    assemble_weighted_convection, assemble_weighted_mass, assemble_weighted_stiffness,
    convection_with, mass_with, stiffness_with, Discretization,
};
pub use banded::{solve_banded, BandedLu, BandedMatrix};
pub use mesh::{build_mesh, Mesh, QuadValues, GAUSS_POINTS, GAUSS_WEIGHTS};
