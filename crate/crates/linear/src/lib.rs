//! Perturbations of the flat Cayley form: the `(h, ξ)` dictionary, the
//! quadratic Lagrangian family in momentum space, its gauge directions and
//! ellipticity, and the quadratic part of the full action.

pub mod kernel;
pub mod perturbation;
pub mod torsion;

pub use kernel::{
    check_ellipticity, gauge_direction, generic_momentum, kernel_gr, kernel_prime, kernel_raw, Coeffs, EllipticityReport, Momentum,
    QuadraticKernel,
};
pub use perturbation::{fields_from_4form, Perturbation, PACKED};
pub use torsion::{linearized_action_kernel, linearized_torsion, rho_mu, LinearizedAction};

#[derive(Debug, thiserror::Error)]
pub enum LinearError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("4-form has a Λ⁴₂₇ part of size {0:.3e}; it is not a deformation of Φ")]
    NotTangent(f64),
    #[error("κ = {0} makes 6 - 5κ - κ² vanish")]
    SingularKappa(f64),
}
