//! Concrete problems with exact global solvers.

mod linear;
mod registration;

pub use linear::{linear_fit, LinearProblem};
pub use registration::{
    horn_fit, registration_residual, Point3, RegistrationProblem, RigidTransform, DEGENERACY_RATIO,
};
