//! Radially symmetric conformal metrics
//! g = e^{2u} |dx|^2 on R^n.
//!
//! The crate computes:
//!
//! * the polyharmonic operator (-Delta)^{n/2} acting on radial conformal
//!   factors — iterated Laplacians for even n, composed with a
//!   principal-value half-Laplacian for odd n;
//! * the logarithmic potential that inverts it, with its gradient and
//!   Laplacian through differentiated kernels;
//! * Q-curvature and scalar-curvature diagnostics, the total-Q invariant
//!   alpha_0, and the volume entropies tau(g) and h(g);
//! * the decomposition u = L(Q e^{nu}) + P with an even-polynomial fit of P
//!   and a normal / non-normal verdict;
//! * a verification suite binding the asymptotic laws these objects satisfy
//!   to measured slopes and limits with explicit tolerances.
//!
//! Everything is radial: n-dimensional integrals reduce to one-dimensional
//! quadrature against closed-form or numerically averaged angular kernels.

pub mod curvature;
pub mod decomposition;
pub mod entropy;
pub mod error;
pub mod numerics;
pub mod operators;
pub mod potential;
pub mod profiles;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
