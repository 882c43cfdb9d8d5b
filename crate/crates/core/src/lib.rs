//! Numerical Finsler geometry on homogeneous spaces.
//!
//! The crate computes the fundamental and Cartan tensors of Minkowski norms,
//! the formal Christoffel symbols, nonlinear connection and Chern connection
//! of a Finsler metric in natural coordinates, and uses them to find
//! homogeneous geodesics: directions `X` whose Killing field `X*` satisfies
//! `∇^{X*}_{X*} X* = 0` at the origin. Candidates are located as zeros of a
//! tangent vector field on the unit sphere and cross-checked against the
//! algebraic geodesic-vector criterion and direct geodesic integration.

pub mod chart;
pub mod error;
pub mod geodesy;
pub mod homspace;
pub mod jetcalc;
pub mod linalg;
pub mod minkowski;
pub mod search;
pub mod sphere;
pub mod tolerance;

pub use error::{FinslerError, Result};
pub use tolerance::Tolerances;
