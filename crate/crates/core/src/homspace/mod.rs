//! Homogeneous spaces: Lie algebra data, Killing fields, orbits and the built-in zoo.

mod algebra;
mod family;
mod space;

pub use algebra::{
    commutator_complement_vector, commutator_span_m, killing_form, reductive_split, LieAlgebraData,
    RadicalBranch, ReductiveDecomposition,
};
pub use family::Family;
pub use space::{
    isometry_invariance, orbit_curve, HomogeneousSpaceSpec, InvarianceReport, SpaceSummary,
};
