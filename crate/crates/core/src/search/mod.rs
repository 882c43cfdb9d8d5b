//! Homogeneous geodesic search: sphere fields, zero finding and certification.

mod alpha;
mod certify;
mod fields;
mod zeros;

pub use alpha::{alpha_gap_probe, alpha_operator, AlphaOperator, GapProbeReport, ProbeCrossing};
pub use certify::{
    certify_candidate, certify_direction, fixed_branch_candidate,
    g_orthogonal_complement_candidate, Certification, CertifyOptions, GeodesicVectorCandidate,
    Provenance, Status,
};
pub use fields::{
    algebraic_components, algebraic_residual, antipodal_symmetry_check,
    riemannian_criterion_residual, t_field, v_field, AntipodalReport, SphereSample,
};
pub use zeros::{
    criteria_agreement, default_samples, find_zeros, refine_on_sphere, sample_sphere_field,
    CriteriaAgreement, FailureRecord, Refined, SearchBranches, SearchConfig, SphereSearchReport,
};
