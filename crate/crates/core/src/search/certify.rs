use serde::Serialize;

use super::fields::{algebraic_residual, t_field};
use super::zeros::refine_on_sphere;
use crate::error::{FinslerError, Result};
use crate::geodesy::{compare_orbit_geodesic, ComparisonReport, IntegratorOptions};
use crate::homspace::{
    commutator_complement_vector, commutator_span_m, HomogeneousSpaceSpec, RadicalBranch,
};
use crate::linalg::{bilinear, normalized};
use crate::tolerance::Tolerances;

/// Where a candidate geodesic vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SphereZero,
    Algebraic,
    CommutatorComplement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Every check passed and all three were available.
    Certified,
    /// The only available check passed.
    Uncorroborated,
    /// Some checks passed and others failed.
    Disputed,
    /// Every available check failed.
    Rejected,
}

/// Settings for the orbit-versus-geodesic comparison used in certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyOptions {
    pub window: f64,
    pub step: f64,
    pub tolerances: Tolerances,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            window: 1.0,
            step: crate::geodesy::DEFAULT_STEP,
            tolerances: Tolerances::default(),
        }
    }
}

impl CertifyOptions {
    fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions {
            step: self.step,
            drift_bound: self.tolerances.speed_drift,
        }
    }
}

/// The three independent checks on one direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub t_residual: f64,
    pub v_residual: f64,
    pub algebraic_residual: f64,
    pub comparison: Option<ComparisonReport>,
    /// why the comparison could not be completed
    pub comparison_error: Option<String>,
    pub status: Status,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.status == Status::Certified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicVectorCandidate {
    /// unit vector in coordinates of the basis `K_i(p)`
    pub x: Vec<f64>,
    pub provenance: Provenance,
    #[serde(flatten)]
    pub certification: Certification,
    /// `-X` is certified as well
    pub both_signs: bool,
    /// checks on `-X`, present when they were run
    pub opposite: Option<Certification>,
}

fn status_from(passes: &[bool]) -> Status {
    let ok = passes.iter().filter(|p| **p).count();
    match (ok, passes.len()) {
        (0, _) => Status::Rejected,
        (k, n) if k < n => Status::Disputed,
        (_, 1) => Status::Uncorroborated,
        _ => Status::Certified,
    }
}

/// Runs the sphere-field, algebraic and orbit-comparison checks on `X`.
///
/// When `compare` is false the orbit comparison is skipped and the best
/// possible status is `Uncorroborated`.
pub fn certify_direction(
    spec: &HomogeneousSpaceSpec,
    generator: &[f64],
    options: &CertifyOptions,
    compare: bool,
) -> Result<Certification> {
    let x = normalized(generator);
    let tol = &options.tolerances;
    let sample = t_field(spec, &x)?;
    let algebraic = algebraic_residual(spec, &x)?;
    let (comparison, comparison_error) = if compare {
        match compare_orbit_geodesic(spec, &x, options.window, options.integrator()) {
            Ok(r) => (Some(r), None),
            Err(
                e @ (FinslerError::Accuracy { .. }
                | FinslerError::Domain(_)
                | FinslerError::ChartExit { .. }),
            ) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let mut passes = vec![sample.v_norm <= tol.t_residual, algebraic <= tol.algebraic];
    if compare {
        passes.push(
            comparison
                .as_ref()
                .is_some_and(|c| c.sup_distance <= tol.sup_distance),
        );
    }
    let mut status = status_from(&passes);
    if !compare && status == Status::Certified {
        status = Status::Uncorroborated;
    }
    Ok(Certification {
        t_residual: sample.t_norm,
        v_residual: sample.v_norm,
        algebraic_residual: algebraic,
        comparison,
        comparison_error,
        status,
    })
}

/// Certifies `X` and, independently, `-X`.
pub fn certify_candidate(
    spec: &HomogeneousSpaceSpec,
    generator: &[f64],
    provenance: Provenance,
    options: &CertifyOptions,
) -> Result<GeodesicVectorCandidate> {
    let x = normalized(generator);
    let certification = certify_direction(spec, &x, options, true)?;
    let neg: Vec<f64> = x.iter().map(|c| -c).collect();
    let opposite = certify_direction(spec, &neg, options, true)?;
    Ok(GeodesicVectorCandidate {
        both_signs: certification.certified() && opposite.certified(),
        x,
        provenance,
        certification,
        opposite: Some(opposite),
    })
}

/// The candidate from the `rad(K) = 𝔪` branch: a unit vector orthogonal to `[𝔤, 𝔤]_𝔪`.
pub fn fixed_branch_candidate(
    spec: &HomogeneousSpaceSpec,
    options: &CertifyOptions,
) -> Result<Option<GeodesicVectorCandidate>> {
    if spec.decomposition().branch != RadicalBranch::RadicalIsM {
        return Ok(None);
    }
    match commutator_complement_vector(spec.algebra(), spec.decomposition(), None)? {
        None => Ok(None),
        Some(x) => certify_candidate(spec, &x, Provenance::CommutatorComplement, options).map(Some),
    }
}

/// The `rad(K) = 𝔪` candidate with orthogonality taken in `g_X` instead of a fixed product.
///
/// Solves `g_X(X, C) = 0` for every `C ∈ [𝔤, 𝔤]_𝔪` on the unit sphere, starting
/// from the auxiliary-orthogonal vector. For quadratic norms the start already
/// solves it; otherwise the fixed-product choice is in general not geodesic.
pub fn g_orthogonal_complement_candidate(
    spec: &HomogeneousSpaceSpec,
    options: &CertifyOptions,
    max_iters: usize,
) -> Result<Option<GeodesicVectorCandidate>> {
    if spec.decomposition().branch != RadicalBranch::RadicalIsM {
        return Ok(None);
    }
    let Some(start) = commutator_complement_vector(spec.algebra(), spec.decomposition(), None)?
    else {
        return Ok(None);
    };
    let span = commutator_span_m(spec.algebra(), spec.decomposition());
    let dec = spec.decomposition();
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let x_m = dec.project_m(x);
        let g = spec.m_metric(&x_m)?;
        Ok(span.iter().map(|c| bilinear(&g, &x_m, c)).collect())
    };
    let refined = refine_on_sphere(residual, &start, 1e-14, max_iters)?;
    certify_candidate(spec, &refined.x, Provenance::CommutatorComplement, options).map(Some)
}
