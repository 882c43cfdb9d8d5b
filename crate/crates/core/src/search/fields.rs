use nalgebra::DMatrix;
use serde::Serialize;

use crate::chart::covariant_derivative;
use crate::error::{FinslerError, Result};
use crate::homspace::{HomogeneousSpaceSpec, LieAlgebraData, ReductiveDecomposition};
use crate::linalg::{bilinear, dot, norm, normalized, solve};
use crate::sphere::sample_sphere;

/// `v(X) = ∇^{X*}_{X*} X*` at the origin, in coordinates of the basis `K_i(p)`.
pub fn v_field(spec: &HomogeneousSpaceSpec, generator: &[f64]) -> Result<Vec<f64>> {
    let p = spec.origin();
    if spec
        .fundamental_vector(generator, p)
        .iter()
        .all(|c| *c == 0.0)
    {
        return Err(FinslerError::DegenerateDirection(format!(
            "X*(p) = 0 for X = {generator:?}"
        )));
    }
    let field = spec.fundamental_field(generator);
    let d = covariant_derivative(spec.chart(), &field, &field, &field, p)?;
    solve(&spec.killing_matrix(p), &d)
}

/// One evaluation of the sphere fields at a unit vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSample {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: Vec<f64>,
    pub v_norm: f64,
    pub t_norm: f64,
}

/// `t(X) = v(X) - ⟨v(X), X⟩ X` for the normalized direction `X`.
pub fn t_field(spec: &HomogeneousSpaceSpec, generator: &[f64]) -> Result<SphereSample> {
    if norm(generator) == 0.0 {
        return Err(FinslerError::DegenerateDirection(
            "X = 0 is not a sphere point".into(),
        ));
    }
    let x = normalized(generator);
    let v = v_field(spec, &x)?;
    let radial = dot(&v, &x);
    let t: Vec<f64> = v.iter().zip(&x).map(|(a, b)| a - radial * b).collect();
    Ok(SphereSample {
        v_norm: norm(&v),
        t_norm: norm(&t),
        x,
        v,
        t,
    })
}

/// `g_{X_𝔪}([X, Z_j]_𝔪, X_𝔪)` for each `𝔪` basis vector `Z_j`.
///
/// `metric` returns the fundamental tensor of the invariant norm on `𝔪` at a
/// vector given in `𝔪` coordinates.
pub fn algebraic_components(
    algebra: &LieAlgebraData,
    dec: &ReductiveDecomposition,
    metric: &dyn Fn(&[f64]) -> Result<DMatrix<f64>>,
    generator: &[f64],
) -> Result<Vec<f64>> {
    let x_m = dec.project_m(generator);
    if x_m.iter().all(|c| *c == 0.0) {
        return Err(FinslerError::DegenerateDirection(
            "X has no 𝔪 component".into(),
        ));
    }
    let g = metric(&x_m)?;
    (0..dec.dim_m())
        .map(|j| {
            let z: Vec<f64> = dec.m_basis.column(j).iter().copied().collect();
            let b = dec.project_m(&algebra.bracket(generator, &z));
            Ok(bilinear(&g, &b, &x_m))
        })
        .collect()
}

/// max over `𝔪` basis vectors `Z` of `|g_{X_𝔪}([X, Z]_𝔪, X_𝔪)|`.
pub fn algebraic_residual(spec: &HomogeneousSpaceSpec, generator: &[f64]) -> Result<f64> {
    let metric = |x_m: &[f64]| spec.m_metric(x_m);
    let r = algebraic_components(spec.algebra(), spec.decomposition(), &metric, generator)?;
    Ok(r.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// The Riemannian criterion `max_Z |⟨[X, Z]_𝔪, X_𝔪⟩|` for a fixed scalar product on `𝔪`.
pub fn riemannian_criterion_residual(
    algebra: &LieAlgebraData,
    dec: &ReductiveDecomposition,
    inner: &DMatrix<f64>,
    generator: &[f64],
) -> Result<f64> {
    let metric = |_: &[f64]| Ok(inner.clone());
    let r = algebraic_components(algebra, dec, &metric, generator)?;
    Ok(r.iter().fold(0.0, |m, v| m.max(v.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntipodalReport {
    pub samples: usize,
    /// max |v(X) - v(-X)|
    pub max_residual: f64,
    pub worst_direction: Vec<f64>,
    /// the chart is Berwald or reversible, so the residual is expected to vanish
    pub expected_symmetric: bool,
}

pub fn antipodal_symmetry_check(
    spec: &HomogeneousSpaceSpec,
    samples: usize,
    seed: u64,
) -> Result<AntipodalReport> {
    use rayon::prelude::*;
    let dirs = sample_sphere(spec.dim(), samples, seed);
    let residuals: Vec<f64> = dirs
        .par_iter()
        .map(|x| {
            let neg: Vec<f64> = x.iter().map(|c| -c).collect();
            let a = v_field(spec, x)?;
            let b = v_field(spec, &neg)?;
            Ok(a.iter()
                .zip(&b)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let (worst, max_residual) =
        residuals.iter().enumerate().fold(
            (0, 0.0),
            |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) },
        );
    Ok(AntipodalReport {
        samples,
        max_residual,
        worst_direction: dirs.get(worst).cloned().unwrap_or_default(),
        expected_symmetric: spec.is_berwald() || spec.is_reversible(),
    })
}
