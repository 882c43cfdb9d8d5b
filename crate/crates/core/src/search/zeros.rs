use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certify::{
    certify_candidate, fixed_branch_candidate, g_orthogonal_complement_candidate, CertifyOptions,
    GeodesicVectorCandidate, Provenance,
};
use super::fields::{algebraic_components, t_field, SphereSample};
use crate::error::{FinslerError, Result};
use crate::homspace::{HomogeneousSpaceSpec, RadicalBranch};
use crate::linalg::{angle, dot, norm, normalized};
use crate::sphere::{sample_sphere, scheme_for, tangent_basis, SamplingScheme};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Sphere samples; `None` picks a dimension-dependent default.
    pub samples: Option<usize>,
    /// Refinement stops once the residual norm drops below this.
    pub refine_tol: f64,
    pub max_newton_iters: usize,
    /// Upper bound on the number of basins that are refined.
    pub max_basins: usize,
    /// Directions certified when every sample is already a zero.
    pub all_directions_candidates: usize,
    /// Orbit comparison window `[0, window]`.
    pub window: f64,
    pub step: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            samples: None,
            refine_tol: 1e-13,
            max_newton_iters: 40,
            max_basins: 64,
            all_directions_candidates: 8,
            window: 1.0,
            step: crate::geodesy::DEFAULT_STEP,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

/// 2000 points on S², scaled as `2000^((n-1)/2)` in other dimensions and clamped to `[2, 20000]`.
pub fn default_samples(dim: usize) -> usize {
    let s = 2000f64.powf((dim as f64 - 1.0) / 2.0).round();
    s.clamp(2.0, 20000.0) as usize
}

impl SearchConfig {
    pub fn sample_count(&self, dim: usize) -> usize {
        self.samples.unwrap_or_else(|| default_samples(dim))
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            window: self.window,
            step: self.step,
            tolerances: self.tolerances,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances
            .validate()
            .map_err(FinslerError::InvalidInput)?;
        if self.samples == Some(0) {
            return Err(FinslerError::InvalidInput(
                "at least one sample is required".into(),
            ));
        }
        for (name, v) in [
            ("refine_tol", self.refine_tol),
            ("window", self.window),
            ("step", self.step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FinslerError::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Which existence results apply to the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBranches {
    pub odd_dimension: bool,
    pub berwald: bool,
    pub reversible: bool,
    pub radical_branch: RadicalBranch,
    /// a homogeneous geodesic through the origin is guaranteed to exist
    pub guaranteed: bool,
}

impl SearchBranches {
    pub fn of(spec: &HomogeneousSpaceSpec) -> Self {
        let odd_dimension = spec.dim() % 2 == 1;
        let berwald = spec.is_berwald();
        let reversible = spec.is_reversible();
        let radical_branch = spec.decomposition().branch;
        SearchBranches {
            odd_dimension,
            berwald,
            reversible,
            radical_branch,
            guaranteed: odd_dimension
                || berwald
                || reversible
                || radical_branch == RadicalBranch::RadicalIsM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub message: String,
    pub min_t_residual: f64,
    pub at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSearchReport {
    pub space: String,
    pub dim: usize,
    pub scheme: SamplingScheme,
    pub samples: usize,
    pub seed: u64,
    pub config: SearchConfig,
    pub branches: SearchBranches,
    /// every sampled direction is a geodesic vector
    pub all_directions_geodesic: bool,
    pub min_sampled_t_residual: f64,
    pub min_sampled_at: Vec<f64>,
    pub basins_refined: usize,
    pub basins_converged: usize,
    /// distinct sphere zeros, each certified independently for `X` and `-X`
    pub candidates: Vec<GeodesicVectorCandidate>,
    /// on the `rad(K) = 𝔪` branch, the vector orthogonal to `[𝔤, 𝔤]_𝔪` in the auxiliary product
    pub complement: Option<GeodesicVectorCandidate>,
    /// the same construction with orthogonality taken in `g_X`
    pub g_orthogonal_complement: Option<GeodesicVectorCandidate>,
    pub failure: Option<FailureRecord>,
}

impl SphereSearchReport {
    pub fn certified(&self) -> impl Iterator<Item = &GeodesicVectorCandidate> {
        self.candidates
            .iter()
            .filter(|c| c.certification.certified())
    }
}

/// Outcome of a damped Gauss–Newton refinement on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refined {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

const JACOBIAN_STEP: f64 = 1e-6;

/// Drives `|f(X)|` to zero over unit vectors, starting from `x0`.
///
/// Each step solves a Levenberg–Marquardt system in an orthonormal basis of
/// the tangent space and retracts by normalization.
pub fn refine_on_sphere<F>(f: F, x0: &[f64], tol: f64, max_iters: usize) -> Result<Refined>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = normalized(x0);
    let mut r = f(&x)?;
    let mut rn = norm(&r);
    let mut mu = 1e-6;
    let mut iterations = 0;
    while iterations < max_iters && rn > tol {
        iterations += 1;
        let basis = tangent_basis(&x);
        let m = basis.len();
        let mut jac = DMatrix::zeros(r.len(), m);
        for (j, u) in basis.iter().enumerate() {
            let plus: Vec<f64> = x
                .iter()
                .zip(u)
                .map(|(a, b)| a + JACOBIAN_STEP * b)
                .collect();
            let minus: Vec<f64> = x
                .iter()
                .zip(u)
                .map(|(a, b)| a - JACOBIAN_STEP * b)
                .collect();
            let fp = f(&normalized(&plus))?;
            let fm = f(&normalized(&minus))?;
            for i in 0..r.len() {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * JACOBIAN_STEP);
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let scale = jtj.diagonal().amax().max(1e-300);
        let mut accepted = false;
        for _ in 0..12 {
            let damped = &jtj + DMatrix::identity(m, m) * (mu * scale);
            let Some(delta) = damped.clone().cholesky().map(|c| c.solve(&(-&grad))) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = x.clone();
            for (j, u) in basis.iter().enumerate() {
                for (t, ui) in trial.iter_mut().zip(u) {
                    *t += delta[j] * ui;
                }
            }
            let trial = normalized(&trial);
            let tr = f(&trial)?;
            let trn = norm(&tr);
            if trn < rn {
                x = trial;
                r = tr;
                rn = trn;
                mu = (mu / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(Refined {
        x,
        residual: rn,
        iterations,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Samples whose `|t|` is no larger than at any of their `k` nearest neighbours.
fn local_minima(samples: &[SphereSample], k: usize) -> Vec<usize> {
    let n = samples.len();
    let k = k.min(n.saturating_sub(1));
    (0..n)
        .into_par_iter()
        .filter(|&i| {
            let mut near: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (-dot(&samples[i].x, &samples[j].x), j))
                .collect();
            if k < near.len() {
                near.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                near.truncate(k);
            }
            near.iter().all(|&(_, j)| {
                let (ti, tj) = (samples[i].t_norm, samples[j].t_norm);
                ti < tj || (ti == tj && i < j)
            })
        })
        .collect()
}

/// `a` and `b` span the same line up to `tol` radians.
fn same_line(a: &[f64], b: &[f64], tol: f64) -> bool {
    let th = angle(a, b);
    th < tol || std::f64::consts::PI - th < tol
}

/// Locates zeros of the sphere field `t` and certifies them.
pub fn find_zeros(
    spec: &HomogeneousSpaceSpec,
    config: &SearchConfig,
) -> Result<SphereSearchReport> {
    config.validate()?;
    let n = spec.dim();
    let tol = config.tolerances;
    let count = config.sample_count(n);
    let dirs = sample_sphere(n, count, config.seed);
    let samples: Vec<SphereSample> = dirs
        .par_iter()
        .map(|x| t_field(spec, x))
        .collect::<Result<_>>()?;
    let min_sample = samples
        .iter()
        .min_by(|a, b| {
            a.t_norm
                .total_cmp(&b.t_norm)
                .then_with(|| lex_cmp(&a.x, &b.x))
        })
        .expect("at least one sample");
    let all_directions = samples.iter().all(|s| s.v_norm <= tol.t_residual);

    let refined: Vec<Refined> = if all_directions {
        let take = config.all_directions_candidates.clamp(1, count);
        (0..take)
            .map(|i| {
                let s = &samples[i * count / take];
                Refined {
                    x: s.x.clone(),
                    residual: s.t_norm,
                    iterations: 0,
                }
            })
            .collect()
    } else {
        let mut basins = local_minima(&samples, 2 * n + 2);
        basins.sort_by(|&a, &b| {
            samples[a]
                .t_norm
                .total_cmp(&samples[b].t_norm)
                .then_with(|| lex_cmp(&samples[a].x, &samples[b].x))
        });
        basins.truncate(config.max_basins);
        let field = |x: &[f64]| t_field(spec, x).map(|s| s.t);
        basins
            .par_iter()
            .map(|&i| {
                refine_on_sphere(
                    field,
                    &samples[i].x,
                    config.refine_tol,
                    config.max_newton_iters,
                )
            })
            .collect::<Result<_>>()?
    };
    let basins_refined = refined.len();

    let mut converged: Vec<&Refined> = refined
        .iter()
        .filter(|r| r.residual <= tol.t_residual)
        .collect();
    let basins_converged = converged.len();
    converged.sort_by(|a, b| {
        a.residual
            .total_cmp(&b.residual)
            .then_with(|| lex_cmp(&a.x, &b.x))
    });
    let mut distinct: Vec<&Refined> = Vec::new();
    for r in converged {
        if !distinct
            .iter()
            .any(|d| same_line(&d.x, &r.x, tol.dedup_angle))
        {
            distinct.push(r);
        }
    }

    let options = config.certify_options();
    let candidates: Vec<GeodesicVectorCandidate> = distinct
        .par_iter()
        .map(|r| certify_candidate(spec, &r.x, Provenance::SphereZero, &options))
        .collect::<Result<_>>()?;
    let complement = fixed_branch_candidate(spec, &options)?;
    let g_orthogonal_complement =
        g_orthogonal_complement_candidate(spec, &options, config.max_newton_iters)?;

    let branches = SearchBranches::of(spec);
    let any_certified = candidates
        .iter()
        .chain(&complement)
        .chain(&g_orthogonal_complement)
        .any(|c| c.certification.certified());
    let failure = (branches.guaranteed && !any_certified).then(|| FailureRecord {
        message: "existence is guaranteed for this space but no direction certified; \
                  check tolerances and sampling density"
            .into(),
        min_t_residual: min_sample.t_norm,
        at: min_sample.x.clone(),
    });

    Ok(SphereSearchReport {
        space: spec.name().to_string(),
        dim: n,
        scheme: scheme_for(n),
        samples: count,
        seed: config.seed,
        config: *config,
        branches,
        all_directions_geodesic: all_directions,
        min_sampled_t_residual: min_sample.t_norm,
        min_sampled_at: min_sample.x.clone(),
        basins_refined,
        basins_converged,
        candidates,
        complement,
        g_orthogonal_complement,
        failure,
    })
}

/// Sphere-field values at `count` sample directions.
pub fn sample_sphere_field(
    spec: &HomogeneousSpaceSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<SphereSample>> {
    sample_sphere(spec.dim(), count, seed)
        .par_iter()
        .map(|x| t_field(spec, x))
        .collect()
}

/// Sampled zero sets of `t` and of the algebraic criterion, and how far each
/// is from the other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaAgreement {
    pub samples: usize,
    /// every sample is a zero of both criteria
    pub all_directions: bool,
    pub t_zeros: Vec<Vec<f64>>,
    pub algebraic_zeros: Vec<Vec<f64>>,
    /// largest angle from a `t` zero to the nearest algebraic zero reached from it
    pub t_to_algebraic: f64,
    /// largest angle from an algebraic zero to the nearest `t` zero reached from it
    pub algebraic_to_t: f64,
}

impl CriteriaAgreement {
    pub fn max_distance(&self) -> f64 {
        self.t_to_algebraic.max(self.algebraic_to_t)
    }
}

fn algebraic_vector(spec: &HomogeneousSpaceSpec, x: &[f64]) -> Result<Vec<f64>> {
    let metric = |x_m: &[f64]| spec.m_metric(x_m);
    algebraic_components(spec.algebra(), spec.decomposition(), &metric, x)
}

/// Zeros of `f` on the sphere reached from the local minima of `|f|` over the samples.
fn sampled_zeros<F>(
    f: &F,
    dirs: &[Vec<f64>],
    config: &SearchConfig,
) -> Result<(Vec<Vec<f64>>, bool)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let tol = config.tolerances.t_residual;
    let values: Vec<SphereSample> = dirs
        .par_iter()
        .map(|x| {
            let t = f(x)?;
            let t_norm = norm(&t);
            Ok(SphereSample {
                x: x.clone(),
                v: t.clone(),
                t,
                v_norm: t_norm,
                t_norm,
            })
        })
        .collect::<Result<_>>()?;
    if values.iter().all(|s| s.t_norm <= tol) {
        return Ok((dirs.to_vec(), true));
    }
    let mut basins = local_minima(&values, 2 * dirs[0].len() + 2);
    basins.sort_by(|&a, &b| {
        values[a]
            .t_norm
            .total_cmp(&values[b].t_norm)
            .then_with(|| lex_cmp(&values[a].x, &values[b].x))
    });
    basins.truncate(config.max_basins);
    let refined: Vec<Refined> = basins
        .par_iter()
        .map(|&i| refine_on_sphere(f, &values[i].x, config.refine_tol, config.max_newton_iters))
        .collect::<Result<_>>()?;
    let mut zeros: Vec<Vec<f64>> = Vec::new();
    for r in refined.into_iter().filter(|r| r.residual <= tol) {
        if !zeros
            .iter()
            .any(|z| angle(z, &r.x) < config.tolerances.dedup_angle)
        {
            zeros.push(r.x);
        }
    }
    Ok((zeros, false))
}

/// Angle from `x` to the zero of `f` found by refining from `x`; infinite if refinement fails.
fn distance_to_zero_set<F>(f: &F, x: &[f64], config: &SearchConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let r = refine_on_sphere(f, x, config.refine_tol, config.max_newton_iters)?;
    Ok(if r.residual <= config.tolerances.t_residual {
        angle(x, &r.x)
    } else {
        f64::INFINITY
    })
}

/// Compares the zero sets of `t` and of the algebraic criterion in both directions.
pub fn criteria_agreement(
    spec: &HomogeneousSpaceSpec,
    config: &SearchConfig,
) -> Result<CriteriaAgreement> {
    config.validate()?;
    let n = spec.dim();
    let count = config.sample_count(n);
    let dirs = sample_sphere(n, count, config.seed);
    let t_fn = |x: &[f64]| t_field(spec, x).map(|s| s.t);
    let l_fn = |x: &[f64]| algebraic_vector(spec, x);
    let (t_zeros, t_all) = sampled_zeros(&t_fn, &dirs, config)?;
    let (algebraic_zeros, l_all) = sampled_zeros(&l_fn, &dirs, config)?;
    let worst =
        |from: &[Vec<f64>], f: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync)| -> Result<f64> {
            let d: Vec<f64> = from
                .par_iter()
                .map(|x| distance_to_zero_set(&f, x, config))
                .collect::<Result<_>>()?;
            Ok(d.into_iter().fold(0.0, f64::max))
        };
    // a side with zeros facing an empty side disagrees outright
    let t_to_algebraic = if !t_zeros.is_empty() && algebraic_zeros.is_empty() {
        f64::INFINITY
    } else {
        worst(&t_zeros, &l_fn)?
    };
    let algebraic_to_t = if !algebraic_zeros.is_empty() && t_zeros.is_empty() {
        f64::INFINITY
    } else {
        worst(&algebraic_zeros, &t_fn)?
    };
    Ok(CriteriaAgreement {
        samples: count,
        all_directions: t_all && l_all,
        t_zeros,
        algebraic_zeros,
        t_to_algebraic,
        algebraic_to_t,
    })
}
