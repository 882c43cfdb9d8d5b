use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::algebra::{reductive_split, LieAlgebraData, RadicalBranch, ReductiveDecomposition};
use super::family::Family;
use crate::chart::{sample_direction, FinslerChart};
use crate::error::{FinslerError, Result};
use crate::jetcalc::Jet;
use crate::linalg::{bilinear, mat_vec};
use crate::minkowski::MinkowskiNorm;

/// A left-invariant Finsler metric `F(x, y) = N(θ(x) y)` on one of the built-in groups.
///
/// The group acts simply transitively, so the isotropy algebra is trivial and
/// `𝔪 = 𝔤`. Algebra vectors are identified with tangent vectors at the origin
/// through the Killing fields, `X ↦ Σ X_i K_i(p)`.
#[derive(Debug, Clone)]
pub struct HomogeneousSpaceSpec {
    name: String,
    family: Family,
    norm: MinkowskiNorm,
    chart: FinslerChart,
    origin: Vec<f64>,
    algebra: LieAlgebraData,
    decomposition: ReductiveDecomposition,
}

/// One line of the built-in catalogue.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub name: String,
    pub family: Family,
    pub dim: usize,
    pub metric: String,
    pub reversible: bool,
    pub berwald: bool,
    pub odd_dimension: bool,
    pub radical_branch: RadicalBranch,
}

const BUILTINS: &[&str] = &[
    "flat",
    "flat-quartic",
    "flat-randers",
    "heisenberg",
    "heisenberg-randers",
    "heisenberg-quartic",
    "su2",
    "su2-randers",
    "hyperbolic",
    "hyperbolic-randers",
    "hyperbolic-quartic",
];

impl HomogeneousSpaceSpec {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        norm: MinkowskiNorm,
        origin: Option<Vec<f64>>,
    ) -> Result<Self> {
        let dim = norm.dim();
        if let Some(fixed) = family.fixed_dim() {
            if fixed != dim {
                return Err(FinslerError::InvalidInput(format!(
                    "family {} is {fixed}-dimensional but the norm is {dim}-dimensional",
                    family.name()
                )));
            }
        }
        if dim == 0 {
            return Err(FinslerError::InvalidInput(
                "dimension must be positive".into(),
            ));
        }
        let origin = origin.unwrap_or_else(|| family.default_origin(dim));
        if origin.len() != dim || !family.chart_contains(&origin) {
            return Err(FinslerError::Domain(format!(
                "origin {origin:?} is not a point of the {} chart",
                family.name()
            )));
        }
        let name = name.into();
        let chart = FinslerChart::from_coframe(
            name.clone(),
            norm.clone(),
            move |x, y| family.coframe(x, y),
            move |x| family.chart_contains(x),
        )
        .with_sample_box(family.sample_box(dim));
        let algebra = family.algebra(dim);
        let decomposition = reductive_split(&algebra, &[])?;
        let spec = HomogeneousSpaceSpec {
            name,
            family,
            norm,
            chart,
            origin,
            algebra,
            decomposition,
        };
        let kp = spec.killing_matrix(&spec.origin);
        if kp.clone().svd(false, false).rank(1e-10) < dim {
            return Err(FinslerError::Decomposition(
                "Killing fields are linearly dependent at the origin".into(),
            ));
        }
        Ok(spec)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        BUILTINS
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let randers = |b: Vec<f64>| {
            let n = b.len();
            MinkowskiNorm::randers(DMatrix::identity(n, n), DVector::from_vec(b))
        };
        let (family, norm) = match name {
            "flat" => (Family::Flat, MinkowskiNorm::euclidean(3)),
            "flat-quartic" => (Family::Flat, MinkowskiNorm::quartic(3, 0.5)?),
            "flat-randers" => (Family::Flat, randers(vec![0.2, 0.0, 0.0])?),
            "heisenberg" => (Family::Heisenberg, MinkowskiNorm::euclidean(3)),
            "heisenberg-randers" => (Family::Heisenberg, randers(vec![0.0, 0.0, 0.3])?),
            "heisenberg-quartic" => (Family::Heisenberg, MinkowskiNorm::quartic(3, 0.5)?),
            "su2" => (Family::Su2, MinkowskiNorm::euclidean(3)),
            "su2-randers" => (Family::Su2, randers(vec![0.0, 0.0, 0.3])?),
            "hyperbolic" => (Family::Hyperbolic, MinkowskiNorm::euclidean(2)),
            "hyperbolic-randers" => (Family::Hyperbolic, randers(vec![0.3, 0.0])?),
            "hyperbolic-quartic" => (Family::Hyperbolic, MinkowskiNorm::quartic(2, 0.5)?),
            other => {
                return Err(FinslerError::InvalidInput(format!(
                    "unknown built-in space {other:?}; known: {}",
                    BUILTINS.join(", ")
                )))
            }
        };
        Self::new(name, family, norm, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn norm(&self) -> &MinkowskiNorm {
        &self.norm
    }

    pub fn chart(&self) -> &FinslerChart {
        &self.chart
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn algebra(&self) -> &LieAlgebraData {
        &self.algebra
    }

    pub fn decomposition(&self) -> &ReductiveDecomposition {
        &self.decomposition
    }

    pub fn is_reversible(&self) -> bool {
        self.norm.is_reversible()
    }

    /// Direction-independent Chern coefficients, known structurally.
    ///
    /// Locally Minkowski and Riemannian metrics are Berwald; other families
    /// are not claimed to be (use `chart::berwald_check` to test numerically).
    pub fn is_berwald(&self) -> bool {
        self.family == Family::Flat || self.norm.is_quadratic()
    }

    pub fn summary(&self) -> SpaceSummary {
        SpaceSummary {
            name: self.name.clone(),
            family: self.family,
            dim: self.dim(),
            metric: self.norm.describe(),
            reversible: self.is_reversible(),
            berwald: self.is_berwald(),
            odd_dimension: self.dim() % 2 == 1,
            radical_branch: self.decomposition.branch,
        }
    }

    /// Columns `K_1(x), ..., K_n(x)`.
    pub fn killing_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let xs = Jet::values(x);
        let cols: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                DVector::from_iterator(n, self.family.killing_field(i, &xs).iter().map(Jet::value))
            })
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// The fundamental field `X* = Σ X_i K_i` as a jet-evaluable vector field.
    pub fn fundamental_field(&self, generator: &[f64]) -> impl Fn(&[Jet]) -> Vec<Jet> + Sync + '_ {
        let generator = generator.to_vec();
        move |x: &[Jet]| {
            let n = x.len();
            let mut acc: Vec<Jet> = (0..n).map(|_| x[0].zero_like()).collect();
            for (i, c) in generator.iter().enumerate() {
                if *c == 0.0 {
                    continue;
                }
                let k = self.family.killing_field(i, x);
                for (a, v) in acc.iter_mut().zip(k) {
                    *a = &*a + v * *c;
                }
            }
            acc
        }
    }

    /// `X*(x)`.
    pub fn fundamental_vector(&self, generator: &[f64], x: &[f64]) -> Vec<f64> {
        mat_vec(&self.killing_matrix(x), generator)
    }

    /// `exp(tX)(p)`.
    pub fn orbit(&self, generator: &[f64], t: f64) -> Result<Vec<f64>> {
        self.family.flow(generator, t, &self.origin)
    }

    pub fn flow(&self, generator: &[f64], t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.family.flow(generator, t, x)
    }

    pub fn pushforward(&self, generator: &[f64], t: f64, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.family.flow_pushforward(generator, t, x, v)
    }

    /// Fundamental tensor of the invariant norm on `𝔪`, in `𝔪` coordinates, at `X_𝔪`.
    pub fn m_metric(&self, x_m: &[f64]) -> Result<DMatrix<f64>> {
        let tangent = mat_vec(
            &self.killing_matrix(&self.origin),
            &self.decomposition.embed_m(x_m),
        );
        let g = self.chart.fundamental_tensor(&self.origin, &tangent)?.g;
        let m = self.killing_matrix(&self.origin) * &self.decomposition.m_basis;
        Ok(m.transpose() * g * m)
    }
}

/// `exp(tX)(p)` in chart coordinates.
pub fn orbit_curve(spec: &HomogeneousSpaceSpec, generator: &[f64], t: f64) -> Result<Vec<f64>> {
    spec.orbit(generator, t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// samples dropped because the orbit left the chart
    pub skipped: usize,
    /// max |F(φ_t p, φ_t* V) - F(p, V)|
    pub f_residual: f64,
    /// max |g_(γ(t), X*)(φ_t* U, φ_t* V) - g_(p, X*)(U, V)|
    pub g_residual: f64,
}

/// Checks that `exp(tX)` preserves `F` and the fundamental tensor along the orbit, for `|t| ≤ t_max`.
pub fn isometry_invariance(
    spec: &HomogeneousSpaceSpec,
    generator: &[f64],
    t_max: f64,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let n = spec.dim();
    let p = spec.origin();
    let chart = spec.chart();
    let xp = spec.fundamental_vector(generator, p);
    let g0 = if xp.iter().any(|v| *v != 0.0) {
        Some(chart.fundamental_tensor(p, &xp)?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = InvarianceReport {
        samples,
        skipped: 0,
        f_residual: 0.0,
        g_residual: 0.0,
    };
    for s in 0..samples {
        let t = if s == 0 {
            0.0
        } else {
            rng.random_range(-t_max..=t_max)
        };
        let u = sample_direction(&mut rng, n);
        let v = sample_direction(&mut rng, n);
        let moved = match spec.orbit(generator, t) {
            Ok(x) => x,
            Err(FinslerError::ChartExit { .. }) => {
                rep.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let pu = spec.pushforward(generator, t, p, &u)?;
        let pv = spec.pushforward(generator, t, p, &v)?;
        let f_moved = chart.eval(&moved, &pv)?;
        let f_base = chart.eval(p, &v)?;
        rep.f_residual = rep.f_residual.max((f_moved - f_base).abs());
        if let Some(g0) = &g0 {
            let x_moved = spec.fundamental_vector(generator, &moved);
            let g1 = chart.fundamental_tensor(&moved, &x_moved)?;
            let lhs = bilinear(&g1.g, &pu, &pv);
            let rhs = bilinear(&g0.g, &u, &v);
            rep.g_residual = rep.g_residual.max((lhs - rhs).abs());
        }
    }
    Ok(rep)
}
