//! Space-spec files and run settings.
//!
//! A config file is TOML:
//!
//! ```toml
//! name = "my-heisenberg"          # optional, defaults to the family name
//! family = "heisenberg"           # flat | heisenberg | su2 | hyperbolic | custom
//! dim = 3                         # only needed for flat spaces without a matrix
//! origin = [0.0, 0.0, 0.0]        # optional
//!
//! [metric]
//! type = "randers"                # riemannian | randers | custom-builtin
//! A = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
//! b = [0.0, 0.0, 0.3]
//!
//! [algebra]                       # required for family = "custom"
//! structure_constants = [...]     # [i][j] holds the coordinates of [e_i, e_j]
//! h_basis = []
//!
//! [run]
//! samples = 2000
//! step = 1e-3
//! seed = 0
//! window = 1.0
//!
//! [tolerances]
//! t_residual = 1e-8
//! ```

use std::path::Path;

use finsler_core::homspace::{
    reductive_split, Family, HomogeneousSpaceSpec, LieAlgebraData, ReductiveDecomposition,
};
use finsler_core::minkowski::MinkowskiNorm;
use finsler_core::search::SearchConfig;
use finsler_core::{FinslerError, Tolerances};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: Option<String>,
    pub family: String,
    pub dim: Option<usize>,
    pub origin: Option<Vec<f64>>,
    pub metric: MetricConfig,
    pub algebra: Option<AlgebraConfig>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    Riemannian {
        #[serde(rename = "A")]
        a: Option<Vec<Vec<f64>>>,
    },
    Randers {
        #[serde(rename = "A")]
        a: Option<Vec<Vec<f64>>>,
        b: Vec<f64>,
    },
    CustomBuiltin {
        /// `euclidean` or `quartic`
        custom: String,
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub structure_constants: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub h_basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub samples: Option<usize>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub window: Option<f64>,
}

/// A space given only by its Lie algebra and an invariant norm on `𝔪`.
#[derive(Debug, Clone)]
pub struct AlgebraicSpace {
    pub name: String,
    pub algebra: LieAlgebraData,
    pub decomposition: ReductiveDecomposition,
    pub norm: MinkowskiNorm,
}

#[derive(Debug, Clone)]
pub enum Space {
    Chart(HomogeneousSpaceSpec),
    Algebraic(AlgebraicSpace),
}

impl Space {
    pub fn name(&self) -> &str {
        match self {
            Space::Chart(s) => s.name(),
            Space::Algebraic(a) => &a.name,
        }
    }

    pub fn chart(&self, command: &str) -> Result<&HomogeneousSpaceSpec, CliError> {
        match self {
            Space::Chart(s) => Ok(s),
            Space::Algebraic(a) => Err(FinslerError::Unsupported(format!(
                "`{command}` needs a chart, but {} is a custom algebra",
                a.name
            ))
            .into()),
        }
    }
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage("metric matrix A must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl MetricConfig {
    fn norm(&self, dim: Option<usize>) -> Result<MinkowskiNorm, CliError> {
        let need_dim = || {
            dim.ok_or_else(|| CliError::Usage("metric needs a matrix A or a top-level dim".into()))
        };
        let norm = match self {
            MetricConfig::Riemannian { a: Some(a) } => MinkowskiNorm::riemannian(matrix(a)?)?,
            MetricConfig::Riemannian { a: None } => MinkowskiNorm::euclidean(need_dim()?),
            MetricConfig::Randers { a, b } => {
                let a = match a {
                    Some(a) => matrix(a)?,
                    None => DMatrix::identity(b.len(), b.len()),
                };
                MinkowskiNorm::randers(a, DVector::from_column_slice(b))?
            }
            MetricConfig::CustomBuiltin { custom, lambda } => match custom.as_str() {
                "euclidean" => MinkowskiNorm::euclidean(need_dim()?),
                "quartic" => MinkowskiNorm::quartic(need_dim()?, lambda.unwrap_or(0.5))?,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown custom-builtin norm {other:?}; known: euclidean, quartic"
                    )))
                }
            },
        };
        if let Some(d) = dim {
            if norm.dim() != d {
                return Err(CliError::Usage(format!(
                    "metric is {}-dimensional but the space is {d}-dimensional",
                    norm.dim()
                )));
            }
        }
        Ok(norm)
    }
}

fn parse_family(name: &str) -> Result<Option<Family>, CliError> {
    Ok(Some(match name {
        "flat" => Family::Flat,
        "heisenberg" => Family::Heisenberg,
        "su2" => Family::Su2,
        "hyperbolic" => Family::Hyperbolic,
        "custom" => return Ok(None),
        other => {
            return Err(CliError::Usage(format!(
                "unknown family {other:?}; known: flat, heisenberg, su2, hyperbolic, custom"
            )))
        }
    }))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn build_space(&self) -> Result<Space, CliError> {
        let family = parse_family(&self.family)?;
        let name = self.name.clone().unwrap_or_else(|| self.family.clone());
        let table = match &self.algebra {
            Some(alg) => Some(LieAlgebraData::from_table(&alg.structure_constants, None)?),
            None => None,
        };
        match family {
            Some(family) => {
                if let Some(alg) = &self.algebra {
                    if !alg.h_basis.is_empty() {
                        return Err(CliError::Usage(format!(
                            "the {} family acts simply transitively; h_basis must be empty",
                            family.name()
                        )));
                    }
                }
                let dim = self.dim.or(family.fixed_dim());
                let norm = self.metric.norm(dim)?;
                if let Some(table) = &table {
                    let expected = family.algebra(norm.dim());
                    if !same_algebra(table, &expected) {
                        return Err(CliError::Usage(format!(
                            "structure constants do not match the {} algebra",
                            family.name()
                        )));
                    }
                }
                let spec = HomogeneousSpaceSpec::new(name, family, norm, self.origin.clone())?;
                Ok(Space::Chart(spec))
            }
            None => {
                let (Some(algebra), Some(alg)) = (table, &self.algebra) else {
                    return Err(CliError::Usage(
                        "family \"custom\" requires an [algebra] table".into(),
                    ));
                };
                if self.origin.is_some() {
                    return Err(CliError::Usage(
                        "a custom algebra has no chart, so origin is not allowed".into(),
                    ));
                }
                let decomposition = reductive_split(&algebra, &alg.h_basis)?;
                let norm = self
                    .metric
                    .norm(Some(self.dim.unwrap_or(decomposition.dim_m())))?;
                if norm.dim() != decomposition.dim_m() {
                    return Err(CliError::Usage(format!(
                        "the norm must live on m, which is {}-dimensional",
                        decomposition.dim_m()
                    )));
                }
                Ok(Space::Algebraic(AlgebraicSpace {
                    name,
                    algebra,
                    decomposition,
                    norm,
                }))
            }
        }
    }
}

fn same_algebra(a: &LieAlgebraData, b: &LieAlgebraData) -> bool {
    let n = a.dim();
    if n != b.dim() {
        return false;
    }
    (0..n).all(|i| {
        (0..n).all(|j| (0..n).all(|k| (a.constant(i, j, k) - b.constant(i, j, k)).abs() <= 1e-12))
    })
}

/// Settings after applying command-line overrides to the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub search: SearchConfig,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Vec<String>,
}

fn set_tolerance(tol: &mut Tolerances, spec: &str) -> Result<(), CliError> {
    let (key, value) = match spec.split_once('=') {
        Some((k, v)) => (k.trim(), v.trim()),
        None => ("t_residual", spec.trim()),
    };
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Usage(format!("tolerance {key}: {value:?} is not a number")))?;
    let slot = match key {
        "structural" => &mut tol.structural,
        "fd_oracle" => &mut tol.fd_oracle,
        "t_residual" => &mut tol.t_residual,
        "algebraic" => &mut tol.algebraic,
        "sup_distance" => &mut tol.sup_distance,
        "speed_drift" => &mut tol.speed_drift,
        "dedup_angle" => &mut tol.dedup_angle,
        "berwald_spread" => &mut tol.berwald_spread,
        "reversibility" => &mut tol.reversibility,
        other => return Err(CliError::Usage(format!("unknown tolerance {other:?}"))),
    };
    *slot = v;
    Ok(())
}

impl Settings {
    pub fn resolve(config: Option<&RunConfig>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut search = SearchConfig::default();
        if let Some(c) = config {
            search.samples = c.run.samples;
            search.step = c.run.step.unwrap_or(search.step);
            search.seed = c.run.seed.unwrap_or(search.seed);
            search.window = c.run.window.unwrap_or(search.window);
            search.tolerances = c.tolerances;
        }
        if overrides.samples.is_some() {
            search.samples = overrides.samples;
        }
        search.step = overrides.step.unwrap_or(search.step);
        search.seed = overrides.seed.unwrap_or(search.seed);
        for t in &overrides.tol {
            set_tolerance(&mut search.tolerances, t)?;
        }
        search.validate().map_err(|e| match e {
            FinslerError::InvalidInput(m) => CliError::Usage(m),
            other => other.into(),
        })?;
        Ok(Settings { search })
    }
}
