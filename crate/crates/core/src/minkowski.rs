//! Minkowski norms and their fundamental and Cartan tensors.
//!
//! For a norm `F` on a vector space, the fundamental tensor is the Hessian of
//! `½F²` and the Cartan tensor is the third derivative of `¼F²`, both taken at
//! a nonzero direction `y`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::jetcalc::{linear_form, quadratic_form, Jet, JetFn};
use crate::linalg::{bilinear, spd_factor, Tensor3};

/// A user-supplied smooth norm evaluated through jets.
pub trait CustomNorm: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, y: &[Jet]) -> Jet;

    /// Smoothness domain; the default is every nonzero vector.
    fn in_domain(&self, y: &[f64]) -> bool {
        y.iter().any(|v| *v != 0.0)
    }

    fn is_reversible(&self) -> bool;

    fn name(&self) -> String;
}

/// `F(y)² = |y|² + λ (Σ y_i⁴)^{1/2}`: a reversible, non-quadratic norm.
///
/// Both summands are squares of norms, so the Hessian of `½F²` is the identity
/// plus a positive semidefinite term.
#[derive(Debug, Clone)]
pub struct QuarticBlend {
    pub dim: usize,
    pub lambda: f64,
}

impl CustomNorm for QuarticBlend {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[Jet]) -> Jet {
        let sq: Vec<Jet> = y.iter().map(|v| v * v).collect();
        let mut quad = sq[0].clone();
        let mut quart = &sq[0] * &sq[0];
        for s in &sq[1..] {
            quad = quad + s;
            quart = quart + s * s;
        }
        (quad + quart.sqrt() * self.lambda).sqrt()
    }

    fn is_reversible(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("quartic(lambda={})", self.lambda)
    }
}

#[derive(Debug, Clone)]
pub enum NormKind {
    /// `F(y) = sqrt(yᵀ A y)`.
    Riemannian {
        a: DMatrix<f64>,
    },
    /// `F(y) = sqrt(yᵀ A y) + b·y` with `bᵀ A⁻¹ b < 1`.
    Randers {
        a: DMatrix<f64>,
        b: DVector<f64>,
    },
    Custom(Arc<dyn CustomNorm>),
}

#[derive(Debug, Clone)]
pub struct MinkowskiNorm {
    dim: usize,
    kind: NormKind,
    a_rows: Vec<f64>,
    b: Vec<f64>,
}

fn check_spd(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(FinslerError::InvalidInput(
            "metric matrix must be square".into(),
        ));
    }
    if (a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
        return Err(FinslerError::InvalidInput(
            "metric matrix must be symmetric".into(),
        ));
    }
    spd_factor(a, &[]).map_err(|_| {
        FinslerError::InvalidInput("metric matrix must be positive definite".into())
    })?;
    Ok(())
}

impl MinkowskiNorm {
    pub fn euclidean(dim: usize) -> Self {
        Self::riemannian(DMatrix::identity(dim, dim)).expect("identity is positive definite")
    }

    pub fn riemannian(a: DMatrix<f64>) -> Result<Self> {
        check_spd(&a)?;
        let dim = a.nrows();
        Ok(MinkowskiNorm {
            dim,
            a_rows: a.transpose().as_slice().to_vec(),
            b: vec![0.0; dim],
            kind: NormKind::Riemannian { a },
        })
    }

    pub fn randers(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        check_spd(&a)?;
        let dim = a.nrows();
        if b.len() != dim {
            return Err(FinslerError::InvalidInput(format!(
                "randers covector has length {}, expected {dim}",
                b.len()
            )));
        }
        let ainv_b = a
            .clone()
            .cholesky()
            .expect("checked positive definite")
            .solve(&b);
        let bnorm2 = b.dot(&ainv_b);
        if bnorm2 >= 1.0 {
            return Err(FinslerError::InvalidInput(format!(
                "randers covector must satisfy b^T A^-1 b < 1, got {bnorm2}"
            )));
        }
        Ok(MinkowskiNorm {
            dim,
            a_rows: a.transpose().as_slice().to_vec(),
            b: b.as_slice().to_vec(),
            kind: NormKind::Randers { a, b },
        })
    }

    /// Wraps a custom norm after checking positivity, homogeneity and convexity at sampled directions.
    pub fn custom(norm: Arc<dyn CustomNorm>) -> Result<Self> {
        let dim = norm.dim();
        let out = MinkowskiNorm {
            dim,
            kind: NormKind::Custom(norm),
            a_rows: vec![],
            b: vec![0.0; dim],
        };
        out.validate_samples(64, 0)?;
        Ok(out)
    }

    pub fn quartic(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(FinslerError::InvalidInput(format!(
                "quartic blend weight must be non-negative, got {lambda}"
            )));
        }
        Self::custom(Arc::new(QuarticBlend { dim, lambda }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// Randers covector, zero for other kinds.
    pub fn drift(&self) -> &[f64] {
        &self.b
    }

    pub fn eval_jet(&self, y: &[Jet]) -> Jet {
        match &self.kind {
            NormKind::Riemannian { .. } => quadratic_form(&self.a_rows, y).sqrt(),
            NormKind::Randers { .. } => {
                quadratic_form(&self.a_rows, y).sqrt() + linear_form(&self.b, y)
            }
            NormKind::Custom(c) => c.eval(y),
        }
    }

    pub fn in_domain(&self, y: &[f64]) -> bool {
        match &self.kind {
            NormKind::Custom(c) => c.in_domain(y),
            _ => y.iter().any(|v| *v != 0.0),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        self.check_direction(y)?;
        Ok(self.eval_jet(&Jet::values(y)).value())
    }

    pub(crate) fn check_direction(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(FinslerError::InvalidInput(format!(
                "direction has length {}, expected {}",
                y.len(),
                self.dim
            )));
        }
        if !self.in_domain(y) {
            return Err(FinslerError::Domain(format!(
                "Minkowski norm is not smooth at y = {y:?}"
            )));
        }
        Ok(())
    }

    /// `F(y) = F(-y)` for every `y`.
    pub fn is_reversible(&self) -> bool {
        match &self.kind {
            NormKind::Riemannian { .. } => true,
            NormKind::Randers { .. } => self.b.iter().all(|v| *v == 0.0),
            NormKind::Custom(c) => c.is_reversible(),
        }
    }

    /// Whether `F²` is a quadratic form.
    pub fn is_quadratic(&self) -> bool {
        match &self.kind {
            NormKind::Riemannian { .. } => true,
            NormKind::Randers { .. } => self.b.iter().all(|v| *v == 0.0),
            NormKind::Custom(_) => false,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            NormKind::Riemannian { .. } => "riemannian".into(),
            NormKind::Randers { .. } => format!("randers(b={:?})", self.b),
            NormKind::Custom(c) => c.name(),
        }
    }

    /// Checks `F > 0`, positive homogeneity and positive definiteness of `g` at random directions.
    pub fn validate_samples(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let y: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if !self.in_domain(&y) {
                continue;
            }
            let lambda: f64 = rng.random_range(0.1..10.0);
            let f = self.eval(&y)?;
            if f.is_nan() || f <= 0.0 {
                return Err(FinslerError::MetricValidity {
                    y,
                    reason: format!("norm is not positive: F = {f}"),
                });
            }
            let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let fs = self.eval(&scaled)?;
            if (fs - lambda * f).abs() > 1e-10 * lambda * f {
                return Err(FinslerError::MetricValidity {
                    y,
                    reason: format!(
                        "not positively homogeneous: F(λy) = {fs}, λF(y) = {}",
                        lambda * f
                    ),
                });
            }
            fundamental_tensor(self, &y)?;
        }
        Ok(())
    }
}

struct HalfSquare<'a>(&'a MinkowskiNorm);

impl JetFn for HalfSquare<'_> {
    fn eval(&self, y: &[Jet]) -> Jet {
        self.0.eval_jet(y).square() * 0.5
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        self.0.in_domain(y)
    }
}

/// `½F²` of the norm as a jet function of `y`.
pub fn half_square(norm: &MinkowskiNorm) -> impl JetFn + '_ {
    HalfSquare(norm)
}

/// `g_y`: Hessian of `½F²` at a nonzero direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalTensor {
    pub y: Vec<f64>,
    pub g: DMatrix<f64>,
}

impl FundamentalTensor {
    pub fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.g, u, v)
    }
}

/// `C_y`: third derivatives of `¼F²` at a nonzero direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartanTensor {
    pub y: Vec<f64>,
    pub c: Tensor3,
}

fn lift(norm: &MinkowskiNorm, y: &[f64], order: u8) -> Result<Jet> {
    norm.check_direction(y)?;
    crate::jetcalc::jet_lift(&half_square(norm), y, order)
}

pub fn fundamental_tensor(norm: &MinkowskiNorm, y: &[f64]) -> Result<FundamentalTensor> {
    let jet = lift(norm, y, 2)?;
    let n = norm.dim();
    let g = DMatrix::from_fn(n, n, |i, j| jet.hess(i, j));
    spd_factor(&g, y)?;
    Ok(FundamentalTensor { y: y.to_vec(), g })
}

pub fn cartan_tensor(norm: &MinkowskiNorm, y: &[f64]) -> Result<CartanTensor> {
    let jet = lift(norm, y, 3)?;
    let n = norm.dim();
    let mut c = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c.set(i, j, k, 0.5 * jet.third(i, j, k));
            }
        }
    }
    Ok(CartanTensor { y: y.to_vec(), c })
}

/// Residuals of the Euler identities `g_y(y,y) = F(y)²` and `y^i C_ijk = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerReport {
    pub f: f64,
    pub g_yy: f64,
    pub fundamental_residual: f64,
    pub cartan_residual: f64,
}

pub fn euler_check(norm: &MinkowskiNorm, y: &[f64]) -> Result<EulerReport> {
    let f = norm.eval(y)?;
    let g = fundamental_tensor(norm, y)?;
    let c = cartan_tensor(norm, y)?;
    let g_yy = g.apply(y, y);
    Ok(EulerReport {
        f,
        g_yy,
        fundamental_residual: (g_yy - f * f).abs(),
        cartan_residual: c.c.contract_first(y).amax(),
    })
}
