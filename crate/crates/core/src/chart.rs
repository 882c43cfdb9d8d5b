//! Finsler metrics on a coordinate chart and the Chern connection in natural coordinates.
//!
//! Every tensor is a function of the natural coordinates `(x, y)`; nothing is
//! stored on a bundle. Derivatives of the fundamental tensor in `x` come from a
//! single order-3 jet of `½F²` lifted in the concatenated `(x, y)` variables.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::jetcalc::Jet;
use crate::linalg::{spd_factor, Tensor3};
use crate::minkowski::{CartanTensor, FundamentalTensor, MinkowskiNorm};

pub type MetricFn = dyn Fn(&[Jet], &[Jet]) -> Jet + Send + Sync;
pub type DomainFn = dyn Fn(&[f64], &[f64]) -> bool + Send + Sync;

/// A Finsler metric `F(x, y)` on a single chart.
#[derive(Clone)]
pub struct FinslerChart {
    name: String,
    dim: usize,
    metric: Arc<MetricFn>,
    domain: Arc<DomainFn>,
    sample_box: Vec<(f64, f64)>,
}

impl fmt::Debug for FinslerChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinslerChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("sample_box", &self.sample_box)
            .finish()
    }
}

impl FinslerChart {
    /// `domain` describes where `(x, y)` is admissible; `y = 0` is always excluded.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        metric: impl Fn(&[Jet], &[Jet]) -> Jet + Send + Sync + 'static,
        domain: impl Fn(&[f64], &[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        FinslerChart {
            name: name.into(),
            dim,
            metric: Arc::new(metric),
            domain: Arc::new(domain),
            sample_box: vec![(-1.0, 1.0); dim],
        }
    }

    /// Region used by randomized checks; must lie inside the chart domain.
    pub fn with_sample_box(mut self, sample_box: Vec<(f64, f64)>) -> Self {
        assert_eq!(sample_box.len(), self.dim);
        self.sample_box = sample_box;
        self
    }

    /// The locally Minkowski chart `F(x, y) = N(y)` on all of ℝⁿ.
    pub fn flat(norm: MinkowskiNorm) -> Self {
        let dim = norm.dim();
        let name = format!("flat {}", norm.describe());
        let domain_norm = norm.clone();
        FinslerChart::new(
            name,
            dim,
            move |_x, y| norm.eval_jet(y),
            move |_x, y| domain_norm.in_domain(y),
        )
    }

    /// `F(x, y) = N(θ(x) y)` for a coframe `θ` given as a jet map `(x, y) ↦ θ(x) y`.
    pub fn from_coframe(
        name: impl Into<String>,
        norm: MinkowskiNorm,
        coframe: impl Fn(&[Jet], &[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        chart_domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        let dim = norm.dim();
        let coframe = Arc::new(coframe);
        let theta = coframe.clone();
        let domain_norm = norm.clone();
        FinslerChart::new(
            name,
            dim,
            move |x, y| norm.eval_jet(&coframe(x, y)),
            move |x, y| {
                if !chart_domain(x) {
                    return false;
                }
                let t: Vec<f64> = theta(&Jet::values(x), &Jet::values(y))
                    .iter()
                    .map(Jet::value)
                    .collect();
                domain_norm.in_domain(&t)
            },
        )
    }

    /// `F(x, y) = sqrt(yᵀ A(x) y)` with `A` given row-major as jets of `x`.
    pub fn riemannian(
        name: impl Into<String>,
        dim: usize,
        a: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        chart_domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        FinslerChart::new(
            name,
            dim,
            move |x, y| {
                let m = a(x);
                let mut acc = y[0].zero_like();
                for i in 0..dim {
                    for j in 0..dim {
                        acc = acc + &m[i * dim + j] * &y[i] * &y[j];
                    }
                }
                acc.sqrt()
            },
            move |x, y| chart_domain(x) && y.iter().any(|v| *v != 0.0),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    pub fn in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        y.iter().any(|v| *v != 0.0) && (self.domain)(x, y)
    }

    /// Whether `x` is a chart point (tested with an arbitrary nonzero direction).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            (self.domain)(x, &e)
        }
    }

    pub fn check(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(FinslerError::InvalidInput(format!(
                "expected {}-dimensional point and direction, got {} and {}",
                self.dim,
                x.len(),
                y.len()
            )));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::Domain(
                "y = 0: the Finsler metric is not smooth on the zero section".into(),
            ));
        }
        if !(self.domain)(x, y) {
            return Err(FinslerError::Domain(format!(
                "(x, y) = ({x:?}, {y:?}) is outside the smooth domain of {}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        (self.metric)(x, y)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check(x, y)?;
        Ok(self.eval_jet(&Jet::values(x), &Jet::values(y)).value())
    }

    /// Jet of `½F²` in the variables `(x, y)` (x first).
    fn lift_half_square(&self, x: &[f64], y: &[f64], order: u8) -> Result<Jet> {
        self.check(x, y)?;
        let n = self.dim;
        let mut point = x.to_vec();
        point.extend_from_slice(y);
        let vars = Jet::variables(&point, order);
        let h = self.eval_jet(&vars[..n], &vars[n..]).square() * 0.5;
        if !h.is_finite() {
            return Err(FinslerError::Domain(format!(
                "metric is not smooth at (x, y) = ({x:?}, {y:?})"
            )));
        }
        Ok(h)
    }

    /// Jet of `½F²` in `y` only, at fixed `x`.
    fn lift_fiber(&self, x: &[f64], y: &[f64], order: u8) -> Result<Jet> {
        self.check(x, y)?;
        let xs: Vec<Jet> = x
            .iter()
            .map(|v| Jet::constant(*v, self.dim, order))
            .collect();
        let h = self.eval_jet(&xs, &Jet::variables(y, order)).square() * 0.5;
        if !h.is_finite() {
            return Err(FinslerError::Domain(format!(
                "metric is not smooth at (x, y) = ({x:?}, {y:?})"
            )));
        }
        Ok(h)
    }

    pub fn fundamental_tensor(&self, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
        let h = self.lift_fiber(x, y, 2)?;
        let n = self.dim;
        let g = DMatrix::from_fn(n, n, |i, j| h.hess(i, j));
        spd_factor(&g, y)?;
        Ok(FundamentalTensor { y: y.to_vec(), g })
    }

    pub fn cartan_tensor(&self, x: &[f64], y: &[f64]) -> Result<CartanTensor> {
        let h = self.lift_fiber(x, y, 3)?;
        let n = self.dim;
        let mut c = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    c.set(i, j, k, 0.5 * h.third(i, j, k));
                }
            }
        }
        Ok(CartanTensor { y: y.to_vec(), c })
    }

    pub(crate) fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect()
    }
}

pub(crate) fn sample_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = y.iter().map(|v| v * v).sum();
        if n2 > 1e-2 {
            return y;
        }
    }
}

/// Connection coefficients at one point `(x, y)` of the slit tangent bundle.
///
/// `gamma.get(i, j, k)` is `γ^i_{jk}`, `nonlinear[(i, j)]` is `N^i_j`, and
/// `chern.get(i, j, k)` is `Γ^i_{jk}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub g: DMatrix<f64>,
    pub cartan: Tensor3,
    pub gamma: Tensor3,
    pub nonlinear: DMatrix<f64>,
    pub chern: Tensor3,
}

impl ConnectionData {
    /// Connection form coefficients `ω^i_j(W) = Γ^i_{jk} W^k`.
    pub fn connection_form(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.x.len();
        DMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.chern.get(i, j, k) * w[k]).sum()
        })
    }

    /// `Γ^i_{jk} u^j w^k`.
    pub fn contract_chern(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.x.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += self.chern.get(i, j, k) * u[j] * w[k];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Formal Christoffel symbols, nonlinear connection and Chern connection at `(x, y)`.
pub fn connection_data(chart: &FinslerChart, x: &[f64], y: &[f64]) -> Result<ConnectionData> {
    let n = chart.dim();
    let h = chart.lift_half_square(x, y, 3)?;

    let g = DMatrix::from_fn(n, n, |i, j| h.hess(n + i, n + j));
    let chol = spd_factor(&g, y)?;
    // dg[k][i][j] = ∂g_ij / ∂x^k
    let dg = |k: usize, i: usize, j: usize| h.third(k, n + i, n + j);
    let mut cartan = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                cartan.set(i, j, k, 0.5 * h.third(n + i, n + j, n + k));
            }
        }
    }

    // raises the first index of a lowered array stored as columns (j, k)
    let raise = |lowered: DMatrix<f64>| chol.solve(&lowered);

    let lowered_gamma = DMatrix::from_fn(n, n * n, |s, col| {
        let (j, k) = (col / n, col % n);
        0.5 * (dg(k, s, j) - dg(s, j, k) + dg(j, k, s))
    });
    let gamma_cols = raise(lowered_gamma);
    let mut gamma = Tensor3::zeros(n);
    for i in 0..n {
        for col in 0..n * n {
            gamma.set(i, col / n, col % n, gamma_cols[(i, col)]);
        }
    }

    // G^k = γ^k_rs y^r y^s
    let spray: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for r in 0..n {
                for s in 0..n {
                    acc += gamma.get(k, r, s) * y[r] * y[s];
                }
            }
            acc
        })
        .collect();
    let lowered_cg = DMatrix::from_fn(n, n, |s, j| {
        (0..n).map(|k| cartan.get(s, j, k) * spray[k]).sum::<f64>()
    });
    let raised_cg = raise(lowered_cg);
    let nonlinear = DMatrix::from_fn(n, n, |i, j| {
        let gy: f64 = (0..n).map(|k| gamma.get(i, j, k) * y[k]).sum();
        gy - raised_cg[(i, j)]
    });

    let lowered_corr = DMatrix::from_fn(n, n * n, |i, col| {
        let (j, k) = (col / n, col % n);
        let mut acc = 0.0;
        for s in 0..n {
            acc += cartan.get(i, j, s) * nonlinear[(s, k)]
                - cartan.get(j, k, s) * nonlinear[(s, i)]
                + cartan.get(k, i, s) * nonlinear[(s, j)];
        }
        acc
    });
    let corr = raise(lowered_corr);
    let mut chern = Tensor3::zeros(n);
    for l in 0..n {
        for col in 0..n * n {
            let (j, k) = (col / n, col % n);
            chern.set(l, j, k, gamma.get(l, j, k) - corr[(l, col)]);
        }
    }

    Ok(ConnectionData {
        x: x.to_vec(),
        y: y.to_vec(),
        g,
        cartan,
        gamma,
        nonlinear,
        chern,
    })
}

/// A vector field on the chart evaluated through jets.
pub trait VectorField: Sync {
    fn eval(&self, x: &[Jet]) -> Vec<Jet>;
}

impl<F> VectorField for F
where
    F: Fn(&[Jet]) -> Vec<Jet> + Sync,
{
    fn eval(&self, x: &[Jet]) -> Vec<Jet> {
        self(x)
    }
}

pub fn field_value<W: VectorField + ?Sized>(w: &W, x: &[f64]) -> Vec<f64> {
    w.eval(&Jet::values(x)).iter().map(Jet::value).collect()
}

/// Value and Jacobian `J[(i, k)] = ∂_k W^i` of a vector field.
pub fn field_jacobian<W: VectorField + ?Sized>(w: &W, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = x.len();
    let jets = w.eval(&Jet::variables(x, 1));
    let value = jets.iter().map(Jet::value).collect();
    let jac = DMatrix::from_fn(jets.len(), n, |i, k| jets[i].grad(k));
    (value, jac)
}

/// The directional derivative `W1(W2^i)`.
pub fn directional_derivative<A, B>(w1: &A, w2: &B, x: &[f64]) -> Vec<f64>
where
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    let a = field_value(w1, x);
    let (_, jac) = field_jacobian(w2, x);
    crate::linalg::mat_vec(&jac, &a)
}

/// The Lie bracket `[W1, W2]^i = W1(W2^i) - W2(W1^i)`.
pub fn lie_bracket<A, B>(w1: &A, w2: &B, x: &[f64]) -> Vec<f64>
where
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    let d12 = directional_derivative(w1, w2, x);
    let d21 = directional_derivative(w2, w1, x);
    d12.iter().zip(&d21).map(|(a, b)| a - b).collect()
}

/// `∇^V_{W1} W2` at `x`: the affine connection obtained by pinning the Chern connection to `V`.
pub fn covariant_derivative<V, A, B>(
    chart: &FinslerChart,
    v: &V,
    w1: &A,
    w2: &B,
    x: &[f64],
) -> Result<Vec<f64>>
where
    V: VectorField + ?Sized,
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    let vx = field_value(v, x);
    if vx.iter().all(|c| *c == 0.0) {
        return Err(FinslerError::Domain(
            "V(x) = 0: the pinned connection needs a nonzero direction".into(),
        ));
    }
    let conn = connection_data(chart, x, &vx)?;
    let w1x = field_value(w1, x);
    let w2x = field_value(w2, x);
    let deriv = directional_derivative(w1, w2, x);
    let corr = conn.contract_chern(&w2x, &w1x);
    Ok(deriv.iter().zip(&corr).map(|(a, b)| a + b).collect())
}

/// A curve `t ↦ γ(t)` in chart coordinates evaluated through jets of one variable.
pub trait Curve: Sync {
    fn eval(&self, t: &Jet) -> Vec<Jet>;
}

impl<F> Curve for F
where
    F: Fn(&Jet) -> Vec<Jet> + Sync,
{
    fn eval(&self, t: &Jet) -> Vec<Jet> {
        self(t)
    }
}

/// The field differentiated along a curve.
pub enum AlongCurve<'a> {
    /// The velocity `T = γ'` itself.
    Velocity,
    /// A field `W(t)` given in chart components.
    Field(&'a dyn Curve),
}

/// `D_T W` at `γ(t)`, computed intrinsically as `Ẇ^i + W^j T^k Γ^i_{jk}(γ, T)`.
pub fn derivative_along_curve(
    chart: &FinslerChart,
    curve: &dyn Curve,
    field: AlongCurve<'_>,
    t: f64,
) -> Result<Vec<f64>> {
    let pos = curve.eval(&Jet::variable(t, 0, 1, 2));
    let x: Vec<f64> = pos.iter().map(Jet::value).collect();
    let vel: Vec<f64> = pos.iter().map(|p| p.grad(0)).collect();
    if vel.iter().all(|c| *c == 0.0) {
        return Err(FinslerError::Domain(format!(
            "curve velocity vanishes at t = {t}"
        )));
    }
    let (w, wdot): (Vec<f64>, Vec<f64>) = match field {
        AlongCurve::Velocity => (vel.clone(), pos.iter().map(|p| p.hess(0, 0)).collect()),
        AlongCurve::Field(f) => {
            let jets = f.eval(&Jet::variable(t, 0, 1, 1));
            (
                jets.iter().map(Jet::value).collect(),
                jets.iter().map(|j| j.grad(0)).collect(),
            )
        }
    };
    let conn = connection_data(chart, &x, &vel)?;
    let corr = conn.contract_chern(&w, &vel);
    Ok(wdot.iter().zip(&corr).map(|(a, b)| a + b).collect())
}

/// Even/odd symmetry residuals under `y ↦ -y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub samples: usize,
    /// max |F(x,y) - F(x,-y)|
    pub f_asymmetry: f64,
    pub g_even: f64,
    pub cartan_odd: f64,
    pub gamma_even: f64,
    pub nonlinear_odd: f64,
    pub chern_even: f64,
    pub reversible: bool,
}

impl ReversibilityReport {
    pub fn max_table_residual(&self) -> f64 {
        [
            self.g_even,
            self.cartan_odd,
            self.gamma_even,
            self.nonlinear_odd,
            self.chern_even,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn reversibility_check(
    chart: &FinslerChart,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ReversibilityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ReversibilityReport {
        samples,
        f_asymmetry: 0.0,
        g_even: 0.0,
        cartan_odd: 0.0,
        gamma_even: 0.0,
        nonlinear_odd: 0.0,
        chern_even: 0.0,
        reversible: true,
    };
    for _ in 0..samples {
        let x = chart.sample_point(&mut rng);
        let y = sample_direction(&mut rng, chart.dim());
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let fp = chart.eval(&x, &y)?;
        let fm = chart.eval(&x, &neg)?;
        rep.f_asymmetry = rep.f_asymmetry.max((fp - fm).abs());
        let a = connection_data(chart, &x, &y)?;
        let b = connection_data(chart, &x, &neg)?;
        rep.g_even = rep.g_even.max((&a.g - &b.g).amax());
        rep.cartan_odd = rep.cartan_odd.max(a.cartan.max_diff(&b.cartan, true));
        rep.gamma_even = rep.gamma_even.max(a.gamma.max_diff(&b.gamma, false));
        rep.nonlinear_odd = rep.nonlinear_odd.max((&a.nonlinear + &b.nonlinear).amax());
        rep.chern_even = rep.chern_even.max(a.chern.max_diff(&b.chern, false));
    }
    rep.reversible = rep.f_asymmetry <= tol && rep.max_table_residual() <= tol;
    Ok(rep)
}

/// Direction dependence of the Chern coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerwaldReport {
    pub points: usize,
    pub directions: usize,
    /// max over sampled x and (i,j,k) of max_y Γ - min_y Γ
    pub max_spread: f64,
    pub worst_point: Vec<f64>,
    pub berwald: bool,
}

pub fn berwald_check(
    chart: &FinslerChart,
    points: usize,
    directions: usize,
    seed: u64,
    tol: f64,
) -> Result<BerwaldReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = chart.dim();
    let mut max_spread = 0.0;
    let mut worst_point = vec![];
    for _ in 0..points {
        let x = chart.sample_point(&mut rng);
        let mut lo = vec![f64::INFINITY; n * n * n];
        let mut hi = vec![f64::NEG_INFINITY; n * n * n];
        for _ in 0..directions {
            let y = sample_direction(&mut rng, n);
            let conn = connection_data(chart, &x, &y)?;
            for (idx, v) in conn.chern.as_slice().iter().enumerate() {
                lo[idx] = lo[idx].min(*v);
                hi[idx] = hi[idx].max(*v);
            }
        }
        let spread = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        if spread > max_spread || worst_point.is_empty() {
            max_spread = spread;
            worst_point = x;
        }
    }
    Ok(BerwaldReport {
        points,
        directions,
        max_spread,
        worst_point,
        berwald: max_spread <= tol,
    })
}
