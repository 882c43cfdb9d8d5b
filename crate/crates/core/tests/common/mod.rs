//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use finsler_core::chart::FinslerChart;
use finsler_core::jetcalc::{default_step, fd_derivative, Jet};

/// Second-derivative step: with one Richardson level the truncation error is
/// `O(h⁴)`, and roundoff `O(ε/h²)` is still below 1e-9 here.
const HESSIAN_STEP: f64 = 2e-3;
use finsler_core::linalg::Tensor3;
use finsler_core::minkowski::MinkowskiNorm;
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A direction with components uniform in [-1, 1], kept away from zero.
pub fn random_direction(rng: &mut impl RngExt, dim: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if y.iter().map(|v| v * v).sum::<f64>() > 0.04 {
            return y;
        }
    }
}

pub fn random_point(rng: &mut impl RngExt, chart: &FinslerChart) -> Vec<f64> {
    chart
        .sample_box()
        .iter()
        .map(|(lo, hi)| rng.random_range(*lo..*hi))
        .collect()
}

pub fn random_spd(rng: &mut impl RngExt, dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(dim, dim) * 0.5
}

pub fn randers(b: &[f64]) -> MinkowskiNorm {
    let n = b.len();
    MinkowskiNorm::randers(DMatrix::identity(n, n), DVector::from_column_slice(b)).unwrap()
}

/// `½F(x, ·)²` with `x` frozen, as a function of the fibre coordinates.
fn fibre_half_square<'a>(chart: &'a FinslerChart, x: &'a [f64]) -> impl Fn(&[Jet]) -> Jet + 'a {
    move |y: &[Jet]| {
        let xs: Vec<Jet> = x
            .iter()
            .map(|v| Jet::constant(*v, y[0].nvars(), y[0].order()))
            .collect();
        chart.eval_jet(&xs, y).square() * 0.5
    }
}

/// `g_ij` by finite differences of `½F²`.
pub fn fd_fundamental(chart: &FinslerChart, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let f = fibre_half_square(chart, x);
    let n = y.len();
    DMatrix::from_fn(n, n, |i, j| {
        fd_derivative(&f, y, &[i, j], HESSIAN_STEP).unwrap()
    })
}

/// `C_ijk` by finite differences of `½F²`.
pub fn fd_cartan(chart: &FinslerChart, x: &[f64], y: &[f64]) -> Tensor3 {
    let f = fibre_half_square(chart, x);
    let n = y.len();
    let mut c = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c.set(
                    i,
                    j,
                    k,
                    0.5 * fd_derivative(&f, y, &[i, j, k], default_step(3)).unwrap(),
                );
            }
        }
    }
    c
}

/// Five-point central difference of a vector-valued function of one variable.
pub fn central_diff<F: Fn(f64) -> Vec<f64>>(f: F, t: f64, h: f64) -> Vec<f64> {
    let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
    (0..a.len())
        .map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h))
        .collect()
}

/// Levi-Civita symbols of `|y|²/u₂²` on the upper half-plane.
pub fn half_plane_levi_civita(x: &[f64]) -> Tensor3 {
    let w = 1.0 / x[1];
    let mut t = Tensor3::zeros(2);
    t.set(0, 0, 1, -w);
    t.set(0, 1, 0, -w);
    t.set(1, 0, 0, w);
    t.set(1, 1, 1, -w);
    t
}

/// Levi-Civita symbols of a Riemannian chart from finite differences of its metric.
pub fn fd_levi_civita(chart: &FinslerChart, x: &[f64]) -> Tensor3 {
    let n = x.len();
    let y = vec![1.0; n];
    let metric = |p: &[f64]| chart.fundamental_tensor(p, &y).unwrap().g;
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let m = |s: f64| {
                let mut p = x.to_vec();
                p[k] += s;
                metric(&p).as_slice().to_vec()
            };
            DMatrix::from_column_slice(n, n, &central_diff(m, 0.0, 1e-3))
        })
        .collect();
    let g_inv = metric(x).try_inverse().unwrap();
    let mut t = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v: f64 = (0..n)
                    .map(|s| g_inv[(i, s)] * 0.5 * (dg[k][(s, j)] + dg[j][(s, k)] - dg[s][(j, k)]))
                    .sum();
                t.set(i, j, k, v);
            }
        }
    }
    t
}

pub type TestField = Box<dyn Fn(&[Jet]) -> Vec<Jet> + Sync>;

/// Smooth test fields on ℝ³ and ℝ², none vanishing on the sample boxes.
pub fn test_fields(dim: usize) -> Vec<TestField> {
    if dim == 2 {
        vec![
            Box::new(|x: &[Jet]| vec![x[1].sin() + 1.5, &x[0] * &x[1] * 0.3 + 0.2]),
            Box::new(|x: &[Jet]| vec![&x[0] * 0.4 - 0.1, x[0].cos() + &x[1] * 0.5]),
            Box::new(|x: &[Jet]| vec![x[1].exp() * 0.2, (&x[0] * &x[0]) * 0.3 + 1.0]),
        ]
    } else {
        vec![
            Box::new(|x: &[Jet]| {
                vec![
                    x[1].sin() + 1.5,
                    &x[0] * &x[2] * 0.3 + 0.2,
                    x[0].cos() * 0.5,
                ]
            }),
            Box::new(|x: &[Jet]| vec![&x[2] * 0.4 - 0.1, x[0].exp() * 0.3, &x[1] * &x[1] + 1.0]),
            Box::new(|x: &[Jet]| {
                vec![
                    (&x[0] * &x[1]) * 0.2 + 0.7,
                    x[2].cos(),
                    x[1].sin() * 0.6 - 0.3,
                ]
            }),
        ]
    }
}

fn line_distance(x: &[f64], axis: usize) -> f64 {
    let mut e = vec![0.0; x.len()];
    e[axis] = 1.0;
    let a = finsler_core::linalg::angle(x, &e);
    a.min(std::f64::consts::PI - a)
}

/// Angle from the unit vector `x` to the set of geodesic vectors of a zoo space.
///
/// Each group has a one-dimensional derived algebra spanned by `c`, so `X` is
/// geodesic iff every `[X, Z]` vanishes or `dF_X(c) = 0`. The sets follow by hand:
/// Heisenberg `c = e3`, `[X, Z] = 0` for all `Z` iff `X ∥ e3`; affine group
/// `c = e1`; SU(2) has `[X, Z] = X × Z`, so `dF_X` must vanish on `X^⊥`.
pub fn geodesic_set_distance(space: &str, x: &[f64]) -> f64 {
    let lat = |v: f64, target: f64| (v.clamp(-1.0, 1.0).asin() - target.asin()).abs();
    match space {
        "flat" | "flat-quartic" | "flat-randers" | "su2" => 0.0,
        // dF_X(e3) ∝ x3 for the Euclidean and quartic norms
        "heisenberg" | "heisenberg-quartic" => lat(x[2], 0.0).min(line_distance(x, 2)),
        // dF_X(e3) = x3/|X| + 0.3
        "heisenberg-randers" => lat(x[2], -0.3).min(line_distance(x, 2)),
        // dF_X(U) = ⟨b, U⟩ on X^⊥ forces X ∥ b
        "su2-randers" => line_distance(x, 2),
        "hyperbolic" | "hyperbolic-quartic" => line_distance(x, 1),
        // dF_X(e1) = x1/|X| + 0.3
        "hyperbolic-randers" => lat(x[0], -0.3),
        other => panic!("no oracle for {other}"),
    }
}

/// Points spread over the oracle set, for the reverse inclusion.
pub fn geodesic_set_samples(space: &str) -> Vec<Vec<f64>> {
    let ring = |z: f64, count: usize| -> Vec<Vec<f64>> {
        let r = (1.0 - z * z).sqrt();
        (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect()
    };
    let poles = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
    match space {
        "heisenberg" | "heisenberg-quartic" => [ring(0.0, 72), poles].concat(),
        "heisenberg-randers" => [ring(-0.3, 72), poles].concat(),
        "su2-randers" => poles,
        "hyperbolic" | "hyperbolic-quartic" => vec![vec![0.0, 1.0], vec![0.0, -1.0]],
        "hyperbolic-randers" => {
            let s = (1.0f64 - 0.09).sqrt();
            vec![vec![-0.3, s], vec![-0.3, -s]]
        }
        other => panic!("no finite oracle sample for {other}"),
    }
}
