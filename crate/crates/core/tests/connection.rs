mod common;

use common::*;
use finsler_core::chart::{
    connection_data, covariant_derivative, field_value, lie_bracket, FinslerChart,
};
use finsler_core::homspace::HomogeneousSpaceSpec;
use finsler_core::linalg::{bilinear, matrix_max_diff, normalized};
use finsler_core::minkowski::{cartan_tensor, euler_check, fundamental_tensor, MinkowskiNorm};
use rand::RngExt;

fn zoo_charts() -> Vec<HomogeneousSpaceSpec> {
    HomogeneousSpaceSpec::builtin_names()
        .iter()
        .map(|n| HomogeneousSpaceSpec::builtin(n).unwrap())
        .collect()
}

#[test]
fn riemannian_tensors_are_exact() {
    let mut rng = rng(1);
    for _ in 0..100 {
        let dim = 2 + rng.random_range(0..3usize);
        let a = random_spd(&mut rng, dim);
        let norm = MinkowskiNorm::riemannian(a.clone()).unwrap();
        let y = random_direction(&mut rng, dim);
        let g = fundamental_tensor(&norm, &y).unwrap().g;
        assert!(matrix_max_diff(&g, &a) <= 1e-12);
        assert!(cartan_tensor(&norm, &y).unwrap().c.max_abs() <= 1e-12);
    }
}

#[test]
fn randers_tensors_match_finite_differences() {
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(-0.25..0.25)).collect();
        let chart = FinslerChart::flat(randers(&b));
        let y = random_direction(&mut rng, 3);
        let g = chart.fundamental_tensor(&[0.0; 3], &y).unwrap().g;
        let c = chart.cartan_tensor(&[0.0; 3], &y).unwrap().c;
        worst = worst
            .max(matrix_max_diff(&g, &fd_fundamental(&chart, &[0.0; 3], &y)))
            .max(c.max_diff(&fd_cartan(&chart, &[0.0; 3], &y), false));
    }
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn euler_identities_hold() {
    let mut rng = rng(3);
    let norms = [
        MinkowskiNorm::euclidean(3),
        randers(&[0.1, -0.2, 0.3]),
        MinkowskiNorm::quartic(3, 0.5).unwrap(),
        MinkowskiNorm::riemannian(random_spd(&mut rng, 3)).unwrap(),
    ];
    for i in 0..100 {
        let norm = &norms[i % norms.len()];
        let y = random_direction(&mut rng, 3);
        let e = euler_check(norm, &y).unwrap();
        assert!(e.fundamental_residual <= 1e-10, "{e:?}");
        assert!(e.cartan_residual <= 1e-10, "{e:?}");
    }
}

#[test]
fn chern_coefficients_are_symmetric_and_zero_homogeneous() {
    let mut rng = rng(4);
    for spec in zoo_charts() {
        let chart = spec.chart();
        for _ in 0..10 {
            let x = random_point(&mut rng, chart);
            let y = random_direction(&mut rng, chart.dim());
            let d = connection_data(chart, &x, &y).unwrap();
            let n = chart.dim();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = (d.chern.get(i, j, k) - d.chern.get(i, k, j)).abs();
                        assert!(r <= 1e-10, "{}: {r:e}", spec.name());
                    }
                }
            }
            let lam = rng.random_range(0.2..5.0);
            let scaled: Vec<f64> = y.iter().map(|v| v * lam).collect();
            let ds = connection_data(chart, &x, &scaled).unwrap();
            let r = d.chern.max_diff(&ds.chern, false);
            assert!(r <= 1e-9, "{}: {r:e}", spec.name());
        }
    }
}

#[test]
fn pinned_connection_is_torsion_free() {
    let mut rng = rng(5);
    for spec in zoo_charts() {
        let chart = spec.chart();
        let fields = test_fields(chart.dim());
        for c in 0..20 {
            let x = random_point(&mut rng, chart);
            let (v, w1, w2) = (&fields[c % 3], &fields[(c + 1) % 3], &fields[(c + 2) % 3]);
            let a = covariant_derivative(chart, v, w1, w2, &x).unwrap();
            let b = covariant_derivative(chart, v, w2, w1, &x).unwrap();
            let br = lie_bracket(w1, w2, &x);
            for i in 0..chart.dim() {
                let r = (a[i] - b[i] - br[i]).abs();
                assert!(r <= 1e-8, "{}: {r:e}", spec.name());
            }
        }
    }
}

#[test]
fn pinned_connection_is_almost_compatible() {
    let mut rng = rng(6);
    for spec in zoo_charts() {
        let chart = spec.chart();
        let n = chart.dim();
        let fields = test_fields(n);
        for c in 0..10 {
            let x = random_point(&mut rng, chart);
            let v = &fields[c % 3];
            let w = &fields[(c + 1) % 3];
            let (w1, w2) = (&fields[(c + 2) % 3], &fields[c % 3]);
            // W g_V(W1, W2) along the straight line x + sW(x)
            let wx = field_value(w, &x);
            let pairing = |s: f64| {
                let p: Vec<f64> = x.iter().zip(&wx).map(|(a, b)| a + s * b).collect();
                let g = chart.fundamental_tensor(&p, &field_value(v, &p)).unwrap().g;
                vec![bilinear(&g, &field_value(w1, &p), &field_value(w2, &p))]
            };
            let lhs = central_diff(pairing, 0.0, 1e-3)[0];
            let vx = field_value(v, &x);
            let g = chart.fundamental_tensor(&x, &vx).unwrap().g;
            let cart = chart.cartan_tensor(&x, &vx).unwrap().c;
            let d1 = covariant_derivative(chart, v, w, w1, &x).unwrap();
            let d2 = covariant_derivative(chart, v, w, w2, &x).unwrap();
            let dv = covariant_derivative(chart, v, w, v, &x).unwrap();
            let (a1, a2) = (field_value(w1, &x), field_value(w2, &x));
            let mut cterm = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        cterm += cart.get(i, j, k) * dv[i] * a1[j] * a2[k];
                    }
                }
            }
            let r = lhs - bilinear(&g, &d1, &a2) - bilinear(&g, &a1, &d2) - 2.0 * cterm;
            assert!(r.abs() <= 1e-7, "{}: {r:e}", spec.name());
        }
    }
}

#[test]
fn riemannian_charts_reduce_to_levi_civita() {
    let mut rng = rng(7);
    let spec = HomogeneousSpaceSpec::builtin("hyperbolic").unwrap();
    for _ in 0..20 {
        let x = random_point(&mut rng, spec.chart());
        let y = random_direction(&mut rng, 2);
        let d = connection_data(spec.chart(), &x, &y).unwrap();
        let r = d.chern.max_diff(&half_plane_levi_civita(&x), false);
        assert!(r <= 1e-8, "{r:e}");
    }
    for name in ["heisenberg", "su2"] {
        let spec = HomogeneousSpaceSpec::builtin(name).unwrap();
        for _ in 0..5 {
            let x = random_point(&mut rng, spec.chart());
            let y = random_direction(&mut rng, 3);
            let d = connection_data(spec.chart(), &x, &y).unwrap();
            let r = d.chern.max_diff(&fd_levi_civita(spec.chart(), &x), false);
            assert!(r <= 1e-8, "{name}: {r:e}");
        }
    }
}

#[test]
fn zoo_tensors_match_finite_differences() {
    let mut rng = rng(8);
    for spec in zoo_charts() {
        let chart = spec.chart();
        for _ in 0..5 {
            let x = random_point(&mut rng, chart);
            // unit length keeps the fixed FD step small relative to y
            let y = normalized(&random_direction(&mut rng, chart.dim()));
            let g = chart.fundamental_tensor(&x, &y).unwrap().g;
            let r = matrix_max_diff(&g, &fd_fundamental(chart, &x, &y));
            assert!(r <= 1e-6, "{}: {r:e}", spec.name());
            let c = chart.cartan_tensor(&x, &y).unwrap().c;
            let r = c.max_diff(&fd_cartan(chart, &x, &y), false);
            assert!(r <= 1e-6, "{}: {r:e}", spec.name());
        }
    }
}
