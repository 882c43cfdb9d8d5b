mod common;

use common::*;
use finsler_core::geodesy::{compare_orbit_geodesic, integrate_geodesic, IntegratorOptions};
use finsler_core::homspace::HomogeneousSpaceSpec;
use finsler_core::FinslerError;

fn hyperbolic() -> HomogeneousSpaceSpec {
    HomogeneousSpaceSpec::builtin("hyperbolic").unwrap()
}

#[test]
fn vertical_ray_reaches_e() {
    let spec = hyperbolic();
    let sol = integrate_geodesic(
        spec.chart(),
        &[0.0, 1.0],
        &[0.0, 1.0],
        1.0,
        IntegratorOptions::default(),
    )
    .unwrap();
    let end = sol.endpoint();
    assert!(end[0].abs() <= 1e-6);
    assert!((end[1] - std::f64::consts::E).abs() <= 1e-6, "{end:?}");
    assert_eq!(sol.end_time(), 1.0);
}

#[test]
fn speed_is_conserved_on_every_chart() {
    let mut rng = rng(21);
    for name in HomogeneousSpaceSpec::builtin_names() {
        let spec = HomogeneousSpaceSpec::builtin(name).unwrap();
        for _ in 0..3 {
            let x0 = random_point(&mut rng, spec.chart());
            let y0 = random_direction(&mut rng, spec.dim());
            let opts = IntegratorOptions {
                step: 1e-3,
                drift_bound: f64::INFINITY,
            };
            let sol = integrate_geodesic(spec.chart(), &x0, &y0, 1.0, opts).unwrap();
            assert!(sol.speed_drift <= 1e-7, "{name}: {:e}", sol.speed_drift);
        }
    }
}

#[test]
fn integrator_is_fourth_order() {
    // the unit-speed geodesic through (0, 1) heading along u1 is (tanh t, sech t)
    let spec = hyperbolic();
    let err = |h: f64| {
        let opts = IntegratorOptions {
            step: h,
            drift_bound: f64::INFINITY,
        };
        let sol = integrate_geodesic(spec.chart(), &[0.0, 1.0], &[1.0, 0.0], 2.0, opts).unwrap();
        let e = sol.endpoint();
        let t: f64 = 2.0;
        ((e[0] - t.tanh()).powi(2) + (e[1] - 1.0 / t.cosh()).powi(2)).sqrt()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn drift_above_the_bound_is_an_accuracy_error() {
    let spec = hyperbolic();
    let opts = IntegratorOptions {
        step: 0.5,
        drift_bound: 1e-12,
    };
    let r = integrate_geodesic(spec.chart(), &[0.0, 1.0], &[1.0, 0.3], 3.0, opts);
    assert!(matches!(r, Err(FinslerError::Accuracy { .. })), "{r:?}");
}

#[test]
fn vertical_orbit_is_a_geodesic_and_tilted_one_is_not() {
    let spec = hyperbolic();
    let opts = IntegratorOptions::default();
    let good = compare_orbit_geodesic(&spec, &[0.0, 1.0], 1.0, opts).unwrap();
    assert!(good.sup_distance <= 1e-6, "{good:?}");
    let bad = compare_orbit_geodesic(&spec, &[1.0, 1.0], 1.0, opts).unwrap();
    assert!(bad.sup_distance > 1e-3, "{bad:?}");
}
