//! Constant-speed geodesics and the comparison of isometry orbits with geodesics.

use serde::Serialize;

use crate::chart::{connection_data, covariant_derivative, FinslerChart};
use crate::error::{FinslerError, Result};
use crate::homspace::HomogeneousSpaceSpec;
use crate::linalg::{dot, norm};

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions {
    pub step: f64,
    /// Largest tolerated |F(γ, γ') - F(x0, y0)|; exceeding it is an accuracy error.
    pub drift_bound: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            step: DEFAULT_STEP,
            drift_bound: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSolution {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub step: f64,
    pub order: u32,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// Set when the curve left the chart before the end of the window.
    pub exited: bool,
    pub speed_drift: f64,
}

impl GeodesicSolution {
    pub fn end_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("solutions hold the initial sample")
    }

    pub fn endpoint(&self) -> &[f64] {
        self.positions
            .last()
            .expect("solutions hold the initial sample")
    }

    /// Rows `t, x_1..x_n, y_1..y_n` in full-precision scientific notation.
    pub fn to_csv(&self) -> String {
        let n = self.x0.len();
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for ((t, x), y) in self.times.iter().zip(&self.positions).zip(&self.velocities) {
            out.push_str(&format!("{t:.16e}"));
            for v in x.iter().chain(y) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `-Γ^i_jk(x, v) v^j v^k`.
fn acceleration(chart: &FinslerChart, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let conn = connection_data(chart, x, v)?;
    Ok(conn.contract_chern(v, v).iter().map(|a| -a).collect())
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

/// Integrates `ẍ + Γ(x, ẋ) ẋ ẋ = 0` on `[0, t_end]` with classical RK4.
///
/// Leaving the chart truncates the solution and sets `exited`; excessive
/// speed drift is an `Accuracy` error.
pub fn integrate_geodesic(
    chart: &FinslerChart,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    options: IntegratorOptions,
) -> Result<GeodesicSolution> {
    let step = options.step;
    if !(step > 0.0 && step.is_finite()) {
        return Err(FinslerError::InvalidInput(format!(
            "integration step must be positive, got {step}"
        )));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(FinslerError::InvalidInput(format!(
            "integration window end must be non-negative, got {t_end}"
        )));
    }
    let speed0 = chart.eval(x0, y0)?;
    let steps = (t_end / step)
        .round()
        .max(if t_end > 0.0 { 1.0 } else { 0.0 }) as usize;
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };

    let mut sol = GeodesicSolution {
        x0: x0.to_vec(),
        y0: y0.to_vec(),
        step: h,
        order: 4,
        times: vec![0.0],
        positions: vec![x0.to_vec()],
        velocities: vec![y0.to_vec()],
        exited: false,
        speed_drift: 0.0,
    };
    let (mut x, mut v) = (x0.to_vec(), y0.to_vec());
    for k in 0..steps {
        let stage = || -> Result<(Vec<f64>, Vec<f64>)> {
            let a1 = acceleration(chart, &x, &v)?;
            let x2 = axpy(0.5 * h, &v, &x);
            let v2 = axpy(0.5 * h, &a1, &v);
            let a2 = acceleration(chart, &x2, &v2)?;
            let x3 = axpy(0.5 * h, &v2, &x);
            let v3 = axpy(0.5 * h, &a2, &v);
            let a3 = acceleration(chart, &x3, &v3)?;
            let x4 = axpy(h, &v3, &x);
            let v4 = axpy(h, &a3, &v);
            let a4 = acceleration(chart, &x4, &v4)?;
            let nx = (0..x.len())
                .map(|i| x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]))
                .collect();
            let nv = (0..v.len())
                .map(|i| v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]))
                .collect();
            Ok((nx, nv))
        };
        let (nx, nv) = match stage() {
            Ok(s) => s,
            Err(FinslerError::Domain(_)) => {
                sol.exited = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let speed = match chart.eval(&nx, &nv) {
            Ok(s) => s,
            Err(FinslerError::Domain(_)) => {
                sol.exited = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let drift = (speed - speed0).abs();
        sol.speed_drift = sol.speed_drift.max(drift);
        if drift > options.drift_bound {
            return Err(FinslerError::Accuracy {
                drift,
                bound: options.drift_bound,
                step: h,
            });
        }
        x = nx;
        v = nv;
        sol.times.push((k + 1) as f64 * h);
        sol.positions.push(x.clone());
        sol.velocities.push(v.clone());
    }
    Ok(sol)
}

/// Quantitative match between `exp(tX)(p)` and the geodesic with the same initial data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// max chart-coordinate distance between orbit and geodesic over the window
    pub sup_distance: f64,
    /// |X*(orbit(T)) - γ'(T)| at the common window end
    pub velocity_mismatch: f64,
    /// least-squares `k` in `∇_{X*} X* = k X*` along the orbit
    pub reparam_constant: f64,
    pub window_end: f64,
    /// the common window is shorter than requested because a curve left the chart
    pub truncated: bool,
    pub speed_drift: f64,
}

/// Orbit points at which the reparametrization constant is fitted.
const FIT_POINTS: usize = 11;

pub fn compare_orbit_geodesic(
    spec: &HomogeneousSpaceSpec,
    generator: &[f64],
    t_end: f64,
    options: IntegratorOptions,
) -> Result<ComparisonReport> {
    let p = spec.origin();
    let y0 = spec.fundamental_vector(generator, p);
    if norm(generator) == 0.0 || y0.iter().all(|v| *v == 0.0) {
        return Err(FinslerError::DegenerateDirection(
            "X*(p) = 0: the orbit is a point".into(),
        ));
    }
    let sol = integrate_geodesic(spec.chart(), p, &y0, t_end, options)?;
    let mut truncated = sol.exited;
    let mut sup: f64 = 0.0;
    let mut last = 0;
    for (i, (t, x)) in sol.times.iter().zip(&sol.positions).enumerate() {
        match spec.orbit(generator, *t) {
            Ok(o) => {
                let d = o
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                sup = sup.max(d);
                last = i;
            }
            Err(FinslerError::ChartExit { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let window_end = sol.times[last];
    let orbit_end = spec.orbit(generator, window_end)?;
    let orbit_vel = spec.fundamental_vector(generator, &orbit_end);
    let velocity_mismatch = norm(
        &orbit_vel
            .iter()
            .zip(&sol.velocities[last])
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );

    let field = spec.fundamental_field(generator);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..FIT_POINTS {
        let t = window_end * j as f64 / (FIT_POINTS - 1) as f64;
        let x = spec.orbit(generator, t)?;
        let z = spec.fundamental_vector(generator, &x);
        let acc = covariant_derivative(spec.chart(), &field, &field, &field, &x)?;
        num += dot(&acc, &z);
        den += dot(&z, &z);
    }
    Ok(ComparisonReport {
        sup_distance: sup,
        velocity_mismatch,
        reparam_constant: num / den,
        window_end,
        truncated,
        speed_drift: sol.speed_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MinkowskiNorm;

    fn half_plane() -> FinslerChart {
        HomogeneousSpaceSpec::builtin("hyperbolic")
            .unwrap()
            .chart()
            .clone()
    }

    #[test]
    fn flat_straight_line() {
        let chart = FinslerChart::flat(MinkowskiNorm::euclidean(2));
        let sol =
            integrate_geodesic(&chart, &[0.0, 0.0], &[1.0, 2.0], 1.0, Default::default()).unwrap();
        let end = sol.endpoint();
        assert!((end[0] - 1.0).abs() <= 1e-12 && (end[1] - 2.0).abs() <= 1e-12);
        assert_eq!(sol.times.len(), 1001);
        assert!(!sol.exited);
    }

    #[test]
    fn vertical_ray_reaches_e() {
        let sol = integrate_geodesic(
            &half_plane(),
            &[0.0, 1.0],
            &[0.0, 1.0],
            1.0,
            Default::default(),
        )
        .unwrap();
        let end = sol.endpoint();
        assert!(end[0].abs() <= 1e-12);
        assert!((end[1] - std::f64::consts::E).abs() <= 1e-6, "{end:?}");
        assert!(sol.speed_drift <= 1e-7);
    }

    #[test]
    fn chart_exit_truncates() {
        let chart = FinslerChart::new(
            "disc",
            2,
            |_x, y| (&y[0] * &y[0] + &y[1] * &y[1]).sqrt(),
            |x, _| x[0] * x[0] + x[1] * x[1] < 1.0,
        );
        let sol =
            integrate_geodesic(&chart, &[0.0, 0.0], &[1.0, 0.0], 2.0, Default::default()).unwrap();
        assert!(sol.exited);
        assert!(sol.end_time() < 1.0 && sol.end_time() > 0.99);
    }

    #[test]
    fn large_step_reports_accuracy_error() {
        let r = integrate_geodesic(
            &half_plane(),
            &[0.0, 1.0],
            &[1.0, 0.3],
            1.0,
            IntegratorOptions {
                step: 0.25,
                drift_bound: 1e-7,
            },
        );
        assert!(matches!(r, Err(FinslerError::Accuracy { .. })), "{r:?}");
    }

    #[test]
    fn zero_velocity_rejected() {
        assert!(matches!(
            integrate_geodesic(
                &half_plane(),
                &[0.0, 1.0],
                &[0.0, 0.0],
                1.0,
                Default::default()
            ),
            Err(FinslerError::Domain(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let chart = FinslerChart::flat(MinkowskiNorm::euclidean(2));
        let sol = integrate_geodesic(&chart, &[0.0, 0.0], &[1.0, 2.0], 0.002, Default::default())
            .unwrap();
        let csv = sol.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,y1,y2");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 5);
    }

    #[test]
    fn flat_translation_orbit_is_geodesic() {
        let spec = HomogeneousSpaceSpec::builtin("flat-randers").unwrap();
        let r = compare_orbit_geodesic(&spec, &[0.3, -1.0, 0.4], 1.0, Default::default()).unwrap();
        assert!(r.sup_distance <= 1e-12);
        assert_eq!(r.reparam_constant, 0.0);
        assert!(!r.truncated);
    }

    #[test]
    fn degenerate_generator_rejected() {
        let spec = HomogeneousSpaceSpec::builtin("flat").unwrap();
        assert!(matches!(
            compare_orbit_geodesic(&spec, &[0.0; 3], 1.0, Default::default()),
            Err(FinslerError::DegenerateDirection(_))
        ));
    }
}
