//! The built-in Lie groups, each acting simply transitively on a single chart.
//!
//! Every family provides a left-invariant coframe `θ`, the right-invariant
//! vector fields generating the left action (these are the Killing fields of
//! any left-invariant metric) and the closed-form left action of `exp(tX)`.

use serde::{Deserialize, Serialize};

use super::algebra::LieAlgebraData;
use crate::error::{FinslerError, Result};
use crate::jetcalc::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// ℝⁿ acting on itself by translations.
    Flat,
    /// The Heisenberg group in coordinates `(a)(x) = (a1+x1, a2+x2, a3+x3+a1 x2)`.
    Heisenberg,
    /// Unit quaternions in the stereographic chart `x = v / (1 + w)` centred at the identity.
    Su2,
    /// The group `u ↦ a u + b e1` (a > 0) acting on the upper half-plane.
    Hyperbolic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Flat => "flat",
            Family::Heisenberg => "heisenberg",
            Family::Su2 => "su2",
            Family::Hyperbolic => "hyperbolic",
        }
    }

    /// Dimension, or `None` when any dimension is allowed.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Family::Flat => None,
            Family::Heisenberg | Family::Su2 => Some(3),
            Family::Hyperbolic => Some(2),
        }
    }

    pub fn algebra(self, dim: usize) -> LieAlgebraData {
        match self {
            Family::Flat => LieAlgebraData::abelian(dim),
            Family::Heisenberg => LieAlgebraData::heisenberg(),
            Family::Su2 => LieAlgebraData::su2(),
            Family::Hyperbolic => LieAlgebraData::affine_line(),
        }
    }

    pub fn default_origin(self, dim: usize) -> Vec<f64> {
        match self {
            Family::Hyperbolic => vec![0.0, 1.0],
            _ => vec![0.0; dim],
        }
    }

    /// Box used by randomized checks.
    pub fn sample_box(self, dim: usize) -> Vec<(f64, f64)> {
        match self {
            Family::Flat | Family::Heisenberg => vec![(-1.0, 1.0); dim],
            Family::Su2 => vec![(-0.8, 0.8); dim],
            Family::Hyperbolic => vec![(-1.0, 1.0), (0.5, 2.0)],
        }
    }

    pub fn chart_contains(self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
            && match self {
                Family::Hyperbolic => x[1] > 0.0,
                _ => true,
            }
    }

    /// `θ(x) y`, the left-invariant coframe applied to a tangent vector.
    pub fn coframe(self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        match self {
            Family::Flat => y.to_vec(),
            Family::Heisenberg => vec![y[0].clone(), y[1].clone(), &y[2] - &x[0] * &y[1]],
            Family::Su2 => {
                let q = stereo_point(x);
                let dq = stereo_differential(x, y);
                // q⁻¹dq = Σ θ^a e_a with e_a = (quaternion unit a) / 2
                let prod = quat_mul(&quat_conj(&q), &dq);
                prod[1..].iter().map(|c| c * 2.0).collect()
            }
            Family::Hyperbolic => vec![&y[0] / &x[1], &y[1] / &x[1]],
        }
    }

    /// The `i`-th Killing field at `x`.
    pub fn killing_field(self, i: usize, x: &[Jet]) -> Vec<Jet> {
        let zero = x[0].zero_like();
        let one = x[0].constant_like(1.0);
        let n = x.len();
        match self {
            Family::Flat => (0..n)
                .map(|k| if k == i { one.clone() } else { zero.clone() })
                .collect(),
            Family::Heisenberg => match i {
                0 => vec![one, zero, x[1].clone()],
                1 => vec![zero.clone(), one, zero],
                _ => vec![zero.clone(), zero, one],
            },
            Family::Su2 => {
                let q = stereo_point(x);
                let mut e = [zero.clone(), zero.clone(), zero.clone(), zero];
                e[i + 1] = x[0].constant_like(0.5);
                let dq = quat_mul(&e, &q);
                stereo_chart_differential(&q, &dq)
            }
            Family::Hyperbolic => match i {
                0 => vec![one, zero],
                _ => vec![x[0].clone(), x[1].clone()],
            },
        }
    }

    /// `exp(tX)` applied to the chart point `x`.
    pub fn flow(self, generator: &[f64], t: f64, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Family::Flat => Ok(x.iter().zip(generator).map(|(p, u)| p + t * u).collect()),
            Family::Heisenberg => {
                let a = heisenberg_exp(generator, t);
                Ok(vec![a[0] + x[0], a[1] + x[1], a[2] + x[2] + a[0] * x[1]])
            }
            Family::Su2 => {
                let q = stereo_point_f64(x);
                let g = su2_exp(generator, t);
                let moved = quat_mul_f64(&g, &q);
                if 1.0 + moved[0] <= 1e-9 {
                    return Err(FinslerError::ChartExit {
                        escape_time: su2_escape_time(generator, x, t).unwrap_or(t),
                    });
                }
                Ok(moved[1..].iter().map(|v| v / (1.0 + moved[0])).collect())
            }
            Family::Hyperbolic => {
                let (scale, shift) = affine_exp(generator, t);
                Ok(vec![scale * x[0] + shift, scale * x[1]])
            }
        }
    }

    /// Differential of `exp(tX)` at `x` applied to `v`.
    pub fn flow_pushforward(
        self,
        generator: &[f64],
        t: f64,
        x: &[f64],
        v: &[f64],
    ) -> Result<Vec<f64>> {
        match self {
            Family::Flat => Ok(v.to_vec()),
            Family::Heisenberg => {
                let a = heisenberg_exp(generator, t);
                Ok(vec![v[0], v[1], v[2] + a[0] * v[1]])
            }
            Family::Su2 => {
                let xs = Jet::values(x);
                let vs = Jet::values(v);
                let q = stereo_point(&xs);
                let dq = stereo_differential(&xs, &vs);
                let g: Quat = Jet::values(&su2_exp(generator, t))
                    .try_into()
                    .expect("quaternion has four components");
                let gq = quat_mul(&g, &q);
                if 1.0 + gq[0].value() <= 1e-9 {
                    return Err(FinslerError::ChartExit {
                        escape_time: su2_escape_time(generator, x, t).unwrap_or(t),
                    });
                }
                let gdq = quat_mul(&g, &dq);
                Ok(stereo_chart_differential(&gq, &gdq)
                    .iter()
                    .map(Jet::value)
                    .collect())
            }
            Family::Hyperbolic => {
                let (scale, _) = affine_exp(generator, t);
                Ok(v.iter().map(|c| scale * c).collect())
            }
        }
    }
}

fn heisenberg_exp(u: &[f64], t: f64) -> [f64; 3] {
    [t * u[0], t * u[1], t * u[2] + 0.5 * t * t * u[0] * u[1]]
}

/// `(a, b)` with `exp(tX)(u) = a u + b e1`.
fn affine_exp(u: &[f64], t: f64) -> (f64, f64) {
    let (alpha, beta) = (u[0], u[1]);
    let scale = (beta * t).exp();
    let shift = if beta == 0.0 {
        alpha * t
    } else {
        alpha * (beta * t).exp_m1() / beta
    };
    (scale, shift)
}

fn su2_exp(u: &[f64], t: f64) -> [f64; 4] {
    let norm = crate::linalg::norm(u);
    if norm == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let half = 0.5 * t * norm;
    let s = half.sin() / norm;
    [half.cos(), s * u[0], s * u[1], s * u[2]]
}

/// First time at which `exp(sX)(x)` reaches the antipode of the identity, in the direction of `t`.
fn su2_escape_time(u: &[f64], x: &[f64], t: f64) -> Option<f64> {
    let norm = crate::linalg::norm(u);
    if norm == 0.0 {
        return None;
    }
    let q = stereo_point_f64(x);
    let dir_dot: f64 = (0..3).map(|k| u[k] * q[k + 1]).sum::<f64>() / norm;
    // Re(exp(sX) q) = cos(h) q_w - sin(h) (û·q_v) = R cos(h + φ), h = s|X|/2
    let radius = q[0].hypot(dir_dot);
    if radius < 1.0 - 1e-9 {
        return None;
    }
    let phase = dir_dot.atan2(q[0]);
    let two_pi = std::f64::consts::TAU;
    let forward = (std::f64::consts::PI - phase).rem_euclid(two_pi);
    let h = if t >= 0.0 { forward } else { forward - two_pi };
    Some(2.0 * h / norm)
}

type Quat = [Jet; 4];

fn quat_conj(q: &Quat) -> Quat {
    [q[0].clone(), -&q[1], -&q[2], -&q[3]]
}

fn quat_mul(a: &Quat, b: &Quat) -> Quat {
    [
        &a[0] * &b[0] - &a[1] * &b[1] - &a[2] * &b[2] - &a[3] * &b[3],
        &a[0] * &b[1] + &a[1] * &b[0] + &a[2] * &b[3] - &a[3] * &b[2],
        &a[0] * &b[2] - &a[1] * &b[3] + &a[2] * &b[0] + &a[3] * &b[1],
        &a[0] * &b[3] + &a[1] * &b[2] - &a[2] * &b[1] + &a[3] * &b[0],
    ]
}

fn quat_mul_f64(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Inverse stereographic map `x ↦ ((1 - r²) / (1 + r²), 2x / (1 + r²))`.
fn stereo_point(x: &[Jet]) -> Quat {
    let r2 = &x[0] * &x[0] + &x[1] * &x[1] + &x[2] * &x[2];
    let inv = (&r2 + 1.0).recip();
    [
        (-&r2 + 1.0) * &inv,
        &x[0] * &inv * 2.0,
        &x[1] * &inv * 2.0,
        &x[2] * &inv * 2.0,
    ]
}

fn stereo_point_f64(x: &[f64]) -> [f64; 4] {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let s = 1.0 + r2;
    [
        (1.0 - r2) / s,
        2.0 * x[0] / s,
        2.0 * x[1] / s,
        2.0 * x[2] / s,
    ]
}

/// Differential of the inverse stereographic map at `x` applied to `y`.
fn stereo_differential(x: &[Jet], y: &[Jet]) -> Quat {
    let r2 = &x[0] * &x[0] + &x[1] * &x[1] + &x[2] * &x[2];
    let s = &r2 + 1.0;
    let inv2 = s.square().recip();
    let xy = &x[0] * &y[0] + &x[1] * &y[1] + &x[2] * &y[2];
    let dv = |k: usize| (&y[k] * &s * 2.0 - &x[k] * &xy * 4.0) * &inv2;
    [&xy * &inv2 * -4.0, dv(0), dv(1), dv(2)]
}

/// Differential of the chart `q ↦ v / (1 + w)` at `q` applied to `dq`.
fn stereo_chart_differential(q: &Quat, dq: &Quat) -> Vec<Jet> {
    let denom = (&q[0] + 1.0).recip();
    let denom2 = denom.square();
    (1..4)
        .map(|k| &dq[k] * &denom - &q[k] * &dq[0] * &denom2)
        .collect()
}
