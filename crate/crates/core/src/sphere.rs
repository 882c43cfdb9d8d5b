//! Deterministic point sets on the unit sphere `S^{n-1}` and small sphere utilities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::linalg::normalized;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// The two points `±1` of `S^0`.
    Pair,
    /// Equally spaced points on the circle.
    Circle,
    /// Golden-angle spiral on `S^2`.
    Spiral,
    /// Normalized Gaussian vectors, seeded.
    Gaussian,
}

pub fn scheme_for(dim: usize) -> SamplingScheme {
    match dim {
        1 => SamplingScheme::Pair,
        2 => SamplingScheme::Circle,
        3 => SamplingScheme::Spiral,
        _ => SamplingScheme::Gaussian,
    }
}

/// `count` quasi-uniform unit vectors in ℝ^dim; only the Gaussian scheme uses `seed`.
pub fn sample_sphere(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match scheme_for(dim) {
        SamplingScheme::Pair => (0..count)
            .map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect(),
        SamplingScheme::Circle => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        SamplingScheme::Spiral => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        SamplingScheme::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                if v.iter().map(|c| c * c).sum::<f64>() > 1e-12 {
                    out.push(normalized(&v));
                }
            }
            out
        }
    }
}

/// Orthonormal basis of the tangent space `X^⊥`, as `dim - 1` vectors.
pub fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    // Householder reflection mapping e_k to ±x; its other columns span x^⊥
    let k = (0..n)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .unwrap_or(0);
    let sign = if x[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = x.to_vec();
    w[k] += sign;
    let w2: f64 = w.iter().map(|c| c * c).sum();
    (0..n)
        .filter(|&j| j != k)
        .map(|j| {
            let mut col = vec![0.0; n];
            col[j] = 1.0;
            let f = 2.0 * w[j] / w2;
            for (c, wi) in col.iter_mut().zip(&w) {
                *c -= f * wi;
            }
            col
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};

    #[test]
    fn samples_are_unit_and_counted() {
        for dim in 1..6 {
            let pts = sample_sphere(dim, 37, 4);
            assert_eq!(pts.len(), 37);
            for p in &pts {
                assert!((norm(p) - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn spiral_covers_the_sphere() {
        let pts = sample_sphere(3, 2000, 0);
        // every probe direction has a sample within 0.08 rad
        for probe in sample_sphere(4, 200, 9) {
            let d = normalized(&probe[..3]);
            let best = pts
                .iter()
                .map(|p| crate::linalg::angle(p, &d))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.08, "{best}");
        }
    }

    #[test]
    fn gaussian_samples_depend_only_on_seed() {
        assert_eq!(sample_sphere(5, 10, 3), sample_sphere(5, 10, 3));
        assert_ne!(sample_sphere(5, 10, 3), sample_sphere(5, 10, 4));
    }

    #[test]
    fn tangent_basis_is_orthonormal_complement() {
        for x in [
            vec![0.0, 0.0, 1.0],
            normalized(&[0.3, -0.5, 0.8]),
            normalized(&[-1.0, 2.0, 0.5, 0.1]),
        ] {
            let b = tangent_basis(&x);
            assert_eq!(b.len(), x.len() - 1);
            for (i, u) in b.iter().enumerate() {
                assert!(dot(u, &x).abs() <= 1e-15);
                for (j, v) in b.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(u, v) - e).abs() <= 1e-15);
                }
            }
        }
    }
}
