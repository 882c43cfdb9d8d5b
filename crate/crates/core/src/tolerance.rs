use serde::{Deserialize, Serialize};

/// Tolerance constants shared by checks, searches and the acceptance suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Structural identities (symmetry, torsion, bracket closure, invariance).
    pub structural: f64,
    /// Agreement with finite-difference oracles.
    pub fd_oracle: f64,
    /// Certification threshold on |t(X)| and |v(X)|.
    pub t_residual: f64,
    /// Certification threshold on the algebraic criterion.
    pub algebraic: f64,
    /// Certification threshold on orbit-vs-geodesic sup distance.
    pub sup_distance: f64,
    /// Allowed drift of F along an integrated geodesic.
    pub speed_drift: f64,
    /// Candidates closer than this angle are the same direction.
    pub dedup_angle: f64,
    /// Direction spread of the Chern coefficients below which a chart counts as Berwald.
    pub berwald_spread: f64,
    /// Even/odd symmetry residuals below which a chart counts as reversible.
    pub reversibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: 1e-8,
            fd_oracle: 1e-6,
            t_residual: 1e-8,
            algebraic: 1e-8,
            sup_distance: 1e-6,
            speed_drift: 1e-7,
            dedup_angle: 1e-4,
            berwald_spread: 1e-9,
            reversibility: 1e-10,
        }
    }
}

impl Tolerances {
    /// Every tolerance must be positive and finite.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("structural", self.structural),
            ("fd_oracle", self.fd_oracle),
            ("t_residual", self.t_residual),
            ("algebraic", self.algebraic),
            ("sup_distance", self.sup_distance),
            ("speed_drift", self.speed_drift),
            ("dedup_angle", self.dedup_angle),
            ("berwald_spread", self.berwald_spread),
            ("reversibility", self.reversibility),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}
