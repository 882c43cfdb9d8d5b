use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::homspace::{HomogeneousSpaceSpec, RadicalBranch};
use crate::linalg::{normalized, spd_factor};

/// The operator on `𝔪` defined by `g_X(αU, V) = K(U, V)`, in `𝔪` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaOperator {
    pub matrix: DMatrix<f64>,
    /// ascending
    pub eigenvalues: Vec<f64>,
    /// columns, `g_X`-orthonormal, in the order of `eigenvalues`
    pub eigenvectors: DMatrix<f64>,
    /// max |g_X α - (g_X α)ᵀ|
    pub self_adjoint_residual: f64,
    /// false on the `rad(K) = 𝔪` branch, where `α` vanishes identically
    pub applicable: bool,
}

impl AlphaOperator {
    /// Index of the eigenvalue with the largest absolute value; ties go to the lower index.
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            if l.abs() > self.eigenvalues[best].abs() {
                best = i;
            }
        }
        best
    }
}

pub fn alpha_operator(spec: &HomogeneousSpaceSpec, generator: &[f64]) -> Result<AlphaOperator> {
    let dec = spec.decomposition();
    let x_m = dec.project_m(&normalized(generator));
    if x_m.iter().all(|c| *c == 0.0) {
        return Err(FinslerError::DegenerateDirection(
            "X has no 𝔪 component".into(),
        ));
    }
    let g = spec.m_metric(&x_m)?;
    let killing = dec.m_basis.transpose() * &dec.killing * &dec.m_basis;
    let chol = spd_factor(&g, &x_m)?;
    let matrix = chol.solve(&killing);
    // L⁻¹ K L⁻ᵀ is symmetric with the same spectrum as g⁻¹K
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| FinslerError::Numerical("singular Cholesky factor".into()))?;
    let sym = &l_inv * &killing * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lifted = l_inv.transpose() * &eig.eigenvectors;
    let eigenvectors =
        DMatrix::from_columns(&order.iter().map(|&i| lifted.column(i)).collect::<Vec<_>>());
    let ga = &g * &matrix;
    let self_adjoint_residual = (&ga - ga.transpose()).amax();
    Ok(AlphaOperator {
        matrix,
        eigenvalues,
        eigenvectors,
        self_adjoint_residual,
        applicable: dec.branch == RadicalBranch::RadicalProper,
    })
}

/// A change of the dominant eigen-branch between consecutive probe points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeCrossing {
    /// angle along the great circle at which the switch was observed
    pub angle: f64,
    pub from_branch: usize,
    pub to_branch: usize,
    /// angle between the selected eigenvectors (as lines) on either side
    pub selection_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProbeReport {
    pub points: usize,
    pub start: Vec<f64>,
    pub towards: Vec<f64>,
    /// eigenvalues per probe point, indexed by tracked branch
    pub branch_eigenvalues: Vec<Vec<f64>>,
    pub crossings: Vec<ProbeCrossing>,
    /// largest line angle between consecutive selected eigenvectors
    pub max_selection_jump: f64,
    /// largest line angle between consecutive vectors of the same tracked branch
    pub max_branch_step: f64,
}

fn line_angle(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let uv = (u.transpose() * g * v)[(0, 0)];
    let uu = (u.transpose() * g * u)[(0, 0)];
    let vv = (v.transpose() * g * v)[(0, 0)];
    (uv.abs() / (uu * vv).sqrt()).min(1.0).acos()
}

/// Follows the eigen-decomposition of `α^X` around the great circle through
/// `start` and `towards`, matching branches by overlap, and records every
/// point where the dominant-|λ| branch changes.
pub fn alpha_gap_probe(
    spec: &HomogeneousSpaceSpec,
    start: &[f64],
    towards: &[f64],
    points: usize,
) -> Result<GapProbeReport> {
    if points < 2 {
        return Err(FinslerError::InvalidInput(
            "the probe needs at least two points".into(),
        ));
    }
    let a = normalized(start);
    let proj: f64 = a.iter().zip(towards).map(|(p, q)| p * q).sum();
    let b: Vec<f64> = towards.iter().zip(&a).map(|(q, p)| q - proj * p).collect();
    if b.iter().all(|c| c.abs() < 1e-14) {
        return Err(FinslerError::InvalidInput(
            "start and towards are parallel".into(),
        ));
    }
    let b = normalized(&b);
    let dim_m = spec.decomposition().dim_m();

    let mut branch_eigenvalues = Vec::with_capacity(points);
    let mut crossings = Vec::new();
    let mut max_selection_jump: f64 = 0.0;
    let mut max_branch_step: f64 = 0.0;
    let mut prev: Option<(Vec<DVector<f64>>, usize)> = None;
    for k in 0..points {
        let angle = std::f64::consts::TAU * k as f64 / points as f64;
        let x: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(p, q)| angle.cos() * p + angle.sin() * q)
            .collect();
        let op = alpha_operator(spec, &x)?;
        let x_m = spec.decomposition().project_m(&x);
        let g = spec.m_metric(&x_m)?;
        let current: Vec<DVector<f64>> = (0..dim_m)
            .map(|i| op.eigenvectors.column(i).into_owned())
            .collect();

        // branch[j] = index into current for tracked branch j
        let branch: Vec<usize> = match &prev {
            None => (0..dim_m).collect(),
            Some((last, _)) => {
                let mut taken = vec![false; dim_m];
                let mut assign = vec![0; dim_m];
                for (j, lv) in last.iter().enumerate() {
                    let pick = (0..dim_m)
                        .filter(|i| !taken[*i])
                        .min_by(|&p, &q| {
                            line_angle(&g, lv, &current[p]).total_cmp(&line_angle(
                                &g,
                                lv,
                                &current[q],
                            ))
                        })
                        .expect("one unassigned eigenvector per branch");
                    taken[pick] = true;
                    assign[j] = pick;
                }
                assign
            }
        };
        let tracked: Vec<DVector<f64>> = branch.iter().map(|&i| current[i].clone()).collect();
        let values: Vec<f64> = branch.iter().map(|&i| op.eigenvalues[i]).collect();
        let dominant = (0..dim_m).fold(0, |best, j| {
            if values[j].abs() > values[best].abs() {
                j
            } else {
                best
            }
        });

        if let Some((last, last_dom)) = &prev {
            for j in 0..dim_m {
                max_branch_step = max_branch_step.max(line_angle(&g, &last[j], &tracked[j]));
            }
            let jump = line_angle(&g, &last[*last_dom], &tracked[dominant]);
            max_selection_jump = max_selection_jump.max(jump);
            if dominant != *last_dom {
                crossings.push(ProbeCrossing {
                    angle,
                    from_branch: *last_dom,
                    to_branch: dominant,
                    selection_jump: jump,
                });
            }
        }
        branch_eigenvalues.push(values);
        prev = Some((tracked, dominant));
    }
    Ok(GapProbeReport {
        points,
        start: a,
        towards: b,
        branch_eigenvalues,
        crossings,
        max_selection_jump,
        max_branch_step,
    })
}
