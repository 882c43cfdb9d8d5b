//! Lie algebra data, the Killing form and reductive decompositions.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::linalg::Tensor3;

/// A real Lie algebra given by structure constants in a fixed basis `e_1..e_n`.
///
/// `constant(i, j, k)` is the `e_k` component of `[e_i, e_j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieAlgebraData {
    dim: usize,
    constants: Tensor3,
    labels: Vec<String>,
}

impl LieAlgebraData {
    /// Builds an algebra from `table[i][j]`, the coordinates of `[e_i, e_j]`.
    ///
    /// Rejects tables that are not antisymmetric or violate the Jacobi identity.
    pub fn from_table(table: &[Vec<Vec<f64>>], labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(FinslerError::InvalidInput(
                "empty structure constant table".into(),
            ));
        }
        let mut c = Tensor3::zeros(n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(FinslerError::InvalidInput(format!(
                    "structure constants row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, bracket) in row.iter().enumerate() {
                if bracket.len() != n {
                    return Err(FinslerError::InvalidInput(format!(
                        "[e{}, e{}] has {} components, expected {n}",
                        i + 1,
                        j + 1,
                        bracket.len()
                    )));
                }
                for (k, v) in bracket.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(FinslerError::InvalidInput(
                            "structure constants must be finite".into(),
                        ));
                    }
                    c.set(i, j, k, *v);
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (1..=n).map(|i| format!("e{i}")).collect());
        if labels.len() != n {
            return Err(FinslerError::InvalidInput(
                "one label per basis vector required".into(),
            ));
        }
        let alg = LieAlgebraData {
            dim: n,
            constants: c,
            labels,
        };
        let anti = alg.antisymmetry_residual();
        if anti > 1e-12 {
            return Err(FinslerError::InvalidInput(format!(
                "structure constants are not antisymmetric (residual {anti:e})"
            )));
        }
        let jac = alg.jacobi_residual();
        let scale = alg.constants.max_abs().max(1.0);
        if jac > 1e-10 * scale * scale {
            return Err(FinslerError::InvalidInput(format!(
                "structure constants violate the Jacobi identity (residual {jac:e})"
            )));
        }
        Ok(alg)
    }

    /// Builds an algebra from a list of nonzero brackets `[e_i, e_j] = Σ v_k e_k` with `i < j`.
    fn from_brackets(n: usize, brackets: &[(usize, usize, Vec<f64>)], labels: &[&str]) -> Self {
        let mut table = vec![vec![vec![0.0; n]; n]; n];
        for (i, j, v) in brackets {
            table[*i][*j] = v.clone();
            table[*j][*i] = v.iter().map(|x| -x).collect();
        }
        Self::from_table(&table, Some(labels.iter().map(|s| s.to_string()).collect()))
            .expect("built-in structure constants are valid")
    }

    pub fn abelian(n: usize) -> Self {
        let labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Self::from_brackets(n, &[], &refs)
    }

    /// `[e1, e2] = e3`.
    pub fn heisenberg() -> Self {
        Self::from_brackets(3, &[(0, 1, vec![0.0, 0.0, 1.0])], &["e1", "e2", "e3"])
    }

    /// `[e_i, e_j] = ε_ijk e_k`.
    pub fn su2() -> Self {
        Self::from_brackets(
            3,
            &[
                (0, 1, vec![0.0, 0.0, 1.0]),
                (1, 2, vec![1.0, 0.0, 0.0]),
                (0, 2, vec![0.0, -1.0, 0.0]),
            ],
            &["e1", "e2", "e3"],
        )
    }

    /// The affine group of the line: `[e1, e2] = -e1`.
    pub fn affine_line() -> Self {
        Self::from_brackets(2, &[(0, 1, vec![-1.0, 0.0])], &["e1", "e2"])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants.get(i, j, k)
    }

    /// `[u, v]` in basis coordinates.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                let w = u[i] * v[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.constants.get(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad_u` acting on coordinate columns.
    pub fn ad(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let b = self.bracket(u, &e);
            for row in 0..n {
                m[(row, col)] = b[row];
            }
        }
        m
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.constant(i, j, k) + self.constant(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// max over basis triples of |[[a,b],c] + [[b,c],a] + [[c,a],b]|.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let basis = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        };
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (ea, eb, ec) = (basis(a), basis(b), basis(c));
                    let t1 = self.bracket(&self.bracket(&ea, &eb), &ec);
                    let t2 = self.bracket(&self.bracket(&eb, &ec), &ea);
                    let t3 = self.bracket(&self.bracket(&ec, &ea), &eb);
                    for k in 0..n {
                        r = r.max((t1[k] + t2[k] + t3[k]).abs());
                    }
                }
            }
        }
        r
    }
}

/// `K(e_i, e_j) = tr(ad e_i ∘ ad e_j)`.
pub fn killing_form(algebra: &LieAlgebraData) -> DMatrix<f64> {
    let n = algebra.dim();
    DMatrix::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for m in 0..n {
            for l in 0..n {
                acc += algebra.constant(i, l, m) * algebra.constant(j, m, l);
            }
        }
        acc
    })
}

/// Which case of the Killing-form dichotomy holds on `𝔪`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadicalBranch {
    /// `rad(K) = 𝔪`.
    RadicalIsM,
    /// `rad(K)` is a proper subspace of `𝔪`.
    RadicalProper,
}

/// A splitting `𝔤 = 𝔥 ⊕ 𝔪` with `𝔪` the Killing-orthogonal complement of `𝔥`.
///
/// Bases are stored as columns in algebra coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductiveDecomposition {
    pub h_basis: DMatrix<f64>,
    pub m_basis: DMatrix<f64>,
    pub killing: DMatrix<f64>,
    pub radical: DMatrix<f64>,
    pub branch: RadicalBranch,
    /// max |[h_i, m_j]_𝔥| in the (𝔥, 𝔪) coordinates.
    pub ad_invariance_residual: f64,
}

const RANK_TOL: f64 = 1e-10;

fn null_space(m: &DMatrix<f64>, ncols: usize) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    // pad to square so the SVD exposes a full right basis
    let mut a = DMatrix::zeros(ncols.max(m.nrows()), ncols);
    a.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
    let scale = m.amax().max(1.0);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let cols: Vec<_> = (0..ncols)
        .filter(|&i| svd.singular_values[i] <= RANK_TOL * scale)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(ncols, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let scale = m.amax().max(1.0);
    m.clone().svd(false, false).rank(RANK_TOL * scale)
}

impl ReductiveDecomposition {
    pub fn dim_m(&self) -> usize {
        self.m_basis.ncols()
    }

    /// Coordinates of `v` with respect to the `𝔪` basis after dropping its `𝔥` part.
    pub fn project_m(&self, v: &[f64]) -> Vec<f64> {
        let dh = self.h_basis.ncols();
        if dh == 0 && self.m_basis == DMatrix::identity(v.len(), v.len()) {
            return v.to_vec();
        }
        let basis = self.full_basis();
        let c = basis
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(v))
            .expect("𝔥 ⊕ 𝔪 spans the algebra");
        c.as_slice()[dh..].to_vec()
    }

    /// Algebra vector with the given `𝔪` coordinates.
    pub fn embed_m(&self, coords: &[f64]) -> Vec<f64> {
        (&self.m_basis * nalgebra::DVector::from_column_slice(coords))
            .as_slice()
            .to_vec()
    }

    fn full_basis(&self) -> DMatrix<f64> {
        let n = self.killing.nrows();
        let dh = self.h_basis.ncols();
        let mut b = DMatrix::zeros(n, n);
        b.view_mut((0, 0), (n, dh)).copy_from(&self.h_basis);
        b.view_mut((0, dh), (n, n - dh)).copy_from(&self.m_basis);
        b
    }
}

/// Splits `𝔤 = 𝔥 ⊕ 𝔪` with `𝔪 = 𝔥^⊥` for the Killing form; `h_basis` vectors are algebra coordinates.
pub fn reductive_split(
    algebra: &LieAlgebraData,
    h_basis: &[Vec<f64>],
) -> Result<ReductiveDecomposition> {
    let n = algebra.dim();
    if let Some(bad) = h_basis.iter().find(|v| v.len() != n) {
        return Err(FinslerError::InvalidInput(format!(
            "h basis vector has {} components, expected {n}",
            bad.len()
        )));
    }
    let killing = killing_form(algebra);
    let dh = h_basis.len();
    let h = DMatrix::from_fn(n, dh, |i, j| h_basis[j][i]);
    if rank(&h) < dh {
        return Err(FinslerError::InvalidInput(
            "h basis is linearly dependent".into(),
        ));
    }

    let m_basis = if dh == 0 {
        DMatrix::identity(n, n)
    } else {
        let kh = h.transpose() * &killing * &h;
        if rank(&kh) < dh {
            return Err(FinslerError::Decomposition(
                "Killing form is degenerate on 𝔥, so 𝔥^⊥ need not be a complement; \
                 supply 𝔪 explicitly"
                    .into(),
            ));
        }
        null_space(&(h.transpose() * &killing), n)
    };
    if m_basis.ncols() + dh != n {
        return Err(FinslerError::Decomposition(
            "Killing-orthogonal complement has the wrong dimension".into(),
        ));
    }
    let radical = null_space(&killing, n);
    let branch = if radical.ncols() == m_basis.ncols() {
        RadicalBranch::RadicalIsM
    } else {
        RadicalBranch::RadicalProper
    };
    let mut dec = ReductiveDecomposition {
        h_basis: h,
        m_basis,
        killing,
        radical,
        branch,
        ad_invariance_residual: 0.0,
    };
    let full = dec.full_basis();
    if rank(&full) < n {
        return Err(FinslerError::Decomposition("𝔥 + 𝔪 does not span 𝔤".into()));
    }
    let lu = full.lu();
    let mut resid: f64 = 0.0;
    for i in 0..dh {
        let hi: Vec<f64> = dec.h_basis.column(i).iter().copied().collect();
        for j in 0..dec.m_basis.ncols() {
            let mj: Vec<f64> = dec.m_basis.column(j).iter().copied().collect();
            let b = algebra.bracket(&hi, &mj);
            let c = lu
                .solve(&nalgebra::DVector::from_vec(b))
                .expect("nonsingular basis");
            for k in 0..dh {
                resid = resid.max(c[k].abs());
            }
        }
    }
    dec.ad_invariance_residual = resid;
    Ok(dec)
}

/// `[e_i, e_j]_𝔪` for all `i < j`, in `𝔪` coordinates; these span `[𝔤, 𝔤]_𝔪`.
pub fn commutator_span_m(algebra: &LieAlgebraData, dec: &ReductiveDecomposition) -> Vec<Vec<f64>> {
    let n = algebra.dim();
    let mut span = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut ei = vec![0.0; n];
            let mut ej = vec![0.0; n];
            ei[i] = 1.0;
            ej[j] = 1.0;
            span.push(dec.project_m(&algebra.bracket(&ei, &ej)));
        }
    }
    span
}

/// A unit vector of `𝔪` orthogonal to `[𝔤, 𝔤]_𝔪`, or `None` when the projected derived algebra fills `𝔪`.
///
/// `inner` is a scalar product on `𝔪` coordinates (identity when `None`); the
/// result is returned in algebra coordinates.
pub fn commutator_complement_vector(
    algebra: &LieAlgebraData,
    dec: &ReductiveDecomposition,
    inner: Option<&DMatrix<f64>>,
) -> Result<Option<Vec<f64>>> {
    let dm = dec.dim_m();
    let ip = inner.cloned().unwrap_or_else(|| DMatrix::identity(dm, dm));
    if ip.nrows() != dm || ip.ncols() != dm {
        return Err(FinslerError::InvalidInput(format!(
            "auxiliary scalar product must be {dm}×{dm}"
        )));
    }
    if nalgebra::Cholesky::new(ip.clone()).is_none() {
        return Err(FinslerError::InvalidInput(
            "auxiliary scalar product is not positive definite".into(),
        ));
    }
    let span = commutator_span_m(algebra, dec);
    // rows of S·ip annihilate the complement: Σ_k s_k ip_kl x_l = 0
    let s = DMatrix::from_fn(span.len(), dm, |r, c| span[r][c]);
    let constraints = if span.is_empty() { s } else { s * &ip };
    let comp = null_space(&constraints, dm);
    if comp.ncols() == 0 {
        return Ok(None);
    }
    // deterministic choice: the coordinate axis with the largest projection onto the complement
    let gram = comp.transpose() * &ip * &comp;
    let gram_inv = nalgebra::Cholesky::new(gram).expect("complement basis is independent");
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for axis in 0..dm {
        let mut e = DMatrix::zeros(dm, 1);
        e[(axis, 0)] = 1.0;
        let coeff = gram_inv.solve(&(comp.transpose() * &ip * &e));
        let p = &comp * coeff;
        let len2 = (p.transpose() * &ip * &p)[(0, 0)];
        if best.as_ref().is_none_or(|(b, _)| len2 > *b + 1e-12) {
            best = Some((len2, p));
        }
    }
    let (len2, p) = best.expect("dim 𝔪 > 0");
    let coords: Vec<f64> = p.iter().map(|v| v / len2.sqrt()).collect();
    Ok(Some(dec.embed_m(&coords)))
}
