use finsler_core::chart::connection_data;
use finsler_core::geodesy::{integrate_geodesic, IntegratorOptions};
use finsler_core::homspace::{
    commutator_complement_vector, killing_form, HomogeneousSpaceSpec, RadicalBranch,
};
use finsler_core::linalg::{normalized, Tensor3};
use finsler_core::minkowski::fundamental_tensor;
use finsler_core::search::{
    algebraic_components, certify_candidate, find_zeros, sample_sphere_field,
    GeodesicVectorCandidate, Provenance, SearchBranches, Status,
};
use finsler_core::FinslerError;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::Format;
use crate::config::{AlgebraicSpace, Settings, Space};
use crate::error::CliError;
use crate::output::{num, Table};

/// Rendered command result and the exit code that goes with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    pub exit_code: u8,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    space: Option<&'a str>,
    seed: u64,
    result: T,
}

/// Context shared by every command.
pub struct Ctx<'a> {
    pub command: &'a str,
    pub space: Option<&'a Space>,
    pub settings: &'a Settings,
    pub format: Format,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.settings.search.seed
    }

    fn space_name(&self) -> Option<&str> {
        self.space.map(|s| s.name())
    }

    fn json<T: Serialize>(&self, result: T) -> Result<String, CliError> {
        let env = Envelope {
            command: self.command,
            space: self.space_name(),
            seed: self.seed(),
            result,
        };
        let mut s = serde_json::to_string_pretty(&env)
            .map_err(|e| CliError::Usage(format!("cannot serialize result: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    fn table(&self, columns: Vec<String>) -> Table {
        let mut comment = format!("finsler {}", self.command);
        if let Some(name) = self.space_name() {
            comment.push_str(&format!(" space={name}"));
        }
        comment.push_str(&format!(" seed={}", self.seed()));
        Table::new(comment, columns)
    }

    fn render<T: Serialize>(
        &self,
        result: T,
        table: impl FnOnce() -> Result<Table, CliError>,
    ) -> Result<String, CliError> {
        match self.format {
            Format::Json => self.json(result),
            Format::Csv => table()?.render(),
        }
    }
}

fn ok(body: String) -> Output {
    Output { body, exit_code: 0 }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn nested(t: &Tensor3) -> Vec<Vec<Vec<f64>>> {
    let n = t.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| t.get(i, j, k)).collect())
                .collect()
        })
        .collect()
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Serialize)]
struct SpaceEntry {
    #[serde(flatten)]
    summary: finsler_core::homspace::SpaceSummary,
    branches: Vec<&'static str>,
    guaranteed: bool,
}

fn branch_tags(b: &SearchBranches) -> Vec<&'static str> {
    let mut tags = vec![];
    if b.odd_dimension {
        tags.push("odd-dimension");
    }
    if b.berwald {
        tags.push("berwald");
    }
    if b.reversible {
        tags.push("reversible");
    }
    tags.push(match b.radical_branch {
        RadicalBranch::RadicalIsM => "radical-is-m",
        RadicalBranch::RadicalProper => "radical-proper",
    });
    tags
}

pub fn spaces(ctx: &Ctx, dim: Option<usize>, filter: Option<&str>) -> Result<Output, CliError> {
    let filter = filter.map(str::to_lowercase);
    let mut entries = vec![];
    for name in HomogeneousSpaceSpec::builtin_names() {
        let spec = HomogeneousSpaceSpec::builtin(name)?;
        let b = SearchBranches::of(&spec);
        let entry = SpaceEntry {
            summary: spec.summary(),
            branches: branch_tags(&b),
            guaranteed: b.guaranteed,
        };
        if dim.is_some_and(|d| d != entry.summary.dim) {
            continue;
        }
        if let Some(f) = &filter {
            let s = &entry.summary;
            let hit = s.name.contains(f.as_str())
                || s.family.name() == f
                || s.metric.to_lowercase().contains(f.as_str())
                || entry.branches.iter().any(|t| t == f);
            if !hit {
                continue;
            }
        }
        entries.push(entry);
    }
    let body = ctx.render(&entries, || {
        let mut t = ctx.table(
            ["name", "family", "dim", "metric", "branches", "guaranteed"]
                .map(String::from)
                .to_vec(),
        );
        for e in &entries {
            t.push(vec![
                e.summary.name.clone(),
                e.summary.family.name().into(),
                e.summary.dim.to_string(),
                e.summary.metric.clone(),
                e.branches.join(";"),
                e.guaranteed.to_string(),
            ]);
        }
        Ok(t)
    })?;
    Ok(ok(body))
}

#[derive(Serialize)]
struct TensorReport {
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(rename = "F")]
    f: f64,
    g: Vec<Vec<f64>>,
    cartan: Vec<Vec<Vec<f64>>>,
    gamma: Vec<Vec<Vec<f64>>>,
    nonlinear: Vec<Vec<f64>>,
    chern: Vec<Vec<Vec<f64>>>,
}

pub fn tensors(ctx: &Ctx, x: Option<&[f64]>, y: &[f64]) -> Result<Output, CliError> {
    let spec = ctx.space.expect("resolved").chart(ctx.command)?;
    let x = x.unwrap_or(spec.origin());
    let chart = spec.chart();
    let d = connection_data(chart, x, y)?;
    let report = TensorReport {
        x: x.to_vec(),
        y: y.to_vec(),
        f: chart.eval(x, y)?,
        g: rows(&d.g),
        cartan: nested(&d.cartan),
        gamma: nested(&d.gamma),
        nonlinear: rows(&d.nonlinear),
        chern: nested(&d.chern),
    };
    let body = ctx.render(&report, || {
        let mut t = ctx.table(
            ["tensor", "i", "j", "k", "value"]
                .map(String::from)
                .to_vec(),
        );
        let n = x.len();
        t.push(vec![
            "F".into(),
            "".into(),
            "".into(),
            "".into(),
            num(report.f),
        ]);
        for (name, m) in [("g", &report.g), ("nonlinear", &report.nonlinear)] {
            for i in 0..n {
                for j in 0..n {
                    let idx = [i + 1, j + 1].map(|v| v.to_string());
                    t.push(vec![
                        name.into(),
                        idx[0].clone(),
                        idx[1].clone(),
                        "".into(),
                        num(m[i][j]),
                    ]);
                }
            }
        }
        for (name, c) in [
            ("cartan", &report.cartan),
            ("gamma", &report.gamma),
            ("chern", &report.chern),
        ] {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        t.push(vec![
                            name.into(),
                            (i + 1).to_string(),
                            (j + 1).to_string(),
                            (k + 1).to_string(),
                            num(c[i][j][k]),
                        ]);
                    }
                }
            }
        }
        Ok(t)
    })?;
    Ok(ok(body))
}

pub fn geodesic(ctx: &Ctx, x: Option<&[f64]>, y: &[f64], t_end: f64) -> Result<Output, CliError> {
    let spec = ctx.space.expect("resolved").chart(ctx.command)?;
    let x = x.unwrap_or(spec.origin());
    let search = &ctx.settings.search;
    let opts = IntegratorOptions {
        step: search.step,
        drift_bound: search.tolerances.speed_drift,
    };
    let sol = integrate_geodesic(spec.chart(), x, y, t_end, opts)?;
    let body = match ctx.format {
        Format::Json => ctx.json(&sol)?,
        Format::Csv => {
            let mut s = ctx.table(vec![]).comment_line();
            s.push_str(&sol.to_csv());
            s
        }
    };
    Ok(ok(body))
}

fn candidate_row(label: &str, c: &GeodesicVectorCandidate) -> Vec<String> {
    let cert = &c.certification;
    let mut row: Vec<String> = c.x.iter().map(|v| num(*v)).collect();
    row.push(label.into());
    row.push(status_name(cert.status).into());
    row.push(c.both_signs.to_string());
    row.push(num(cert.t_residual));
    row.push(num(cert.v_residual));
    row.push(num(cert.algebraic_residual));
    row.push(
        cert.comparison
            .as_ref()
            .map(|r| num(r.sup_distance))
            .unwrap_or_default(),
    );
    row.push(
        c.opposite
            .as_ref()
            .map(|o| status_name(o.status).to_string())
            .unwrap_or_default(),
    );
    row
}

fn candidate_columns(n: usize) -> Vec<String> {
    let mut cols = indexed("x", n);
    cols.extend(
        [
            "source",
            "status",
            "both_signs",
            "t_residual",
            "v_residual",
            "algebraic_residual",
            "sup_distance",
            "opposite_status",
        ]
        .map(String::from),
    );
    cols
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Certified => "certified",
        Status::Uncorroborated => "uncorroborated",
        Status::Disputed => "disputed",
        Status::Rejected => "rejected",
    }
}

/// Exit code 3 when a homogeneous geodesic is guaranteed but none was certified.
pub fn search(ctx: &Ctx) -> Result<Output, CliError> {
    let spec = ctx.space.expect("resolved").chart(ctx.command)?;
    let report = find_zeros(spec, &ctx.settings.search)?;
    let violated = report.branches.guaranteed && report.certified().next().is_none();
    let body = ctx.render(&report, || {
        let mut t = ctx.table(candidate_columns(spec.dim()));
        for c in &report.candidates {
            t.push(candidate_row("sphere-zero", c));
        }
        if let Some(c) = &report.complement {
            t.push(candidate_row("complement", c));
        }
        if let Some(c) = &report.g_orthogonal_complement {
            t.push(candidate_row("g-orthogonal-complement", c));
        }
        Ok(t)
    })?;
    if violated {
        eprintln!(
            "no certified geodesic vector on {} although one is guaranteed",
            spec.name()
        );
    }
    Ok(Output {
        body,
        exit_code: if violated { 3 } else { 0 },
    })
}

/// Only the algebraic criterion is available without a chart.
#[derive(Serialize)]
struct AlgebraicVerification {
    x: Vec<f64>,
    algebraic_components: Vec<f64>,
    algebraic_residual: f64,
    status: Status,
    radical_branch: RadicalBranch,
    killing_form: Vec<Vec<f64>>,
    commutator_complement: Option<Vec<f64>>,
}

fn verify_algebraic(
    space: &AlgebraicSpace,
    x: &[f64],
    tol: f64,
) -> Result<AlgebraicVerification, CliError> {
    if x.len() != space.algebra.dim() {
        return Err(CliError::Usage(format!(
            "vector has {} components, the algebra is {}-dimensional",
            x.len(),
            space.algebra.dim()
        )));
    }
    let x = normalized(x);
    let metric = |x_m: &[f64]| fundamental_tensor(&space.norm, x_m).map(|f| f.g);
    let comps = algebraic_components(&space.algebra, &space.decomposition, &metric, &x)?;
    let residual = comps.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(AlgebraicVerification {
        x,
        algebraic_components: comps,
        algebraic_residual: residual,
        status: if residual <= tol {
            Status::Uncorroborated
        } else {
            Status::Rejected
        },
        radical_branch: space.decomposition.branch,
        killing_form: rows(&killing_form(&space.algebra)),
        commutator_complement: commutator_complement_vector(
            &space.algebra,
            &space.decomposition,
            None,
        )?,
    })
}

/// Exit code 0 whatever the verdict; the verdict is in the output.
pub fn verify(ctx: &Ctx, vector: &[f64]) -> Result<Output, CliError> {
    if vector.iter().all(|v| *v == 0.0) {
        return Err(FinslerError::DegenerateDirection("X = 0".into()).into());
    }
    let search = &ctx.settings.search;
    let body = match ctx.space.expect("resolved") {
        Space::Chart(spec) => {
            if vector.len() != spec.dim() {
                return Err(CliError::Usage(format!(
                    "vector has {} components, the space is {}-dimensional",
                    vector.len(),
                    spec.dim()
                )));
            }
            let c = certify_candidate(
                spec,
                vector,
                Provenance::Algebraic,
                &search.certify_options(),
            )?;
            ctx.render(&c, || {
                let mut t = ctx.table(candidate_columns(spec.dim()));
                t.push(candidate_row("given", &c));
                Ok(t)
            })?
        }
        Space::Algebraic(space) => {
            let v = verify_algebraic(space, vector, search.tolerances.algebraic)?;
            ctx.render(&v, || {
                let mut cols = indexed("x", v.x.len());
                cols.extend(["status", "algebraic_residual"].map(String::from));
                let mut t = ctx.table(cols);
                let mut row: Vec<String> = v.x.iter().map(|c| num(*c)).collect();
                row.push(status_name(v.status).into());
                row.push(num(v.algebraic_residual));
                t.push(row);
                Ok(t)
            })?
        }
    };
    Ok(ok(body))
}

pub fn sphere_field(ctx: &Ctx) -> Result<Output, CliError> {
    let spec = ctx.space.expect("resolved").chart(ctx.command)?;
    let search = &ctx.settings.search;
    let n = spec.dim();
    let samples = sample_sphere_field(spec, search.sample_count(n), search.seed)?;
    let body = ctx.render(&samples, || {
        let mut cols = indexed("x", n);
        cols.extend(indexed("v", n));
        cols.extend(["v_norm", "t_norm"].map(String::from));
        let mut t = ctx.table(cols);
        for s in &samples {
            let mut row: Vec<String> = s.x.iter().chain(&s.v).map(|v| num(*v)).collect();
            row.push(num(s.v_norm));
            row.push(num(s.t_norm));
            t.push(row);
        }
        Ok(t)
    })?;
    Ok(ok(body))
}
