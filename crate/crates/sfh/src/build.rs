//! Turns configuration specs into core objects.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sfh_core::bump::TensorBump;
use sfh_core::characteristic::{build_ruled_graph, RuledGraph, RulingData};
use sfh_core::graph::Jet;
use sfh_core::variation::VariationField;
use sfh_core::{ClosedForm, ClosedFormGraph, ConvexBody2D, FrameVector, GridGraph, IntrinsicGraph, Rect};

use crate::config::{BodySpec, ClosedFormId, CoefficientSpec, DomainSpec, FieldSpec, GraphSpec, LoadedConfig};
use crate::error::{CliError, CliResult};

pub fn rect(d: &DomainSpec) -> CliResult<Rect> {
    Ok(Rect::new(d.x0, d.x1, d.t0, d.t1)?)
}

pub fn build_body(spec: &BodySpec) -> CliResult<ConvexBody2D> {
    let body = match spec {
        BodySpec::Disk { r } => ConvexBody2D::disk(*r)?,
        BodySpec::Ellipse { a, b } => ConvexBody2D::ellipse(*a, *b)?,
        BodySpec::SupportSamples { h, .. } => ConvexBody2D::sampled("support_samples", h.clone())?,
    };
    let check = body.validate_c2_plus();
    if !check.ok {
        return Err(sfh_core::Error::NotC2Plus { margin: check.margin }.into());
    }
    Ok(body)
}

/// Ruling data as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulingFile {
    pub base_x: f64,
    pub eps: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl From<&RulingData> for RulingFile {
    fn from(r: &RulingData) -> Self {
        Self { base_x: r.base_x, eps: r.eps.clone(), a: r.a.clone(), b: r.b.clone() }
    }
}

impl RulingFile {
    pub fn into_ruling(self) -> CliResult<RulingData> {
        Ok(RulingData::new(self.base_x, self.eps, self.a, self.b)?)
    }
}

pub fn read_ruling(path: &Path) -> CliResult<RulingFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading ruling {}", path.display()), e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Ingest {
        file: path.to_path_buf(),
        message: format!("at {}: {}", e.path(), e.inner()),
    })
}

/// Reads `nx × nt` values written one row per `t` level.
pub fn read_grid_values(path: &Path, nx: usize, nt: usize) -> CliResult<Vec<f64>> {
    let ingest = |message: String| CliError::Ingest { file: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ingest(e.to_string()))?;
    let mut values = Vec::new();
    let mut row_lengths = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingest(e.to_string()))?;
        let mut n = 0;
        for (c, field) in record.iter().enumerate().filter(|(_, f)| !f.is_empty()) {
            let v: f64 = field
                .parse()
                .map_err(|_| ingest(format!("row {}, column {}: `{field}` is not a number", r + 1, c + 1)))?;
            values.push(v);
            n += 1;
        }
        if n > 0 {
            row_lengths.push(n);
        }
    }
    if values.len() != nx * nt {
        let cols = match (row_lengths.iter().min(), row_lengths.iter().max()) {
            (Some(lo), Some(hi)) if lo == hi => format!("{lo}"),
            (Some(lo), Some(hi)) => format!("{lo}..{hi}"),
            _ => "0".into(),
        };
        return Err(ingest(format!(
            "expected nx x nt = {nx} x {nt} = {} values, found {} ({} rows x {cols} columns)",
            nx * nt,
            values.len(),
            row_lengths.len()
        )));
    }
    Ok(values)
}

/// Every graph the CLI can load.
#[derive(Debug, Clone)]
pub enum Graph {
    Closed(ClosedFormGraph),
    Grid(GridGraph),
    Ruled(RuledGraph),
}

impl IntrinsicGraph for Graph {
    fn domain(&self) -> Rect {
        match self {
            Graph::Closed(g) => g.domain(),
            Graph::Grid(g) => g.domain(),
            Graph::Ruled(g) => g.domain(),
        }
    }

    fn jet(&self, x: f64, t: f64) -> sfh_core::Result<Jet> {
        match self {
            Graph::Closed(g) => g.jet(x, t),
            Graph::Grid(g) => g.jet(x, t),
            Graph::Ruled(g) => g.jet(x, t),
        }
    }
}

fn need<T: Clone>(v: &Option<T>, path: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::config(path, "missing for this graph type"))
}

pub fn build_graph(spec: &GraphSpec, loaded: &LoadedConfig) -> CliResult<Graph> {
    let domain = rect(&loaded.config.domain)?;
    match spec {
        GraphSpec::ClosedForm { id, a, b, coeffs } => {
            let kind = match id {
                ClosedFormId::Zero => ClosedForm::Zero,
                ClosedFormId::Affine => ClosedForm::Affine { a: need(a, "graph.a")?, b: need(b, "graph.b")? },
                ClosedFormId::XtOver1px2 => ClosedForm::XtOver1px2,
                ClosedFormId::CustomPoly => ClosedForm::Poly(need(coeffs, "graph.coeffs")?),
            };
            Ok(Graph::Closed(ClosedFormGraph::new(kind, domain)))
        }
        GraphSpec::Grid { x0, x1, t0, t1, nx, nt, values } => {
            let d = Rect::new(*x0, *x1, *t0, *t1)?;
            let v = read_grid_values(&loaded.resolve(values), *nx, *nt)?;
            Ok(Graph::Grid(GridGraph::new(d, *nx, *nt, v)?))
        }
        GraphSpec::Ruled { path, base_x, eps, a, b } => {
            let inline = base_x.is_some() || eps.is_some() || a.is_some() || b.is_some();
            let file = match (path, inline) {
                (Some(p), false) => read_ruling(&loaded.resolve(p))?,
                (None, true) => RulingFile {
                    base_x: need(base_x, "graph.base_x")?,
                    eps: need(eps, "graph.eps")?,
                    a: need(a, "graph.a")?,
                    b: need(b, "graph.b")?,
                },
                _ => return Err(CliError::config("graph", "ruled graph needs either `path` or inline base_x/eps/a/b")),
            };
            Ok(Graph::Ruled(build_ruled_graph(file.into_ruling()?, domain)?))
        }
    }
}

pub fn build_field(spec: &FieldSpec) -> CliResult<VariationField> {
    let b = &spec.bump;
    let bump = TensorBump::new(b.center[0], b.center[1], b.radius[0], b.radius[1], b.power)?;
    Ok(match spec.coefficients {
        CoefficientSpec::Adapted { u_z, u_nu, u_t } => VariationField::adapted(u_z, u_nu, u_t, bump),
        CoefficientSpec::Frame { x, y, t } => VariationField::frame(FrameVector::new(x, y, t), bump),
    })
}

/// Field drawn from `seed`: a bump in the middle half of `domain` with
/// coefficients in `[-1, 1]`; purely normal when `normal_only`.
pub fn random_field(seed: u64, domain: &Rect, normal_only: bool) -> FieldSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wx, wt) = (domain.x1 - domain.x0, domain.t1 - domain.t0);
    let cx = domain.x0 + wx * rng.gen_range(0.25..0.75);
    let ct = domain.t0 + wt * rng.gen_range(0.25..0.75);
    let mut c = || rng.gen_range(-1.0..1.0);
    let coefficients = if normal_only {
        CoefficientSpec::Adapted { u_z: 0.0, u_nu: c(), u_t: 0.0 }
    } else {
        CoefficientSpec::Adapted { u_z: c(), u_nu: c(), u_t: c() }
    };
    crate::config::FieldSpec {
        coefficients,
        bump: crate::config::BumpSpec { center: [cx, ct], radius: [0.25 * wx, 0.25 * wt], power: 4 },
    }
}
