//! One function per subcommand; each writes its artifacts and returns the JSON report text.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sfh_core::characteristic::{
    extract_ruling, integrate_characteristic, line_check, monotonicity_of, stationarity_of, CharacteristicCurve,
    Monotonicity,
};
use sfh_core::codazzi::{first_integral_residual, integrate_codazzi, CodazziSolution, GlobalClass};
use sfh_core::graph::{sub_riemannian_area, subfinsler_area};
use sfh_core::stability::{bernstein_report, BasisSpec, BernsteinConfig, SearchOptions, StabilityReport};
use sfh_core::variation::{
    first_variation_fd, first_variation_formula, second_variation_fd, second_variation_formula, FieldCoefficients,
    GraphSurface,
};
use sfh_core::{ConvexBody2D, IntrinsicGraph, QuadratureSpec, Rect};

use crate::build::{build_body, build_field, build_graph, random_field, rect, Graph, RulingFile};
use crate::config::{FieldSpec, LoadedConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_json};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "SFH_THREADS";

#[derive(Debug, Clone, Default)]
pub struct VariationArgs {
    pub second: bool,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct DomainJson {
    x0: f64,
    x1: f64,
    t0: f64,
    t1: f64,
}

impl From<Rect> for DomainJson {
    fn from(r: Rect) -> Self {
        Self { x0: r.x0, x1: r.x1, t0: r.t0, t1: r.t1 }
    }
}

fn body_of(cfg: &RunConfig) -> CliResult<ConvexBody2D> {
    build_body(cfg.body.as_ref().ok_or_else(|| CliError::config("body", "required by this command"))?)
}

fn graph_of(loaded: &LoadedConfig) -> CliResult<Graph> {
    let spec = loaded.config.graph.as_ref().ok_or_else(|| CliError::config("graph", "required by this command"))?;
    build_graph(spec, loaded)
}

fn quad(cfg: &RunConfig) -> QuadratureSpec {
    QuadratureSpec::new(cfg.quadrature.cells_x, cfg.quadrature.cells_t, cfg.quadrature.order)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

/// Thread pool honouring `SFH_THREADS`; rayon's default size when unset.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

struct Foliation {
    base_x: f64,
    eps: Vec<f64>,
    s_range: (f64, f64),
}

fn foliation(cfg: &RunConfig, domain: &Rect) -> Foliation {
    let f = &cfg.foliation;
    let base_x = f.base_x.unwrap_or_else(|| 0.0f64.clamp(domain.x0, domain.x1));
    let eps = f.eps.clone().unwrap_or_else(|| {
        let margin = 0.05 * (domain.t1 - domain.t0);
        let (lo, hi) = (domain.t0 + margin, domain.t1 - margin);
        let n = f.eps_count;
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    });
    let s_range = f.s_range.map(|[a, b]| (a, b)).unwrap_or((domain.x0 - base_x, domain.x1 - base_x));
    Foliation { base_x, eps, s_range }
}

fn integrate_all(g: &Graph, fol: &Foliation, step: f64) -> CliResult<Vec<CharacteristicCurve>> {
    let pool = thread_pool()?;
    let curves = pool.install(|| {
        fol.eps
            .par_iter()
            .map(|&e| integrate_characteristic(g, fol.base_x, e, fol.s_range, step))
            .collect::<sfh_core::Result<Vec<_>>>()
    })?;
    Ok(curves)
}

#[derive(Serialize)]
struct AreaReport {
    command: &'static str,
    body: String,
    domain: DomainJson,
    cells_x: usize,
    cells_t: usize,
    order: usize,
    area: f64,
    sub_riemannian_area: f64,
}

fn area_values(g: &Graph, body: &ConvexBody2D, q: &QuadratureSpec) -> CliResult<(f64, f64)> {
    Ok((subfinsler_area(g, body, q)?, sub_riemannian_area(g, q)?))
}

pub fn area(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let (body, g) = (body_of(cfg)?, graph_of(loaded)?);
    let (area, sr) = area_values(&g, &body, &quad(cfg))?;
    let report = AreaReport {
        command: "area",
        body: body.name().to_string(),
        domain: g.domain().into(),
        cells_x: cfg.quadrature.cells_x,
        cells_t: cfg.quadrature.cells_t,
        order: cfg.quadrature.order,
        area,
        sub_riemannian_area: sr,
    };
    write_json(&out_path(cfg, "area.json"), &report)
}

#[derive(Serialize)]
struct MonotonicityJson {
    min_quotient: f64,
    at_s: f64,
    at_eps: f64,
    crossing: bool,
}

impl From<Monotonicity> for MonotonicityJson {
    fn from(m: Monotonicity) -> Self {
        Self { min_quotient: m.min_quotient, at_s: m.at_s, at_eps: m.at_eps, crossing: m.crossing }
    }
}

#[derive(Serialize)]
struct CurveSummary {
    eps: f64,
    p_oscillation: f64,
    samples: usize,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Serialize)]
struct StationarityReport {
    command: &'static str,
    base_x: f64,
    s_range: [f64; 2],
    ode_step: f64,
    tolerance: f64,
    stationary: bool,
    residual: f64,
    monotonicity: Option<MonotonicityJson>,
    max_line_residual: f64,
    max_contact: f64,
    curves: Vec<CurveSummary>,
}

pub fn stationarity(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let g = graph_of(loaded)?;
    let fol = foliation(cfg, &g.domain());
    let curves = integrate_all(&g, &fol, cfg.steps.ode)?;
    let res = stationarity_of(&curves);
    let (mut line, mut contact) = (0.0f64, 0.0f64);
    for c in &curves {
        let lc = line_check(&g, c)?;
        line = line.max(lc.max_residual);
        contact = contact.max(lc.max_contact);
    }
    let report = StationarityReport {
        command: "stationarity",
        base_x: fol.base_x,
        s_range: [fol.s_range.0, fol.s_range.1],
        ode_step: cfg.steps.ode,
        tolerance: cfg.foliation.stationarity_tolerance,
        stationary: res.max <= cfg.foliation.stationarity_tolerance,
        residual: res.max,
        monotonicity: monotonicity_of(&curves).ok().map(Into::into),
        max_line_residual: line,
        max_contact: contact,
        curves: curves
            .iter()
            .map(|c| CurveSummary {
                eps: c.eps,
                p_oscillation: c.p_oscillation(),
                samples: c.len(),
                truncated: c.truncated,
                file: None,
            })
            .collect(),
    };
    write_json(&out_path(cfg, "stationarity.json"), &report)
}

#[derive(Serialize)]
struct FoliateReport {
    command: &'static str,
    base_x: f64,
    s_range: [f64; 2],
    ode_step: f64,
    stationarity_residual: f64,
    monotonicity: Option<MonotonicityJson>,
    ruling_file: String,
    curves: Vec<CurveSummary>,
}

pub fn foliate(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let g = graph_of(loaded)?;
    let fol = foliation(cfg, &g.domain());
    let curves = integrate_all(&g, &fol, cfg.steps.ode)?;
    let mut summaries = Vec::with_capacity(curves.len());
    for (k, c) in curves.iter().enumerate() {
        let name = format!("curves/curve_{k:03}.csv");
        let rows = (0..c.len()).map(|i| vec![c.s[i], c.t[i], c.u[i], c.p[i]]);
        write_csv(&out_path(cfg, &name), &["s", "t", "u", "p"], rows)?;
        summaries.push(CurveSummary {
            eps: c.eps,
            p_oscillation: c.p_oscillation(),
            samples: c.len(),
            truncated: c.truncated,
            file: Some(name),
        });
    }
    let ruling = extract_ruling(&g, fol.base_x, &fol.eps)?;
    write_json(&out_path(cfg, "ruling.json"), &RulingFile::from(&ruling))?;
    let report = FoliateReport {
        command: "foliate",
        base_x: fol.base_x,
        s_range: [fol.s_range.0, fol.s_range.1],
        ode_step: cfg.steps.ode,
        stationarity_residual: stationarity_of(&curves).max,
        monotonicity: monotonicity_of(&curves).ok().map(Into::into),
        ruling_file: "ruling.json".into(),
        curves: summaries,
    };
    write_json(&out_path(cfg, "foliate.json"), &report)
}

#[derive(Serialize)]
struct VariationReport {
    command: &'static str,
    order: u8,
    field: FieldSpec,
    field_source: &'static str,
    seed: u64,
    ds: f64,
    fd_step: f64,
    fd: f64,
    formula: f64,
    abs_gap: f64,
    rel_gap: f64,
}

pub fn variation(loaded: &LoadedConfig, args: &VariationArgs) -> CliResult<String> {
    let cfg = &loaded.config;
    let (body, g) = (body_of(cfg)?, graph_of(loaded)?);
    let (spec, source) = match cfg.field {
        Some(f) => (f, "config"),
        None => (random_field(cfg.seed, &g.domain(), args.second), "seed"),
    };
    let field = build_field(&spec)?;
    let q = quad(cfg);
    let (fd, formula) = if args.second {
        let u_nu = match field.coefficients {
            FieldCoefficients::Adapted { u_z, u_nu, u_t } if u_z == 0.0 && u_t == 0.0 => u_nu,
            _ => {
                return Err(CliError::config(
                    "field.coefficients",
                    "the second variation needs a normal field: adapted with u_z = u_t = 0",
                ))
            }
        };
        let fd = second_variation_fd(&GraphSurface(&g), &field, &body, cfg.steps.variation, &q)?.value;
        let f = field.bump.scaled(u_nu);
        (fd, second_variation_formula(&g, &f, &body, &q, cfg.steps.fd)?)
    } else {
        let fd = first_variation_fd(&GraphSurface(&g), &field, &body, cfg.steps.variation, &q)?;
        (fd, first_variation_formula(&g, &field, &body, &q, cfg.steps.fd)?)
    };
    let abs_gap = (fd - formula).abs();
    let report = VariationReport {
        command: "variation",
        order: if args.second { 2 } else { 1 },
        field: spec,
        field_source: source,
        seed: cfg.seed,
        ds: cfg.steps.variation,
        fd_step: cfg.steps.fd,
        fd,
        formula,
        abs_gap,
        // Unit floor keeps the ratio meaningful when both values vanish.
        rel_gap: abs_gap / (1.0 + fd.abs()),
    };
    let path = args.report.clone().unwrap_or_else(|| out_path(cfg, "variation.json"));
    write_json(&path, &report)
}

#[derive(Serialize)]
struct CodazziReport {
    command: &'static str,
    a: f64,
    b: f64,
    range: [f64; 2],
    step: f64,
    classification: &'static str,
    pole_at: Option<f64>,
    halted_at: Option<f64>,
    samples: usize,
    max_residual: f64,
    max_first_integral_residual: f64,
    csv: String,
}

pub fn codazzi(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let c = &cfg.codazzi;
    let sol = CodazziSolution::new(c.a, c.b);
    let samples = integrate_codazzi(c.a, c.b, (c.range[0], c.range[1]), c.step)?;
    let mut rows = Vec::with_capacity(samples.s.len());
    let (mut max_res, mut max_fi) = (0.0f64, 0.0f64);
    for (&s, &y) in samples.s.iter().zip(&samples.y) {
        let closed = sol.value(s)?;
        let r = (closed - y).abs();
        max_res = max_res.max(r);
        max_fi = max_fi.max(first_integral_residual(c.a, c.b, s)?);
        rows.push(vec![s, closed, y, r]);
    }
    if !max_res.is_finite() {
        return Err(CliError::Numerical("RK4 and closed form disagree by a non-finite amount".into()));
    }
    write_csv(&out_path(cfg, "codazzi.csv"), &["s", "y_closed", "y_rk4", "residual"], rows)?;
    let (classification, pole_at) = match sol.classify() {
        GlobalClass::Entire => ("entire", None),
        GlobalClass::PoleAt(s) => ("pole", Some(s)),
    };
    let report = CodazziReport {
        command: "codazzi",
        a: c.a,
        b: c.b,
        range: c.range,
        step: c.step,
        classification,
        pole_at,
        halted_at: samples.halted_at,
        samples: samples.s.len(),
        max_residual: max_res,
        max_first_integral_residual: max_fi,
        csv: "codazzi.csv".into(),
    };
    write_json(&out_path(cfg, "codazzi.json"), &report)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct AbJson {
    eps: f64,
    a: f64,
    b: f64,
    a_prime: f64,
    b_prime: f64,
    A: f64,
    B: f64,
}

#[derive(Serialize)]
struct BasisJson {
    nx: usize,
    nt: usize,
}

impl From<BasisSpec> for BasisJson {
    fn from(b: BasisSpec) -> Self {
        Self { nx: b.nx, nt: b.nt }
    }
}

#[derive(Serialize)]
struct WitnessJson {
    domain: DomainJson,
    basis: BasisJson,
    coeffs: Vec<f64>,
    q_direct: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct StabilityJson {
    stationary: bool,
    residual: f64,
    A_B_per_eps: Vec<AbJson>,
    min_eigenvalue: Option<f64>,
    eigen_converged: Option<bool>,
    resolution: Option<BasisJson>,
    witness: Option<WitnessJson>,
    plane_fit_residual: Option<f64>,
    verdict: &'static str,
    notes: Vec<String>,
}

impl From<StabilityReport> for StabilityJson {
    fn from(r: StabilityReport) -> Self {
        Self {
            stationary: r.stationary,
            residual: r.stationarity_residual,
            A_B_per_eps: r
                .ab_per_eps
                .iter()
                .map(|s| AbJson { eps: s.eps, a: s.a, b: s.b, a_prime: s.a_prime, b_prime: s.b_prime, A: s.cap_a, B: s.cap_b })
                .collect(),
            min_eigenvalue: r.min_eigenvalue,
            eigen_converged: r.eigen_converged,
            resolution: r.resolution.map(Into::into),
            witness: r.witness.map(|w| WitnessJson {
                domain: w.domain.into(),
                basis: w.basis.into(),
                coeffs: w.coefficients,
                q_direct: w.q_direct,
            }),
            plane_fit_residual: r.plane_fit_residual,
            verdict: r.verdict.as_str(),
            notes: r.notes,
        }
    }
}

fn bernstein_config(cfg: &RunConfig, domain: &Rect) -> CliResult<BernsteinConfig> {
    let fol = foliation(cfg, domain);
    let st = &cfg.stability;
    let mut b = BernsteinConfig::for_domain(domain);
    b.base_x = fol.base_x;
    b.eps_grid = fol.eps;
    b.s_range = fol.s_range;
    b.ode_step = cfg.steps.ode;
    b.stationarity_tolerance = cfg.foliation.stationarity_tolerance;
    b.planar_tolerance = st.planar_tolerance;
    b.negative_tolerance = st.negative_tolerance;
    b.search = SearchOptions {
        basis: BasisSpec { nx: st.basis_nx, nt: st.basis_nt },
        order: st.order,
        max_refinements: st.max_refinements,
        convergence: st.convergence,
        fd_step: cfg.steps.fd,
    };
    b.search_domain = st.search_domain.as_ref().map(rect).transpose()?;
    b.witness_order = st.witness_order;
    Ok(b)
}

fn stability_json(g: &Graph, body: &ConvexBody2D, cfg: &RunConfig) -> CliResult<StabilityJson> {
    let bc = bernstein_config(cfg, &g.domain())?;
    Ok(bernstein_report(g, body, &bc).into())
}

#[derive(Serialize)]
struct StabilityCommandReport {
    command: &'static str,
    body: String,
    domain: DomainJson,
    #[serde(flatten)]
    stability: StabilityJson,
}

pub fn stability(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let (body, g) = (body_of(cfg)?, graph_of(loaded)?);
    let report = StabilityCommandReport {
        command: "stability",
        body: body.name().to_string(),
        domain: g.domain().into(),
        stability: stability_json(&g, &body, cfg)?,
    };
    write_json(&out_path(cfg, "stability.json"), &report)
}

#[derive(Serialize)]
struct FullReport {
    command: &'static str,
    body: String,
    domain: DomainJson,
    seed: u64,
    area: f64,
    sub_riemannian_area: f64,
    #[serde(flatten)]
    stability: StabilityJson,
}

pub fn report(loaded: &LoadedConfig) -> CliResult<String> {
    let cfg = &loaded.config;
    let (body, g) = (body_of(cfg)?, graph_of(loaded)?);
    let (area, sr) = area_values(&g, &body, &quad(cfg))?;
    let report = FullReport {
        command: "report",
        body: body.name().to_string(),
        domain: g.domain().into(),
        seed: cfg.seed,
        area,
        sub_riemannian_area: sr,
        stability: stability_json(&g, &body, cfg)?,
    };
    write_json(&out_path(cfg, "report.json"), &report)
}

/// Writes the effective configuration next to the reports.
pub fn write_effective_config(loaded: &LoadedConfig) -> CliResult<()> {
    write_json(&out_path(&loaded.config, "config.json"), &loaded.config).map(|_| ())
}

