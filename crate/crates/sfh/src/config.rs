//! Run configuration: JSON schema, defaults, overrides and validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Disk { r: f64 },
    Ellipse { a: f64, b: f64 },
    /// Support function samples on a uniform θ grid starting at 0.
    SupportSamples { theta_count: usize, h: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormId {
    Zero,
    /// `u = a/2 + b x`: `a` and `b` are the ruling data of the plane.
    Affine,
    #[serde(rename = "xt_over_1px2")]
    XtOver1px2,
    /// `u = Σ c x^i t^j` with `coeffs = [[i, j, c], ...]`.
    CustomPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    ClosedForm {
        id: ClosedFormId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<(u32, u32, f64)>>,
    },
    /// Bilinear interpolation of CSV values, one row per `t` level.
    Grid { x0: f64, x1: f64, t0: f64, t1: f64, nx: usize, nt: usize, values: PathBuf },
    /// Ruled graph from ruling data, either inline or in a JSON file.
    Ruled {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_x: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self { x0: 0.0, x1: 1.0, t0: 0.0, t1: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub cells_x: usize,
    pub cells_t: usize,
    /// Gauss–Legendre nodes per cell and axis.
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { cells_x: 8, cells_t: 8, order: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    /// Finite-difference step for derivatives of graph quantities.
    pub fd: f64,
    /// Flow parameter step for variation difference quotients.
    pub variation: f64,
    /// RK4 step along characteristics.
    pub ode: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            fd: sfh_core::heisenberg::DEFAULT_FD_STEP,
            variation: sfh_core::variation::DEFAULT_VARIATION_STEP,
            ode: sfh_core::characteristic::DEFAULT_ODE_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoliationConfig {
    /// Vertical plane the characteristics start from; 0 clamped into the domain by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_x: Option<f64>,
    /// Explicit ε levels; otherwise `eps_count` levels across the `t` range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    pub eps_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_range: Option<[f64; 2]>,
    pub stationarity_tolerance: f64,
}

impl Default for FoliationConfig {
    fn default() -> Self {
        Self { base_x: None, eps: None, eps_count: 21, s_range: None, stationarity_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub basis_nx: usize,
    pub basis_nt: usize,
    pub order: usize,
    pub max_refinements: usize,
    pub convergence: f64,
    pub witness_order: usize,
    pub planar_tolerance: f64,
    pub negative_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_domain: Option<DomainSpec>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            basis_nx: 12,
            basis_nt: 12,
            order: 8,
            max_refinements: 1,
            convergence: 0.05,
            witness_order: 12,
            planar_tolerance: 1e-6,
            negative_tolerance: 1e-8,
            search_domain: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodazziConfig {
    pub a: f64,
    pub b: f64,
    pub range: [f64; 2],
    pub step: f64,
}

impl Default for CodazziConfig {
    fn default() -> Self {
        Self { a: 0.0, b: 0.0, range: [-1.0, 1.0], step: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("sfh-out") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// Against `Z`, `ν_h` and `T` at each surface point.
    Adapted {
        #[serde(default)]
        u_z: f64,
        #[serde(default)]
        u_nu: f64,
        #[serde(default)]
        u_t: f64,
    },
    /// Constant against the left-invariant `X`, `Y`, `T`.
    Frame {
        #[serde(default)]
        x: f64,
        #[serde(default)]
        y: f64,
        #[serde(default)]
        t: f64,
    },
}

fn default_power() -> u32 {
    4
}

/// `cos^power` tensor bump centred at `center = [x, t]` with half-widths `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: [f64; 2],
    pub radius: [f64; 2],
    #[serde(default = "default_power")]
    pub power: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub coefficients: CoefficientSpec,
    pub bump: BumpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    /// Graph domain for closed-form and ruled graphs.
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub steps: StepConfig,
    #[serde(default)]
    pub foliation: FoliationConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub codazzi: CodazziConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Where a configuration comes from: a file plus command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources {
    pub config: Option<PathBuf>,
    pub body: Option<String>,
    pub graph: Option<String>,
    pub field: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A validated configuration and the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn parse_json(text: &str, origin: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::config(origin, format!("malformed JSON: {e}")))
}

/// Parses a configuration from a JSON value, reporting the failing field path.
pub fn parse_config_value(value: Value) -> CliResult<RunConfig> {
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> CliResult<RunConfig> {
    parse_config_value(parse_json(text, "<root>")?)
}

/// Merges the config file (if any) with flag overrides, then validates.
pub fn load_config(src: &ConfigSources) -> CliResult<LoadedConfig> {
    let (mut value, base_dir) = match &src.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (parse_json(&text, &path.display().to_string())?, dir)
        }
        None => (Value::Object(Default::default()), PathBuf::new()),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::config("<root>", "configuration must be a JSON object"))?;
    for (key, flag, text) in [("body", "--body", &src.body), ("graph", "--graph", &src.graph), ("field", "--field", &src.field)] {
        if let Some(t) = text {
            obj.insert(key.into(), parse_json(t, flag)?);
        }
    }
    if let Some(seed) = src.seed {
        obj.insert("seed".into(), seed.into());
    }
    if let Some(out) = &src.out {
        let output = obj.entry("output").or_insert_with(|| Value::Object(Default::default()));
        if let Some(o) = output.as_object_mut() {
            o.insert("dir".into(), Value::String(out.display().to_string()));
        }
    }
    let config = parse_config_value(value)?;
    // Flag-supplied output directories are relative to the working directory.
    let mut loaded = LoadedConfig { config, base_dir };
    if let Some(out) = &src.out {
        loaded.config.output.dir = out.clone();
    } else {
        loaded.config.output.dir = loaded.resolve(&loaded.config.output.dir.clone());
    }
    Ok(loaded)
}

fn positive(path: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn nonzero(path: &str, v: usize) -> CliResult<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::config(path, "must be at least 1"))
    }
}

fn domain_ok(path: &str, d: &DomainSpec) -> CliResult<()> {
    let finite = [d.x0, d.x1, d.t0, d.t1].iter().all(|v| v.is_finite());
    if finite && d.x0 < d.x1 && d.t0 < d.t1 {
        Ok(())
    } else {
        Err(CliError::config(path, "domain must satisfy x0 < x1 and t0 < t1"))
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        domain_ok("domain", &self.domain)?;
        nonzero("quadrature.cells_x", self.quadrature.cells_x)?;
        nonzero("quadrature.cells_t", self.quadrature.cells_t)?;
        nonzero("quadrature.order", self.quadrature.order)?;
        positive("steps.fd", self.steps.fd)?;
        positive("steps.variation", self.steps.variation)?;
        positive("steps.ode", self.steps.ode)?;
        positive("foliation.stationarity_tolerance", self.foliation.stationarity_tolerance)?;
        if self.foliation.eps.is_none() && self.foliation.eps_count < 2 {
            return Err(CliError::config("foliation.eps_count", "needs at least 2 levels"));
        }
        if let Some(eps) = &self.foliation.eps {
            if eps.is_empty() || eps.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(CliError::config("foliation.eps", "must be non-empty and strictly increasing"));
            }
        }
        if let Some([lo, hi]) = self.foliation.s_range {
            if !(lo <= 0.0 && hi >= 0.0 && lo < hi) {
                return Err(CliError::config("foliation.s_range", "must contain 0 and be nondegenerate"));
            }
        }
        let st = &self.stability;
        nonzero("stability.basis_nx", st.basis_nx)?;
        nonzero("stability.basis_nt", st.basis_nt)?;
        nonzero("stability.order", st.order)?;
        nonzero("stability.witness_order", st.witness_order)?;
        positive("stability.convergence", st.convergence)?;
        positive("stability.planar_tolerance", st.planar_tolerance)?;
        positive("stability.negative_tolerance", st.negative_tolerance)?;
        if let Some(d) = &st.search_domain {
            domain_ok("stability.search_domain", d)?;
        }
        positive("codazzi.step", self.codazzi.step)?;
        let [lo, hi] = self.codazzi.range;
        if !(lo <= 0.0 && hi >= 0.0 && lo < hi) {
            return Err(CliError::config("codazzi.range", "must contain 0 and be nondegenerate"));
        }
        if let Some(f) = &self.field {
            positive("field.bump.radius[0]", f.bump.radius[0])?;
            positive("field.bump.radius[1]", f.bump.radius[1])?;
            if f.bump.power < 2 {
                return Err(CliError::config("field.bump.power", "must be at least 2 for a C1 bump"));
            }
        }
        if let Some(BodySpec::SupportSamples { theta_count, h }) = &self.body {
            if *theta_count != h.len() {
                return Err(CliError::config(
                    "body.h",
                    format!("theta_count is {theta_count} but {} samples were given", h.len()),
                ));
            }
        }
        Ok(())
    }
}
