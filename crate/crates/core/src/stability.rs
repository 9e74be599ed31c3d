//! The stability form `Q(f) = ∫ (Z(f)² + q f²) |N_h|/κ dS`, the one-dimensional
//! Hardy-type test, a Rayleigh–Ritz search for destabilising directions and
//! the combined Bernstein verdict.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::bump::{BumpExpansion, CosineBump1D, TensorBump, TestFunction1D, TestFunction2D};
use crate::characteristic::{extract_ruling, integrate_family, line_fit_residual, stationarity_of};
use crate::convex_body::ConvexBody2D;
use crate::error::{Error, Result};
use crate::graph::{graph_point, IntrinsicGraph};
use crate::heisenberg::{HPoint, DEFAULT_FD_STEP};
use crate::quadrature::{GaussLegendre, QuadratureSpec, Rect, Rule1D};
use crate::variation::{second_variation_formula, stability_weights, STATIONARITY_TOLERANCE};

/// `Q(f)`; identical to the second variation of the area along `f ν_h`.
pub fn stability_form<G, F>(g: &G, body: &ConvexBody2D, f: &F, quad: &QuadratureSpec, fd_step: f64) -> Result<f64>
where
    G: IntrinsicGraph + ?Sized,
    F: TestFunction2D + ?Sized,
{
    second_variation_formula(g, f, body, quad, fd_step)
}

/// `∫ψ′² h − (2B − A²) ∫ψ²/h` with `h(s) = 1 + As + Bs²/2`, over the support of `ψ`.
///
/// A negative value means the Hardy-type inequality fails for this `ψ`.
pub fn hardy_gap<P: TestFunction1D + ?Sized>(a: f64, b: f64, psi: &P, cells: usize, order: usize) -> Result<f64> {
    let (lo, hi) = psi.support();
    let coef = 2.0 * b - a * a;
    let h = |s: f64| 1.0 + a * s + 0.5 * b * s * s;
    let mut hmin = h(lo).min(h(hi));
    if b != 0.0 {
        let v = -a / b;
        if v > lo && v < hi {
            hmin = hmin.min(h(v));
        }
    }
    // With 2B = A² the weight is the square (1 + As/2)², zero at one point.
    if hmin < -1e-12 || (coef != 0.0 && hmin <= 0.0) {
        return Err(Error::InvalidInput(format!("h = 1 + As + Bs²/2 is not positive on [{lo}, {hi}]")));
    }
    let rule = Rule1D::composite(lo, hi, cells, &GaussLegendre::new(order)?)?;
    let lhs = rule.integrate(|s| {
        let d = psi.eval(s).1;
        d * d * h(s).max(0.0)
    });
    if coef == 0.0 {
        return Ok(lhs);
    }
    let rhs = rule.integrate(|s| {
        let v = psi.eval(s).0;
        v * v / h(s)
    });
    Ok(lhs - coef * rhs)
}

/// Number of tensor bumps per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub nx: usize,
    pub nt: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { nx: 12, nt: 12 }
    }
}

impl BasisSpec {
    pub fn refined(self) -> Self {
        Self { nx: 2 * self.nx, nt: 2 * self.nt }
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `cos²` bumps with spacing `Δ = L/(n+1)`, centres `x0 + kΔ`, radius `Δ`;
/// they sum to one away from the boundary strip.
fn axis_bumps(lo: f64, hi: f64, n: usize) -> Result<(f64, Vec<CosineBump1D>)> {
    let d = (hi - lo) / (n + 1) as f64;
    let b = (1..=n).map(|k| CosineBump1D::new(lo + k as f64 * d, d, 2)).collect::<Result<Vec<_>>>()?;
    Ok((d, b))
}

/// Builds `Σ c_ij φ_i(x) ψ_j(t)` for a basis over `domain`.
pub fn basis_expansion(domain: &Rect, basis: BasisSpec, coefficients: &[f64]) -> Result<BumpExpansion> {
    if coefficients.len() != basis.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} basis coefficients, got {}",
            basis.len(),
            coefficients.len()
        )));
    }
    let (_, bx) = axis_bumps(domain.x0, domain.x1, basis.nx)?;
    let (_, bt) = axis_bumps(domain.t0, domain.t1, basis.nt)?;
    let mut terms = Vec::with_capacity(coefficients.len());
    for j in 0..basis.nt {
        for i in 0..basis.nx {
            let c = coefficients[j * basis.nx + i];
            if c != 0.0 {
                terms.push((c, TensorBump { amplitude: 1.0, x: bx[i], t: bt[j] }));
            }
        }
    }
    Ok(BumpExpansion { terms })
}

/// Settings of the eigenvalue search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub basis: BasisSpec,
    /// Gauss–Legendre nodes per basis cell and axis.
    pub order: usize,
    /// How many times the basis may be doubled.
    pub max_refinements: usize,
    /// Relative eigenvalue change accepted as converged.
    pub convergence: f64,
    pub fd_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { basis: BasisSpec::default(), order: 8, max_refinements: 1, convergence: 0.05, fd_step: DEFAULT_FD_STEP }
    }
}

/// Minimal Rayleigh quotient of `Q` against `∫ f² |N_h|/κ dS` on a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Destabilizer {
    pub min_eigenvalue: f64,
    pub basis: BasisSpec,
    pub domain: Rect,
    /// Minimiser coefficients, normalised to unit mass.
    pub coefficients: Vec<f64>,
    /// Eigenvalue change under the last refinement was within tolerance.
    pub converged: bool,
    /// `(basis, eigenvalue)` for every resolution tried.
    pub history: Vec<(BasisSpec, f64)>,
}

impl Destabilizer {
    pub fn witness(&self) -> Result<BumpExpansion> {
        basis_expansion(&self.domain, self.basis, &self.coefficients)
    }
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
}

fn assemble_and_solve<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    domain: &Rect,
    basis: BasisSpec,
    order: usize,
    fd_step: f64,
) -> Result<Eigenpair> {
    let (dx, bx) = axis_bumps(domain.x0, domain.x1, basis.nx)?;
    let (dt, bt) = axis_bumps(domain.t0, domain.t1, basis.nt)?;
    let gl = GaussLegendre::new(order)?;
    let n = basis.len();
    let mut qm = DMatrix::<f64>::zeros(n, n);
    let mut mm = DMatrix::<f64>::zeros(n, n);
    // Cell (cx, ct) meets the bumps centred on its corners only.
    for ct in 0..=basis.nt {
        for cx in 0..=basis.nx {
            let xs: Vec<usize> = [cx, cx + 1].into_iter().filter(|&k| k >= 1 && k <= basis.nx).map(|k| k - 1).collect();
            let ts: Vec<usize> = [ct, ct + 1].into_iter().filter(|&k| k >= 1 && k <= basis.nt).map(|k| k - 1).collect();
            if xs.is_empty() || ts.is_empty() {
                continue;
            }
            let (x0, t0) = (domain.x0 + cx as f64 * dx, domain.t0 + ct as f64 * dt);
            for (a, wa) in gl.nodes().iter().zip(gl.weights()) {
                let x = x0 + 0.5 * dx * (a + 1.0);
                for (b, wb) in gl.nodes().iter().zip(gl.weights()) {
                    let t = t0 + 0.5 * dt * (b + 1.0);
                    let wt = 0.25 * dx * dt * wa * wb;
                    let sw = stability_weights(g, body, x, t, fd_step)?;
                    if sw.z_of_p > STATIONARITY_TOLERANCE {
                        return Err(Error::NonStationary { residual: sw.z_of_p, tolerance: STATIONARITY_TOLERANCE });
                    }
                    let mut act: [(usize, f64, f64); 4] = [(0, 0.0, 0.0); 4];
                    let mut na = 0;
                    for &j in &ts {
                        let (pt, dpt) = bt[j].eval(t);
                        for &i in &xs {
                            let (px, dpx) = bx[i].eval(x);
                            let zf = sw.z_dir.0 * dpx * pt + sw.z_dir.1 * px * dpt;
                            act[na] = (j * basis.nx + i, px * pt, zf);
                            na += 1;
                        }
                    }
                    for &(k, fk, zk) in &act[..na] {
                        for &(l, fl, zl) in &act[..na] {
                            qm[(k, l)] += wt * sw.rho * (zk * zl + sw.q * fk * fl);
                            mm[(k, l)] += wt * sw.rho * fk * fl;
                        }
                    }
                }
            }
        }
    }
    let chol = mm
        .cholesky()
        .ok_or_else(|| Error::Numerical("stability mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&qm)
        .ok_or_else(|| Error::Numerical("singular mass factor".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Numerical("singular mass factor".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let eig = c.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    let coeffs = l
        .tr_solve_lower_triangular(&v)
        .ok_or_else(|| Error::Numerical("singular mass factor".into()))?;
    // Fix the sign so the largest coefficient is positive.
    let imax = coeffs.iamax();
    let sign = if coeffs[imax] < 0.0 { -1.0 } else { 1.0 };
    Ok(Eigenpair { value: eig.eigenvalues[k], vector: coeffs.iter().map(|c| sign * c).collect() })
}

/// Generalised eigen-search for the most negative direction of `Q` over a
/// tensor `cos²` basis on `domain`, doubling the basis until the eigenvalue
/// settles or the refinement budget runs out.
pub fn find_destabilizing<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    domain: &Rect,
    opts: &SearchOptions,
) -> Result<Destabilizer> {
    let gd = g.domain();
    if domain.x0 < gd.x0 || domain.x1 > gd.x1 || domain.t0 < gd.t0 || domain.t1 > gd.t1 {
        return Err(Error::InvalidInput("search domain must lie inside the graph domain".into()));
    }
    if opts.basis.nx == 0 || opts.basis.nt == 0 {
        return Err(Error::InvalidInput("basis must have at least one function per axis".into()));
    }
    let mut basis = opts.basis;
    let mut history = Vec::new();
    let mut best = assemble_and_solve(g, body, domain, basis, opts.order, opts.fd_step)?;
    history.push((basis, best.value));
    let mut converged = false;
    for _ in 0..opts.max_refinements {
        let next_basis = basis.refined();
        let next = assemble_and_solve(g, body, domain, next_basis, opts.order, opts.fd_step)?;
        history.push((next_basis, next.value));
        converged = (next.value - best.value).abs() <= opts.convergence * next.value.abs();
        basis = next_basis;
        best = next;
        if converged {
            break;
        }
    }
    Ok(Destabilizer {
        min_eigenvalue: best.value,
        basis,
        domain: *domain,
        coefficients: best.vector,
        converged,
        history,
    })
}

/// `Q` of a basis expansion by direct quadrature, with `extra` more nodes per
/// cell than the assembly used.
pub fn reevaluate_witness<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    d: &Destabilizer,
    order: usize,
    fd_step: f64,
) -> Result<f64> {
    let f = d.witness()?;
    let quad = QuadratureSpec::new(d.basis.nx + 1, d.basis.nt + 1, order);
    d.domain.integrate(&quad, |x, t| {
        let (v, vx, vt) = f.eval(x, t);
        if v == 0.0 && vx == 0.0 && vt == 0.0 {
            return Ok(0.0);
        }
        let sw = stability_weights(g, body, x, t, fd_step)?;
        let zf = sw.z_dir.0 * vx + sw.z_dir.1 * vt;
        Ok((zf * zf + sw.q * v * v) * sw.rho)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StablePlanar,
    Unstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StablePlanar => "stable-planar",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Line data and Hardy coefficients at one ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbSample {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    /// `A = −a′(ε)`.
    pub cap_a: f64,
    /// `B = 2b′(ε)`.
    pub cap_b: f64,
}

/// Stored negative direction, re-evaluable with [`basis_expansion`].
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub domain: Rect,
    pub basis: BasisSpec,
    pub coefficients: Vec<f64>,
    /// `Q` re-evaluated by direct quadrature.
    pub q_direct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub stationary: bool,
    pub stationarity_residual: f64,
    pub ab_per_eps: Vec<AbSample>,
    pub min_eigenvalue: Option<f64>,
    pub eigen_converged: Option<bool>,
    pub resolution: Option<BasisSpec>,
    pub witness: Option<Witness>,
    /// Distance of the embedded surface from its best vertical plane.
    pub plane_fit_residual: Option<f64>,
    pub verdict: Verdict,
    /// Errors and caveats met on the way.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinConfig {
    pub base_x: f64,
    pub eps_grid: Vec<f64>,
    pub s_range: (f64, f64),
    pub ode_step: f64,
    pub stationarity_tolerance: f64,
    /// Bound on `max|a′| + max|b′|` for the planar verdict.
    pub planar_tolerance: f64,
    /// Eigenvalues below `−negative_tolerance` count as instability.
    pub negative_tolerance: f64,
    pub search: SearchOptions,
    /// Search domain; the graph domain when `None`.
    pub search_domain: Option<Rect>,
    /// Nodes per cell when re-evaluating a witness.
    pub witness_order: usize,
}

impl BernsteinConfig {
    /// Rulings from `x = base_x` (0 clamped into the domain) at 21 levels
    /// spanning the interior of the `t` range.
    pub fn for_domain(domain: &Rect) -> Self {
        let base_x = 0.0f64.clamp(domain.x0, domain.x1);
        let n = 21;
        let margin = 0.05 * (domain.t1 - domain.t0);
        let (lo, hi) = (domain.t0 + margin, domain.t1 - margin);
        let eps_grid = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        Self {
            base_x,
            eps_grid,
            s_range: (domain.x0 - base_x, domain.x1 - base_x),
            ode_step: crate::characteristic::DEFAULT_ODE_STEP,
            stationarity_tolerance: 1e-6,
            planar_tolerance: 1e-6,
            negative_tolerance: 1e-8,
            search: SearchOptions::default(),
            search_domain: None,
            witness_order: 12,
        }
    }
}

/// Max distance of the `(x, y)` projection of the embedded surface from its
/// best-fit line, sampled on an `n × n` grid.
pub fn vertical_plane_residual<G: IntrinsicGraph + ?Sized>(g: &G, n: usize) -> Result<f64> {
    let d = g.domain();
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = d.x0 + (d.x1 - d.x0) * i as f64 / (n - 1) as f64;
            let t = d.t0 + (d.t1 - d.t0) * j as f64 / (n - 1) as f64;
            let p = graph_point(g, x, t)?.embed();
            pts.push(HPoint::new(p.x, p.y, 0.0));
        }
    }
    Ok(line_fit_residual(&pts))
}

/// Stationarity, line data, eigen-search and verdict for one graph.
pub fn bernstein_report<G: IntrinsicGraph + ?Sized>(g: &G, body: &ConvexBody2D, config: &BernsteinConfig) -> StabilityReport {
    let mut report = StabilityReport {
        stationary: false,
        stationarity_residual: f64::NAN,
        ab_per_eps: Vec::new(),
        min_eigenvalue: None,
        eigen_converged: None,
        resolution: None,
        witness: None,
        plane_fit_residual: None,
        verdict: Verdict::Inconclusive,
        notes: Vec::new(),
    };
    match integrate_family(g, config.base_x, &config.eps_grid, config.s_range, config.ode_step) {
        Ok(curves) => {
            report.stationarity_residual = stationarity_of(&curves).max;
            report.stationary = report.stationarity_residual <= config.stationarity_tolerance;
        }
        Err(e) => {
            report.notes.push(format!("characteristics: {e}"));
            return report;
        }
    }
    if !report.stationary {
        report.notes.push("graph is not area-stationary; no stability analysis".into());
        return report;
    }
    let planar = match extract_ruling(g, config.base_x, &config.eps_grid) {
        Ok(r) => {
            let (ap, bp) = (r.a_prime(), r.b_prime());
            for k in 0..r.eps.len() {
                report.ab_per_eps.push(AbSample {
                    eps: r.eps[k],
                    a: r.a[k],
                    b: r.b[k],
                    a_prime: ap[k],
                    b_prime: bp[k],
                    cap_a: -ap[k],
                    cap_b: 2.0 * bp[k],
                });
            }
            let ma = ap.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mb = bp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ma + mb <= config.planar_tolerance
        }
        Err(e) => {
            report.notes.push(format!("ruling data: {e}"));
            false
        }
    };
    if planar {
        match vertical_plane_residual(g, 21) {
            Ok(r) => report.plane_fit_residual = Some(r),
            Err(e) => report.notes.push(format!("plane fit: {e}")),
        }
    }
    let domain = config.search_domain.unwrap_or_else(|| g.domain());
    match find_destabilizing(g, body, &domain, &config.search) {
        Ok(d) => {
            report.min_eigenvalue = Some(d.min_eigenvalue);
            report.eigen_converged = Some(d.converged);
            report.resolution = Some(d.basis);
            if !d.converged {
                report.notes.push(format!(
                    "minimal eigenvalue not converged under refinement: {:?}",
                    d.history.iter().map(|h| h.1).collect::<Vec<_>>()
                ));
            }
            if d.min_eigenvalue < -config.negative_tolerance {
                match reevaluate_witness(g, body, &d, config.witness_order, config.search.fd_step) {
                    Ok(q) => {
                        report.witness = Some(Witness {
                            domain: d.domain,
                            basis: d.basis,
                            coefficients: d.coefficients.clone(),
                            q_direct: q,
                        });
                        if q < 0.0 {
                            report.verdict = Verdict::Unstable;
                        } else {
                            report.notes.push(format!("witness re-evaluates to Q = {q} ≥ 0"));
                        }
                    }
                    Err(e) => report.notes.push(format!("witness re-evaluation: {e}")),
                }
            } else if planar {
                report.verdict = Verdict::StablePlanar;
            } else {
                report.notes.push(format!(
                    "no instability found at resolution {}x{}",
                    d.basis.nx, d.basis.nt
                ));
            }
        }
        Err(e) => report.notes.push(format!("eigen-search: {e}")),
    }
    if planar && report.verdict == Verdict::Unstable {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("planar line data but a negative eigenvalue".into());
    }
    report
}
