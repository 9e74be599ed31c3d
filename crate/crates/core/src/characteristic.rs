//! Characteristic curves `t′ = 2u(x, t)` of intrinsic graphs, stationarity via
//! constancy of `p` along them, and ruled stationary graphs built from line data.
//!
//! A curve starts at `(base_x, ε)` and is parametrised by `s = x − base_x`.
//! Along a stationary graph the curve is `t_ε(s) = ε + a(ε)s + b(ε)s²` with
//! `a(ε) = 2u(base_x, ε)` and `b(ε) = p(base_x, ε)`, and `u = a/2 + b s`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::graph::{IntrinsicGraph, Jet};
use crate::heisenberg::{contact_form, HPoint};
use crate::ode::rk4_step;
use crate::quadrature::Rect;

/// Default RK4 step.
pub const DEFAULT_ODE_STEP: f64 = 1e-3;

/// Samples of one characteristic curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCurve {
    pub base_x: f64,
    pub eps: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub step: f64,
    pub method: &'static str,
    /// True when the domain boundary cut the requested range short.
    pub truncated: bool,
}

impl CharacteristicCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Index of the sample at `s = 0`.
    pub fn origin_index(&self) -> usize {
        self.s.iter().position(|&s| s == 0.0).unwrap_or(0)
    }

    /// Oscillation `max p − min p` along the curve.
    pub fn p_oscillation(&self) -> f64 {
        let max = self.p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.p.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Embedded points `(x, u, t − x u)` in ℍ¹.
    pub fn embedded(&self) -> Vec<HPoint> {
        self.s
            .iter()
            .zip(&self.t)
            .zip(&self.u)
            .map(|((&s, &t), &u)| {
                let x = self.base_x + s;
                HPoint::new(x, u, t - x * u)
            })
            .collect()
    }
}

fn rk4_run<G: IntrinsicGraph + ?Sized>(
    g: &G,
    base_x: f64,
    eps: f64,
    s_end: f64,
    step: f64,
    domain: &Rect,
) -> (Vec<(f64, f64)>, bool) {
    let dir = if s_end >= 0.0 { 1.0 } else { -1.0 };
    let n_full = libm::floor(s_end.abs() / step + 1e-9) as usize;
    let mut out = Vec::new();
    let mut t = eps;
    let mut s = 0.0;
    let mut k = 0usize;
    loop {
        let next_s = if k < n_full { dir * step * (k + 1) as f64 } else { s_end };
        let h = next_s - s;
        if h.abs() < 1e-15 {
            return (out, false);
        }
        let mut failed = false;
        let y = rk4_step(s, [t], h, &mut |s, y: &[f64; 1]| match g.jet(base_x + s, y[0]) {
            Ok(j) => [2.0 * j.u],
            Err(_) => {
                failed = true;
                [f64::NAN]
            }
        });
        if failed || !y[0].is_finite() || !domain.contains(base_x + next_s, y[0]) {
            return (out, true);
        }
        s = next_s;
        t = y[0];
        out.push((s, t));
        k += 1;
        if k > n_full {
            return (out, false);
        }
    }
}

/// RK4 solution of `t′ = 2u(base_x + s, t)`, `t(0) = ε`, over `s_range`
/// (which must contain 0), truncated where the curve leaves the domain.
pub fn integrate_characteristic<G: IntrinsicGraph + ?Sized>(
    g: &G,
    base_x: f64,
    eps: f64,
    s_range: (f64, f64),
    step: f64,
) -> Result<CharacteristicCurve> {
    let (lo, hi) = s_range;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput("ODE step must be positive".into()));
    }
    if !(lo <= 0.0 && hi >= 0.0) {
        return Err(Error::InvalidInput(format!("s range [{lo}, {hi}] must contain 0")));
    }
    let domain = g.domain();
    if !domain.contains(base_x, eps) {
        return Err(Error::OutOfDomain { x: base_x, t: eps });
    }
    let (back, tb) = rk4_run(g, base_x, eps, lo, step, &domain);
    let (fwd, tf) = rk4_run(g, base_x, eps, hi, step, &domain);
    if back.is_empty() && fwd.is_empty() && (lo < 0.0 || hi > 0.0) {
        return Err(Error::OutOfDomain { x: base_x, t: eps });
    }
    let mut pts: Vec<(f64, f64)> = back.into_iter().rev().collect();
    pts.push((0.0, eps));
    pts.extend(fwd);
    let mut curve = CharacteristicCurve {
        base_x,
        eps,
        s: Vec::with_capacity(pts.len()),
        t: Vec::with_capacity(pts.len()),
        u: Vec::with_capacity(pts.len()),
        p: Vec::with_capacity(pts.len()),
        step,
        method: "rk4",
        truncated: tb || tf,
    };
    for (s, t) in pts {
        let Jet { u, ux, ut } = g.jet(base_x + s, t)?;
        curve.s.push(s);
        curve.t.push(t);
        curve.u.push(u);
        curve.p.push(ux + 2.0 * u * ut);
    }
    Ok(curve)
}

/// Integrates one curve per `ε` in the grid.
pub fn integrate_family<G: IntrinsicGraph + ?Sized>(
    g: &G,
    base_x: f64,
    eps_grid: &[f64],
    s_range: (f64, f64),
    step: f64,
) -> Result<Vec<CharacteristicCurve>> {
    eps_grid.iter().map(|&e| integrate_characteristic(g, base_x, e, s_range, step)).collect()
}

/// Result of the `∂t_ε/∂ε` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monotonicity {
    pub min_quotient: f64,
    pub at_s: f64,
    pub at_eps: f64,
    /// A non-positive quotient: neighbouring curves cross or touch.
    pub crossing: bool,
}

/// Minimal forward difference quotient `(t_{ε_{k+1}}(s) − t_{ε_k}(s)) / Δε`
/// over all grid `s` values shared by neighbouring curves.
pub fn monotonicity_check<G: IntrinsicGraph + ?Sized>(
    g: &G,
    base_x: f64,
    eps_grid: &[f64],
    s_range: (f64, f64),
    step: f64,
) -> Result<Monotonicity> {
    if eps_grid.len() < 2 {
        return Err(Error::InvalidInput("monotonicity check needs at least two curves".into()));
    }
    let curves = integrate_family(g, base_x, eps_grid, s_range, step)?;
    monotonicity_of(&curves)
}

/// Same as [`monotonicity_check`] on curves already integrated with one step.
pub fn monotonicity_of(curves: &[CharacteristicCurve]) -> Result<Monotonicity> {
    let mut best = Monotonicity { min_quotient: f64::INFINITY, at_s: 0.0, at_eps: 0.0, crossing: false };
    for pair in curves.windows(2) {
        let (c0, c1) = (&pair[0], &pair[1]);
        let de = c1.eps - c0.eps;
        if !(de > 0.0) {
            return Err(Error::InvalidInput("ε grid must be strictly increasing".into()));
        }
        let (o0, o1) = (c0.origin_index() as isize, c1.origin_index() as isize);
        for (i, &s) in c0.s.iter().enumerate() {
            let j = i as isize - o0 + o1;
            if j < 0 || j as usize >= c1.len() || c1.s[j as usize] != s {
                continue;
            }
            let q = (c1.t[j as usize] - c0.t[i]) / de;
            if q < best.min_quotient {
                best = Monotonicity { min_quotient: q, at_s: s, at_eps: c0.eps, crossing: q <= 0.0 };
            }
        }
    }
    Ok(best)
}

/// Per-curve oscillation of `p` and its maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityResidual {
    pub max: f64,
    pub per_eps: Vec<(f64, f64)>,
}

pub fn stationarity_residual<G: IntrinsicGraph + ?Sized>(
    g: &G,
    base_x: f64,
    eps_grid: &[f64],
    s_range: (f64, f64),
    step: f64,
) -> Result<StationarityResidual> {
    let curves = integrate_family(g, base_x, eps_grid, s_range, step)?;
    Ok(stationarity_of(&curves))
}

pub fn stationarity_of(curves: &[CharacteristicCurve]) -> StationarityResidual {
    let per_eps: Vec<(f64, f64)> = curves.iter().map(|c| (c.eps, c.p_oscillation())).collect();
    let max = per_eps.iter().map(|e| e.1).fold(0.0, f64::max);
    StationarityResidual { max, per_eps }
}

/// Straightness and horizontality of an embedded characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCheck {
    /// Max Euclidean distance from the best-fit line.
    pub max_residual: f64,
    /// Max `|ω(Γ′)|`.
    pub max_contact: f64,
}

/// Max distance of `points` from their total-least-squares line.
pub fn line_fit_residual(points: &[HPoint]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len() as f64;
    let c = points.iter().fold(Vector3::zeros(), |acc, p| acc + Vector3::new(p.x, p.y, p.t)) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p.x, p.y, p.t) - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let imax = eig.eigenvalues.imax();
    let dir = eig.eigenvectors.column(imax).into_owned();
    points
        .iter()
        .map(|p| {
            let d = Vector3::new(p.x, p.y, p.t) - c;
            (d - dir * d.dot(&dir)).norm()
        })
        .fold(0.0, f64::max)
}

pub fn line_check<G: IntrinsicGraph + ?Sized>(g: &G, curve: &CharacteristicCurve) -> Result<LineCheck> {
    let pts = curve.embedded();
    let mut max_contact = 0.0f64;
    for (i, pt) in pts.iter().enumerate() {
        let x = curve.base_x + curve.s[i];
        let Jet { u, ux, ut } = g.jet(x, curve.t[i])?;
        let dt = 2.0 * u;
        // Γ′ = Φ_x + t′ Φ_t in coordinates.
        let v = [1.0, ux + dt * ut, -u - x * ux + dt * (1.0 - x * ut)];
        max_contact = max_contact.max(contact_form(*pt, v).abs());
    }
    Ok(LineCheck { max_residual: line_fit_residual(&pts), max_contact })
}

/// Least-squares coefficients `(c0, c1, c2)` of `t ≈ c0 + c1 s + c2 s²` and the
/// max residual.
pub fn quadratic_fit(curve: &CharacteristicCurve) -> ([f64; 3], f64) {
    let n = curve.len();
    let scale = curve.s.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1e-300);
    let a = DMatrix::from_fn(n, 3, |i, j| libm::pow(curve.s[i] / scale, j as f64));
    let b = DVector::from_column_slice(&curve.t);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(3));
    let res = (&a * &sol - &b).amax();
    ([sol[0], sol[1] / scale, sol[2] / (scale * scale)], res)
}

/// Line data `(a(ε), b(ε))` of a ruled graph on an ε grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RulingData {
    pub base_x: f64,
    pub eps: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn grid_derivative(eps: &[f64], v: &[f64]) -> Vec<f64> {
    let n = eps.len();
    (0..n)
        .map(|k| {
            if n == 1 {
                0.0
            } else if k == 0 {
                (v[1] - v[0]) / (eps[1] - eps[0])
            } else if k == n - 1 {
                (v[n - 1] - v[n - 2]) / (eps[n - 1] - eps[n - 2])
            } else {
                (v[k + 1] - v[k - 1]) / (eps[k + 1] - eps[k - 1])
            }
        })
        .collect()
}

fn max_quotient(eps: &[f64], v: &[f64]) -> f64 {
    eps.windows(2)
        .zip(v.windows(2))
        .map(|(e, v)| ((v[1] - v[0]) / (e[1] - e[0])).abs())
        .fold(0.0, f64::max)
}

impl RulingData {
    pub fn new(base_x: f64, eps: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let r = Self { base_x, eps, a, b };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.eps.len();
        if n < 2 {
            return Err(Error::InvalidInput("ruling data needs at least two ε values".into()));
        }
        if self.a.len() != n || self.b.len() != n {
            return Err(Error::InvalidInput(format!(
                "ruling arrays differ in length: eps {}, a {}, b {}",
                n,
                self.a.len(),
                self.b.len()
            )));
        }
        if self.eps.iter().chain(&self.a).chain(&self.b).any(|v| !v.is_finite()) || !self.base_x.is_finite() {
            return Err(Error::InvalidInput("ruling data contains non-finite values".into()));
        }
        if self.eps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("ruling ε grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Central-difference `a′(ε)` on the grid.
    pub fn a_prime(&self) -> Vec<f64> {
        grid_derivative(&self.eps, &self.a)
    }

    pub fn b_prime(&self) -> Vec<f64> {
        grid_derivative(&self.eps, &self.b)
    }

    /// Max difference quotients of `a` and `b`: recorded Lipschitz bounds.
    pub fn lipschitz_bounds(&self) -> (f64, f64) {
        (max_quotient(&self.eps, &self.a), max_quotient(&self.eps, &self.b))
    }
}

/// Reads `a(ε) = 2u(base_x, ε)` and `b(ε) = p(base_x, ε)` off a graph.
pub fn extract_ruling<G: IntrinsicGraph + ?Sized>(g: &G, base_x: f64, eps_grid: &[f64]) -> Result<RulingData> {
    let d = g.domain();
    let mut a = Vec::with_capacity(eps_grid.len());
    let mut b = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        if !d.contains(base_x, e) {
            return Err(Error::OutOfDomain { x: base_x, t: e });
        }
        let j = g.jet(base_x, e)?;
        a.push(2.0 * j.u);
        b.push(j.ux + 2.0 * j.u * j.ut);
    }
    RulingData::new(base_x, eps_grid.to_vec(), a, b)
}

/// Piecewise cubic Hermite interpolant with central-difference slopes.
#[derive(Debug, Clone, PartialEq)]
struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Hermite {
    fn new(x: &[f64], y: &[f64]) -> Self {
        Self { x: x.to_vec(), y: y.to_vec(), m: grid_derivative(x, y) }
    }

    /// Value and derivative; `e` must lie in the grid range.
    fn eval(&self, e: f64) -> (f64, f64) {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= e).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (e - self.x[k]) / h;
        let (y0, y1, m0, m1) = (self.y[k], self.y[k + 1], self.m[k] * h, self.m[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        (v, d / h)
    }
}

/// Newton tolerance for the ε inversion.
pub const INVERSION_TOLERANCE: f64 = 1e-12;

/// Intrinsic graph ruled by the lines `t = ε + a(ε)s + b(ε)s²`,
/// `u = a(ε)/2 + b(ε)s`, stationary by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RuledGraph {
    ruling: RulingData,
    domain: Rect,
    a: Hermite,
    b: Hermite,
}

impl RuledGraph {
    pub fn ruling(&self) -> &RulingData {
        &self.ruling
    }

    fn lines(&self, e: f64) -> ((f64, f64), (f64, f64)) {
        (self.a.eval(e), self.b.eval(e))
    }

    /// `ε` with `ε + a(ε)s + b(ε)s² = t`.
    pub fn invert(&self, x: f64, t: f64) -> Result<f64> {
        let s = x - self.ruling.base_x;
        let (lo, hi) = (self.ruling.eps[0], *self.ruling.eps.last().unwrap());
        let g = |e: f64| {
            let ((a, da), (b, db)) = self.lines(e);
            (e + a * s + b * s * s - t, 1.0 + da * s + db * s * s)
        };
        let (glo, ghi) = (g(lo).0, g(hi).0);
        if glo > 0.0 || ghi < 0.0 {
            return Err(Error::OutOfDomain { x, t });
        }
        let mut e = t.clamp(lo, hi);
        for _ in 0..50 {
            let (v, dv) = g(e);
            if !(dv > 0.0) {
                break;
            }
            let next = e - v / dv;
            if !(lo..=hi).contains(&next) {
                break;
            }
            if (next - e).abs() <= INVERSION_TOLERANCE {
                return Ok(next);
            }
            e = next;
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > INVERSION_TOLERANCE {
            let m = 0.5 * (a + b);
            if g(m).0 > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Builds the ruled graph after checking that `ε ↦ ε + a(ε)s + b(ε)s²` is
/// increasing for every `s` in the domain and that the lines cover the domain.
pub fn build_ruled_graph(ruling: RulingData, domain: Rect) -> Result<RuledGraph> {
    ruling.validate()?;
    let a = Hermite::new(&ruling.eps, &ruling.a);
    let b = Hermite::new(&ruling.eps, &ruling.b);
    let g = RuledGraph { ruling, domain, a, b };
    let (s0, s1) = (domain.x0 - g.ruling.base_x, domain.x1 - g.ruling.base_x);
    const SUB: usize = 16;
    for w in g.ruling.eps.windows(2) {
        for k in 0..=SUB {
            let e = w[0] + (w[1] - w[0]) * k as f64 / SUB as f64;
            let ((_, da), (_, db)) = g.lines(e);
            let mut cands = [s0, s1, s0];
            if db != 0.0 {
                let v = -da / (2.0 * db);
                if v > s0 && v < s1 {
                    cands[2] = v;
                }
            }
            for s in cands {
                if !(1.0 + da * s + db * s * s > 0.0) {
                    return Err(Error::Inversion {
                        x: g.ruling.base_x + s,
                        eps: e,
                        reason: "line family is not monotone in ε".into(),
                    });
                }
            }
        }
    }
    let (elo, ehi) = (g.ruling.eps[0], *g.ruling.eps.last().unwrap());
    const XS: usize = 64;
    for k in 0..=XS {
        let s = s0 + (s1 - s0) * k as f64 / XS as f64;
        let ((alo, _), (blo, _)) = g.lines(elo);
        let ((ahi, _), (bhi, _)) = g.lines(ehi);
        let tlo = elo + alo * s + blo * s * s;
        let thi = ehi + ahi * s + bhi * s * s;
        if tlo > domain.t0 + 1e-12 || thi < domain.t1 - 1e-12 {
            return Err(Error::InvalidInput(format!(
                "ruling lines cover t in [{tlo}, {thi}] at x = {}, not the domain [{}, {}]",
                g.ruling.base_x + s,
                domain.t0,
                domain.t1
            )));
        }
    }
    Ok(g)
}

impl IntrinsicGraph for RuledGraph {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn jet(&self, x: f64, t: f64) -> Result<Jet> {
        let e = self.invert(x, t)?;
        let s = x - self.ruling.base_x;
        let ((a, da), (b, db)) = self.lines(e);
        let ge = 1.0 + da * s + db * s * s;
        let e_t = 1.0 / ge;
        let e_x = -(a + 2.0 * b * s) / ge;
        let du_de = 0.5 * da + db * s;
        Ok(Jet { u: 0.5 * a + b * s, ux: b + du_de * e_x, ut: du_de * e_t })
    }
}
