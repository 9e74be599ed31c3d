//! Intrinsic graphs `Gr(u) = {(x, u(x,t), t − x u(x,t))}` over the vertical
//! plane `{y = 0}` and the surface quantities built on them.
//!
//! With `p = u_x + 2 u u_t` the parametrisation `Φ(x, t)` has
//! `Φ_x = X + u_x Y − 2u T`, `Φ_t = u_t Y + T`, hence
//! `Φ_x × Φ_t = Ñ = pX − Y + u_t T` and `|N_h| dS = √(1+p²) dx dt`.
//! Derivatives of frame fields (`H_K`, `θ`, `Z(⟨N,T⟩/|N_h|)`) are taken by
//! central differences along the corresponding direction in the `(x, t)` plane.

use alloc::vec::Vec;

use crate::convex_body::{ConvexBody2D, PlaneVector};
use crate::error::{Error, Result};
use crate::heisenberg::{j_op, FrameVector, HPoint, DEFAULT_FD_STEP};
use crate::quadrature::{QuadratureSpec, Rect};

/// `u` and its first partial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub u: f64,
    pub ux: f64,
    pub ut: f64,
}

/// A function `u` on a rectangle of the `(x, t)` plane.
pub trait IntrinsicGraph {
    fn domain(&self) -> Rect;
    /// Value and first derivatives. Implementations may accept points slightly
    /// outside [`IntrinsicGraph::domain`]; callers check the domain when it matters.
    fn jet(&self, x: f64, t: f64) -> Result<Jet>;
}

impl<G: IntrinsicGraph + ?Sized> IntrinsicGraph for &G {
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn jet(&self, x: f64, t: f64) -> Result<Jet> {
        (**self).jet(x, t)
    }
}

/// Graphs with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Zero,
    /// `u = a/2 + b x`, a vertical plane.
    Affine { a: f64, b: f64 },
    /// `u = x t / (1 + x²)`, stationary and non-planar.
    XtOver1px2,
    /// `u = Σ c · x^i t^j` over `(i, j, c)`.
    Poly(Vec<(u32, u32, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormGraph {
    pub kind: ClosedForm,
    pub domain: Rect,
}

impl ClosedFormGraph {
    pub fn new(kind: ClosedForm, domain: Rect) -> Self {
        Self { kind, domain }
    }
}

fn powi(v: f64, n: u32) -> f64 {
    libm::pow(v, n as f64)
}

impl IntrinsicGraph for ClosedFormGraph {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn jet(&self, x: f64, t: f64) -> Result<Jet> {
        Ok(match &self.kind {
            ClosedForm::Zero => Jet::default(),
            ClosedForm::Affine { a, b } => Jet { u: 0.5 * a + b * x, ux: *b, ut: 0.0 },
            ClosedForm::XtOver1px2 => {
                let d = 1.0 + x * x;
                Jet { u: x * t / d, ux: t * (1.0 - x * x) / (d * d), ut: x / d }
            }
            ClosedForm::Poly(terms) => {
                let mut j = Jet::default();
                for &(i, k, c) in terms {
                    j.u += c * powi(x, i) * powi(t, k);
                    if i > 0 {
                        j.ux += c * i as f64 * powi(x, i - 1) * powi(t, k);
                    }
                    if k > 0 {
                        j.ut += c * k as f64 * powi(x, i) * powi(t, k - 1);
                    }
                }
                j
            }
        })
    }
}

/// Uniform-grid samples of `u` (row-major, one row per `t` level).
///
/// Node derivatives use central differences inside and one-sided ones on the
/// boundary; values between nodes are bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    domain: Rect,
    nx: usize,
    nt: usize,
    values: Vec<f64>,
    ux: Vec<f64>,
    ut: Vec<f64>,
}

impl GridGraph {
    pub fn new(domain: Rect, nx: usize, nt: usize, values: Vec<f64>) -> Result<Self> {
        if nx < 3 || nt < 3 {
            return Err(Error::InvalidInput("grid graph needs at least 3x3 nodes".into()));
        }
        if values.len() != nx * nt {
            return Err(Error::InvalidInput(alloc::format!(
                "grid graph expects nx*nt = {}*{} = {} values, got {}",
                nx,
                nt,
                nx * nt,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid graph contains non-finite values".into()));
        }
        let hx = (domain.x1 - domain.x0) / (nx - 1) as f64;
        let ht = (domain.t1 - domain.t0) / (nt - 1) as f64;
        let at = |i: usize, j: usize| values[j * nx + i];
        let mut ux = alloc::vec![0.0; nx * nt];
        let mut ut = alloc::vec![0.0; nx * nt];
        for j in 0..nt {
            for i in 0..nx {
                ux[j * nx + i] = if i == 0 {
                    (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * hx)
                } else if i == nx - 1 {
                    (3.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j)) / (2.0 * hx)
                } else {
                    (at(i + 1, j) - at(i - 1, j)) / (2.0 * hx)
                };
                ut[j * nx + i] = if j == 0 {
                    (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * ht)
                } else if j == nt - 1 {
                    (3.0 * at(i, j) - 4.0 * at(i, j - 1) + at(i, j - 2)) / (2.0 * ht)
                } else {
                    (at(i, j + 1) - at(i, j - 1)) / (2.0 * ht)
                };
            }
        }
        Ok(Self { domain, nx, nt, values, ux, ut })
    }

    /// Samples any graph on an `nx × nt` grid over its domain.
    pub fn sample<G: IntrinsicGraph + ?Sized>(g: &G, nx: usize, nt: usize) -> Result<Self> {
        let d = g.domain();
        let mut values = Vec::with_capacity(nx * nt);
        for j in 0..nt {
            let t = d.t0 + (d.t1 - d.t0) * j as f64 / (nt - 1).max(1) as f64;
            for i in 0..nx {
                let x = d.x0 + (d.x1 - d.x0) * i as f64 / (nx - 1).max(1) as f64;
                values.push(g.jet(x, t)?.u);
            }
        }
        Self::new(d, nx, nt, values)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.nt)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interp(&self, field: &[f64], x: f64, t: f64) -> f64 {
        let d = &self.domain;
        let fx = ((x - d.x0) / (d.x1 - d.x0) * (self.nx - 1) as f64).clamp(0.0, (self.nx - 1) as f64);
        let ft = ((t - d.t0) / (d.t1 - d.t0) * (self.nt - 1) as f64).clamp(0.0, (self.nt - 1) as f64);
        let i = (fx as usize).min(self.nx - 2);
        let j = (ft as usize).min(self.nt - 2);
        let (sx, st) = (fx - i as f64, ft - j as f64);
        let v = |i: usize, j: usize| field[j * self.nx + i];
        (1.0 - sx) * (1.0 - st) * v(i, j)
            + sx * (1.0 - st) * v(i + 1, j)
            + (1.0 - sx) * st * v(i, j + 1)
            + sx * st * v(i + 1, j + 1)
    }
}

impl IntrinsicGraph for GridGraph {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn jet(&self, x: f64, t: f64) -> Result<Jet> {
        Ok(Jet {
            u: self.interp(&self.values, x, t),
            ux: self.interp(&self.ux, x, t),
            ut: self.interp(&self.ut, x, t),
        })
    }
}

/// `u + s·v` for a compactly supported perturbation `v`.
pub struct PerturbedGraph<'a, G: ?Sized, V: ?Sized> {
    pub base: &'a G,
    pub perturbation: &'a V,
    pub s: f64,
}

impl<G, V> IntrinsicGraph for PerturbedGraph<'_, G, V>
where
    G: IntrinsicGraph + ?Sized,
    V: crate::bump::TestFunction2D + ?Sized,
{
    fn domain(&self) -> Rect {
        self.base.domain()
    }

    fn jet(&self, x: f64, t: f64) -> Result<Jet> {
        let j = self.base.jet(x, t)?;
        let (v, vx, vt) = self.perturbation.eval(x, t);
        Ok(Jet { u: j.u + self.s * v, ux: j.ux + self.s * vx, ut: j.ut + self.s * vt })
    }
}

/// Frame of a surface at a regular point, in the left-invariant frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    /// Riemannian unit normal `N`.
    pub normal: FrameVector,
    /// Horizontal projection `N_h`.
    pub normal_h: FrameVector,
    pub normal_h_len: f64,
    /// `⟨N, T⟩`.
    pub normal_t: f64,
    pub nu_h: FrameVector,
    /// `Z = −J(ν_h)`.
    pub z: FrameVector,
    /// `E = ⟨N,T⟩ ν_h − |N_h| T`.
    pub e: FrameVector,
}

impl SurfaceFrame {
    /// Builds the frame from any (non-normalised) normal vector.
    pub fn from_normal(n: FrameVector) -> Result<Self> {
        let len = n.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Numerical("degenerate surface normal".into()));
        }
        let normal = (1.0 / len) * n;
        let normal_h = normal.horizontal();
        let normal_h_len = normal_h.norm();
        if !(normal_h_len > 0.0) {
            return Err(Error::Numerical("singular point: horizontal normal vanishes".into()));
        }
        let nu_h = (1.0 / normal_h_len) * normal_h;
        let z = -j_op(nu_h);
        let e = normal.h * nu_h - normal_h_len * FrameVector::T;
        Ok(Self { normal, normal_h, normal_h_len, normal_t: normal.h, nu_h, z, e })
    }

    /// `ν_h` as a plane vector.
    pub fn nu_plane(&self) -> PlaneVector {
        PlaneVector::new(self.nu_h.f, self.nu_h.g)
    }

    pub fn z_plane(&self) -> PlaneVector {
        PlaneVector::new(self.z.f, self.z.g)
    }
}

/// Everything known about `Gr(u)` at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub x: f64,
    pub t: f64,
    pub jet: Jet,
    /// `p = u_x + 2 u u_t`.
    pub p: f64,
    /// `√(1 + p²)`.
    pub w: f64,
    /// `|Ñ| = √(1 + p² + u_t²)`, the Riemannian Jacobian of `Φ`.
    pub jacobian: f64,
    pub frame: SurfaceFrame,
}

impl GraphPoint {
    pub fn new(x: f64, t: f64, jet: Jet) -> Result<Self> {
        let p = jet.ux + 2.0 * jet.u * jet.ut;
        let n = FrameVector::new(p, -1.0, jet.ut);
        let frame = SurfaceFrame::from_normal(n)?;
        Ok(Self { x, t, jet, p, w: libm::hypot(1.0, p), jacobian: n.norm(), frame })
    }

    pub fn embed(&self) -> HPoint {
        HPoint::new(self.x, self.jet.u, self.t - self.x * self.jet.u)
    }

    /// Velocity in the `(x, t)` plane of the unit field `Z`.
    pub fn z_direction(&self) -> (f64, f64) {
        (-1.0 / self.w, -2.0 * self.jet.u / self.w)
    }

    /// Velocity in the `(x, t)` plane of the unit field `E`.
    pub fn e_direction(&self) -> (f64, f64) {
        let alpha = self.jet.ut * self.p / (self.w * self.jacobian);
        (alpha, -self.w / self.jacobian + 2.0 * self.jet.u * alpha)
    }

    /// `⟨N,T⟩ / |N_h| = u_t / √(1+p²)`.
    pub fn nt_over_nh(&self) -> f64 {
        self.jet.ut / self.w
    }

    /// Coordinate partials `(Φ_x, Φ_t)`.
    pub fn tangents(&self) -> ([f64; 3], [f64; 3]) {
        let Jet { u, ux, ut } = self.jet;
        ([1.0, ux, -u - self.x * ux], [0.0, ut, 1.0 - self.x * ut])
    }
}

pub fn graph_point<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<GraphPoint> {
    GraphPoint::new(x, t, g.jet(x, t)?)
}

fn graph_point_in_domain<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<GraphPoint> {
    if !g.domain().contains(x, t) {
        return Err(Error::OutOfDomain { x, t });
    }
    graph_point(g, x, t)
}

/// Values that can be central-differenced.
pub trait Differentiable: Copy {
    fn central(plus: Self, minus: Self, h: f64) -> Self;
}

impl Differentiable for f64 {
    fn central(plus: Self, minus: Self, h: f64) -> Self {
        (plus - minus) / (2.0 * h)
    }
}

impl Differentiable for PlaneVector {
    fn central(plus: Self, minus: Self, h: f64) -> Self {
        (1.0 / (2.0 * h)) * (plus - minus)
    }
}

impl Differentiable for FrameVector {
    fn central(plus: Self, minus: Self, h: f64) -> Self {
        (1.0 / (2.0 * h)) * (plus - minus)
    }
}

/// Central difference of `F(graph point)` along the `(x, t)` direction `dir`.
/// Both stencil points must lie in the domain.
pub fn directional_derivative<G, R, F>(
    g: &G,
    x: f64,
    t: f64,
    dir: (f64, f64),
    step: f64,
    f: F,
) -> Result<R>
where
    G: IntrinsicGraph + ?Sized,
    R: Differentiable,
    F: Fn(&GraphPoint) -> Result<R>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let plus = graph_point_in_domain(g, x + step * dir.0, t + step * dir.1)?;
    let minus = graph_point_in_domain(g, x - step * dir.0, t - step * dir.1)?;
    Ok(R::central(f(&plus)?, f(&minus)?, step))
}

/// `Z(F)` at a point, differentiating along the characteristic direction.
pub fn z_derivative<G, R, F>(g: &G, gp: &GraphPoint, step: f64, f: F) -> Result<R>
where
    G: IntrinsicGraph + ?Sized,
    R: Differentiable,
    F: Fn(&GraphPoint) -> Result<R>,
{
    directional_derivative(g, gp.x, gp.t, gp.z_direction(), step, f)
}

/// `E(F)` at a point.
pub fn e_derivative<G, R, F>(g: &G, gp: &GraphPoint, step: f64, f: F) -> Result<R>
where
    G: IntrinsicGraph + ?Sized,
    R: Differentiable,
    F: Fn(&GraphPoint) -> Result<R>,
{
    directional_derivative(g, gp.x, gp.t, gp.e_direction(), step, f)
}

/// `(x, u, t − x u)`.
pub fn embed<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<HPoint> {
    Ok(graph_point_in_domain(g, x, t)?.embed())
}

/// `u_x + 2 u u_t`.
pub fn shift_p<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<f64> {
    Ok(graph_point_in_domain(g, x, t)?.p)
}

pub fn surface_frame<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<SurfaceFrame> {
    Ok(graph_point_in_domain(g, x, t)?.frame)
}

/// `|N_h| dS / (dx dt) = √(1 + p²)`.
pub fn area_element<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64) -> Result<f64> {
    Ok(graph_point_in_domain(g, x, t)?.w)
}

/// Area integrand `p π₁(p, −1) − π₂(p, −1)` at a point.
pub fn area_density(body: &ConvexBody2D, p: f64) -> Result<f64> {
    let pi = body.pi_k(PlaneVector::new(p, -1.0))?;
    Ok(p * pi.x - pi.y)
}

/// Sub-Finsler area of `Gr(u)` over its whole domain.
pub fn subfinsler_area<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    quad: &QuadratureSpec,
) -> Result<f64> {
    subfinsler_area_over(g, body, &g.domain(), quad)
}

/// Sub-Finsler area of the part of `Gr(u)` over `rect`.
pub fn subfinsler_area_over<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    rect: &Rect,
    quad: &QuadratureSpec,
) -> Result<f64> {
    rect.integrate(quad, |x, t| {
        let j = g.jet(x, t)?;
        area_density(body, j.ux + 2.0 * j.u * j.ut)
    })
}

/// `∫ √(1+p²) dx dt`, the sub-Riemannian area.
pub fn sub_riemannian_area<G: IntrinsicGraph + ?Sized>(g: &G, quad: &QuadratureSpec) -> Result<f64> {
    g.domain().integrate(quad, |x, t| Ok(graph_point(g, x, t)?.w))
}

/// `π_K(ν_h)` at a point.
pub fn pi_nu(body: &ConvexBody2D, gp: &GraphPoint) -> Result<PlaneVector> {
    body.pi_k(gp.frame.nu_plane())
}

/// K-mean curvature `H_K = ⟨∇_Z π_K(ν_h), Z⟩` at a point.
pub fn mean_curvature_k<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    x: f64,
    t: f64,
    step: f64,
) -> Result<f64> {
    let gp = graph_point_in_domain(g, x, t)?;
    mean_curvature_at(g, body, &gp, step)
}

pub(crate) fn mean_curvature_at<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    gp: &GraphPoint,
    step: f64,
) -> Result<f64> {
    let d: PlaneVector = z_derivative(g, gp, step, |q| body.pi_k(q.frame.nu_plane()))?;
    Ok(d.dot(gp.frame.z_plane()))
}

/// Surface direction along which `θ(W) = ⟨∇_W ν_h, Z⟩` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceDirection {
    Z,
    E,
}

pub fn theta<G: IntrinsicGraph + ?Sized>(
    g: &G,
    direction: SurfaceDirection,
    x: f64,
    t: f64,
    step: f64,
) -> Result<f64> {
    let gp = graph_point_in_domain(g, x, t)?;
    theta_at(g, direction, &gp, step)
}

pub(crate) fn theta_at<G: IntrinsicGraph + ?Sized>(
    g: &G,
    direction: SurfaceDirection,
    gp: &GraphPoint,
    step: f64,
) -> Result<f64> {
    let dir = match direction {
        SurfaceDirection::Z => gp.z_direction(),
        SurfaceDirection::E => gp.e_direction(),
    };
    let d: FrameVector = directional_derivative(g, gp.x, gp.t, dir, step, |q| Ok(q.frame.nu_h))?;
    Ok(d.dot(gp.frame.z))
}

/// Right-hand side of `θ(E) = −|N_h| Z(⟨N,T⟩/|N_h|) + 2|N_h| (⟨N,T⟩/|N_h|)²`.
pub fn theta_e_identity_rhs<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64, step: f64) -> Result<f64> {
    let gp = graph_point_in_domain(g, x, t)?;
    let zy: f64 = z_derivative(g, &gp, step, |q| Ok(q.nt_over_nh()))?;
    let y = gp.nt_over_nh();
    let nh = gp.frame.normal_h_len;
    Ok(-nh * zy + 2.0 * nh * y * y)
}

/// Max of `|∇u|` sampled on an `n × n` grid; a recorded Lipschitz estimate.
pub fn lipschitz_estimate<G: IntrinsicGraph + ?Sized>(g: &G, n: usize) -> Result<f64> {
    let d = g.domain();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = d.x0 + (d.x1 - d.x0) * i as f64 / (n - 1).max(1) as f64;
            let t = d.t0 + (d.t1 - d.t0) * j as f64 / (n - 1).max(1) as f64;
            let jt = g.jet(x, t)?;
            m = m.max(libm::hypot(jt.ux, jt.ut));
        }
    }
    Ok(m)
}

/// Default central-difference step used by the frame derivatives.
pub const FRAME_FD_STEP: f64 = DEFAULT_FD_STEP;
