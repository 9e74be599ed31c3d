//! Area of flowed surfaces and the first and second variation of the
//! sub-Finsler area, each computed both from its formula and by finite
//! differences of the area.
//!
//! Variation fields are given by frame coefficients frozen at the start of each
//! flowline. A constant-coefficient field flows along a straight line in
//! coordinates, so `Φ_s = Φ + s W` with `W` the coordinate vector of the field.

use crate::bump::{TensorBump, TestFunction2D};
use crate::convex_body::{ConvexBody2D, PlaneVector};
use crate::error::{Error, Result};
use crate::graph::{
    graph_point, mean_curvature_at, theta_at, z_derivative, GraphPoint, IntrinsicGraph, PerturbedGraph,
    SurfaceDirection, SurfaceFrame,
};
use crate::heisenberg::{to_coords, to_frame, FrameVector, HPoint, DEFAULT_FD_STEP};
use crate::quadrature::{QuadratureSpec, Rect};

/// Default flow parameter step for area finite differences.
pub const DEFAULT_VARIATION_STEP: f64 = 1e-3;
/// Max `|Z(p)|` accepted as stationary by the second-variation routines.
pub const STATIONARITY_TOLERANCE: f64 = 1e-6;
/// Below this `|∂₁Φ × ∂₂Φ|` the flowed map is no longer an immersion.
pub const IMMERSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldCoefficients {
    /// Coefficients against `{Z, ν_h, T}` at the surface point.
    Adapted { u_z: f64, u_nu: f64, u_t: f64 },
    /// Constant coefficients against `{X, Y, T}`.
    Frame(FrameVector),
}

/// Compactly supported variation field: coefficients times a bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationField {
    pub coefficients: FieldCoefficients,
    pub bump: TensorBump,
}

impl VariationField {
    pub fn adapted(u_z: f64, u_nu: f64, u_t: f64, bump: TensorBump) -> Self {
        Self { coefficients: FieldCoefficients::Adapted { u_z, u_nu, u_t }, bump }
    }

    /// `f ν_h` with `f` the bump.
    pub fn normal(bump: TensorBump) -> Self {
        Self::adapted(0.0, 1.0, 0.0, bump)
    }

    pub fn frame(v: FrameVector, bump: TensorBump) -> Self {
        Self { coefficients: FieldCoefficients::Frame(v), bump }
    }

    pub fn is_horizontal(&self) -> bool {
        match self.coefficients {
            FieldCoefficients::Adapted { u_t, .. } => u_t == 0.0,
            FieldCoefficients::Frame(v) => v.h == 0.0,
        }
    }

    pub fn support(&self) -> Rect {
        self.bump.support()
    }

    /// Field value given the surface frame at `(x, t)`.
    pub fn vector(&self, frame: &SurfaceFrame, x: f64, t: f64) -> FrameVector {
        let (b, _, _) = self.bump.eval(x, t);
        let v = match self.coefficients {
            FieldCoefficients::Adapted { u_z, u_nu, u_t } => {
                u_z * frame.z + u_nu * frame.nu_h + u_t * FrameVector::T
            }
            FieldCoefficients::Frame(v) => v,
        };
        b * v
    }
}

/// A parametrised surface `Φ: D → ℍ¹` with first derivatives.
pub trait ParamSurface {
    fn domain(&self) -> Rect;
    fn point(&self, x: f64, t: f64) -> Result<HPoint>;
    /// Coordinate partials `(∂ₓΦ, ∂ₜΦ)`.
    fn tangents(&self, x: f64, t: f64) -> Result<([f64; 3], [f64; 3])>;

    /// `∂ₓΦ × ∂ₜΦ` in the left-invariant frame at `Φ(x, t)`.
    fn frame_normal(&self, x: f64, t: f64) -> Result<FrameVector> {
        let p = self.point(x, t)?;
        let (a, b) = self.tangents(x, t)?;
        Ok(to_frame(p, a).cross(to_frame(p, b)))
    }

    fn frame(&self, x: f64, t: f64) -> Result<SurfaceFrame> {
        SurfaceFrame::from_normal(self.frame_normal(x, t)?)
    }
}

/// An intrinsic graph seen as a parametrised surface.
pub struct GraphSurface<'a, G: ?Sized>(pub &'a G);

impl<G: IntrinsicGraph + ?Sized> ParamSurface for GraphSurface<'_, G> {
    fn domain(&self) -> Rect {
        self.0.domain()
    }

    fn point(&self, x: f64, t: f64) -> Result<HPoint> {
        Ok(graph_point(self.0, x, t)?.embed())
    }

    fn tangents(&self, x: f64, t: f64) -> Result<([f64; 3], [f64; 3])> {
        Ok(graph_point(self.0, x, t)?.tangents())
    }

    fn frame(&self, x: f64, t: f64) -> Result<SurfaceFrame> {
        Ok(graph_point(self.0, x, t)?.frame)
    }
}

/// `Φ_s = Φ + s W` for a variation field.
pub struct FlowedSurface<'a, S: ?Sized> {
    pub base: &'a S,
    pub field: &'a VariationField,
    pub s: f64,
    pub fd_step: f64,
}

impl<S: ParamSurface + ?Sized> FlowedSurface<'_, S> {
    fn displacement(&self, x: f64, t: f64) -> Result<[f64; 3]> {
        if self.field.bump.eval(x, t).0 == 0.0 {
            return Ok([0.0; 3]);
        }
        let p = self.base.point(x, t)?;
        let u = self.field.vector(&self.base.frame(x, t)?, x, t);
        Ok(to_coords(p, u))
    }
}

impl<S: ParamSurface + ?Sized> ParamSurface for FlowedSurface<'_, S> {
    fn domain(&self) -> Rect {
        self.base.domain()
    }

    fn point(&self, x: f64, t: f64) -> Result<HPoint> {
        Ok(self.base.point(x, t)?.offset(self.displacement(x, t)?, self.s))
    }

    fn tangents(&self, x: f64, t: f64) -> Result<([f64; 3], [f64; 3])> {
        let (mut a, mut b) = self.base.tangents(x, t)?;
        if self.s != 0.0 {
            let h = self.fd_step;
            let (xp, xm) = (self.displacement(x + h, t)?, self.displacement(x - h, t)?);
            let (tp, tm) = (self.displacement(x, t + h)?, self.displacement(x, t - h)?);
            for i in 0..3 {
                a[i] += self.s * (xp[i] - xm[i]) / (2.0 * h);
                b[i] += self.s * (tp[i] - tm[i]) / (2.0 * h);
            }
        }
        Ok((a, b))
    }
}

/// Flows `surface` for time `s` along `field`.
pub fn flow_surface<'a, S: ParamSurface + ?Sized>(
    surface: &'a S,
    field: &'a VariationField,
    s: f64,
) -> FlowedSurface<'a, S> {
    FlowedSurface { base: surface, field, s, fd_step: DEFAULT_FD_STEP }
}

/// `∫ ‖(∂₁Φ × ∂₂Φ)_h‖_{K,*} dx dt` over `rect`.
pub fn area_param<S: ParamSurface + ?Sized>(
    surface: &S,
    body: &ConvexBody2D,
    rect: &Rect,
    quad: &QuadratureSpec,
) -> Result<f64> {
    rect.integrate(quad, |x, t| {
        let n = surface.frame_normal(x, t)?;
        if !(n.norm() > IMMERSION_TOLERANCE) {
            return Err(Error::Numerical(alloc::format!("immersion lost at ({x}, {t})")));
        }
        Ok(body.dual_norm(PlaneVector::new(n.f, n.g)))
    })
}

fn support_in<S: ParamSurface + ?Sized>(surface: &S, rect: &Rect) -> Result<Rect> {
    surface
        .domain()
        .intersect(rect)
        .ok_or_else(|| Error::InvalidInput("variation support misses the domain".into()))
}

/// `(A(δs) − A(−δs)) / (2δs)`, areas taken over the field support.
pub fn first_variation_fd<S: ParamSurface + ?Sized>(
    surface: &S,
    field: &VariationField,
    body: &ConvexBody2D,
    ds: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(ds > 0.0) {
        return Err(Error::InvalidInput("δs must be positive".into()));
    }
    let rect = support_in(surface, &field.support())?;
    let plus = area_param(&flow_surface(surface, field, ds), body, &rect, quad)?;
    let minus = area_param(&flow_surface(surface, field, -ds), body, &rect, quad)?;
    Ok((plus - minus) / (2.0 * ds))
}

/// `∫ ⟨U, N⟩ H_K dS`.
pub fn first_variation_formula<G: IntrinsicGraph + ?Sized>(
    g: &G,
    field: &VariationField,
    body: &ConvexBody2D,
    quad: &QuadratureSpec,
    fd_step: f64,
) -> Result<f64> {
    let rect = support_in(&GraphSurface(g), &field.support())?;
    rect.integrate(quad, |x, t| {
        let gp = graph_point(g, x, t)?;
        let un = field.vector(&gp.frame, x, t).dot(gp.frame.normal);
        if un == 0.0 {
            return Ok(0.0);
        }
        Ok(un * mean_curvature_at(g, body, &gp, fd_step)? * gp.jacobian)
    })
}

/// `F(x) = π₁(x,−1) + x ∂ₓπ₁(x,−1) − ∂ₓπ₂(x,−1)`, the derivative of the area
/// density `x π₁(x,−1) − π₂(x,−1)`.
pub fn area_density_derivative(body: &ConvexBody2D, p: f64, fd_step: f64) -> Result<f64> {
    let pi = body.pi_k(PlaneVector::new(p, -1.0))?;
    let plus = body.pi_k(PlaneVector::new(p + fd_step, -1.0))?;
    let minus = body.pi_k(PlaneVector::new(p - fd_step, -1.0))?;
    let d = (1.0 / (2.0 * fd_step)) * (plus - minus);
    Ok(pi.x + p * d.x - d.y)
}

/// `∫ (v_x + 2v u_t + 2u v_t) F(p) dx dt`, the derivative of the area under
/// `u ↦ u + s v`.
pub fn first_variation_graph<G, V>(g: &G, v: &V, body: &ConvexBody2D, quad: &QuadratureSpec, fd_step: f64) -> Result<f64>
where
    G: IntrinsicGraph + ?Sized,
    V: TestFunction2D + ?Sized,
{
    let rect = support_in(&GraphSurface(g), &v.support())?;
    rect.integrate(quad, |x, t| {
        let j = g.jet(x, t)?;
        let (f, fx, ft) = v.eval(x, t);
        let m = area_density_derivative(body, j.ux + 2.0 * j.u * j.ut, fd_step)?;
        Ok((fx + 2.0 * f * j.ut + 2.0 * j.u * ft) * m)
    })
}

/// Central difference of the area of `u + s v` in `s`.
pub fn vertical_perturbation_fd<G, V>(g: &G, v: &V, body: &ConvexBody2D, ds: f64, quad: &QuadratureSpec) -> Result<f64>
where
    G: IntrinsicGraph + ?Sized,
    V: TestFunction2D + ?Sized,
{
    let rect = support_in(&GraphSurface(g), &v.support())?;
    let area = |s: f64| {
        crate::graph::subfinsler_area_over(&PerturbedGraph { base: g, perturbation: v, s }, body, &rect, quad)
    };
    Ok((area(ds)? - area(-ds)?) / (2.0 * ds))
}

/// `Z(p)`; zero exactly on stationary graphs.
pub fn z_of_p<G: IntrinsicGraph + ?Sized>(g: &G, gp: &GraphPoint, fd_step: f64) -> Result<f64> {
    z_derivative(g, gp, fd_step, |q| Ok(q.p))
}

pub(crate) fn q_at<G: IntrinsicGraph + ?Sized>(g: &G, gp: &GraphPoint, fd_step: f64) -> Result<f64> {
    let zy: f64 = z_derivative(g, gp, fd_step, |q| Ok(q.nt_over_nh()))?;
    let y = gp.nt_over_nh();
    Ok(4.0 * (zy - y * y))
}

/// `q = 4 (Z(⟨N,T⟩/|N_h|) − ⟨N,T⟩²/|N_h|²)`.
pub fn q_function<G: IntrinsicGraph + ?Sized>(g: &G, x: f64, t: f64, fd_step: f64) -> Result<f64> {
    if !g.domain().contains(x, t) {
        return Err(Error::OutOfDomain { x, t });
    }
    q_at(g, &graph_point(g, x, t)?, fd_step)
}

/// Pointwise ingredients of the stability form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityWeights {
    /// `√(1+p²)/κ`, the density of `|N_h|/κ dS` against `dx dt`.
    pub rho: f64,
    pub q: f64,
    /// `(x, t)` velocity of `Z`.
    pub z_dir: (f64, f64),
    /// `|Z(p)|`, the local stationarity defect.
    pub z_of_p: f64,
}

pub fn stability_weights<G: IntrinsicGraph + ?Sized>(
    g: &G,
    body: &ConvexBody2D,
    x: f64,
    t: f64,
    fd_step: f64,
) -> Result<StabilityWeights> {
    let gp = graph_point(g, x, t)?;
    let kappa = body.boundary_curvature(gp.frame.nu_plane())?;
    Ok(StabilityWeights {
        rho: gp.w / kappa,
        q: q_at(g, &gp, fd_step)?,
        z_dir: gp.z_direction(),
        z_of_p: z_of_p(g, &gp, fd_step)?.abs(),
    })
}

/// `∫ (Z(f)² + q f²) |N_h|/κ(π_K(ν_h)) dS`, rejecting non-stationary graphs.
pub fn second_variation_formula<G, F>(
    g: &G,
    f: &F,
    body: &ConvexBody2D,
    quad: &QuadratureSpec,
    fd_step: f64,
) -> Result<f64>
where
    G: IntrinsicGraph + ?Sized,
    F: TestFunction2D + ?Sized,
{
    let rect = support_in(&GraphSurface(g), &f.support())?;
    rect.integrate(quad, |x, t| {
        let (v, vx, vt) = f.eval(x, t);
        if v == 0.0 && vx == 0.0 && vt == 0.0 {
            return Ok(0.0);
        }
        let w = stability_weights(g, body, x, t, fd_step)?;
        if w.z_of_p > STATIONARITY_TOLERANCE {
            return Err(Error::NonStationary { residual: w.z_of_p, tolerance: STATIONARITY_TOLERANCE });
        }
        let zf = w.z_dir.0 * vx + w.z_dir.1 * vt;
        Ok((zf * zf + w.q * v * v) * w.rho)
    })
}

/// Second difference of the area with one Richardson step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDifference {
    /// `(4 D(δs/2) − D(δs)) / 3`.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
}

/// `(A(δs) − 2A(0) + A(−δs)) / δs²`, Richardson-extrapolated, for horizontal fields.
pub fn second_variation_fd<S: ParamSurface + ?Sized>(
    surface: &S,
    field: &VariationField,
    body: &ConvexBody2D,
    ds: f64,
    quad: &QuadratureSpec,
) -> Result<SecondDifference> {
    if !field.is_horizontal() {
        return Err(Error::InvalidInput("second variation needs a horizontal field".into()));
    }
    if !(ds > 0.0) {
        return Err(Error::InvalidInput("δs must be positive".into()));
    }
    let rect = support_in(surface, &field.support())?;
    let area = |s: f64| area_param(&flow_surface(surface, field, s), body, &rect, quad);
    let a0 = area(0.0)?;
    let d = |h: f64| -> Result<f64> { Ok((area(h)? - 2.0 * a0 + area(-h)?) / (h * h)) };
    let coarse = d(ds)?;
    let fine = d(0.5 * ds)?;
    Ok(SecondDifference { value: (4.0 * fine - coarse) / 3.0, coarse, fine })
}

/// Values of the three integration-by-parts identities; each vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpResiduals {
    /// `∫ (Z(h) − 2⟨N,T⟩/|N_h| h) |N_h| dS`, any graph.
    pub plain: f64,
    /// Same weighted by `‖N_h‖_*`, stationary graphs.
    pub dual_weighted: f64,
    /// `∫ π_ν E(h) + π_Z θ(E) h dS`, stationary graphs.
    pub e_direction: f64,
}

pub fn integration_by_parts_residuals<G, H>(
    g: &G,
    h: &H,
    body: &ConvexBody2D,
    quad: &QuadratureSpec,
    fd_step: f64,
) -> Result<IbpResiduals>
where
    G: IntrinsicGraph + ?Sized,
    H: TestFunction2D + ?Sized,
{
    let rect = support_in(&GraphSurface(g), &h.support())?;
    let mut out = IbpResiduals { plain: 0.0, dual_weighted: 0.0, e_direction: 0.0 };
    for (x, t, wt) in rect.nodes(quad)? {
        let (v, vx, vt) = h.eval(x, t);
        if v == 0.0 && vx == 0.0 && vt == 0.0 {
            continue;
        }
        let gp = graph_point(g, x, t)?;
        let zd = gp.z_direction();
        let ed = gp.e_direction();
        let zh = zd.0 * vx + zd.1 * vt;
        let eh = ed.0 * vx + ed.1 * vt;
        let y = gp.nt_over_nh();
        let pi = body.pi_k(gp.frame.nu_plane())?;
        let pi_nu = body.dual_norm(gp.frame.nu_plane());
        let pi_z = pi.dot(gp.frame.z_plane());
        let th = theta_at(g, SurfaceDirection::E, &gp, fd_step)?;
        let base = (zh - 2.0 * y * v) * gp.w;
        out.plain += wt * base;
        out.dual_weighted += wt * base * pi_nu;
        out.e_direction += wt * (pi_nu * eh + pi_z * th * v) * gp.jacobian;
    }
    if !(out.plain.is_finite() && out.dual_weighted.is_finite() && out.e_direction.is_finite()) {
        return Err(Error::Numerical("non-finite integration-by-parts residual".into()));
    }
    Ok(out)
}

/// `|π_K(ν_h) − (π_Z Z + π_ν ν_h)|` with `π_ν = ‖ν_h‖_*`.
pub fn pi_decomposition_error(body: &ConvexBody2D, frame: &SurfaceFrame) -> Result<f64> {
    let nu = frame.nu_plane();
    let z = frame.z_plane();
    let pi = body.pi_k(nu)?;
    let rebuilt = pi.dot(z) * z + body.dual_norm(nu) * nu;
    Ok((pi - rebuilt).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{subfinsler_area, ClosedForm, ClosedFormGraph};

    fn q() -> QuadratureSpec {
        QuadratureSpec::new(4, 4, 8)
    }

    fn bump() -> TensorBump {
        TensorBump::new(0.1, -0.1, 0.5, 0.6, 4).unwrap()
    }

    #[test]
    fn zero_flow_is_identity() {
        let g = ClosedFormGraph::new(ClosedForm::XtOver1px2, Rect::symmetric(1.0).unwrap());
        let s = GraphSurface(&g);
        let f = VariationField::adapted(0.3, 1.0, -0.2, bump());
        let fl = flow_surface(&s, &f, 0.0);
        assert_eq!(fl.point(0.2, 0.1).unwrap(), s.point(0.2, 0.1).unwrap());
    }

    #[test]
    fn vertical_field_shifts_t() {
        let g = ClosedFormGraph::new(ClosedForm::Zero, Rect::symmetric(1.0).unwrap());
        let s = GraphSurface(&g);
        let f = VariationField::frame(FrameVector::T, bump());
        let fl = flow_surface(&s, &f, 0.25);
        let (b, _, _) = bump().eval(0.2, 0.1);
        let p = fl.point(0.2, 0.1).unwrap();
        assert!((p.t - (0.1 + 0.25 * b)).abs() < 1e-15 && p.x == 0.2 && p.y == 0.0);
    }

    #[test]
    fn normal_flow_of_plane_moves_in_y() {
        let g = ClosedFormGraph::new(ClosedForm::Zero, Rect::symmetric(1.0).unwrap());
        let s = GraphSurface(&g);
        let f = VariationField::normal(bump());
        let fl = flow_surface(&s, &f, 0.01);
        let (b, _, _) = bump().eval(0.2, 0.1);
        let p = fl.point(0.2, 0.1).unwrap();
        assert!((p.y + 0.01 * b).abs() < 1e-15);
    }

    #[test]
    fn area_param_matches_graph_area() {
        let body = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let d = Rect::symmetric(1.0).unwrap();
        for kind in [ClosedForm::Zero, ClosedForm::XtOver1px2, ClosedForm::Poly(alloc::vec![(0, 1, 1.0), (2, 0, 0.3)])] {
            let g = ClosedFormGraph::new(kind, d);
            let a = subfinsler_area(&g, &body, &q()).unwrap();
            let b = area_param(&GraphSurface(&g), &body, &d, &q()).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
        }
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let z = ClosedFormGraph::new(ClosedForm::Zero, unit);
        let disk = ConvexBody2D::disk(1.0).unwrap();
        assert!((area_param(&GraphSurface(&z), &disk, &unit, &q()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn first_variation_routes_agree_on_u_equals_t() {
        let g = ClosedFormGraph::new(ClosedForm::Poly(alloc::vec![(0, 1, 1.0)]), Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let f = VariationField::adapted(0.0, 1.0, 0.0, bump());
        let fd = first_variation_fd(&GraphSurface(&g), &f, &body, 1e-3, &q()).unwrap();
        let formula = first_variation_formula(&g, &f, &body, &q(), 1e-5).unwrap();
        assert!(fd.abs() > 1e-3);
        assert!((fd - formula).abs() <= 1e-4 * (1.0 + fd.abs()), "{fd} vs {formula}");
    }

    #[test]
    fn first_variation_graph_matches_vertical_perturbation() {
        let g = ClosedFormGraph::new(ClosedForm::Poly(alloc::vec![(0, 1, 1.0), (1, 0, 0.4)]), Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::disk(1.0).unwrap();
        let v = bump();
        let a = first_variation_graph(&g, &v, &body, &q(), 1e-5).unwrap();
        let b = vertical_perturbation_fd(&g, &v, &body, 1e-4, &q()).unwrap();
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }

    #[test]
    fn q_examples() {
        let d = Rect::symmetric(2.0).unwrap();
        let z = ClosedFormGraph::new(ClosedForm::Zero, d);
        assert_eq!(q_function(&z, 0.1, 0.2, 1e-5).unwrap(), 0.0);
        let aff = ClosedFormGraph::new(ClosedForm::Affine { a: 0.3, b: 1.2 }, d);
        assert_eq!(q_function(&aff, 0.1, 0.2, 1e-5).unwrap(), 0.0);
        let xt = ClosedFormGraph::new(ClosedForm::XtOver1px2, d);
        assert!((q_function(&xt, 0.0, 0.0, 1e-5).unwrap() + 4.0).abs() < 1e-8);
    }

    #[test]
    fn second_variation_on_plane_is_dirichlet_energy() {
        let g = ClosedFormGraph::new(ClosedForm::Zero, Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::disk(1.0).unwrap();
        let f = bump();
        let formula = second_variation_formula(&g, &f, &body, &q(), 1e-5).unwrap();
        let dirichlet = f.support().integrate(&q(), |x, t| Ok(f.eval(x, t).1.powi(2))).unwrap();
        assert!((formula - dirichlet).abs() < 1e-12 * dirichlet);
        let fd = second_variation_fd(&GraphSurface(&g), &VariationField::normal(f), &body, 1e-3, &q()).unwrap();
        assert!((fd.value - formula).abs() <= 1e-3 * formula, "{fd:?} vs {formula}");
    }

    #[test]
    fn second_variation_rejects_non_stationary() {
        let g = ClosedFormGraph::new(ClosedForm::Poly(alloc::vec![(0, 1, 1.0)]), Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::disk(1.0).unwrap();
        assert!(matches!(
            second_variation_formula(&g, &bump(), &body, &q(), 1e-5),
            Err(Error::NonStationary { .. })
        ));
        let vert = VariationField::frame(FrameVector::T, bump());
        assert!(second_variation_fd(&GraphSurface(&g), &vert, &body, 1e-3, &q()).is_err());
    }

    #[test]
    fn tangential_flow_of_plane_has_no_second_variation() {
        let g = ClosedFormGraph::new(ClosedForm::Zero, Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let f = VariationField::frame(FrameVector::X, bump());
        let fd = second_variation_fd(&GraphSurface(&g), &f, &body, 1e-3, &q()).unwrap();
        assert!(fd.value.abs() < 1e-6, "{fd:?}");
    }

    #[test]
    fn ibp_on_plane_vanishes() {
        let g = ClosedFormGraph::new(ClosedForm::Zero, Rect::symmetric(1.0).unwrap());
        let body = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let r = integration_by_parts_residuals(&g, &bump(), &body, &q(), 1e-5).unwrap();
        assert!(r.plain.abs() < 1e-6 && r.dual_weighted.abs() < 1e-6 && r.e_direction.abs() < 1e-6, "{r:?}");
    }
}
