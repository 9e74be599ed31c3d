//! The first Heisenberg group `ℍ¹ = (ℝ³, *)` with its left-invariant frame.
//!
//! Vectors are carried as coefficients against `{X, Y, T}` (a [`FrameVector`])
//! wherever possible; the auxiliary metric makes that frame orthonormal, so
//! inner and cross products are plain Euclidean ones on coefficients.

use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default central-difference step for derivatives of sampled fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn inverse(self) -> Self {
        Self::new(-self.x, -self.y, -self.t)
    }

    pub fn coords(self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }

    /// Moves the point along the coordinate vector `v` by `s`.
    pub fn offset(self, v: [f64; 3], s: f64) -> Self {
        Self::new(self.x + s * v[0], self.y + s * v[1], self.t + s * v[2])
    }
}

impl Mul for HPoint {
    type Output = HPoint;
    fn mul(self, q: HPoint) -> HPoint {
        group_mul(self, q)
    }
}

/// `(x, y, t) * (x̄, ȳ, t̄) = (x + x̄, y + ȳ, t + t̄ + x̄y − xȳ)`.
pub fn group_mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint::new(p.x + q.x, p.y + q.y, p.t + q.t + q.x * p.y - p.x * q.y)
}

/// Coefficients `(f, g, h)` of `fX + gY + hT`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameVector {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl FrameVector {
    pub const X: FrameVector = FrameVector { f: 1.0, g: 0.0, h: 0.0 };
    pub const Y: FrameVector = FrameVector { f: 0.0, g: 1.0, h: 0.0 };
    pub const T: FrameVector = FrameVector { f: 0.0, g: 0.0, h: 1.0 };
    pub const ZERO: FrameVector = FrameVector { f: 0.0, g: 0.0, h: 0.0 };

    pub const fn new(f: f64, g: f64, h: f64) -> Self {
        Self { f, g, h }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.f * o.f + self.g * o.g + self.h * o.h
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Cross product in the positively oriented orthonormal frame `{X, Y, T}`.
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.g * o.h - self.h * o.g,
            self.h * o.f - self.f * o.h,
            self.f * o.g - self.g * o.f,
        )
    }

    /// Horizontal projection `fX + gY`.
    pub fn horizontal(self) -> Self {
        Self::new(self.f, self.g, 0.0)
    }

    pub fn is_horizontal(self) -> bool {
        self.h == 0.0
    }

    pub fn max_abs_diff(self, o: Self) -> f64 {
        (self.f - o.f).abs().max((self.g - o.g).abs()).max((self.h - o.h).abs())
    }

    pub fn is_finite(self) -> bool {
        self.f.is_finite() && self.g.is_finite() && self.h.is_finite()
    }
}

impl Add for FrameVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.f + o.f, self.g + o.g, self.h + o.h)
    }
}

impl Sub for FrameVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.f - o.f, self.g - o.g, self.h - o.h)
    }
}

impl Neg for FrameVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.f, -self.g, -self.h)
    }
}

impl Mul<FrameVector> for f64 {
    type Output = FrameVector;
    fn mul(self, v: FrameVector) -> FrameVector {
        FrameVector::new(self * v.f, self * v.g, self * v.h)
    }
}

/// Euclidean coordinate components of `X`, `Y`, `T` at `p`.
pub fn frame_at(p: HPoint) -> [[f64; 3]; 3] {
    [[1.0, 0.0, p.y], [0.0, 1.0, -p.x], [0.0, 0.0, 1.0]]
}

/// Coordinate components of the frame vector `v` attached at `p`.
pub fn to_coords(p: HPoint, v: FrameVector) -> [f64; 3] {
    [v.f, v.g, v.h + v.f * p.y - v.g * p.x]
}

/// Frame coefficients of the coordinate vector `v` attached at `p`.
pub fn to_frame(p: HPoint, v: [f64; 3]) -> FrameVector {
    FrameVector::new(v[0], v[1], contact_form(p, v))
}

/// `J(fX + gY + hT) = −gX + fY`.
pub fn j_op(v: FrameVector) -> FrameVector {
    FrameVector::new(-v.g, v.f, 0.0)
}

/// `ω = dt − y dx + x dy` applied to the coordinate vector `v` at `p`.
pub fn contact_form(p: HPoint, v: [f64; 3]) -> f64 {
    v[2] - p.y * v[0] + p.x * v[1]
}

/// Levi-Civita derivative `D_a b` of constant-coefficient fields:
/// `D_X Y = −T, D_X T = Y, D_Y T = −X, D_Y X = T, D_T X = Y, D_T Y = −X`,
/// and `D_X X = D_Y Y = D_T T = 0`.
pub fn levi_civita(a: FrameVector, b: FrameVector) -> FrameVector {
    FrameVector::new(
        -a.g * b.h - a.h * b.g,
        a.f * b.h + a.h * b.f,
        -a.f * b.g + a.g * b.f,
    )
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("finite-difference step must be positive".into()))
    }
}

fn coefficient_derivative<V>(field: &V, s: f64, step: f64) -> Result<FrameVector>
where
    V: Fn(f64) -> FrameVector,
{
    check_step(step)?;
    let d = (1.0 / (2.0 * step)) * (field(s + step) - field(s - step));
    if !d.is_finite() {
        return Err(Error::Numerical("field not differentiable at the sample".into()));
    }
    Ok(d)
}

/// Covariant derivative `D_{γ'} V` of the Levi-Civita connection along a curve.
///
/// `velocity(s)` gives the frame coefficients of `γ'(s)`; frame coefficients of
/// `V` are differentiated by central differences with the given step.
pub fn levi_civita_derivative<C, V>(velocity: C, field: V, s: f64, step: f64) -> Result<FrameVector>
where
    C: Fn(f64) -> FrameVector,
    V: Fn(f64) -> FrameVector,
{
    let d = coefficient_derivative(&field, s, step)?;
    Ok(d + levi_civita(velocity(s), field(s)))
}

/// Covariant derivative along a curve for the pseudo-hermitian connection.
/// The frame is parallel (`∇X = ∇Y = ∇T = 0`), so only coefficients move.
pub fn pseudo_hermitian_derivative<V>(field: V, s: f64, step: f64) -> Result<FrameVector>
where
    V: Fn(f64) -> FrameVector,
{
    coefficient_derivative(&field, s, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_law_examples() {
        let p = HPoint::new(0.3, -1.2, 2.0);
        assert_eq!(HPoint::IDENTITY * p, p);
        assert_eq!(HPoint::new(1.0, 0.0, 0.0) * HPoint::new(0.0, 1.0, 0.0), HPoint::new(1.0, 1.0, -1.0));
        assert_eq!(p * p.inverse(), HPoint::IDENTITY);
    }

    #[test]
    fn frame_examples() {
        let f0 = frame_at(HPoint::IDENTITY);
        assert_eq!(f0, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(frame_at(HPoint::new(1.0, 2.0, 5.0))[0], [1.0, 0.0, 2.0]);
    }

    #[test]
    fn j_examples_and_square() {
        assert_eq!(j_op(FrameVector::X), FrameVector::Y);
        assert_eq!(j_op(FrameVector::Y), -FrameVector::X);
        assert_eq!(j_op(FrameVector::T), FrameVector::ZERO);
        let v = FrameVector::new(0.7, -2.5, 0.0);
        assert_eq!(j_op(j_op(v)), -v);
        // J(U) = D_U T
        assert_eq!(levi_civita(v, FrameVector::T), j_op(v));
    }

    #[test]
    fn contact_form_examples() {
        let p = HPoint::new(0.4, -0.9, 3.0);
        let fr = frame_at(p);
        assert_eq!(contact_form(p, fr[0]), 0.0);
        assert_eq!(contact_form(p, fr[1]), 0.0);
        assert_eq!(contact_form(p, fr[2]), 1.0);
        assert_eq!(contact_form(HPoint::new(1.0, 0.0, 0.0), [0.0, 1.0, 0.0]), 1.0);
    }

    #[test]
    fn levi_civita_table() {
        use FrameVector as F;
        assert_eq!(levi_civita(F::X, F::X), F::ZERO);
        assert_eq!(levi_civita(F::Y, F::Y), F::ZERO);
        assert_eq!(levi_civita(F::T, F::T), F::ZERO);
        assert_eq!(levi_civita(F::X, F::Y), -F::T);
        assert_eq!(levi_civita(F::X, F::T), F::Y);
        assert_eq!(levi_civita(F::Y, F::T), -F::X);
        assert_eq!(levi_civita(F::Y, F::X), F::T);
        assert_eq!(levi_civita(F::T, F::X), F::Y);
        assert_eq!(levi_civita(F::T, F::Y), -F::X);
    }

    #[test]
    fn covariant_derivatives_along_x_line() {
        let vel = |_s: f64| FrameVector::X;
        let d = levi_civita_derivative(vel, |_| FrameVector::T, 0.3, DEFAULT_FD_STEP).unwrap();
        assert!(d.max_abs_diff(FrameVector::Y) < 1e-12);
        let d = levi_civita_derivative(vel, |_| FrameVector::X, 0.3, DEFAULT_FD_STEP).unwrap();
        assert!(d.max_abs_diff(FrameVector::ZERO) < 1e-12);
        let (a, b) = (1.5, -0.75);
        let d = levi_civita_derivative(vel, |_| FrameVector::new(a, b, 0.0), 0.0, DEFAULT_FD_STEP).unwrap();
        assert!(d.max_abs_diff(FrameVector::new(0.0, 0.0, -b)) < 1e-12);
        assert!(levi_civita_derivative(vel, |_| FrameVector::X, 0.0, 0.0).is_err());
    }

    #[test]
    fn pseudo_hermitian_parallel_frame() {
        let d = pseudo_hermitian_derivative(|_| FrameVector::new(1.0, 2.0, 3.0), 0.1, 1e-5).unwrap();
        assert!(d.max_abs_diff(FrameVector::ZERO) < 1e-12);
        let d = pseudo_hermitian_derivative(|s| FrameVector::new(s, 0.0, 0.0), 0.7, 1e-5).unwrap();
        assert!(d.max_abs_diff(FrameVector::X) < 1e-10);
        // ∇J = 0: ∇(J V) = J(∇V).
        let v = |s: f64| FrameVector::new(s * s - 1.0, 2.0 * s * s * s, s);
        let lhs = pseudo_hermitian_derivative(|s| j_op(v(s)), 0.4, 1e-5).unwrap();
        let rhs = j_op(pseudo_hermitian_derivative(v, 0.4, 1e-5).unwrap());
        assert!(lhs.max_abs_diff(rhs) < 1e-9);
    }

    #[test]
    fn coordinate_roundtrip() {
        let p = HPoint::new(-0.5, 1.25, 0.3);
        let v = FrameVector::new(0.2, -0.4, 1.1);
        assert!(to_frame(p, to_coords(p, v)).max_abs_diff(v) < 1e-15);
    }
}
