//! Compactly supported test functions used as variation profiles and as the
//! finite basis for the stability search.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::Rect;

/// Scalar function on `ℝ` with compact support and a first derivative.
pub trait TestFunction1D {
    /// `(ψ(s), ψ'(s))`.
    fn eval(&self, s: f64) -> (f64, f64);
    /// Closed interval outside of which `ψ ≡ 0`.
    fn support(&self) -> (f64, f64);
}

/// Scalar function on the `(x, t)` plane with compact support.
pub trait TestFunction2D {
    /// `(f, f_x, f_t)`.
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64);
    fn support(&self) -> Rect;
}

/// `cos^p(π (s − c) / (2r))` on `|s − c| ≤ r`, zero elsewhere.
///
/// For `p = 2` neighbouring bumps spaced `r` apart sum to one (the profile is
/// C¹); `p = 4` gives a C³ profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineBump1D {
    pub center: f64,
    pub radius: f64,
    pub power: u32,
}

impl CosineBump1D {
    pub fn new(center: f64, radius: f64, power: u32) -> Result<Self> {
        if !(radius > 0.0) || power < 2 || !center.is_finite() {
            return Err(Error::InvalidInput("bump needs radius > 0 and power >= 2".into()));
        }
        Ok(Self { center, radius, power })
    }
}

impl TestFunction1D for CosineBump1D {
    fn eval(&self, s: f64) -> (f64, f64) {
        let r = (s - self.center) / self.radius;
        if r.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let th = 0.5 * PI * r;
        let (sn, cs) = (libm::sin(th), libm::cos(th));
        let p = self.power as i32;
        let v = libm::pow(cs, p as f64);
        let dv = -(p as f64) * libm::pow(cs, (p - 1) as f64) * sn * 0.5 * PI / self.radius;
        (v, dv)
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// `χ(s) / (1 + s²)` where `χ = 1` on `[-L, L]` and tapers to zero on
/// `L ≤ |s| ≤ L + w` with a cos² profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedRational {
    pub plateau: f64,
    pub taper: f64,
}

impl TruncatedRational {
    fn cutoff(&self, s: f64) -> (f64, f64) {
        let a = s.abs();
        if a <= self.plateau {
            return (1.0, 0.0);
        }
        if a >= self.plateau + self.taper {
            return (0.0, 0.0);
        }
        let th = 0.5 * PI * (a - self.plateau) / self.taper;
        let v = libm::cos(th) * libm::cos(th);
        let dv = -libm::sin(2.0 * th) * 0.5 * PI / self.taper;
        (v, if s < 0.0 { -dv } else { dv })
    }
}

impl TestFunction1D for TruncatedRational {
    fn eval(&self, s: f64) -> (f64, f64) {
        let (c, dc) = self.cutoff(s);
        let q = 1.0 / (1.0 + s * s);
        (c * q, dc * q - c * 2.0 * s * q * q)
    }

    fn support(&self) -> (f64, f64) {
        let r = self.plateau + self.taper;
        (-r, r)
    }
}

/// Finite linear combination of 1-D bumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BumpSum1D {
    pub terms: Vec<(f64, CosineBump1D)>,
}

impl TestFunction1D for BumpSum1D {
    fn eval(&self, s: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(v, d), (a, b)| {
            let (bv, bd) = b.eval(s);
            (v + a * bv, d + a * bd)
        })
    }

    fn support(&self) -> (f64, f64) {
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, b)| {
            let (l, h) = b.support();
            (lo.min(l), hi.max(h))
        })
    }
}

/// Tensor product `A · φ(x) ψ(t)` of two cosine bumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorBump {
    pub amplitude: f64,
    pub x: CosineBump1D,
    pub t: CosineBump1D,
}

impl TensorBump {
    /// Bump filling the rectangle `[cx ± rx] × [ct ± rt]`.
    pub fn new(cx: f64, ct: f64, rx: f64, rt: f64, power: u32) -> Result<Self> {
        Ok(Self {
            amplitude: 1.0,
            x: CosineBump1D::new(cx, rx, power)?,
            t: CosineBump1D::new(ct, rt, power)?,
        })
    }

    pub fn scaled(mut self, a: f64) -> Self {
        self.amplitude *= a;
        self
    }
}

impl TestFunction2D for TensorBump {
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let (fx, dfx) = self.x.eval(x);
        let (ft, dft) = self.t.eval(t);
        let a = self.amplitude;
        (a * fx * ft, a * dfx * ft, a * fx * dft)
    }

    fn support(&self) -> Rect {
        let (x0, x1) = self.x.support();
        let (t0, t1) = self.t.support();
        Rect { x0, x1, t0, t1 }
    }
}

/// Linear combination of tensor bumps (e.g. an eigenvector of the stability form).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BumpExpansion {
    pub terms: Vec<(f64, TensorBump)>,
}

impl TestFunction2D for BumpExpansion {
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        self.terms.iter().fold((0.0, 0.0, 0.0), |acc, (c, b)| {
            let (v, vx, vt) = b.eval(x, t);
            (acc.0 + c * v, acc.1 + c * vx, acc.2 + c * vt)
        })
    }

    fn support(&self) -> Rect {
        let mut it = self.terms.iter().map(|(_, b)| b.support());
        let first = it.next().unwrap_or(Rect { x0: 0.0, x1: 0.0, t0: 0.0, t1: 0.0 });
        it.fold(first, |a, r| Rect {
            x0: a.x0.min(r.x0),
            x1: a.x1.max(r.x1),
            t0: a.t0.min(r.t0),
            t1: a.t1.max(r.t1),
        })
    }
}

/// Multiplies any test function by a constant.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, F: ?Sized> {
    pub factor: f64,
    pub inner: &'a F,
}

impl<F: TestFunction2D + ?Sized> TestFunction2D for Scaled<'_, F> {
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let (v, vx, vt) = self.inner.eval(x, t);
        (self.factor * v, self.factor * vx, self.factor * vt)
    }

    fn support(&self) -> Rect {
        self.inner.support()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_squared_partition_of_unity() {
        let r = 0.5;
        let bumps: Vec<_> = (0..6).map(|k| CosineBump1D::new(k as f64 * r, r, 2).unwrap()).collect();
        for i in 0..40 {
            let s = 0.5 + i as f64 * 0.05;
            let total: f64 = bumps.iter().map(|b| b.eval(s).0).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = CosineBump1D::new(0.2, 0.7, 4).unwrap();
        let tr = TruncatedRational { plateau: 2.0, taper: 1.5 };
        let h = 1e-6;
        for i in 0..30 {
            let s = -4.0 + i as f64 * 0.27;
            let fd = (b.eval(s + h).0 - b.eval(s - h).0) / (2.0 * h);
            assert!((fd - b.eval(s).1).abs() < 1e-7);
            let fd = (tr.eval(s + h).0 - tr.eval(s - h).0) / (2.0 * h);
            assert!((fd - tr.eval(s).1).abs() < 1e-7);
        }
        let tb = TensorBump::new(0.1, -0.2, 0.5, 0.4, 2).unwrap().scaled(3.0);
        let (x, t) = (0.25, -0.1);
        let (_, fx, ft) = tb.eval(x, t);
        assert!(((tb.eval(x + h, t).0 - tb.eval(x - h, t).0) / (2.0 * h) - fx).abs() < 1e-7);
        assert!(((tb.eval(x, t + h).0 - tb.eval(x, t - h).0) / (2.0 * h) - ft).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CosineBump1D::new(0.0, 0.0, 2).is_err());
        assert!(CosineBump1D::new(0.0, 1.0, 1).is_err());
    }
}
