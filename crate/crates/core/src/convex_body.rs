//! Planar convex bodies described by their support function.
//!
//! A body `K` with `0 ∈ int K` is stored as `h(θ) = max_{k∈K} ⟨k, (cos θ, sin θ)⟩`.
//! Everything the sub-Finsler structure needs is a short functional of `h`:
//!
//! * dual norm `‖v‖_{K,*} = |v| h(arg v)`,
//! * inverse Gauss map `π_K(v) = h u + h' u⊥` with `u = (cos θ, sin θ)`,
//! * boundary curvature `κ = 1 / (h + h'')` at `π_K(v)`,
//! * gauge norm `‖v‖_K = max_θ ⟨v, u(θ)⟩ / h(θ)` (polar duality).
//!
//! Bodies need not be centrally symmetric, so neither norm is even.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Minimum of `h + h''` accepted as strictly positive curvature radius.
pub const C2_PLUS_TOLERANCE: f64 = 1e-8;

/// Default number of samples for tabulated support functions.
pub const DEFAULT_SAMPLES: usize = 2048;

/// Vector of `ℝ²`, identified with `span{X, Y}` at a point of `ℍ¹`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlaneVector {
    pub x: f64,
    pub y: f64,
}

impl PlaneVector {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Angle in `(-π, π]`.
    pub fn arg(self) -> f64 {
        libm::atan2(self.y, self.x)
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

impl Add for PlaneVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for PlaneVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<PlaneVector> for f64 {
    type Output = PlaneVector;
    fn mul(self, v: PlaneVector) -> PlaneVector {
        PlaneVector::new(self * v.x, self * v.y)
    }
}

impl Neg for PlaneVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Support value and its first two angular derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportJet {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
}

/// Periodic trigonometric interpolant of a uniformly sampled support function.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSupport {
    samples: Vec<f64>,
    mean: f64,
    /// `(k, a_k, b_k)` for the retained modes.
    modes: Vec<(f64, f64, f64)>,
}

impl SampledSupport {
    /// `samples[j] = h(2πj/N)`. Fourier modes whose amplitude is below
    /// `1e-15 · max|h|` are dropped.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 8 {
            return Err(Error::InvalidBody(
                "support table needs at least 8 samples".into(),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBody("non-finite support sample".into()));
        }
        let nf = n as f64;
        let cos_table: Vec<f64> = (0..n).map(|j| libm::cos(2.0 * PI * j as f64 / nf)).collect();
        let sin_table: Vec<f64> = (0..n).map(|j| libm::sin(2.0 * PI * j as f64 / nf)).collect();
        let mean = samples.iter().sum::<f64>() / nf;
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut modes = Vec::new();
        let half = n / 2;
        for k in 1..=half {
            let mut a = 0.0;
            let mut b = 0.0;
            for (j, &hj) in samples.iter().enumerate() {
                let idx = (j * k) % n;
                a += hj * cos_table[idx];
                b += hj * sin_table[idx];
            }
            let (a, b) = if n.is_multiple_of(2) && k == half {
                (a / nf, 0.0)
            } else {
                (2.0 * a / nf, 2.0 * b / nf)
            };
            if a.abs() + b.abs() > 1e-15 * scale {
                modes.push((k as f64, a, b));
            }
        }
        Ok(Self { samples, mean, modes })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn retained_modes(&self) -> usize {
        self.modes.len()
    }

    fn jet(&self, theta: f64) -> SupportJet {
        let mut h = self.mean;
        let mut dh = 0.0;
        let mut d2h = 0.0;
        for &(k, a, b) in &self.modes {
            let (s, c) = (libm::sin(k * theta), libm::cos(k * theta));
            h += a * c + b * s;
            dh += k * (b * c - a * s);
            d2h -= k * k * (a * c + b * s);
        }
        SupportJet { h, dh, d2h }
    }
}

/// Backing representation of `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportFunction {
    Disk { r: f64 },
    /// Axis-aligned ellipse centred at the origin with semi-axes `a` (x) and `b` (y).
    Ellipse { a: f64, b: f64 },
    Sampled(SampledSupport),
}

impl SupportFunction {
    pub fn jet(&self, theta: f64) -> SupportJet {
        match self {
            SupportFunction::Disk { r } => SupportJet { h: *r, dh: 0.0, d2h: 0.0 },
            SupportFunction::Ellipse { a, b } => {
                let (s, c) = (libm::sin(theta), libm::cos(theta));
                let g = a * a * c * c + b * b * s * s;
                let h = libm::sqrt(g);
                let dg = (b * b - a * a) * libm::sin(2.0 * theta);
                let d2g = 2.0 * (b * b - a * a) * libm::cos(2.0 * theta);
                let dh = dg / (2.0 * h);
                let d2h = d2g / (2.0 * h) - dg * dg / (4.0 * h * h * h);
                SupportJet { h, dh, d2h }
            }
            SupportFunction::Sampled(s) => s.jet(theta),
        }
    }
}

/// Result of [`ConvexBody2D::validate_c2_plus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C2PlusCheck {
    pub ok: bool,
    /// Minimum of `h + h''` over the test grid.
    pub margin: f64,
}

/// Convex body `K ⊂ ℝ²` with `0 ∈ int K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody2D {
    name: String,
    support: SupportFunction,
    c2_margin: f64,
}

impl ConvexBody2D {
    /// Validates `h > 0` everywhere on a fine grid; the C²₊ margin is recorded
    /// but not enforced here so that non-smooth bodies can still be inspected.
    pub fn new(name: impl Into<String>, support: SupportFunction) -> Result<Self> {
        match &support {
            SupportFunction::Disk { r } if !(*r > 0.0 && r.is_finite()) => {
                return Err(Error::InvalidBody("disk radius must be positive".into()))
            }
            SupportFunction::Ellipse { a, b }
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) =>
            {
                return Err(Error::InvalidBody("ellipse semi-axes must be positive".into()))
            }
            _ => {}
        }
        let n = grid_size(&support);
        let mut min_h = f64::INFINITY;
        let mut margin = f64::INFINITY;
        for i in 0..n {
            let j = support.jet(2.0 * PI * i as f64 / n as f64);
            min_h = min_h.min(j.h);
            margin = margin.min(j.h + j.d2h);
        }
        if !(min_h > 0.0) {
            return Err(Error::InvalidBody(alloc::format!(
                "support function must be positive (min h = {min_h:e}); 0 is not interior"
            )));
        }
        Ok(Self { name: name.into(), support, c2_margin: margin })
    }

    pub fn disk(r: f64) -> Result<Self> {
        Self::new("disk", SupportFunction::Disk { r })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new("ellipse", SupportFunction::Ellipse { a, b })
    }

    /// Uniformly sampled support table over `[0, 2π)`.
    pub fn sampled(name: impl Into<String>, samples: Vec<f64>) -> Result<Self> {
        Self::new(name, SupportFunction::Sampled(SampledSupport::new(samples)?))
    }

    /// Tabulates `h` at [`DEFAULT_SAMPLES`] angles.
    pub fn sample_from<F: Fn(f64) -> f64>(name: impl Into<String>, h: F) -> Result<Self> {
        Self::sample_from_n(name, DEFAULT_SAMPLES, h)
    }

    pub fn sample_from_n<F: Fn(f64) -> f64>(
        name: impl Into<String>,
        n: usize,
        h: F,
    ) -> Result<Self> {
        let samples = (0..n).map(|j| h(2.0 * PI * j as f64 / n as f64)).collect();
        Self::sampled(name, samples)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> &SupportFunction {
        &self.support
    }

    pub fn support_jet(&self, theta: f64) -> SupportJet {
        self.support.jet(theta)
    }

    /// `true` iff `min (h + h'')` over the grid exceeds [`C2_PLUS_TOLERANCE`].
    pub fn validate_c2_plus(&self) -> C2PlusCheck {
        C2PlusCheck { ok: self.c2_margin > C2_PLUS_TOLERANCE, margin: self.c2_margin }
    }

    fn require_c2_plus(&self) -> Result<()> {
        if self.c2_margin > C2_PLUS_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotC2Plus { margin: self.c2_margin })
        }
    }

    /// Support function of `K` evaluated at `v`: `sup_{k∈K} ⟨v, k⟩`.
    pub fn dual_norm(&self, v: PlaneVector) -> f64 {
        if v.is_zero() {
            return 0.0;
        }
        v.norm() * self.support.jet(v.arg()).h
    }

    /// Minkowski functional `inf{λ > 0 : v ∈ λK}`.
    pub fn gauge_norm(&self, v: PlaneVector) -> f64 {
        if v.is_zero() {
            return 0.0;
        }
        match &self.support {
            SupportFunction::Disk { r } => v.norm() / r,
            SupportFunction::Ellipse { a, b } => libm::hypot(v.x / a, v.y / b),
            SupportFunction::Sampled(_) => self.gauge_by_polarity(v),
        }
    }

    fn gauge_by_polarity(&self, v: PlaneVector) -> f64 {
        let ratio = |th: f64| v.dot(PlaneVector::from_angle(th)) / self.support.jet(th).h;
        let n = 720;
        let step = 2.0 * PI / n as f64;
        let (mut best, mut best_th) = (f64::NEG_INFINITY, 0.0);
        for i in 0..n {
            let th = i as f64 * step;
            let r = ratio(th);
            if r > best {
                best = r;
                best_th = th;
            }
        }
        // Golden-section refinement inside the bracketing cell pair.
        let (mut lo, mut hi) = (best_th - step, best_th + step);
        let g = 0.5 * (libm::sqrt(5.0) - 1.0);
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        let (mut fc, mut fd) = (ratio(c), ratio(d));
        for _ in 0..120 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = ratio(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = ratio(d);
            }
        }
        best.max(fc).max(fd)
    }

    /// Inverse outer Gauss map: the boundary point whose outer normal is `v/|v|`.
    pub fn pi_k(&self, v: PlaneVector) -> Result<PlaneVector> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        self.require_c2_plus()?;
        Ok(self.boundary_point(v.arg()))
    }

    /// `h(θ) u(θ) + h'(θ) u⊥(θ)`, the support point in direction `θ`.
    pub fn boundary_point(&self, theta: f64) -> PlaneVector {
        let j = self.support.jet(theta);
        let u = PlaneVector::from_angle(theta);
        j.h * u + j.dh * u.perp()
    }

    /// Curvature of `∂K` at `π_K(v)`.
    pub fn boundary_curvature(&self, v: PlaneVector) -> Result<f64> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        self.require_c2_plus()?;
        let j = self.support.jet(v.arg());
        let radius = j.h + j.d2h;
        if radius <= 0.0 {
            return Err(Error::NotC2Plus { margin: radius });
        }
        Ok(1.0 / radius)
    }
}

fn grid_size(s: &SupportFunction) -> usize {
    match s {
        SupportFunction::Sampled(t) => (4 * t.samples().len()).max(4096),
        _ => 4096,
    }
}

impl core::fmt::Display for ConvexBody2D {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.name)
    }
}
