//! The ODE `y″ − 6y′y + 4y³ = 0` with `y(0) = a`, `y′(0) = b`: its closed-form
//! solution, RK4 integration, first integral and the link with
//! `⟨N,T⟩/|N_h|` along the rulings of a stationary graph.

use alloc::vec::Vec;

use crate::characteristic::integrate_characteristic;
use crate::error::{Error, Result};
use crate::graph::IntrinsicGraph;
use crate::ode::rk4_step;

/// Denominators below this are treated as poles.
pub const POLE_TOLERANCE: f64 = 1e-12;
/// RK4 states above this are treated as blow-up.
pub const BLOW_UP: f64 = 1e9;

/// `y_{a,b}(s) = (a − (2a²−b)s) / (1 − 2as + (2a²−b)s²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodazziSolution {
    pub a: f64,
    pub b: f64,
}

/// Global behaviour of `y_{a,b}` on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalClass {
    Entire,
    /// Smallest-magnitude pole.
    PoleAt(f64),
}

impl CodazziSolution {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    fn c(&self) -> f64 {
        2.0 * self.a * self.a - self.b
    }

    pub fn numerator(&self, s: f64) -> f64 {
        self.a - self.c() * s
    }

    pub fn denominator(&self, s: f64) -> f64 {
        1.0 - 2.0 * self.a * s + self.c() * s * s
    }

    fn checked_den(&self, s: f64) -> Result<f64> {
        let d = self.denominator(s);
        if d.abs() < POLE_TOLERANCE {
            Err(Error::Pole { s })
        } else {
            Ok(d)
        }
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.numerator(s) / self.checked_den(s)?)
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        let d = self.checked_den(s)?;
        let n = self.numerator(s);
        let dd = -2.0 * self.a + 2.0 * self.c() * s;
        Ok((-self.c() * d - n * dd) / (d * d))
    }

    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        let d = self.checked_den(s)?;
        let n = self.numerator(s);
        let dn = -self.c();
        let dd = -2.0 * self.a + 2.0 * self.c() * s;
        let d2d = 2.0 * self.c();
        Ok(-n * d2d / (d * d) - 2.0 * dd * (dn * d - n * dd) / (d * d * d))
    }

    /// `y″ − 6y′y + 4y³` from the closed form.
    pub fn ode_residual(&self, s: f64) -> Result<f64> {
        let y = self.value(s)?;
        Ok(self.second_derivative(s)? - 6.0 * self.derivative(s)? * y + 4.0 * y * y * y)
    }

    /// Real poles, sorted by magnitude.
    pub fn poles(&self) -> Vec<f64> {
        let (a, b, c) = (self.a, self.b, self.c());
        if a * a - b > 0.0 || (a == 0.0 && b == 0.0) || c == 0.0 {
            return Vec::new();
        }
        let disc = libm::sqrt((b - a * a).max(0.0));
        let mut r = alloc::vec![(a - disc) / c, (a + disc) / c];
        r.dedup();
        r.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        r
    }

    pub fn classify(&self) -> GlobalClass {
        match self.poles().first() {
            Some(&s) => GlobalClass::PoleAt(s),
            None => GlobalClass::Entire,
        }
    }

    /// Largest open interval around 0 free of poles.
    pub fn valid_interval(&self) -> (f64, f64) {
        let p = self.poles();
        let lo = p.iter().filter(|&&s| s < 0.0).cloned().fold(f64::NEG_INFINITY, f64::max);
        let hi = p.iter().filter(|&&s| s > 0.0).cloned().fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

pub fn y_closed_form(a: f64, b: f64, s: f64) -> Result<f64> {
    CodazziSolution::new(a, b).value(s)
}

pub fn classify_global(a: f64, b: f64) -> GlobalClass {
    CodazziSolution::new(a, b).classify()
}

/// `|y² − y′ − (a²−b)/(1−2as+(2a²−b)s²)²|` on the closed form.
pub fn first_integral_residual(a: f64, b: f64, s: f64) -> Result<f64> {
    let sol = CodazziSolution::new(a, b);
    let y = sol.value(s)?;
    let d = sol.denominator(s);
    Ok((y * y - sol.derivative(s)? - (a * a - b) / (d * d)).abs())
}

/// RK4 samples of `(y, y′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodazziSamples {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    /// Set when integration stopped short of the range at a pole.
    pub halted_at: Option<f64>,
}

fn rhs(_s: f64, v: &[f64; 2]) -> [f64; 2] {
    [v[1], 6.0 * v[1] * v[0] - 4.0 * v[0] * v[0] * v[0]]
}

type Trajectory = Vec<(f64, [f64; 2])>;

fn run(a: f64, b: f64, end: f64, step: f64, pole: f64) -> Result<(Trajectory, Option<f64>)> {
    let dir = if end >= 0.0 { 1.0 } else { -1.0 };
    let n = libm::ceil(end.abs() / step - 1e-9) as usize;
    let mut state = [a, b];
    let mut s = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let next = if k == n { end } else { dir * step * k as f64 };
        if (pole - next).abs() <= step || (pole - s) * (pole - next) < 0.0 {
            return Ok((out, Some(pole)));
        }
        state = rk4_step(s, state, next - s, &mut rhs);
        if !(state[0].abs() <= BLOW_UP && state[1].abs() <= BLOW_UP) {
            return Err(Error::Pole { s: next });
        }
        s = next;
        out.push((s, state));
    }
    Ok((out, None))
}

/// RK4 solution on `s_range` (containing 0), halting one step before a pole.
pub fn integrate_codazzi(a: f64, b: f64, s_range: (f64, f64), step: f64) -> Result<CodazziSamples> {
    let (lo, hi) = s_range;
    if !(step > 0.0) || !(lo <= 0.0 && hi >= 0.0) {
        return Err(Error::InvalidInput("codazzi range must contain 0 and the step must be positive".into()));
    }
    let (plo, phi) = CodazziSolution::new(a, b).valid_interval();
    let (back, hb) = run(a, b, lo, step, plo)?;
    let (fwd, hf) = run(a, b, hi, step, phi)?;
    let mut out = CodazziSamples { s: Vec::new(), y: Vec::new(), dy: Vec::new(), halted_at: hf.or(hb) };
    for (s, v) in back.into_iter().rev().chain(core::iter::once((0.0, [a, b]))).chain(fwd) {
        out.s.push(s);
        out.y.push(v[0]);
        out.dy.push(v[1]);
    }
    Ok(out)
}

/// Max gap between RK4 and the closed form on the samples.
pub fn rk4_closed_form_gap(a: f64, b: f64, samples: &CodazziSamples) -> Result<f64> {
    let sol = CodazziSolution::new(a, b);
    let mut m = 0.0f64;
    for (s, y) in samples.s.iter().zip(&samples.y) {
        m = m.max((sol.value(*s)? - y).abs());
    }
    Ok(m)
}

/// Integrates the dilated data `(a/λ, b/λ²)` and returns the max gap to
/// `λ⁻¹ y_{a,b}(s/λ)`.
pub fn dilation_residual(a: f64, b: f64, lambda: f64, s_range: (f64, f64), step: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput("dilation factor must be positive".into()));
    }
    let sol = CodazziSolution::new(a, b);
    let dilated = integrate_codazzi(a / lambda, b / (lambda * lambda), s_range, step)?;
    let mut m = 0.0f64;
    for (s, y) in dilated.s.iter().zip(&dilated.y) {
        m = m.max((sol.value(s / lambda)? / lambda - y).abs());
    }
    Ok(m)
}

/// Settings for [`codazzi_residual_on_surface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCodazziOptions {
    pub base_x: f64,
    pub s_range: (f64, f64),
    pub step: f64,
    /// ε offset for the central differences `a′(ε)`, `b′(ε)`.
    pub eps_step: f64,
    pub stationarity_tolerance: f64,
}

impl Default for SurfaceCodazziOptions {
    fn default() -> Self {
        Self { base_x: 0.0, s_range: (-1.0, 1.0), step: 1e-4, eps_step: 1e-4, stationarity_tolerance: 1e-6 }
    }
}

/// `y = ⟨N,T⟩/|N_h|` along one ruling, checked against the ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCodazzi {
    pub eps: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    /// `√(1 + b(ε)²)`, the arc-length factor of the ruling.
    pub speed: f64,
    /// Max `|y″ − 6y′y + 4y³|` by finite differences on the arc-length samples.
    pub ode_residual: f64,
    /// `|y(0) − a′/(2√(1+b²))|`.
    pub y0_gap: f64,
    /// `|y′(0) − (a′²/2 − b′)/(1+b²)|`.
    pub dy0_gap: f64,
    /// Max gap to the closed form with those initial data.
    pub closed_form_gap: f64,
    /// Arc-length samples `s̄` and `y(s̄)`.
    pub arclength: Vec<f64>,
    pub y: Vec<f64>,
}

/// Samples `y = ⟨N,T⟩/|N_h|` along the ruling through `(base_x, ε)`, oriented
/// along `Z` and parametrised by arc length `s̄ = √(1+b²)·(base_x − x)`.
///
/// With that orientation `y(0) = a′/(2√(1+b²))` and
/// `y′(0) = (a′²/2 − b′)/(1+b²)`; at `b(ε) = 0` these are `a′/2` and `a′²/2 − b′`.
pub fn codazzi_residual_on_surface<G: IntrinsicGraph + ?Sized>(
    g: &G,
    eps: f64,
    opts: &SurfaceCodazziOptions,
) -> Result<SurfaceCodazzi> {
    let curve = integrate_characteristic(g, opts.base_x, eps, opts.s_range, opts.step)?;
    let osc = curve.p_oscillation();
    if osc > opts.stationarity_tolerance {
        return Err(Error::NonStationary { residual: osc, tolerance: opts.stationarity_tolerance });
    }
    let d = g.domain();
    let (ep, em) = (eps + opts.eps_step, eps - opts.eps_step);
    if !d.contains(opts.base_x, ep) || !d.contains(opts.base_x, em) {
        return Err(Error::OutOfDomain { x: opts.base_x, t: if d.contains(opts.base_x, ep) { em } else { ep } });
    }
    let ruling = |e: f64| -> Result<(f64, f64)> {
        let j = g.jet(opts.base_x, e)?;
        Ok((2.0 * j.u, j.ux + 2.0 * j.u * j.ut))
    };
    let ((ap, bp), (am, bm)) = (ruling(ep)?, ruling(em)?);
    let a_prime = (ap - am) / (2.0 * opts.eps_step);
    let b_prime = (bp - bm) / (2.0 * opts.eps_step);
    let b = ruling(eps)?.1;
    let speed = libm::hypot(1.0, b);

    let n = curve.len();
    let mut arclength = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let j = g.jet(opts.base_x + curve.s[i], curve.t[i])?;
        let w = libm::hypot(1.0, j.ux + 2.0 * j.u * j.ut);
        arclength.push(-curve.s[i] * speed);
        y.push(j.ut / w);
    }
    let h = opts.step * speed;
    let mut ode_residual = 0.0f64;
    for i in 1..n.saturating_sub(1) {
        if (arclength[i + 1] - arclength[i] - h).abs() > 1e-9 * h || (arclength[i] - arclength[i - 1] - h).abs() > 1e-9 * h {
            continue;
        }
        let d1 = (y[i + 1] - y[i - 1]) / (2.0 * h);
        let d2 = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        ode_residual = ode_residual.max((d2 - 6.0 * d1 * y[i] + 4.0 * y[i] * y[i] * y[i]).abs());
    }
    let o = arclength.iter().position(|&s| s == 0.0).unwrap_or(0);
    let dy0 = if o > 0 && o + 1 < n {
        (y[o + 1] - y[o - 1]) / (arclength[o + 1] - arclength[o - 1])
    } else if o + 1 < n {
        (y[o + 1] - y[o]) / (arclength[o + 1] - arclength[o])
    } else if o > 0 {
        (y[o] - y[o - 1]) / (arclength[o] - arclength[o - 1])
    } else {
        return Err(Error::InvalidInput("ruling too short for a derivative".into()));
    };
    let ya = 0.5 * a_prime / speed;
    let yb = (0.5 * a_prime * a_prime - b_prime) / (speed * speed);
    let sol = CodazziSolution::new(ya, yb);
    let mut closed_form_gap = 0.0f64;
    for (s, v) in arclength.iter().zip(&y) {
        if let Ok(c) = sol.value(*s) {
            closed_form_gap = closed_form_gap.max((c - v).abs());
        }
    }
    Ok(SurfaceCodazzi {
        eps,
        a_prime,
        b_prime,
        speed,
        ode_residual,
        y0_gap: (y[o] - ya).abs(),
        dy0_gap: (dy0 - yb).abs(),
        closed_form_gap,
        arclength,
        y,
    })
}
