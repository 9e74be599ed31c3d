//! Composite Gauss–Legendre rules on intervals and axis-aligned rectangles.
//!
//! Every integral in the crate goes through [`Rule1D`] or [`Rect::integrate`];
//! summation order is fixed (cells row-major, nodes in ascending order) so
//! repeated evaluations are bit-identical.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("quadrature order must be positive".into()));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite rule: `cells` equal sub-intervals, each with a Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn composite(a: f64, b: f64, cells: usize, gl: &GaussLegendre) -> Result<Self> {
        if cells == 0 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput("degenerate quadrature interval".into()));
        }
        let h = (b - a) / cells as f64;
        let mut points = Vec::with_capacity(cells * gl.order());
        let mut weights = Vec::with_capacity(cells * gl.order());
        for c in 0..cells {
            let lo = a + c as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in gl.nodes().iter().zip(gl.weights()) {
                points.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Same as [`Rule1D::integrate`] but propagates the first error.
    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// Tensor-product quadrature settings: `cells` per axis, `order` nodes per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub cells_x: usize,
    pub cells_t: usize,
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { cells_x: 8, cells_t: 8, order: 16 }
    }
}

impl QuadratureSpec {
    pub fn new(cells_x: usize, cells_t: usize, order: usize) -> Self {
        Self { cells_x, cells_t, order }
    }
}

/// Closed rectangle `[x0, x1] × [t0, t1]` in the `(x, t)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, t0: f64, t1: f64) -> Result<Self> {
        let r = Self { x0, x1, t0, t1 };
        if !(x1 > x0 && t1 > t0) || ![x0, x1, t0, t1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("degenerate domain rectangle".into()));
        }
        Ok(r)
    }

    /// Square `[-l, l]²`.
    pub fn symmetric(l: f64) -> Result<Self> {
        Self::new(-l, l, -l, l)
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        x >= self.x0 && x <= self.x1 && t >= self.t0 && t <= self.t1
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        Rect::new(
            self.x0.max(other.x0),
            self.x1.min(other.x1),
            self.t0.max(other.t0),
            self.t1.min(other.t1),
        )
        .ok()
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.t1 - self.t0)
    }

    /// Tensor-product nodes `(x, t, weight)` in deterministic order.
    pub fn nodes(&self, spec: &QuadratureSpec) -> Result<Vec<(f64, f64, f64)>> {
        let gl = GaussLegendre::new(spec.order)?;
        let rx = Rule1D::composite(self.x0, self.x1, spec.cells_x, &gl)?;
        let rt = Rule1D::composite(self.t0, self.t1, spec.cells_t, &gl)?;
        let mut out = Vec::with_capacity(rx.points.len() * rt.points.len());
        for (&x, &wx) in rx.points.iter().zip(&rx.weights) {
            for (&t, &wt) in rt.points.iter().zip(&rt.weights) {
                out.push((x, t, wx * wt));
            }
        }
        Ok(out)
    }

    pub fn integrate<F>(&self, spec: &QuadratureSpec, mut f: F) -> Result<f64>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (x, t, w) in self.nodes(spec)? {
            let v = f(x, t)?;
            if !v.is_finite() {
                return Err(Error::Numerical(alloc::format!(
                    "non-finite integrand at ({x}, {t})"
                )));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights_are_symmetric() {
        let gl = GaussLegendre::new(7).unwrap();
        let s: f64 = gl.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        for i in 0..7 {
            assert!((gl.nodes()[i] + gl.nodes()[6 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(5).unwrap();
        let r = Rule1D::composite(-1.0, 2.0, 1, &gl).unwrap();
        // ∫_{-1}^{2} x^9 dx = (2^10 - 1)/10
        let v = r.integrate(|x| x.powi(9));
        assert!((v - 102.3).abs() < 1e-11);
    }

    #[test]
    fn sixteen_point_rule_integrates_gaussian_bump() {
        let gl = GaussLegendre::new(16).unwrap();
        let r = Rule1D::composite(-8.0, 8.0, 8, &gl).unwrap();
        let v = r.integrate(|x| libm::exp(-x * x));
        assert!((v - libm::sqrt(PI)).abs() < 1e-13);
    }

    #[test]
    fn rectangle_area_and_zero_order() {
        let r = Rect::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let a = r.integrate(&QuadratureSpec::new(2, 3, 4), |_, _| Ok(1.0)).unwrap();
        assert!((a - 4.0).abs() < 1e-14);
        assert!(GaussLegendre::new(0).is_err());
        assert!(Rect::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
