//! Fixed-step classic Runge–Kutta for small autonomous-in-form systems.

/// One RK4 step of `y' = f(s, y)` for an `N`-dimensional state.
pub fn rk4_step<const N: usize, F>(s: f64, y: [f64; N], h: f64, f: &mut F) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(s, &y);
    let k2 = f(s + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
    let k3 = f(s + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
    let k4 = f(s + h, &axpy(&y, h, &k3));
    let mut out = y;
    for i in 0..N {
        out[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut y = [1.0];
        let h = 0.01;
        let mut s = 0.0;
        for _ in 0..100 {
            y = rk4_step(s, y, h, &mut |_, y: &[f64; 1]| [y[0]]);
            s += h;
        }
        assert!((y[0] - core::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let mut y = [1.0, 0.0];
        for i in 0..1000 {
            y = rk4_step(i as f64 * 1e-3, y, 1e-3, &mut |_, y: &[f64; 2]| [y[1], -y[0]]);
        }
        assert!((y[0] - libm::cos(1.0)).abs() < 1e-12);
        assert!((y[1] + libm::sin(1.0)).abs() < 1e-12);
    }
}
