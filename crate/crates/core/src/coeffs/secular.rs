//! Time integrals built on top of the coefficient series: the cumulative
//! damping `Γ(τ) = 2∫₀^τ γ`, and the memory integrals
//!
//! ```text
//! Δ_Γ(τ)  = e^{-Γ(τ)} ∫₀^τ e^{Γ(s)} Δ(s) ds
//! Δ_co(τ) = e^{-Γ(τ)} ∫₀^τ e^{Γ(s)} Δ(s) cos 2ω₀(τ-s) ds     (Δ_si: sin)
//! Π_co(τ) = e^{-Γ(τ)} ∫₀^τ e^{Γ(s)} Π(s) cos 2ω₀(τ-s) ds     (Π_si: sin)
//! ```
//!
//! The memory integrals are advanced interval by interval with the
//! recursion `Z(τ+h) = e^{Γ(τ)-Γ(τ+h)} e^{iωh} Z(τ) + ∫_τ^{τ+h} ...` and a
//! Filon rule on each interval: the smooth factor is replaced by its
//! cubic interpolant and integrated exactly against `e^{iωu}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CoefficientSet;
use crate::error::{Error, Result};
use crate::spectral::ReservoirSpec;

/// Samples per period of the `2ω₀` kernel the grid must provide.
pub const SAMPLES_PER_PERIOD: f64 = 20.0;

/// How the `e^{±Γ}` weights of the memory integrals are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// Keep the exponential weights.
    #[default]
    Exact,
    /// Drop them, keeping only the leading order in the coupling.
    WeakCouplingLeading,
}

/// Interpolation points used for the interval `[t[i], t[i+1]]`: centred
/// where possible, shifted inwards at the ends.
fn stencil(n: usize, i: usize) -> [usize; 4] {
    let s = i.saturating_sub(1).min(n - 4);
    [s, s + 1, s + 2, s + 3]
}

/// Monomial coefficients `c0 + c1 u + c2 u² + c3 u³` of the cubic through
/// four points.
fn cubic_coeffs<T>(us: [f64; 4], ys: [T; 4]) -> [T; 4]
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    // Newton divided differences.
    let dd = |a: T, b: T, ua: f64, ub: f64| (b - a) * (1.0 / (ub - ua));
    let d01 = dd(ys[0], ys[1], us[0], us[1]);
    let d12 = dd(ys[1], ys[2], us[1], us[2]);
    let d23 = dd(ys[2], ys[3], us[2], us[3]);
    let d012 = dd(d01, d12, us[0], us[2]);
    let d123 = dd(d12, d23, us[1], us[3]);
    let d0123 = dd(d012, d123, us[0], us[3]);
    // Expand y0 + d01 (u-u0) + d012 (u-u0)(u-u1) + d0123 (u-u0)(u-u1)(u-u2).
    let (a, b, c) = (us[0], us[1], us[2]);
    let c3 = d0123;
    let c2 = d012 - d0123 * (a + b + c);
    let c1 = d01 - d012 * (a + b) + d0123 * (a * b + a * c + b * c);
    let c0 = ys[0] - d01 * a + d012 * (a * b) - d0123 * (a * b * c);
    [c0, c1, c2, c3]
}

fn check_len(grid: &[f64], f: &[f64]) -> Result<()> {
    let n = grid.len();
    if n < 4 {
        return Err(Error::Grid(format!("need at least 4 grid points, got {n}")));
    }
    if f.len() != n {
        return Err(Error::Grid("series length differs from grid length".into()));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::Grid(format!(
                "grid not strictly ascending at index {i}"
            )));
        }
    }
    Ok(())
}

/// Cumulative integral of `f` on a grid by piecewise cubic interpolation,
/// fourth-order accurate on smooth data. Needs at least four points.
pub fn cumulative_integral(grid: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, f)?;
    let n = grid.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        let s = stencil(n, i);
        let c = cubic_coeffs(s.map(|j| grid[j] - grid[i]), s.map(|j| f[j]));
        let piece = h * (c[0] + h * (c[1] / 2.0 + h * (c[2] / 3.0 + h * c[3] / 4.0)));
        out[i + 1] = out[i] + piece;
    }
    Ok(out)
}

/// Fill `big_gamma` with `Γ(τ) = 2∫₀^τ γ`.
pub fn integrate_big_gamma(mut set: CoefficientSet) -> Result<CoefficientSet> {
    let two_gamma: Vec<f64> = set.gamma_c.iter().map(|g| 2.0 * g).collect();
    set.big_gamma = cumulative_integral(&set.tau_grid, &two_gamma)?;
    Ok(set)
}

/// `M_n = ∫₀^h u^n e^{iωu} du` for `n = 0..=3`.
fn moments(omega: f64, h: f64) -> [Complex64; 4] {
    let wh = omega * h;
    if wh.abs() < 1.0 {
        // Σ_m (iωh)^m h^{n+1} / (m! (n+m+1))
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (n, o) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(h.powi(n as i32 + 1), 0.0);
            for m in 0..40 {
                let add = term / (n + m + 1) as f64;
                *o += add;
                if add.norm() < 1e-18 * o.norm() {
                    break;
                }
                term = term * Complex64::new(0.0, wh) / (m + 1) as f64;
            }
        }
        return out;
    }
    let iw = Complex64::new(0.0, omega);
    let e = Complex64::from_polar(1.0, wh);
    let m0 = (e - 1.0) / iw;
    let m1 = (e * h - m0) / iw;
    let m2 = (e * (h * h) - m1 * 2.0) / iw;
    let m3 = (e * (h * h * h) - m2 * 3.0) / iw;
    [m0, m1, m2, m3]
}

/// `Z(τ_j) = e^{-Γ(τ_j)} ∫₀^{τ_j} e^{Γ(s)} f(s) e^{iω(τ_j - s)} ds` on
/// every grid point.
pub fn memory_integral(
    grid: &[f64],
    f: &[f64],
    big_gamma: &[f64],
    omega: f64,
) -> Result<Vec<Complex64>> {
    check_len(grid, f)?;
    if big_gamma.len() != grid.len() {
        return Err(Error::Grid(
            "damping length differs from grid length".into(),
        ));
    }
    let n = grid.len();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n - 1 {
        let t1 = grid[i + 1];
        let h = t1 - grid[i];
        let g1 = big_gamma[i + 1];
        let s = stencil(n, i);
        // Smooth factor in the local variable u = τ_{i+1} - s.
        let us = s.map(|j| t1 - grid[j]);
        let ys = s.map(|j| Complex64::new((big_gamma[j] - g1).exp() * f[j], 0.0));
        let c = cubic_coeffs(us, ys);
        let m = moments(omega, h);
        let local = c[0] * m[0] + c[1] * m[1] + c[2] * m[2] + c[3] * m[3];
        let carry = (big_gamma[i] - g1).exp() * Complex64::from_polar(1.0, omega * h);
        z[i + 1] = carry * z[i] + local;
    }
    Ok(z)
}

/// Fill `delta_gamma`, `delta_co`, `delta_si`, `pi_co`, `pi_si`.
pub fn secular_integrals(
    mut set: CoefficientSet,
    spec: &ReservoirSpec,
    truncation: Truncation,
) -> Result<CoefficientSet> {
    let n = set.tau_grid.len();
    let omega = 2.0 * spec.omega0();
    let limit = std::f64::consts::PI * spec.x / SAMPLES_PER_PERIOD;
    for w in set.tau_grid.windows(2) {
        let h = w[1] - w[0];
        if h > limit * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "grid step {h} exceeds {limit} (20 samples per 2ω₀ period at x = {})",
                spec.x
            )));
        }
    }
    let zero = vec![0.0; n];
    let weights: &[f64] = match truncation {
        Truncation::Exact => &set.big_gamma,
        Truncation::WeakCouplingLeading => &zero,
    };
    let dg = memory_integral(&set.tau_grid, &set.delta, weights, 0.0)?;
    let zd = memory_integral(&set.tau_grid, &set.delta, weights, omega)?;
    let zp = memory_integral(&set.tau_grid, &set.pi_c, weights, omega)?;
    set.delta_gamma = dg.iter().map(|v| v.re).collect();
    set.delta_co = zd.iter().map(|v| v.re).collect();
    set.delta_si = zd.iter().map(|v| v.im).collect();
    set.pi_co = zp.iter().map(|v| v.re).collect();
    set.pi_si = zp.iter().map(|v| v.im).collect();
    set.truncation = truncation;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn cumulative_is_exact_for_cubics() {
        let g = grid(11, 0.3);
        let f: Vec<f64> = g
            .iter()
            .map(|t| 1.0 + 2.0 * t - 3.0 * t * t + 4.0 * t * t * t)
            .collect();
        let c = cumulative_integral(&g, &f).unwrap();
        for (t, v) in g.iter().zip(&c) {
            let exact = t + t * t - t * t * t + t.powi(4);
            assert!((v - exact).abs() < 1e-12);
        }
        assert!(cumulative_integral(&g[..3], &f[..3]).is_err());
    }

    #[test]
    fn moments_switch_continuously() {
        for &(w, h) in &[(1.0, 0.999), (1.0, 1.001), (20.0, 0.05), (3.0, 0.2)] {
            let m = moments(w, h);
            for (n, mn) in m.iter().enumerate() {
                // reference by fine trapezoid
                let steps = 20000;
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=steps {
                    let u = h * j as f64 / steps as f64;
                    let wgt = if j == 0 || j == steps { 0.5 } else { 1.0 };
                    acc += Complex64::from_polar(1.0, w * u) * u.powi(n as i32) * wgt;
                }
                acc *= h / steps as f64;
                assert!((acc - mn).norm() < 1e-8, "w={w} h={h} n={n}");
            }
        }
    }

    #[test]
    fn memory_integral_constant_source() {
        // f = 1, Γ = 0: Z = (e^{iωτ} - 1)/(iω)
        let g = grid(401, 0.01);
        let f = vec![1.0; g.len()];
        let z = memory_integral(&g, &f, &vec![0.0; g.len()], 5.0).unwrap();
        for (t, v) in g.iter().zip(&z) {
            let exact = (Complex64::from_polar(1.0, 5.0 * t) - 1.0) / Complex64::new(0.0, 5.0);
            assert!((v - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn memory_integral_with_damping() {
        // f = 1, Γ = c·τ, ω = 0: Z = (1 - e^{-cτ})/c
        let c = 0.7;
        let max_err = |h: f64| {
            let g = grid((4.0 / h).round() as usize + 1, h);
            let gam: Vec<f64> = g.iter().map(|t| c * t).collect();
            let z = memory_integral(&g, &vec![1.0; g.len()], &gam, 0.0).unwrap();
            g.iter()
                .zip(&z)
                .map(|(t, v)| (v.re - (1.0 - (-c * t).exp()) / c).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (max_err(0.02), max_err(0.01));
        assert!(e1 < 1e-9, "{e1}");
        let order = (e1 / e2).log2();
        assert!(order > 3.8, "observed order {order}");
    }
}
