//! Independent evaluation of the coefficients by nested adaptive quadrature
//! of their defining double integrals
//!
//! ```text
//! Δ(τ) = α² ∫₀^τ ds ∫₀^∞ dω J(ω) [2N(ω)+1] cos(ωs) cos(ω₀s)
//! Π(τ) = α² ∫₀^τ ds ∫₀^∞ dω J(ω) [2N(ω)+1] cos(ωs) sin(ω₀s)
//! γ(τ) = α² ∫₀^τ ds ∫₀^∞ dω J(ω) sin(ωs) sin(ω₀s)
//! r(τ) = α² ∫₀^τ ds ∫₀^∞ dω J(ω) sin(ωs) cos(ω₀s)
//! ```
//!
//! No closed-form frequency transform is used, so this path shares nothing
//! with the closed forms beyond the spectral density itself.

use std::cell::RefCell;

use num_complex::Complex64;

use super::Which;
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance, Vector};
use crate::spectral::{ReservoirSpec, Temperature};

/// Frequencies below this value are integrated in `v = √ω` to remove the
/// algebraic endpoint behaviour of the sub-Ohmic density.
const SQRT_SPLIT: f64 = 1.0;

/// Options for the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Tolerance of the outer (time) integral.
    pub outer: Tolerance,
    /// Tolerance of the inner (frequency) integral.
    pub inner: Tolerance,
    /// Experimental: replace the family exponent by an arbitrary `s > 0`.
    pub exponent: Option<f64>,
    /// Use the full Bose-Einstein factor `coth(ω/2θ)` instead of the
    /// high-temperature limit `2θ/ω`.
    pub bose_einstein: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            outer: Tolerance {
                abs: 1e-12,
                rel: 1e-10,
                max_intervals: 2000,
            },
            inner: Tolerance {
                abs: 1e-14,
                rel: 1e-12,
                max_intervals: 4000,
            },
            exponent: None,
            bose_einstein: false,
        }
    }
}

/// Upper frequency cut of the inner integral.
pub fn omega_max(x: f64) -> f64 {
    50.0_f64.max(50.0 / x)
}

/// Frequency kernels at time lag `s`: the thermal cosine transform
/// `∫J(2N+1)cos(ωs)` and the sine transform `∫J sin(ωs)`.
fn kernels(spec: &ReservoirSpec, opts: &OracleOptions, s: f64) -> Result<(f64, f64)> {
    let p = opts.exponent.unwrap_or_else(|| spec.family.exponent());
    let wmax = omega_max(spec.x);
    let temp = spec.temp;
    let be = opts.bose_einstein;
    // J(ω)·[2N+1] and J(ω), with the 2θ/ω factor folded into the power.
    let weights = move |w: f64| -> (f64, f64) {
        let j = w.powf(p) * (-w).exp();
        let thermal = match temp {
            Temperature::Zero => j,
            Temperature::High { theta } if be => j / (w / (2.0 * theta)).tanh(),
            Temperature::High { theta } => 2.0 * theta * w.powf(p - 1.0) * (-w).exp(),
        };
        (thermal, j)
    };
    let body = move |w: f64| {
        let (th, j) = weights(w);
        let (sn, cs) = (w * s).sin_cos();
        Complex64::new(th * cs, j * sn)
    };
    // ω = v² on [0, 1]
    let low = integrate(
        |v: f64| body(v * v) * (2.0 * v),
        0.0,
        SQRT_SPLIT.sqrt(),
        opts.inner,
    )?;
    let high = integrate(body, SQRT_SPLIT, wmax, opts.inner)?;
    let total = low.value + high.value;
    Ok((total.re, total.im))
}

/// Integrand of the outer integral: `[Δ, Π, γ, r]` densities at lag `s`,
/// without the `α²` factor.
fn outer_density(spec: &ReservoirSpec, opts: &OracleOptions, s: f64) -> Result<Vector<4>> {
    let (kc, ks) = kernels(spec, opts, s)?;
    let (sn, cs) = (spec.omega0() * s).sin_cos();
    Ok(Vector([kc * cs, kc * sn, ks * sn, ks * cs]))
}

fn integrate_interval(
    spec: &ReservoirSpec,
    opts: &OracleOptions,
    a: f64,
    b: f64,
) -> Result<Vector<4>> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let est = integrate(
        |s| match outer_density(spec, opts, s) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Vector([0.0; 4])
            }
        },
        a,
        b,
        opts.outer,
    );
    if let Some(e) = failure.into_inner() {
        return Err(Error::Convergence(format!("inner frequency integral: {e}")));
    }
    Ok(est?.value)
}

/// All four coefficients at one time, `[Δ, Π, γ, r]`.
pub fn oracle_all(spec: &ReservoirSpec, tau: f64, opts: &OracleOptions) -> Result<[f64; 4]> {
    oracle_series(spec, &[tau], opts).map(|v| v[0])
}

/// One coefficient at one time.
pub fn coeff_oracle(spec: &ReservoirSpec, tau: f64, which: Which) -> Result<f64> {
    let v = oracle_all(spec, tau, &OracleOptions::default())?;
    Ok(v[which.index()])
}

/// Cumulative evaluation on an ascending grid: each interval between
/// consecutive grid points is integrated once and the results summed.
pub fn oracle_series(
    spec: &ReservoirSpec,
    grid: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<[f64; 4]>> {
    spec.validate()?;
    if let Some(p) = opts.exponent {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("exponent must be positive, got {p}")));
        }
    }
    let mut prev = 0.0;
    for &t in grid {
        if !(t.is_finite() && t >= prev) {
            return Err(Error::Grid(format!(
                "grid must be ascending and non-negative, got {t}"
            )));
        }
        prev = t;
    }
    let a2 = spec.alpha * spec.alpha;
    let mut acc = Vector([0.0; 4]);
    let mut last = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        if t > last {
            acc = acc + integrate_interval(spec, opts, last, t)?;
            last = t;
        }
        out.push(acc.0.map(|v| v * a2));
    }
    Ok(out)
}
