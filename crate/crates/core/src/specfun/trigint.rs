use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::expint::e1_unchecked;
use super::{check_arg, finite_or_overflow, CompensatedSum, EULER_GAMMA, EXP_LIMIT};
use crate::error::{Error, Result};

/// Below this modulus the Maclaurin series of Ci and Si is used; above it
/// both are assembled from `E1(±iz)`.
const SERIES_RADIUS: f64 = 4.0;

/// Cosine integral `Ci(z) = γ + ln z + ∫_0^z (cos t - 1)/t dt`, principal
/// branch with the cut on the negative real axis.
pub fn ci(z: Complex64) -> Result<Complex64> {
    check_arg(z, "Ci")?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain(
            "Ci has a logarithmic singularity at z = 0".into(),
        ));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::Branch(format!(
            "Ci({z}) lies on the negative real axis"
        )));
    }
    overflow_guard(z, "Ci")?;
    if z.norm() <= SERIES_RADIUS {
        return finite_or_overflow(ci_series(z), "Ci", z);
    }
    let v = if z.re >= 0.0 {
        ci_si_right(z).0
    } else {
        // Ci(z) - ln z is even, so Ci(z) = Ci(-z) + ln z - ln(-z).
        ci_si_right(-z).0 + Complex64::new(0.0, PI * z.im.signum())
    };
    finite_or_overflow(v, "Ci", z)
}

/// Sine integral `Si(z) = ∫_0^z sin t / t dt` (entire).
pub fn si(z: Complex64) -> Result<Complex64> {
    check_arg(z, "Si")?;
    overflow_guard(z, "Si")?;
    if z.norm() <= SERIES_RADIUS {
        return finite_or_overflow(si_series(z, false), "Si", z);
    }
    let v = if z.re >= 0.0 {
        ci_si_right(z).1
    } else {
        -ci_si_right(-z).1
    };
    finite_or_overflow(v, "Si", z)
}

/// Hyperbolic sine integral `Shi(z) = ∫_0^z sinh t / t dt = -i·Si(iz)`.
pub fn shi(z: Complex64) -> Result<Complex64> {
    check_arg(z, "Shi")?;
    if z.norm() <= SERIES_RADIUS {
        return finite_or_overflow(si_series(z, true), "Shi", z);
    }
    let iz = Complex64::new(-z.im, z.re);
    let s = si(iz).map_err(|e| match e {
        Error::Overflow(_) => Error::Overflow(format!("Shi({z}) is not representable")),
        other => other,
    })?;
    finite_or_overflow(Complex64::new(s.im, -s.re), "Shi", z)
}

fn overflow_guard(z: Complex64, what: &str) -> Result<()> {
    if z.im.abs() > EXP_LIMIT {
        Err(Error::Overflow(format!(
            "{what}({z}): e^|Im z| not representable"
        )))
    } else {
        Ok(())
    }
}

/// `Ci` and `Si` for `Re z ≥ 0` from
/// `Ci = -(E1(iz) + E1(-iz))/2`, `Si = π/2 + (E1(iz) - E1(-iz))/(2i)`.
fn ci_si_right(z: Complex64) -> (Complex64, Complex64) {
    // Build ±iz explicitly so a zero real part keeps its sign and picks the
    // side of the E1 cut that is continuous with Re z > 0.
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let plus = e1_unchecked(Complex64::new(-z.im, re));
    let minus = e1_unchecked(Complex64::new(z.im, -re));
    let ci = -(plus + minus) * 0.5;
    let d = (plus - minus) * 0.5;
    // d / i = -i d
    let si = Complex64::new(FRAC_PI_2 + d.im, -d.re);
    (ci, si)
}

fn ci_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut sum = CompensatedSum::default();
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        term = -term * z2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        let contrib = term / (2.0 * kf);
        sum.add(contrib);
        if contrib.norm() <= 1e-17 * sum.value().norm().max(1e-300) {
            break;
        }
    }
    EULER_GAMMA + z.ln() + sum.value()
}

fn si_series(z: Complex64, hyperbolic: bool) -> Complex64 {
    let z2 = if hyperbolic { z * z } else { -z * z };
    let mut sum = CompensatedSum::new(z);
    let mut term = z;
    for k in 1..200 {
        let kf = k as f64;
        term = term * z2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        let contrib = term / (2.0 * kf + 1.0);
        sum.add(contrib);
        if contrib.norm() <= 1e-17 * sum.value().norm() {
            break;
        }
    }
    sum.value()
}
