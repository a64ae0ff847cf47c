use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_arg, finite_or_overflow, CompensatedSum, EULER_GAMMA, EXP_LIMIT};
use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 40.0;
const CF_MAX_ITER: usize = 20_000;

/// Exponential integral `Ei(z)` on the principal branch.
///
/// Off the real axis `Ei(z) = -E1(-z) + iπ·sgn(Im z)`. For real negative
/// `z` the real value `-E1(|z|)` is returned (average of the two sides of
/// the cut), matching the usual real-variable definition.
pub fn ei(z: Complex64) -> Result<Complex64> {
    check_arg(z, "Ei")?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain(
            "Ei has a logarithmic singularity at z = 0".into(),
        ));
    }
    if z.re > EXP_LIMIT {
        return Err(Error::Overflow(format!(
            "Ei({z}): e^Re(z) not representable"
        )));
    }
    let v = if z.im == 0.0 {
        if z.re > 0.0 {
            // E1 evaluated on the upper side of its cut: E1(-x + i0) = -Ei(x) - iπ.
            let upper = e1_unchecked(Complex64::new(-z.re, 0.0));
            Complex64::new(-upper.re, 0.0)
        } else {
            Complex64::new(-e1_unchecked(Complex64::new(-z.re, 0.0)).re, 0.0)
        }
    } else {
        -e1_unchecked(-z) + Complex64::new(0.0, PI * z.im.signum())
    };
    finite_or_overflow(v, "Ei", z)
}

/// Exponential integral `E1(z) = ∫_z^∞ e^{-t}/t dt`, principal branch
/// `|arg z| ≤ π`. The sign of a zero imaginary part selects the side of the
/// cut on the negative real axis.
pub fn e1(z: Complex64) -> Result<Complex64> {
    check_arg(z, "E1")?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain(
            "E1 has a logarithmic singularity at z = 0".into(),
        ));
    }
    if -z.re > EXP_LIMIT {
        return Err(Error::Overflow(format!(
            "E1({z}): e^-Re(z) not representable"
        )));
    }
    finite_or_overflow(e1_unchecked(z), "E1", z)
}

pub(crate) fn e1_unchecked(z: Complex64) -> Complex64 {
    let r = z.norm();
    let near_cut = z.re < 0.0 && z.im.abs() < 0.5 * z.re.abs();
    if r <= SERIES_RADIUS || (near_cut && r < ASYMPTOTIC_RADIUS) {
        e1_series(z)
    } else if r >= ASYMPTOTIC_RADIUS {
        e1_asymptotic(z)
    } else {
        e1_continued_fraction(z)
    }
}

/// `E1(z) = -γ - ln z - Σ_{k≥1} (-z)^k / (k·k!)`.
fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = CompensatedSum::default();
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..400 {
        let kf = k as f64;
        term = -term * z / kf;
        let contrib = term / kf;
        sum.add(contrib);
        if contrib.norm() <= 1e-17 * sum.value().norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum.value()
}

/// Modified Lentz evaluation of
/// `E1(z) = e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - ...)))`.
fn e1_continued_fraction(z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + 1.0;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..CF_MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        d = d.inv();
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// `E1(z) ~ e^{-z}/z Σ (-1)^k k!/z^k`, optimally truncated.
fn e1_asymptotic(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let mut sum = CompensatedSum::new(Complex64::new(1.0, 0.0));
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let next = -term * (k as f64) * inv;
        let mag = next.norm();
        if mag > last {
            break;
        }
        term = next;
        sum.add(term);
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    (-z).exp() * inv * sum.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn ei_real_reference_values() {
        let v = ei(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 1.895_117_816_355_936_8).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        let v = ei(Complex64::new(-1.0, 0.0)).unwrap();
        assert!((v.re + 0.219_383_934_395_520_28).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn ei_zero_is_domain_error() {
        assert!(matches!(
            ei(Complex64::new(0.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ei(Complex64::new(800.0, 0.0)),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn ei_conjugate_symmetry() {
        for &(re, im) in &[(1.0, 2.0), (-3.0, 0.5), (10.0, -7.0), (-30.0, 25.0)] {
            let z = Complex64::new(re, im);
            let a = ei(z.conj()).unwrap();
            let b = ei(z).unwrap().conj();
            assert!(rel(a, b) < 1e-14);
        }
    }

    #[test]
    fn e1_methods_agree_in_overlap() {
        // The continued fraction and the series/asymptotic forms must agree
        // where their regions meet.
        for &r in &[2.0, 2.5, 39.0, 41.0] {
            for k in 0..16 {
                let th = -3.0 + 6.0 * k as f64 / 15.0;
                let z = Complex64::from_polar(r, th);
                let cf = e1_continued_fraction(z);
                let other = if r < 10.0 {
                    e1_series(z)
                } else {
                    e1_asymptotic(z)
                };
                assert!(rel(cf, other) < 1e-12, "z={z} cf={cf} other={other}");
            }
        }
    }

    #[test]
    fn e1_cut_sides() {
        let up = e1(Complex64::new(-3.0, 0.0)).unwrap();
        let down = e1(Complex64::new(-3.0, -0.0)).unwrap();
        assert!((up.im + PI).abs() < 1e-14);
        assert!((down.im - PI).abs() < 1e-14);
        assert!((up.re - down.re).abs() < 1e-14);
    }
}
