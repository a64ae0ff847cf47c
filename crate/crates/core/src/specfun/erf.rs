use std::f64::consts::FRAC_2_SQRT_PI as TWO_OVER_SQRT_PI;

use num_complex::Complex64;

use super::{check_arg, finite_or_overflow, CompensatedSum, EXP_LIMIT};
use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 2.0;

/// Error function `erf(z) = 2/√π ∫_0^z e^{-t²} dt` (entire).
pub fn erf(z: Complex64) -> Result<Complex64> {
    check_arg(z, "erf")?;
    if z.norm() <= SERIES_RADIUS {
        return Ok(erf_series(z));
    }
    if z.re < 0.0 {
        return erf(-z).map(|v| -v);
    }
    let tail =
        scaled_tail(z).map_err(|_| Error::Overflow(format!("erf({z}) is not representable")))?;
    finite_or_overflow(Complex64::new(1.0, 0.0) - tail, "erf", z)
}

/// Complementary error function `erfc(z) = 1 - erf(z)`, evaluated without
/// cancellation in the right half-plane.
pub fn erfc(z: Complex64) -> Result<Complex64> {
    check_arg(z, "erfc")?;
    if z.re < 0.0 {
        let t = erfc(-z)?;
        return finite_or_overflow(Complex64::new(2.0, 0.0) - t, "erfc", z);
    }
    if z.norm() <= 0.5 {
        return Ok(Complex64::new(1.0, 0.0) - erf_series(z));
    }
    scaled_tail(z)
}

/// `e^{-z²} w(iz)` for `Re z ≥ 0`, using a logarithmic form when the
/// exponential factor alone would overflow.
fn scaled_tail(z: Complex64) -> Result<Complex64> {
    let w = faddeeva_w(Complex64::new(-z.im, z.re))?;
    let mz2 = -z * z;
    if mz2.re < EXP_LIMIT {
        return finite_or_overflow(mz2.exp() * w, "erfc", z);
    }
    let lg = mz2 + w.ln();
    if lg.re > EXP_LIMIT {
        return Err(Error::Overflow(format!("erfc({z}) is not representable")));
    }
    Ok(lg.exp())
}

fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut sum = CompensatedSum::new(z);
    let mut term = z;
    for n in 1..200 {
        let nf = n as f64;
        term = -term * z2 / nf;
        let contrib = term / (2.0 * nf + 1.0);
        sum.add(contrib);
        if contrib.norm() <= 1e-17 * sum.value().norm() {
            break;
        }
    }
    sum.value() * TWO_OVER_SQRT_PI
}

/// Faddeeva function `w(z) = e^{-z²} erfc(-iz)`.
///
/// Algorithm of Poppe and Wijers (power series near the origin, Gautschi's
/// truncated continued fraction elsewhere), accurate to about 14 digits.
pub fn faddeeva_w(z: Complex64) -> Result<Complex64> {
    check_arg(z, "w")?;
    let (xi, yi) = (z.re, z.im);
    let xabs = xi.abs();
    let yabs = yi.abs();
    let x = xabs / 6.3;
    let y = yabs / 4.4;
    let mut qrho = x * x + y * y;
    let mut xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let small = qrho < 0.085_264;
    let (mut u, mut v);
    let (mut u2, mut v2) = (0.0, 0.0);
    if small {
        qrho = (1.0 - 0.85 * y) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as i64;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = -TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0;
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        u2 = daux * yquad.cos();
        v2 = -daux * yquad.sin();
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        let (h, kapn, nu);
        if qrho > 1.0 {
            h = 0.0;
            kapn = 0;
            qrho = qrho.sqrt();
            nu = (3.0 + 1442.0 / (26.0 * qrho + 77.0)) as i64;
        } else {
            qrho = (1.0 - y) * (1.0 - qrho).sqrt();
            h = 1.88 * qrho;
            kapn = (7.0 + 34.0 * qrho).round() as i64;
            nu = (16.0 + 26.0 * qrho).round() as i64;
        }
        let h2 = 2.0 * h;
        let with_h = h > 0.0;
        let mut qlambda = if with_h { h2.powi(kapn as i32) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if with_h && n <= kapn {
                let tx = qlambda + sx;
                let nsx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                sx = nsx;
                qlambda /= h2;
            }
        }
        if with_h {
            u = TWO_OVER_SQRT_PI * sx;
            v = TWO_OVER_SQRT_PI * sy;
        } else {
            u = TWO_OVER_SQRT_PI * rx;
            v = TWO_OVER_SQRT_PI * ry;
        }
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
    }

    if yi < 0.0 {
        if small {
            u2 *= 2.0;
            v2 *= 2.0;
        } else {
            xquad = -xquad;
            if xquad > EXP_LIMIT {
                return Err(Error::Overflow(format!("w({z}) is not representable")));
            }
            let w1 = 2.0 * xquad.exp();
            u2 = w1 * yquad.cos();
            v2 = -w1 * yquad.sin();
        }
        u = u2 - u;
        v = v2 - v;
        if xi > 0.0 {
            v = -v;
        }
    } else if xi < 0.0 {
        v = -v;
    }
    finite_or_overflow(Complex64::new(u, v), "w", z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_reference_values() {
        assert!((erf(c(1.0, 0.0)).unwrap().re - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(c(3.0, 0.0)).unwrap().re - 0.999_977_909_503_001_4).abs() < 1e-15);
        assert!((erfc(c(5.0, 0.0)).unwrap().re - 1.537_459_794_428_034_8e-12).abs() < 1e-25);
        assert_eq!(erf(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn faddeeva_reference_values() {
        // w(1 + i) and w(i) from high-precision evaluation.
        let w = faddeeva_w(c(1.0, 1.0)).unwrap();
        assert!((w - c(0.304_744_205_256_913_5, 0.208_218_938_202_832_3)).norm() < 1e-13);
        let w = faddeeva_w(c(0.0, 1.0)).unwrap();
        assert!((w.re - 0.427_583_576_155_807).abs() < 1e-14);
    }

    #[test]
    fn series_and_faddeeva_agree_near_switch() {
        for k in 0..32 {
            let th = std::f64::consts::PI * (k as f64 / 31.0 - 0.5);
            let z = Complex64::from_polar(2.0, th);
            let a = erf_series(z);
            let b = Complex64::new(1.0, 0.0) - scaled_tail(z).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-12, "z={z} {a} {b}");
        }
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(erf(c(0.0, 40.0)), Err(Error::Overflow(_))));
    }
}
