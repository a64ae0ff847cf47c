//! Complex-argument special functions used by the closed-form reservoir
//! coefficients: the exponential integral `Ei`, the cosine and sine integrals
//! `Ci`, `Si`, the hyperbolic sine integral `Shi` and the error function.
//!
//! Every function works on the principal branch. `Ei` and `Ci` carry a cut
//! along the negative real axis; on the cut `Ei` returns the conventional
//! real value `-E1(|x|)`, while `Ci` reports [`Error::Branch`].
//!
//! Evaluation switches between power series (small `|z|`, summed with
//! Neumaier compensation), the continued fraction of `E1`, its asymptotic
//! expansion, and the Faddeeva function for `erf`. No result escapes as NaN
//! or infinity: overflow is reported as [`Error::Overflow`].

mod erf;
mod expint;
mod trigint;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use erf::{erf, erfc, faddeeva_w};
pub use expint::{e1, ei};
pub use trigint::{ci, shi, si};

/// A complex argument or value of one of the special functions.
pub type ComplexValue = Complex64;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest real exponent that is still representable after `exp`.
pub(crate) const EXP_LIMIT: f64 = 709.0;

/// Neumaier-compensated accumulator for complex series.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    pub(crate) fn new(start: Complex64) -> Self {
        Self {
            re: start.re,
            re_c: 0.0,
            im: start.im,
            im_c: 0.0,
        }
    }

    pub(crate) fn add(&mut self, v: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, v.re);
        neumaier(&mut self.im, &mut self.im_c, v.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

pub(crate) fn finite_or_overflow(v: Complex64, what: &str, z: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("{what}({z}) is not representable")))
    }
}

pub(crate) fn check_arg(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what}: non-finite argument {z}")))
    }
}
