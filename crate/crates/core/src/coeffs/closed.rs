//! Closed-form coefficients for the three spectral families.
//!
//! The expressions are written so that no exponentially large terms cancel:
//! every `Ci`, `Si`, `Shi` and `Ei` of an argument in the left half-plane is
//! rewritten through `E1` of the mirrored argument, which leaves products
//! `e^{±1/x}·f` that are each of order one. With `k = 1/x`,
//! `q = (1 - iτ)/x` and `q̄` its conjugate, the Ohmic and super-Ohmic forms
//! need only `Ei(q)`, `Ei(q̄)`, `E1(q)`, `E1(q̄)`, `Ei(k)` and `E1(k)`.
//! Conjugate partners are evaluated separately so that the imaginary part of
//! the assembled sum is a genuine consistency check.
//!
//! The sub-Ohmic forms use the Faddeeva function `w`, the scaled
//! complementary error function, for the same reason.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Which;
use crate::error::{Error, Result};
use crate::specfun::{e1, ei, faddeeva_w};
use crate::spectral::{Family, ReservoirSpec, Temperature};

/// Relative size of the imaginary part tolerated in an assembled
/// coefficient, measured against its largest term.
pub const RESIDUE_TOL: f64 = 1e-10;

/// A closed-form value together with its numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedEval {
    /// Coefficient value (includes `α²` and, at high temperature, `θ`).
    pub value: f64,
    /// Imaginary part left over after assembly, relative to `α²`.
    pub residue: f64,
    /// Largest single term divided by the result. Large values mean
    /// digits were lost to cancellation.
    pub cancellation: f64,
}

/// Accumulates complex terms and tracks the largest of them.
#[derive(Default)]
struct Terms {
    sum: Complex64,
    max: f64,
}

impl Terms {
    fn add(&mut self, t: Complex64) {
        self.max = self.max.max(t.norm());
        self.sum += t;
    }

    fn real(&mut self, t: f64) {
        self.add(Complex64::new(t, 0.0));
    }

    fn finish(self, prefactor: f64, what: &str, alpha: f64) -> Result<ClosedEval> {
        let v = self.sum * prefactor;
        let scale = self.max * prefactor.abs();
        let tol = RESIDUE_TOL * scale.max(1.0);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Evaluation(format!("{what}: non-finite result")));
        }
        if v.im.abs() > tol {
            return Err(Error::ImaginaryResidue {
                what: what.to_string(),
                residue: v.im.abs(),
                tolerance: tol,
            });
        }
        let cancellation = if v.re == 0.0 {
            f64::INFINITY
        } else {
            scale / v.re.abs()
        };
        Ok(ClosedEval {
            value: alpha * alpha * v.re,
            residue: v.im.abs(),
            cancellation,
        })
    }
}

fn eval_err(what: &str, e: Error) -> Error {
    match e {
        Error::ImaginaryResidue { .. } => e,
        other => Error::Evaluation(format!("{what}: {other}")),
    }
}

/// Special-function values shared by the Ohmic and super-Ohmic forms.
struct ExpIntegrals {
    k: f64,
    ep: f64,
    em: f64,
    /// `E1(q)`, `E1(q̄)`
    a: Complex64,
    b: Complex64,
    /// `Ei(q)`, `Ei(q̄)`
    eq: Complex64,
    eqb: Complex64,
    e1k: f64,
    eik: f64,
}

impl ExpIntegrals {
    fn new(x: f64, tau: f64) -> Result<Self> {
        let k = 1.0 / x;
        let q = Complex64::new(k, -tau * k);
        let qb = Complex64::new(k, tau * k);
        let kc = Complex64::new(k, 0.0);
        Ok(Self {
            k,
            ep: k.exp(),
            em: (-k).exp(),
            a: e1(q)?,
            b: e1(qb)?,
            eq: ei(q)?,
            eqb: ei(qb)?,
            e1k: e1(kc)?.re,
            eik: ei(kc)?.re,
        })
    }
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn ohmic(s: &ExpIntegrals, x: f64, tau: f64, which: Which, temp: Temperature) -> (Terms, f64) {
    let k = s.k;
    let u = 1.0 + tau * tau;
    let (sn, cs) = (k * tau).sin_cos();
    let t1 = I * s.em * (s.eq - s.eqb);
    let t2 = -I * s.ep * (s.a - s.b);
    let mut t = Terms::default();
    let pref = match (which, temp) {
        (Which::Gamma, _) => {
            t.add(t1);
            t.add(t2);
            t.real(-4.0 * x * sn / u);
            k / 4.0
        }
        (Which::Delta, Temperature::Zero) => {
            t.add(t1);
            t.add(-t2);
            t.real(4.0 * x * tau * cs / u);
            k / 4.0
        }
        (Which::Pi, Temperature::Zero) => {
            t.add(-s.em * (s.eq + s.eqb));
            t.real(2.0 * s.em * s.eik);
            t.real(-2.0 * s.ep * s.e1k);
            t.add(s.ep * (s.a + s.b));
            t.real(4.0 * x * tau * sn / u);
            k / 4.0
        }
        (Which::Delta, Temperature::High { theta }) => {
            t.add(-I * 0.5 * s.ep * (s.a - s.b));
            t.add(-I * 0.5 * s.em * (s.eqb - s.eq));
            theta
        }
        (Which::Pi, Temperature::High { theta }) => {
            t.real(s.ep * s.e1k);
            t.add(-0.5 * s.ep * (s.a + s.b));
            t.real(s.em * s.eik);
            t.add(-0.5 * s.em * (s.eq + s.eqb));
            theta
        }
        (Which::Rren, _) => unreachable!(),
    };
    (t, pref)
}

fn super_ohmic(
    s: &ExpIntegrals,
    x: f64,
    tau: f64,
    which: Which,
    temp: Temperature,
) -> (Terms, f64) {
    let k = s.k;
    let x2 = x * x;
    let t2 = tau * tau;
    let u = 1.0 + t2;
    let (sn, cs) = (k * tau).sin_cos();
    let br1 = I * s.em * (s.eq - s.eqb);
    let br2 = I * s.ep * (s.b - s.a);
    let poly = 1.0 + 2.0 * t2 + t2 * t2 + 6.0 * x2 - 2.0 * x2 * t2;
    let mut t = Terms::default();
    let pref = match (which, temp) {
        (Which::Gamma, _) => {
            t.real(8.0 * x2 * tau * cs / (u * u));
            t.real(4.0 * x * (-u * u + 2.0 * (3.0 * t2 - 1.0) * x2) * sn / (u * u * u));
            t.add(br1);
            t.add(br2);
            k / (4.0 * x2)
        }
        (Which::Delta, Temperature::High { theta }) => {
            t.real(8.0 * x2 * tau * cs / (u * u));
            t.real(-4.0 * x * sn / u);
            t.add(br1);
            t.add(br2);
            theta / (2.0 * x2)
        }
        (Which::Pi, Temperature::High { theta }) => {
            t.real(4.0 * x * cs / u);
            t.real(8.0 * tau * x2 * sn / (u * u));
            t.real(-4.0 * x);
            t.real(2.0 * s.ep * s.e1k);
            t.real(2.0 * s.em * s.eik);
            t.add(-s.em * (s.eq + s.eqb));
            t.add(-s.ep * (s.a + s.b));
            theta / (2.0 * x2)
        }
        (Which::Delta, Temperature::Zero) => {
            let u3 = u * u * u;
            t.real(-2.0 * x2 * (1.0 - t2 * t2) * sn / u3);
            t.real(2.0 * x * tau * cs * poly / u3);
            t.add(0.5 * I * s.ep * (s.a - s.b));
            t.add(0.5 * I * s.em * (s.eq - s.eqb));
            k / (2.0 * x2)
        }
        (Which::Pi, Temperature::Zero) => {
            let u3 = u * u * u;
            t.real(-2.0 * x2);
            t.real(2.0 * x2 * (1.0 - t2 * t2) * cs / u3);
            t.real(2.0 * x * tau * sn * poly / u3);
            t.add(0.5 * s.ep * (s.a + s.b));
            t.real(-s.ep * s.e1k);
            t.real(s.em * s.eik);
            t.add(-0.5 * s.em * (s.eq + s.eqb));
            k / (2.0 * x2)
        }
        (Which::Rren, _) => unreachable!(),
    };
    (t, pref)
}

/// Sub-Ohmic building blocks for one choice of `w`. Returns the complex
/// quantity whose real part is the coefficient (before the prefactor),
/// and the largest intermediate term.
fn sub_ohmic_raw(
    w: &dyn Fn(Complex64) -> Result<Complex64>,
    x: f64,
    tau: f64,
    which: Which,
    high: bool,
) -> Result<(Complex64, f64)> {
    let k = 1.0 / x;
    let sk = k.sqrt();
    let root = (PI / k).sqrt();
    let z = Complex64::new(1.0, -tau).sqrt();
    let eik = Complex64::from_polar(1.0, k * tau);
    let emk = eik.conj();
    // e^{k}·P and e^{-k}·N, split into their two pieces.
    let p0 = root * w(Complex64::new(0.0, sk))?;
    let p1 = root * eik * w(I * sk * z)?;
    let n0 = -I * root * w(Complex64::new(-sk, 0.0))?;
    let n1 = -I * root * emk * w(-sk * z)?;
    let ep = p0 - p1;
    let en = n0 - n1;
    let pieces = [p0.norm(), p1.norm(), n0.norm(), n1.norm()]
        .into_iter()
        .fold(0.0, f64::max);
    let mut max = pieces;
    let y = if high {
        let gp = I * ep;
        let gm = I * en;
        match which {
            Which::Delta => (gp + gm) * 0.5,
            Which::Pi => (gp - gm) / (2.0 * I),
            _ => unreachable!(),
        }
    } else {
        let pa = -2.0 * I * (eik / z - 1.0);
        let pb = -2.0 * I * (emk / z - 1.0);
        max = (2.0 * k * pieces).max(pa.norm()).max(pb.norm());
        let a = pa - 2.0 * I * k * ep;
        let b = pb + 2.0 * I * k * en;
        match which {
            // Im[(A - B)/(2i)] = Re[-(A - B)/2]
            Which::Gamma => -(a - b) * 0.5,
            Which::Delta => (a + b) * 0.5,
            Which::Pi => (a - b) / (2.0 * I),
            Which::Rren => unreachable!(),
        }
    };
    Ok((y, max))
}

fn sub_ohmic(x: f64, tau: f64, which: Which, temp: Temperature) -> Result<(Terms, f64)> {
    let high = matches!(temp, Temperature::High { .. }) && which != Which::Gamma;
    let direct = |z: Complex64| faddeeva_w(z);
    // w(-z̄) = conj(w(z)): evaluating through the mirrored argument gives the
    // conjugate-kernel partner of every term.
    let mirrored = |z: Complex64| faddeeva_w(-z.conj()).map(|v| v.conj());
    let (y1, m1) = sub_ohmic_raw(&direct, x, tau, which, high)?;
    let (y2, m2) = sub_ohmic_raw(&mirrored, x, tau, which, high)?;
    let mut t = Terms::default();
    // (y1 + conj(y2))/2 has the same real part as either evaluation and an
    // imaginary part that vanishes when both agree.
    t.add(0.5 * y1);
    t.add(0.5 * y2.conj());
    t.max = t.max.max(0.5 * m1.max(m2));
    let sqrt_pi = PI.sqrt();
    let pref = match temp {
        Temperature::High { theta } if high => 2.0 * theta * sqrt_pi,
        _ => 0.5 * sqrt_pi,
    };
    Ok((t, pref))
}

fn label(family: Family, which: Which, temp: Temperature) -> String {
    let t = match temp {
        Temperature::High { .. } => "high-T",
        Temperature::Zero => "zero-T",
    };
    format!("{which:?} ({family}, {t})")
}

/// Closed-form value of `which` at time `tau`, with diagnostics.
///
/// Returns exactly zero at `tau = 0`, where the conjugate arguments meet on
/// the branch cut of `Ei`.
pub fn closed_form(spec: &ReservoirSpec, tau: f64, which: Which) -> Result<ClosedEval> {
    spec.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!(
            "tau must be finite and non-negative, got {tau}"
        )));
    }
    if which == Which::Rren {
        return Err(Error::Domain(
            "the frequency renormalisation is available from the quadrature oracle only".into(),
        ));
    }
    if tau == 0.0 {
        return Ok(ClosedEval {
            value: 0.0,
            residue: 0.0,
            cancellation: 1.0,
        });
    }
    let what = label(spec.family, which, spec.temp);
    let x = spec.x;
    let (terms, pref) = match spec.family {
        Family::Ohmic => {
            let s = ExpIntegrals::new(x, tau).map_err(|e| eval_err(&what, e))?;
            ohmic(&s, x, tau, which, spec.temp)
        }
        Family::SuperOhmic => {
            let s = ExpIntegrals::new(x, tau).map_err(|e| eval_err(&what, e))?;
            super_ohmic(&s, x, tau, which, spec.temp)
        }
        Family::SubOhmic => sub_ohmic(x, tau, which, spec.temp).map_err(|e| eval_err(&what, e))?,
    };
    terms.finish(pref, &what, spec.alpha)
}

/// Damping coefficient `γ(τ)` from its closed form.
pub fn gamma_closed(spec: &ReservoirSpec, tau: f64) -> Result<f64> {
    closed_form(spec, tau, Which::Gamma).map(|c| c.value)
}

/// Diffusion coefficient `Δ(τ)` from its closed form.
pub fn delta_closed(spec: &ReservoirSpec, tau: f64) -> Result<f64> {
    closed_form(spec, tau, Which::Delta).map(|c| c.value)
}

/// Anomalous diffusion coefficient `Π(τ)` from its closed form.
pub fn pi_closed(spec: &ReservoirSpec, tau: f64) -> Result<f64> {
    closed_form(spec, tau, Which::Pi).map(|c| c.value)
}
