//! Adaptive 21-point Gauss-Kronrod quadrature on finite intervals for real
//! or complex integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A value that can be integrated: a real or complex number, or a small
/// vector of reals. Convergence is judged separately for every component.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    /// Number of independently checked components.
    fn dim() -> usize {
        1
    }
    /// Magnitude of component `i`.
    fn component(&self, i: usize) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn component(&self, _i: usize) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn component(&self, _i: usize) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Fixed-size real vector integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Vector<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Vector<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for Vector<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for Vector<N> {
    fn zero() -> Self {
        Vector([0.0; N])
    }
    fn dim() -> usize {
        N
    }
    fn component(&self, i: usize) -> f64 {
        self.0[i].abs()
    }
    fn is_finite_value(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Error targets: the loop stops once the estimated error is below
/// `max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Largest per-component error estimate.
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_860_876,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kron * h;
    let diff = (kron - gauss) * h;
    (value, (0..T::dim()).map(|i| diff.component(i)).collect())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: Vec<f64>,
}

/// Adaptive integration of `f` over `[a, b]` by repeated bisection of the
/// panel whose error is largest relative to the current target.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
        });
    }
    let dim = T::dim();
    let (value, error) = gk21(&f, a, b);
    let mut panels = vec![Panel { a, b, value, error }];
    let mut evaluations = 21;
    let mut targets = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    loop {
        let mut total = T::zero();
        err.iter_mut().for_each(|e| *e = 0.0);
        for p in &panels {
            total = total + p.value;
            for (e, pe) in err.iter_mut().zip(&p.error) {
                *e += pe;
            }
        }
        if !total.is_finite_value() {
            return Err(Error::Convergence(
                "integrand produced a non-finite value".into(),
            ));
        }
        let mut done = true;
        for (i, t) in targets.iter_mut().enumerate() {
            *t = tol.abs.max(tol.rel * total.component(i));
            if err[i] > *t {
                done = false;
            }
        }
        if done {
            return Ok(Estimate {
                value: total,
                error: err.iter().cloned().fold(0.0, f64::max),
                evaluations,
            });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::Convergence(format!(
                "error target not met on [{a}, {b}] after {} panels",
                panels.len()
            )));
        }
        let score = |p: &Panel<T>| {
            p.error
                .iter()
                .zip(&targets)
                .map(|(e, t)| e / t)
                .fold(0.0, f64::max)
        };
        let mut worst = 0;
        let mut worst_score = score(&panels[0]);
        for (i, p) in panels.iter().enumerate().skip(1) {
            let sc = score(p);
            if sc > worst_score {
                worst = i;
                worst_score = sc;
            }
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Convergence(format!(
                "panel [{}, {}] cannot be bisected further",
                p.a, p.b
            )));
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = gk21(&f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        evaluations += 42;
    }
}

/// Integral of `f` along the straight segment from `z0` to `z1` in the
/// complex plane.
pub fn integrate_segment<F: Fn(Complex64) -> Complex64>(
    f: F,
    z0: Complex64,
    z1: Complex64,
    tol: Tolerance,
) -> Result<Estimate<Complex64>> {
    let dz = z1 - z0;
    integrate(|t| f(z0 + dz * t) * dz, 0.0, 1.0, tol)
}
