//! Two-mode Gaussian states: covariance matrices, their evolution under the
//! local damped-oscillator dynamics, symplectic invariants and the
//! entanglement of formation of mode-symmetric states.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂)` and the vacuum has covariance
//! `1/2` (`ħ = 1`).

use serde::{Deserialize, Serialize};

use crate::coeffs::{CoeffSample, CoefficientSet};
use crate::error::{Error, Result};
use crate::spectral::ReservoirSpec;

pub type Mat2 = [[f64; 2]; 2];

/// Tolerance on `A = B` for the symmetric formula.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerated violation of the uncertainty relation before a sample is
/// flagged as unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Relative tolerance on the negative discriminants of the symplectic
/// eigenvalue formulas before they are treated as an error.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// 4×4 real symmetric covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix {
    pub entries: [[f64; 4]; 4],
}

impl CovMatrix {
    /// `σ = [[A, C], [Cᵀ, B]]`.
    pub fn from_blocks(a: Mat2, b: Mat2, c: Mat2) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][j];
                m[i + 2][j + 2] = b[i][j];
                m[i][j + 2] = c[i][j];
                m[j + 2][i] = c[i][j];
            }
        }
        Self { entries: m }
    }

    fn block(&self, r: usize, c: usize) -> Mat2 {
        let m = &self.entries;
        [[m[r][c], m[r][c + 1]], [m[r + 1][c], m[r + 1][c + 1]]]
    }

    pub fn a(&self) -> Mat2 {
        self.block(0, 0)
    }

    pub fn b(&self) -> Mat2 {
        self.block(2, 2)
    }

    pub fn c(&self) -> Mat2 {
        self.block(0, 2)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| (self.entries[i][j] - self.entries[j][i]).abs() <= tol))
    }

    /// Identity scaled by `v` on both modes.
    pub fn scaled_identity(v: f64) -> Self {
        let d = [[v, 0.0], [0.0, v]];
        Self::from_blocks(d, d, [[0.0; 2]; 2])
    }

    /// `σ + ν·1`
    pub fn add_noise(&self, nu: f64) -> Self {
        let mut m = self.entries;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += nu;
        }
        Self { entries: m }
    }

    /// Local rotations `R(φ₁) ⊕ R(φ₂)` applied as `S σ Sᵀ`.
    pub fn rotate_local(&self, phi1: f64, phi2: f64) -> Self {
        let r1 = rotation(phi1);
        let r2 = rotation(phi2);
        let a = congruence(&r1, &self.a(), &r1);
        let b = congruence(&r2, &self.b(), &r2);
        let c = congruence(&r1, &self.c(), &r2);
        Self::from_blocks(a, b, c)
    }
}

/// `[[cos φ, -sin φ], [sin φ, cos φ]]`
pub fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `L M Rᵀ`
fn congruence(l: &Mat2, m: &Mat2, r: &Mat2) -> Mat2 {
    mul(&mul(l, m), &transpose(r))
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Determinant of a 4×4 matrix by cofactor expansion over 2×2 minors.
fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Squeezing of a twin-beam (two-mode squeezed vacuum) state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwbParams {
    pub r: f64,
}

impl TwbParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!(
                "squeezing must be non-negative, got {r}"
            )));
        }
        Ok(Self { r })
    }
}

/// First moments `(⟨X₁⟩, ⟨P₁⟩, ⟨X₂⟩, ⟨P₂⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanVector(pub [f64; 4]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticInvariants {
    /// `det A`
    pub i1: f64,
    /// `det C`
    pub i3: f64,
    /// `det σ`
    pub i4: f64,
}

/// Twin-beam covariance: `A = B = cosh(2r)/2·1`, `C = sinh(2r)/2·diag(1, -1)`.
pub fn twb_covariance(p: TwbParams) -> Result<CovMatrix> {
    let p = TwbParams::new(p.r)?;
    let a = (2.0 * p.r).cosh() / 2.0;
    let c = (2.0 * p.r).sinh() / 2.0;
    Ok(CovMatrix::from_blocks(
        [[a, 0.0], [0.0, a]],
        [[a, 0.0], [0.0, a]],
        [[c, 0.0], [0.0, -c]],
    ))
}

/// Parameters of a state in the family `A = a·1`, `B = b·1`,
/// `C = diag(c₁, c₂)`.
struct SymmetricFamily {
    a: f64,
    b: f64,
    c1: f64,
    c2: f64,
}

fn family_of(s: &CovMatrix) -> Result<SymmetricFamily> {
    let tol = 1e-12
        * s.entries
            .iter()
            .flatten()
            .fold(1.0_f64, |m, v| m.max(v.abs()));
    if !s.is_symmetric(tol) {
        return Err(Error::Shape("covariance matrix is not symmetric".into()));
    }
    let (a, b, c) = (s.a(), s.b(), s.c());
    let ok = (a[0][0] - a[1][1]).abs() <= tol
        && a[0][1].abs() <= tol
        && (b[0][0] - b[1][1]).abs() <= tol
        && b[0][1].abs() <= tol
        && c[0][1].abs() <= tol
        && c[1][0].abs() <= tol;
    if !ok {
        return Err(Error::Shape(
            "initial state must have A = a·1, B = b·1 and diagonal C".into(),
        ));
    }
    Ok(SymmetricFamily {
        a: a[0][0],
        b: b[0][0],
        c1: c[0][0],
        c2: c[1][1],
    })
}

/// Diffusion block added to each local covariance:
/// `Δ_Γ·1 + [[Δ_co - Π_si, -(Δ_si - Π_co)], [-(Δ_si - Π_co), -(Δ_co - Π_si)]]`.
fn diffusion(k: &CoeffSample, secular_only: bool) -> Mat2 {
    let (co, si) = if secular_only {
        (0.0, 0.0)
    } else {
        (k.delta_co - k.pi_si, k.delta_si - k.pi_co)
    };
    [[k.delta_gamma + co, -si], [-si, k.delta_gamma - co]]
}

fn add(a: Mat2, b: Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn scale(a: Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// Free rotation over time `tau`, in the sense that turns an initial
/// correlation `diag(c, -c)` into `c·[[cos 2ω₀τ, sin 2ω₀τ], [sin 2ω₀τ, -cos 2ω₀τ]]`.
fn free_rotation(spec: &ReservoirSpec, tau: f64) -> Mat2 {
    rotation(spec.omega0() * tau)
}

/// Covariance at time `tau`.
///
/// States with `C₀ = c·diag(1, -1)` use the assembled expressions for the
/// correlation block; any other diagonal `C₀` is propagated element by
/// element through the damped rotation. `secular_only` drops the four
/// oscillating memory integrals.
pub fn propagate_covariance(
    sigma0: &CovMatrix,
    coeffs: &CoefficientSet,
    spec: &ReservoirSpec,
    tau: f64,
    secular_only: bool,
) -> Result<CovMatrix> {
    let f = family_of(sigma0)?;
    let k = coeffs.sample(tau)?;
    propagate_sample(&f, &k, spec, tau, secular_only)
}

fn propagate_sample(
    f: &SymmetricFamily,
    k: &CoeffSample,
    spec: &ReservoirSpec,
    tau: f64,
    secular_only: bool,
) -> Result<CovMatrix> {
    let e = (-k.big_gamma).exp();
    let w = diffusion(k, secular_only);
    let a = add([[f.a * e, 0.0], [0.0, f.a * e]], w);
    let b = add([[f.b * e, 0.0], [0.0, f.b * e]], w);
    let c = if f.c1 == -f.c2 {
        let (s2, c2) = (2.0 * spec.omega0() * tau).sin_cos();
        scale([[c2, s2], [s2, -c2]], f.c1 * e)
    } else {
        let r = free_rotation(spec, tau);
        scale(congruence(&r, &[[f.c1, 0.0], [0.0, f.c2]], &r), e)
    };
    Ok(CovMatrix::from_blocks(a, b, c))
}

/// Same as [`propagate_covariance`] but always through the element-wise
/// damped rotation, for cross-checking the assembled form.
pub fn propagate_covariance_general(
    sigma0: &CovMatrix,
    coeffs: &CoefficientSet,
    spec: &ReservoirSpec,
    tau: f64,
    secular_only: bool,
) -> Result<CovMatrix> {
    let f = family_of(sigma0)?;
    let k = coeffs.sample(tau)?;
    let e = (-k.big_gamma).exp();
    let w = diffusion(&k, secular_only);
    let r = free_rotation(spec, tau);
    let rot = |m: Mat2| scale(congruence(&r, &m, &r), e);
    let a = add(rot([[f.a, 0.0], [0.0, f.a]]), w);
    let b = add(rot([[f.b, 0.0], [0.0, f.b]]), w);
    let c = rot([[f.c1, 0.0], [0.0, f.c2]]);
    Ok(CovMatrix::from_blocks(a, b, c))
}

/// Covariance on every grid point of `coeffs`.
pub fn propagate_on_grid(
    sigma0: &CovMatrix,
    coeffs: &CoefficientSet,
    spec: &ReservoirSpec,
    secular_only: bool,
) -> Result<Vec<CovMatrix>> {
    let f = family_of(sigma0)?;
    (0..coeffs.len())
        .map(|i| {
            let k = coeffs.at_index(i)?;
            propagate_sample(&f, &k, spec, coeffs.tau_grid[i], secular_only)
        })
        .collect()
}

/// Means at time `tau`: `e^{-Γ/2}` times the free rotation of the input.
pub fn propagate_mean(
    m0: &MeanVector,
    coeffs: &CoefficientSet,
    spec: &ReservoirSpec,
    tau: f64,
) -> Result<MeanVector> {
    let k = coeffs.sample(tau)?;
    let d = (-k.big_gamma / 2.0).exp();
    let r = free_rotation(spec, tau);
    let v = m0.0;
    let rot = |x: f64, p: f64| {
        (
            d * (r[0][0] * x + r[0][1] * p),
            d * (r[1][0] * x + r[1][1] * p),
        )
    };
    let (x1, p1) = rot(v[0], v[1]);
    let (x2, p2) = rot(v[2], v[3]);
    Ok(MeanVector([x1, p1, x2, p2]))
}

pub fn symplectic_invariants(sigma: &CovMatrix) -> SymplecticInvariants {
    SymplecticInvariants {
        i1: det2(&sigma.a()),
        i3: det2(&sigma.c()),
        i4: det4(&sigma.entries),
    }
}

/// Invariants of a state with `A = B` and symmetric `C`. For such states
/// `det σ = det(A+C)·det(A-C)`, and working with `d± = det(A±C)` and
/// `t = tr(adj(A)·C)` avoids the cancellations hidden in `I₁² + I₃² - I₄`.
struct Paired {
    i1: f64,
    i3: f64,
    d_plus: f64,
    d_minus: f64,
    t: f64,
}

fn paired(sigma: &CovMatrix) -> Option<Paired> {
    let (a, b, c) = (sigma.a(), sigma.b(), sigma.c());
    let largest = sigma
        .entries
        .iter()
        .flatten()
        .fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
    let tol = 4.0 * f64::EPSILON * largest;
    let same = (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= tol));
    if !same || (c[0][1] - c[1][0]).abs() > tol || (a[0][1] - a[1][0]).abs() > tol {
        return None;
    }
    let d_plus = det2(&add(a, c));
    let d_minus = det2(&add(a, scale(c, -1.0)));
    let t = a[1][1] * c[0][0] + a[0][0] * c[1][1] - a[0][1] * c[1][0] - a[1][0] * c[0][1];
    Some(Paired {
        i1: det2(&a),
        i3: det2(&c),
        d_plus,
        d_minus,
        t,
    })
}

/// Smallest symplectic eigenvalue of `σ` (or of its partial transpose).
pub fn min_symplectic_eigenvalue(sigma: &CovMatrix, partial_transpose: bool) -> Result<f64> {
    if let Some(p) = paired(sigma) {
        if !partial_transpose {
            // the modes (x₁ ± x₂, p₁ ± p₂) decouple
            return Ok(p.d_plus.min(p.d_minus).max(0.0).sqrt());
        }
        // ν̃±² = (I₁ - I₃) ± √(t² - 4 I₁ I₃), product d₊d₋
        let disc = p.t * p.t - 4.0 * p.i1 * p.i3;
        if disc < -DISCRIMINANT_TOL * (p.t * p.t + 4.0 * (p.i1 * p.i3).abs()) {
            return Err(Error::Numerical(format!(
                "negative symplectic discriminant {disc:e}"
            )));
        }
        let big = (p.i1 - p.i3) + disc.max(0.0).sqrt();
        if !(big > 0.0) {
            return Err(Error::Numerical(
                "partially transposed spectrum is not positive".into(),
            ));
        }
        return Ok((p.d_plus * p.d_minus / big).max(0.0).sqrt());
    }
    let da = det2(&sigma.a());
    let db = det2(&sigma.b());
    let dc = det2(&sigma.c());
    let d4 = det4(&sigma.entries);
    let delta = if partial_transpose {
        da + db - 2.0 * dc
    } else {
        da + db + 2.0 * dc
    };
    let disc = delta * delta - 4.0 * d4;
    // det σ carries an absolute rounding error of order ε·max|σ|⁴
    let m = sigma
        .entries
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = delta * delta + 4.0 * d4.abs() + 1e4 * m.powi(4) * f64::EPSILON;
    if disc < -DISCRIMINANT_TOL * scale {
        return Err(Error::Numerical(format!(
            "negative symplectic discriminant {disc:e}"
        )));
    }
    let big = (delta + disc.max(0.0).sqrt()) / 2.0;
    if !(big > 0.0) {
        return Err(Error::Numerical(
            "symplectic spectrum is not positive".into(),
        ));
    }
    Ok((d4 / big).max(0.0).sqrt())
}

/// True when every symplectic eigenvalue is at least `1/2 - 1e-9`.
pub fn physicality(sigma: &CovMatrix) -> Result<bool> {
    Ok(min_symplectic_eigenvalue(sigma, false)? >= 0.5 - PHYSICALITY_TOL)
}

/// `E(x) = (x+½)ln(x+½) - (x-½)ln(x-½)` written in `δ = x - ½`.
fn eof_function(delta: f64) -> f64 {
    let tail = if delta > 0.0 { delta * delta.ln() } else { 0.0 };
    (1.0 + delta) * delta.ln_1p() - tail
}

/// Entanglement of formation of a mode-symmetric state (`A = B`), in nats.
pub fn eof_symmetric(sigma: &CovMatrix) -> Result<f64> {
    eof_details(sigma).map(|(e, _)| e)
}

/// Entanglement of formation and the minimum symplectic eigenvalue `κ̃₋`
/// used to compute it.
pub fn eof_details(sigma: &CovMatrix) -> Result<(f64, f64)> {
    let (a, b) = (sigma.a(), sigma.b());
    let scale_ab = a
        .iter()
        .chain(b.iter())
        .flatten()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let diff = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (a[i][j] - b[i][j]).abs())
        .fold(0.0, f64::max);
    if diff > SYMMETRY_TOL * scale_ab {
        return Err(Error::Asymmetry(format!("max |A - B| = {diff:e}")));
    }
    let (i1, i3, d, root) = match paired(sigma) {
        Some(p) => {
            // I₁² + I₃² - I₄ = t² - 2I₁I₃ and the inner discriminant
            // factors as t²(t² - 4I₁I₃)
            let f = p.t * p.t - 4.0 * p.i1 * p.i3;
            if f < -DISCRIMINANT_TOL * (p.t * p.t + 4.0 * (p.i1 * p.i3).abs()) {
                return Err(Error::Numerical(format!(
                    "inner discriminant factor {f:e} is negative"
                )));
            }
            (
                p.i1,
                p.i3,
                p.t * p.t - 2.0 * p.i1 * p.i3,
                p.t.abs() * f.max(0.0).sqrt(),
            )
        }
        None => {
            let inv = symplectic_invariants(sigma);
            let (i1, i3, i4) = (inv.i1, inv.i3, inv.i4);
            let scale = i1 * i1 + i3 * i3 + i4.abs();
            let d = i1 * i1 + i3 * i3 - i4;
            if d < -DISCRIMINANT_TOL * scale {
                return Err(Error::Numerical(format!(
                    "I1² + I3² - I4 = {d:e} is negative"
                )));
            }
            let d = d.max(0.0);
            let cross = 2.0 * i1 * i3;
            let inner = d * d - cross * cross;
            if inner < -DISCRIMINANT_TOL * (d * d + cross * cross).max(f64::MIN_POSITIVE) {
                return Err(Error::Numerical(format!(
                    "inner discriminant {inner:e} is negative"
                )));
            }
            (i1, i3, d, inner.max(0.0).sqrt())
        }
    };
    if !(i1 > 0.0) {
        return Err(Error::Numerical(format!("det A = {i1} is not positive")));
    }
    let cp = ((d + root) / (2.0 * i1)).max(0.0).sqrt();
    // c₊c₋ = |I₃| gives c₋ without the subtraction
    let cm = if cp > 0.0 { i3.abs() / cp } else { 0.0 };
    let an = i1.sqrt();
    let prod = (an - cp) * (an - cm);
    if prod < -DISCRIMINANT_TOL * an * an {
        return Err(Error::Numerical(format!(
            "(a - c₊)(a - c₋) = {prod:e} is negative"
        )));
    }
    let kappa = prod.max(0.0).sqrt();
    if kappa >= 0.5 {
        return Ok((0.0, kappa));
    }
    if kappa == 0.0 {
        return Err(Error::Numerical(
            "minimum symplectic eigenvalue is zero".into(),
        ));
    }
    // x_m - ½ = (½ - κ)² / 2κ
    let delta = (0.5 - kappa).powi(2) / (2.0 * kappa);
    Ok((eof_function(delta), kappa))
}

/// `E₀(r) = 2[cosh²r ln cosh r - sinh²r ln sinh r]`.
pub fn entropy_of_entanglement(p: TwbParams) -> f64 {
    let r = p.r;
    if r <= 0.0 {
        return 0.0;
    }
    let (c, s) = (r.cosh(), r.sinh());
    2.0 * (c * c * c.ln() - s * s * s.ln())
}
