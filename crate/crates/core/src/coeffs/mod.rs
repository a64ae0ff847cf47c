//! Time-dependent master-equation coefficients.
//!
//! Two independent routes are provided. [`closed_form`] evaluates the
//! analytic expressions for the three spectral families in the two
//! temperature limits; [`oracle`] integrates the defining double integrals
//! numerically. [`compute_coefficients`] fills a whole [`CoefficientSet`]
//! on a time grid, falling back to the oracle wherever the closed form
//! loses more than six digits to cancellation.

mod closed;
pub mod oracle;
mod secular;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ReservoirSpec;

pub use closed::{closed_form, delta_closed, gamma_closed, pi_closed, ClosedEval, RESIDUE_TOL};
pub use oracle::{coeff_oracle, oracle_all, oracle_series, OracleOptions};
pub use secular::{
    cumulative_integral, integrate_big_gamma, memory_integral, secular_integrals, Truncation,
    SAMPLES_PER_PERIOD,
};

/// Cancellation ratio above which a closed-form value is replaced by the
/// oracle.
pub const CANCELLATION_LIMIT: f64 = 1e6;

/// Selects one of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Delta,
    Pi,
    Gamma,
    /// Frequency renormalisation `r(τ)`.
    Rren,
}

impl Which {
    pub(crate) fn index(self) -> usize {
        match self {
            Which::Delta => 0,
            Which::Pi => 1,
            Which::Gamma => 2,
            Which::Rren => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffMethod {
    #[default]
    ClosedForm,
    QuadratureOracle,
}

/// A grid point where the closed form was replaced by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fallback {
    pub tau: f64,
    /// Worst cancellation ratio among Δ, Π, γ at this point.
    pub cancellation: f64,
}

/// Coefficient series on a common time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub tau_grid: Vec<f64>,
    pub delta: Vec<f64>,
    pub pi_c: Vec<f64>,
    pub gamma_c: Vec<f64>,
    pub big_gamma: Vec<f64>,
    pub delta_gamma: Vec<f64>,
    pub delta_co: Vec<f64>,
    pub delta_si: Vec<f64>,
    pub pi_co: Vec<f64>,
    pub pi_si: Vec<f64>,
    /// Oracle-only diagnostic; never used for propagation.
    pub r_renorm: Option<Vec<f64>>,
    pub method: CoeffMethod,
    pub truncation: Truncation,
    pub fallbacks: Vec<Fallback>,
}

/// All coefficient quantities at a single time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoeffSample {
    pub delta: f64,
    pub pi_c: f64,
    pub gamma_c: f64,
    pub big_gamma: f64,
    pub delta_gamma: f64,
    pub delta_co: f64,
    pub delta_si: f64,
    pub pi_co: f64,
    pub pi_si: f64,
}

impl CoefficientSet {
    /// A set holding only `Δ`, `Π`, `γ`; the integrated quantities are
    /// zero until [`integrate_big_gamma`] and [`secular_integrals`] run.
    pub fn from_series(
        tau_grid: Vec<f64>,
        delta: Vec<f64>,
        pi_c: Vec<f64>,
        gamma_c: Vec<f64>,
    ) -> Result<Self> {
        let n = tau_grid.len();
        if delta.len() != n || pi_c.len() != n || gamma_c.len() != n {
            return Err(Error::Grid(
                "coefficient series must match the grid length".into(),
            ));
        }
        check_grid(&tau_grid)?;
        Ok(Self {
            tau_grid,
            delta,
            pi_c,
            gamma_c,
            big_gamma: vec![0.0; n],
            delta_gamma: vec![0.0; n],
            delta_co: vec![0.0; n],
            delta_si: vec![0.0; n],
            pi_co: vec![0.0; n],
            pi_si: vec![0.0; n],
            r_renorm: None,
            method: CoeffMethod::ClosedForm,
            truncation: Truncation::Exact,
            fallbacks: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    fn row(&self, i: usize) -> CoeffSample {
        CoeffSample {
            delta: self.delta[i],
            pi_c: self.pi_c[i],
            gamma_c: self.gamma_c[i],
            big_gamma: self.big_gamma[i],
            delta_gamma: self.delta_gamma[i],
            delta_co: self.delta_co[i],
            delta_si: self.delta_si[i],
            pi_co: self.pi_co[i],
            pi_si: self.pi_si[i],
        }
    }

    /// Quantities at grid index `i`.
    pub fn at_index(&self, i: usize) -> Result<CoeffSample> {
        if i >= self.len() {
            return Err(Error::Grid(format!(
                "index {i} outside grid of {} points",
                self.len()
            )));
        }
        Ok(self.row(i))
    }

    /// Quantities at time `tau`: exact on grid points, linearly interpolated
    /// in between.
    pub fn sample(&self, tau: f64) -> Result<CoeffSample> {
        let g = &self.tau_grid;
        let (first, last) = match (g.first(), g.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::Grid("empty coefficient grid".into())),
        };
        if !(tau >= first && tau <= last) {
            return Err(Error::Grid(format!(
                "tau = {tau} outside grid [{first}, {last}]"
            )));
        }
        let j = g.partition_point(|&t| t < tau);
        if g[j] == tau {
            return Ok(self.row(j));
        }
        let (a, b) = (self.row(j - 1), self.row(j));
        let w = (tau - g[j - 1]) / (g[j] - g[j - 1]);
        let lerp = |p: f64, q: f64| p + w * (q - p);
        Ok(CoeffSample {
            delta: lerp(a.delta, b.delta),
            pi_c: lerp(a.pi_c, b.pi_c),
            gamma_c: lerp(a.gamma_c, b.gamma_c),
            big_gamma: lerp(a.big_gamma, b.big_gamma),
            delta_gamma: lerp(a.delta_gamma, b.delta_gamma),
            delta_co: lerp(a.delta_co, b.delta_co),
            delta_si: lerp(a.delta_si, b.delta_si),
            pi_co: lerp(a.pi_co, b.pi_co),
            pi_si: lerp(a.pi_si, b.pi_si),
        })
    }

    /// CSV dump: header row, one line per grid point, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "tau,delta,pi,gamma,big_gamma,delta_gamma,delta_co,delta_si,pi_co,pi_si"
        )?;
        for i in 0..self.len() {
            let r = self.row(i);
            let cols = [
                self.tau_grid[i],
                r.delta,
                r.pi_c,
                r.gamma_c,
                r.big_gamma,
                r.delta_gamma,
                r.delta_co,
                r.delta_si,
                r.pi_co,
                r.pi_si,
            ];
            let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::Grid(format!(
            "grid must start at 0, starts at {}",
            grid[0]
        )));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::Grid(format!(
                "grid not strictly ascending near {}",
                w[0]
            )));
        }
    }
    Ok(())
}

/// Default grid step: at most 0.01 and at least 20 samples per period of
/// the `2ω₀` oscillation.
pub fn default_step(x: f64) -> f64 {
    0.01_f64.min(x / 40.0)
}

/// Uniform grid `0, h, ..., tau_max` with `h ≤ max_step`.
pub fn uniform_grid(tau_max: f64, max_step: f64) -> Result<Vec<f64>> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::Domain(format!(
            "tau_max must be positive, got {tau_max}"
        )));
    }
    if !(max_step > 0.0) {
        return Err(Error::Domain(format!(
            "step must be positive, got {max_step}"
        )));
    }
    let n = ((tau_max / max_step).ceil() as usize).max(2);
    Ok((0..=n).map(|i| tau_max * i as f64 / n as f64).collect())
}

/// Options for [`compute_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub method: CoeffMethod,
    pub truncation: Truncation,
    pub cancellation_limit: f64,
    pub oracle: OracleOptions,
    /// Also compute `r(τ)` with the oracle (slow).
    pub with_rren: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            method: CoeffMethod::ClosedForm,
            truncation: Truncation::Exact,
            cancellation_limit: CANCELLATION_LIMIT,
            oracle: OracleOptions::default(),
            with_rren: false,
        }
    }
}

/// Δ, Π, γ at one point from the closed forms, with oracle fallback.
fn closed_point(
    spec: &ReservoirSpec,
    tau: f64,
    opts: &BuildOptions,
) -> Result<([f64; 3], Option<Fallback>)> {
    let d = closed_form(spec, tau, Which::Delta)?;
    let p = closed_form(spec, tau, Which::Pi)?;
    let g = closed_form(spec, tau, Which::Gamma)?;
    let worst = d.cancellation.max(p.cancellation).max(g.cancellation);
    if tau > 0.0 && worst > opts.cancellation_limit {
        let o = oracle_all(spec, tau, &opts.oracle)?;
        return Ok((
            [o[0], o[1], o[2]],
            Some(Fallback {
                tau,
                cancellation: worst,
            }),
        ));
    }
    Ok(([d.value, p.value, g.value], None))
}

/// Build the full coefficient set on `grid`: Δ, Π, γ, then Γ and the
/// memory integrals.
pub fn compute_coefficients(
    spec: &ReservoirSpec,
    grid: &[f64],
    opts: &BuildOptions,
) -> Result<CoefficientSet> {
    spec.validate()?;
    check_grid(grid)?;
    let n = grid.len();
    let (mut delta, mut pi_c, mut gamma_c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut fallbacks = Vec::new();
    let mut rren = None;
    match opts.method {
        CoeffMethod::ClosedForm => {
            let pts: Vec<_> = grid
                .par_iter()
                .map(|&t| closed_point(spec, t, opts))
                .collect();
            for (i, r) in pts.into_iter().enumerate() {
                let (v, fb) = r?;
                delta[i] = v[0];
                pi_c[i] = v[1];
                gamma_c[i] = v[2];
                fallbacks.extend(fb);
            }
            if opts.with_rren {
                let o = oracle_series(spec, grid, &opts.oracle)?;
                rren = Some(o.iter().map(|v| v[3]).collect());
            }
        }
        CoeffMethod::QuadratureOracle => {
            let o = oracle_series(spec, grid, &opts.oracle)?;
            for (i, v) in o.iter().enumerate() {
                delta[i] = v[0];
                pi_c[i] = v[1];
                gamma_c[i] = v[2];
            }
            if opts.with_rren {
                rren = Some(o.iter().map(|v| v[3]).collect());
            }
        }
    }
    let mut set = CoefficientSet::from_series(grid.to_vec(), delta, pi_c, gamma_c)?;
    set.method = opts.method;
    set.fallbacks = fallbacks;
    set.r_renorm = rren;
    let set = integrate_big_gamma(set)?;
    secular_integrals(set, spec, opts.truncation)
}
