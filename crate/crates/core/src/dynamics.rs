//! Entanglement trajectories of a twin beam in two independent reservoirs,
//! and their classification into dynamical regimes.
//!
//! A trajectory holds the entanglement of formation under the full solution
//! and under the secular one (the rapidly rotating memory integrals
//! dropped), both built from one shared [`CoefficientSet`].
//!
//! Events are threshold crossings of the exact curve. The curve touches zero
//! tangentially in oscillating regimes, so a plain zero test would be at the
//! mercy of rounding; deaths and revivals are crossings of a small `eps`
//! instead, located by linear interpolation between grid points.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{
    compute_coefficients, uniform_grid, BuildOptions, CoefficientSet, SAMPLES_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::gaussian::{
    eof_symmetric, physicality, propagate_on_grid, twb_covariance, CovMatrix, TwbParams,
};
use crate::spectral::ReservoirSpec;

pub const DEFAULT_TAU_MAX: f64 = 10.0;
pub const DEFAULT_STEPS: usize = 2000;
pub const MIN_STEPS: usize = 16;

/// `max(1e-6, 1e-3·E₀)`
pub fn default_eps(e0: f64) -> f64 {
    1e-6_f64.max(1e-3 * e0)
}

/// Which of the two entanglement curves to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    Exact,
    Secular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau_grid: Vec<f64>,
    pub eof_exact: Vec<f64>,
    pub eof_secular: Vec<f64>,
    pub coeff_ref: CoefficientSet,
    /// `true` where the exact state satisfies the uncertainty relation.
    pub physicality_flags: Vec<bool>,
    /// The same for the secular state.
    pub secular_physical: Vec<bool>,
    pub spec: ReservoirSpec,
    pub twb: TwbParams,
    /// Steps asked for; the grid may be finer after refinement.
    pub requested_steps: usize,
    /// Samples (of either curve) whose matrix is not positive definite.
    /// No state has such a matrix; their entanglement is recorded as 0.
    pub undefined_eof: usize,
}

impl Trajectory {
    pub fn series(&self, which: Series) -> &[f64] {
        match which {
            Series::Exact => &self.eof_exact,
            Series::Secular => &self.eof_secular,
        }
    }

    pub fn physical(&self, which: Series) -> &[bool] {
        match which {
            Series::Exact => &self.physicality_flags,
            Series::Secular => &self.secular_physical,
        }
    }

    /// Times and values of `which` at the physical samples only. An
    /// unphysical matrix certifies nothing, so events are never placed on
    /// one.
    fn usable(&self, which: Series) -> (Vec<f64>, Vec<f64>) {
        self.tau_grid
            .iter()
            .zip(self.series(which))
            .zip(self.physical(which))
            .filter(|(_, ok)| **ok)
            .map(|((t, e), _)| (*t, *e))
            .unzip()
    }

    pub fn steps(&self) -> usize {
        self.tau_grid.len() - 1
    }

    pub fn refined(&self) -> bool {
        self.steps() != self.requested_steps
    }

    /// Number of samples flagged as unphysical.
    pub fn unphysical_count(&self) -> usize {
        self.physicality_flags.iter().filter(|f| !**f).count()
    }

    /// CSV with columns `tau, eof_exact, eof_secular, delta, gamma,
    /// physical_flag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,eof_exact,eof_secular,delta,gamma,physical_flag")?;
        for i in 0..self.tau_grid.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.tau_grid[i],
                self.eof_exact[i],
                self.eof_secular[i],
                self.coeff_ref.delta[i],
                self.coeff_ref.gamma_c[i],
                u8::from(self.physicality_flags[i])
            )?;
        }
        Ok(())
    }
}

/// Grid step needed to resolve the `2ω₀` rotation.
fn max_step(spec: &ReservoirSpec) -> f64 {
    std::f64::consts::PI * spec.x / SAMPLES_PER_PERIOD
}

/// Entanglement and physicality along a propagated series. The truncated
/// dynamics can leave the set of states altogether (the matrix stops being
/// positive definite); there the formula has no meaning and 0 is stored.
fn entanglement(states: &[CovMatrix]) -> Result<(Vec<f64>, Vec<bool>, usize)> {
    let mut eof = Vec::with_capacity(states.len());
    let mut flags = Vec::with_capacity(states.len());
    let mut undefined = 0;
    for sigma in states {
        let physical = physicality(sigma)?;
        let e = match eof_symmetric(sigma) {
            Ok(e) => e,
            Err(Error::Numerical(_)) if !physical => {
                undefined += 1;
                0.0
            }
            Err(e) => return Err(e),
        };
        eof.push(e);
        flags.push(physical);
    }
    Ok((eof, flags, undefined))
}

/// Compute the exact and secular entanglement curves on `[0, tau_max]`
/// with default coefficient options.
pub fn run_trajectory(
    spec: &ReservoirSpec,
    p: TwbParams,
    tau_max: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    run_trajectory_with(spec, p, tau_max, n_steps, &BuildOptions::default())
}

/// As [`run_trajectory`], with explicit coefficient options. A grid too
/// coarse for the `2ω₀` rotation is refined rather than rejected.
pub fn run_trajectory_with(
    spec: &ReservoirSpec,
    p: TwbParams,
    tau_max: f64,
    n_steps: usize,
    opts: &BuildOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    let p = TwbParams::new(p.r)?;
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::Domain(format!(
            "tau_max must be positive, got {tau_max}"
        )));
    }
    if n_steps < MIN_STEPS {
        return Err(Error::Domain(format!(
            "need at least {MIN_STEPS} steps, got {n_steps}"
        )));
    }
    let step = (tau_max / n_steps as f64).min(max_step(spec));
    let grid = uniform_grid(tau_max, step)?;
    let coeffs = compute_coefficients(spec, &grid, opts)?;
    let sigma0 = twb_covariance(p)?;
    let exact = propagate_on_grid(&sigma0, &coeffs, spec, false)?;
    let secular = propagate_on_grid(&sigma0, &coeffs, spec, true)?;
    let (eof_exact, physicality_flags, bad_exact) = entanglement(&exact)?;
    let (eof_secular, secular_physical, bad_secular) = entanglement(&secular)?;
    Ok(Trajectory {
        tau_grid: grid,
        eof_exact,
        eof_secular,
        coeff_ref: coeffs,
        physicality_flags,
        secular_physical,
        spec: *spec,
        twb: p,
        requested_steps: n_steps,
        undefined_eof: bad_exact + bad_secular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    NoDeath,
    #[serde(rename = "ESD")]
    Esd,
    #[serde(rename = "NMRev")]
    NmRev,
    #[serde(rename = "NSRev")]
    NsRev,
    Mixed,
}

/// Mechanism a revival is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attribution {
    /// The diffusion coefficient went negative between death and revival.
    CoeffNegative,
    /// It stayed positive: the revival comes from the non-secular terms.
    CoeffPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub label: Label,
    pub death_times: Vec<f64>,
    pub revival_times: Vec<f64>,
    pub attribution: Vec<Attribution>,
    /// Per revival: whether γ also went negative in the same window. Kept
    /// for auditing the attribution rule; not part of the report format.
    #[serde(skip)]
    pub gamma_negative: Vec<bool>,
}

impl RegimeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_eps(e0: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Threshold(format!("eps must be positive, got {eps}")));
    }
    if e0 > 0.0 && eps >= e0 {
        return Err(Error::Threshold(format!(
            "eps = {eps} is not below the initial entanglement {e0}"
        )));
    }
    Ok(())
}

fn no_physical_samples() -> Error {
    Error::Numerical("trajectory has no physical samples".into())
}

/// Time at which the segment between grid points `k-1` and `k` crosses `eps`.
fn crossing(tau: &[f64], e: &[f64], k: usize, eps: f64) -> f64 {
    let (t0, t1, e0, e1) = (tau[k - 1], tau[k], e[k - 1], e[k]);
    if e1 == e0 {
        return t1;
    }
    (t0 + (eps - e0) / (e1 - e0) * (t1 - t0)).clamp(t0, t1)
}

/// Downward and upward crossings of `eps`.
fn crossings(tau: &[f64], e: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
    let mut deaths = Vec::new();
    let mut revivals = Vec::new();
    let mut above = e[0] >= eps;
    for k in 1..e.len() {
        let now = e[k] >= eps;
        if above && !now {
            deaths.push(crossing(tau, e, k, eps));
        } else if !above && now {
            revivals.push(crossing(tau, e, k, eps));
        }
        above = now;
    }
    (deaths, revivals)
}

/// Whether `f` is negative anywhere on `[a, b]`: at the interior grid
/// points and at the interpolated end points.
fn negative_on(coeffs: &CoefficientSet, f: &[f64], a: f64, b: f64) -> bool {
    let g = &coeffs.tau_grid;
    let at = |t: f64| {
        let j = g.partition_point(|&s| s < t).min(g.len() - 1);
        if j == 0 || g[j] == t {
            return f[j];
        }
        let w = (t - g[j - 1]) / (g[j] - g[j - 1]);
        f[j - 1] + w * (f[j] - f[j - 1])
    };
    if at(a) < 0.0 || at(b) < 0.0 {
        return true;
    }
    g.iter().zip(f).any(|(&t, &v)| t > a && t < b && v < 0.0)
}

/// Deaths, revivals and regime of the exact curve.
pub fn detect_events(traj: &Trajectory, eps: f64) -> Result<RegimeReport> {
    detect_events_in(traj, Series::Exact, eps)
}

pub fn detect_events_in(traj: &Trajectory, which: Series, eps: f64) -> Result<RegimeReport> {
    let e0 = traj.series(which)[0];
    check_eps(e0, eps)?;
    if e0 == 0.0 {
        // never entangled: nothing can die
        return Ok(RegimeReport {
            label: Label::NoDeath,
            death_times: Vec::new(),
            revival_times: Vec::new(),
            attribution: Vec::new(),
            gamma_negative: Vec::new(),
        });
    }
    let (tau, e) = traj.usable(which);
    if e.is_empty() {
        return Err(no_physical_samples());
    }
    let (death_times, revival_times) = crossings(&tau, &e, eps);
    let c = &traj.coeff_ref;
    let mut attribution = Vec::with_capacity(revival_times.len());
    let mut gamma_negative = Vec::with_capacity(revival_times.len());
    for (d, r) in death_times.iter().zip(&revival_times) {
        attribution.push(if negative_on(c, &c.delta, *d, *r) {
            Attribution::CoeffNegative
        } else {
            Attribution::CoeffPositive
        });
        gamma_negative.push(negative_on(c, &c.gamma_c, *d, *r));
    }
    let label = if death_times.is_empty() {
        Label::NoDeath
    } else if attribution.is_empty() {
        Label::Esd
    } else if attribution.iter().all(|a| *a == Attribution::CoeffNegative) {
        Label::NmRev
    } else if attribution.iter().all(|a| *a == Attribution::CoeffPositive) {
        Label::NsRev
    } else {
        Label::Mixed
    };
    Ok(RegimeReport {
        label,
        death_times,
        revival_times,
        attribution,
        gamma_negative,
    })
}

/// Last death after which the exact curve stays below `eps`; `None` when
/// still entangled at the end of the run, `Some(0)` for a state that was
/// never entangled.
pub fn disentanglement_time(traj: &Trajectory, eps: f64) -> Result<Option<f64>> {
    disentanglement_time_in(traj, Series::Exact, eps)
}

pub fn disentanglement_time_in(traj: &Trajectory, which: Series, eps: f64) -> Result<Option<f64>> {
    let e0 = traj.series(which)[0];
    check_eps(e0, eps)?;
    if e0 == 0.0 {
        return Ok(Some(0.0));
    }
    let (tau, e) = traj.usable(which);
    if *e.last().ok_or_else(no_physical_samples)? >= eps {
        return Ok(None);
    }
    let (deaths, _) = crossings(&tau, &e, eps);
    Ok(deaths.last().copied())
}

/// One entry of a [`sweep`].
#[derive(Debug)]
pub struct SweepItem {
    pub spec: ReservoirSpec,
    pub r: f64,
    pub result: Result<(RegimeReport, Trajectory)>,
}

/// Every `(spec, r)` pair in `specs × rs`, computed in parallel. Output
/// order follows the input order (specs outer, `rs` inner); a failing item
/// carries its error without stopping the others.
pub fn sweep(
    specs: &[ReservoirSpec],
    rs: &[f64],
    tau_max: f64,
    n_steps: usize,
) -> Result<Vec<SweepItem>> {
    sweep_with(specs, rs, tau_max, n_steps, &BuildOptions::default())
}

/// As [`sweep`], with explicit coefficient options.
pub fn sweep_with(
    specs: &[ReservoirSpec],
    rs: &[f64],
    tau_max: f64,
    n_steps: usize,
    opts: &BuildOptions,
) -> Result<Vec<SweepItem>> {
    if specs.is_empty() || rs.is_empty() {
        return Err(Error::Domain(
            "sweep needs at least one spec and one squeezing".into(),
        ));
    }
    let jobs: Vec<(ReservoirSpec, f64)> = specs
        .iter()
        .flat_map(|s| rs.iter().map(move |r| (*s, *r)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(spec, r)| {
            let result = TwbParams::new(r)
                .and_then(|p| run_trajectory_with(&spec, p, tau_max, n_steps, opts))
                .and_then(|t| {
                    let eps = default_eps(t.eof_exact[0]);
                    Ok((detect_events(&t, eps)?, t))
                });
            SweepItem { spec, r, result }
        })
        .collect())
}
