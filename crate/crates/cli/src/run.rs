//! Execution of a validated configuration.

use std::path::{Path, PathBuf};

use cvdyn::coeffs::{
    compute_coefficients, uniform_grid, BuildOptions, CoefficientSet, SAMPLES_PER_PERIOD,
};
use cvdyn::dynamics::{
    default_eps, detect_events_in, disentanglement_time_in, run_trajectory_with, sweep_with,
    Series, Trajectory,
};
use cvdyn::gaussian::TwbParams;
use cvdyn::spectral::{ReservoirSpec, Temperature};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, Mode, RunConfig, SecularChoice};
use crate::output::{meta_path, with_suffix, write_atomic};

pub const UNITS: &str = "hbar = k_B = omega_c = 1; tau = omega_c t; x = omega_c/omega_0; \
theta = k_B T/(hbar omega_c); entanglement of formation in nats";

#[derive(Debug)]
pub enum Failure {
    Numerical(cvdyn::Error),
    Io(PathBuf, std::io::Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Numerical(e) => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<cvdyn::Error> for Failure {
    fn from(e: cvdyn::Error) -> Self {
        Failure::Numerical(e)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn options(cfg: &RunConfig) -> BuildOptions {
    BuildOptions {
        truncation: cfg.truncation,
        ..BuildOptions::default()
    }
}

fn series_of(choice: SecularChoice) -> &'static [(Series, &'static str)] {
    match choice {
        SecularChoice::Exact => &[(Series::Exact, "exact")],
        SecularChoice::Secular => &[(Series::Secular, "secular")],
        SecularChoice::Both => &[(Series::Exact, "exact"), (Series::Secular, "secular")],
    }
}

fn temperature_json(t: Temperature) -> Value {
    match t {
        Temperature::High { theta } => json!({"regime": "high", "theta": theta}),
        Temperature::Zero => json!({"regime": "zero"}),
    }
}

fn spec_json(s: &ReservoirSpec) -> Value {
    json!({
        "spectrum": s.family.name(),
        "x": s.x,
        "alpha": s.alpha,
        "temperature": temperature_json(s.temp),
        "theta_x": s.theta_x(),
    })
}

fn fallbacks_json(c: &CoefficientSet) -> Value {
    json!(c
        .fallbacks
        .iter()
        .map(|f| json!({"tau": f.tau, "cancellation": f.cancellation}))
        .collect::<Vec<_>>())
}

/// Regime reports of the requested curves, with the γ audit and the
/// disentanglement times.
fn reports(t: &Trajectory, choice: SecularChoice) -> Result<Value, Failure> {
    let mut out = serde_json::Map::new();
    for &(which, name) in series_of(choice) {
        let eps = default_eps(t.series(which)[0]);
        let rep = detect_events_in(t, which, eps)?;
        let t_dis = disentanglement_time_in(t, which, eps)?;
        let mut v = serde_json::to_value(&rep).expect("report serializes");
        v["eps"] = json!(eps);
        v["disentanglement_time"] = json!(t_dis);
        v["gamma_negative"] = json!(rep.gamma_negative);
        out.insert(name.to_string(), v);
    }
    Ok(Value::Object(out))
}

fn trajectory_meta(t: &Trajectory, choice: SecularChoice, file: &Path) -> Result<Value, Failure> {
    let first_bad = t
        .physicality_flags
        .iter()
        .position(|ok| !ok)
        .map(|i| t.tau_grid[i]);
    Ok(json!({
        "file": file.file_name().map(|n| n.to_string_lossy().into_owned()),
        "reservoir": spec_json(&t.spec),
        "r": t.twb.r,
        "steps_requested": t.requested_steps,
        "steps_used": t.steps(),
        "grid_refined": t.refined(),
        "events": reports(t, choice)?,
        "physicality": {
            "unphysical_samples": t.unphysical_count(),
            "first_unphysical_tau": first_bad,
            "undefined_eof_samples": t.undefined_eof,
        },
        "oracle_fallbacks": fallbacks_json(&t.coeff_ref),
    }))
}

fn trajectory_json(t: &Trajectory, choice: SecularChoice) -> Result<Vec<u8>, Failure> {
    let mut v = json!({
        "tau": t.tau_grid,
        "delta": t.coeff_ref.delta,
        "gamma": t.coeff_ref.gamma_c,
        "physical_flag": t.physicality_flags,
    });
    for &(which, name) in series_of(choice) {
        v[format!("eof_{name}")] = json!(t.series(which));
    }
    v["events"] = reports(t, choice)?;
    Ok(pretty(&v))
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn trajectory_bytes(t: &Trajectory, cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).expect("writing to memory");
            Ok(buf)
        }
        Format::Json => trajectory_json(t, cfg.secular),
    }
}

fn ext(cfg: &RunConfig) -> &'static str {
    match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Everything a run produced, for the sidecar.
struct Outcome {
    records: Vec<Value>,
    warnings: Vec<String>,
}

fn run_trajectories(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let specs = cfg.specs();
    let p = TwbParams::new(cfg.rs[0])?;
    let opts = options(cfg);
    let trajs: Vec<Trajectory> = specs
        .par_iter()
        .map(|s| run_trajectory_with(s, p, cfg.tau_max, cfg.steps, &opts))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for t in &trajs {
        let path = if trajs.len() == 1 {
            cfg.output.clone()
        } else {
            with_suffix(&cfg.output, t.spec.family.name(), ext(cfg))
        };
        write(&path, &trajectory_bytes(t, cfg)?)?;
        let family = t.spec.family;
        if t.refined() {
            warnings.push(format!(
                "{family}: grid refined to {} steps to resolve the 2ω₀ rotation",
                t.steps()
            ));
        }
        if t.unphysical_count() > 0 {
            warnings.push(format!(
                "{family}: {} samples violate the uncertainty relation; events ignore them",
                t.unphysical_count()
            ));
        }
        records.push(trajectory_meta(t, cfg.secular, &path)?);
    }
    Ok(Outcome { records, warnings })
}

fn fmt_times(v: &[f64]) -> String {
    v.iter()
        .map(|t| format!("{t:.16e}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|t| format!("{t:.16e}")).unwrap_or_default()
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let items = sweep_with(&cfg.specs(), &cfg.rs, cfg.tau_max, cfg.steps, &options(cfg))?;
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    let mut csv = String::from(
        "spectrum,r,label,death_times,revival_times,t_dis_exact,t_dis_secular,error\n",
    );
    for item in &items {
        let name = item.spec.family.name();
        match &item.result {
            Ok((rep, t)) => {
                let eps = default_eps(t.eof_exact[0]);
                let exact = disentanglement_time_in(t, Series::Exact, eps)?;
                let secular =
                    disentanglement_time_in(t, Series::Secular, default_eps(t.eof_secular[0]))?;
                let label = serde_json::to_value(rep.label).expect("label serializes");
                csv.push_str(&format!(
                    "{name},{:.16e},{},{},{},{},{},\n",
                    item.r,
                    label.as_str().unwrap_or_default(),
                    fmt_times(&rep.death_times),
                    fmt_times(&rep.revival_times),
                    fmt_opt(exact),
                    fmt_opt(secular)
                ));
                let mut v = serde_json::to_value(rep).expect("report serializes");
                v["spectrum"] = json!(name);
                v["r"] = json!(item.r);
                v["t_dis_exact"] = json!(exact);
                v["t_dis_secular"] = json!(secular);
                v["gamma_negative"] = json!(rep.gamma_negative);
                v["unphysical_samples"] = json!(t.unphysical_count());
                v["oracle_fallbacks"] = json!(t.coeff_ref.fallbacks.len());
                rows.push(v);
            }
            Err(e) => {
                warnings.push(format!("{name}, r = {}: {e}", item.r));
                csv.push_str(&format!("{name},{:.16e},,,,,,\"{e}\"\n", item.r));
                rows.push(json!({"spectrum": name, "r": item.r, "error": e.to_string()}));
            }
        }
    }
    let bytes = match cfg.format {
        Format::Csv => csv.into_bytes(),
        Format::Json => pretty(&json!(rows)),
    };
    write(&cfg.output, &bytes)?;
    Ok(Outcome {
        records: rows,
        warnings,
    })
}

fn run_coeffs(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = cfg.specs()[0];
    let step =
        (cfg.tau_max / cfg.steps as f64).min(std::f64::consts::PI * spec.x / SAMPLES_PER_PERIOD);
    let grid = uniform_grid(cfg.tau_max, step)?;
    let c = compute_coefficients(&spec, &grid, &options(cfg))?;
    let bytes = match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            c.write_csv(&mut buf).expect("writing to memory");
            buf
        }
        Format::Json => pretty(&serde_json::to_value(&c).expect("coefficients serialize")),
    };
    write(&cfg.output, &bytes)?;
    Ok(Outcome {
        records: vec![json!({
            "file": cfg.output.file_name().map(|n| n.to_string_lossy().into_owned()),
            "reservoir": spec_json(&spec),
            "steps_used": grid.len() - 1,
            "oracle_fallbacks": fallbacks_json(&c),
        })],
        warnings: Vec::new(),
    })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Trajectory => "trajectory",
        Mode::Sweep => "sweep",
        Mode::CoeffsDump => "coeffs-dump",
        Mode::Figure => "figure",
    }
}

/// Execute `cfg`, write the data files and the sidecar metadata.
pub fn run(cfg: &RunConfig) -> Result<Vec<String>, Failure> {
    let mut outcome = match cfg.mode {
        Mode::Trajectory | Mode::Figure => run_trajectories(cfg)?,
        Mode::Sweep => run_sweep(cfg)?,
        Mode::CoeffsDump => run_coeffs(cfg)?,
    };
    let alpha_warning = cfg.specs().iter().any(|s| s.weak_coupling_warning());
    if alpha_warning {
        outcome.warnings.insert(
            0,
            format!(
                "alpha = {} is outside the weak-coupling range; results carry O(alpha^4) errors",
                cfg.alpha
            ),
        );
    }
    let meta = json!({
        "software": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "units": UNITS,
        "parameters": {
            "mode": mode_name(cfg.mode),
            "figure": cfg.figure,
            "spectra": cfg.families.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "x": cfg.x,
            "alpha": cfg.alpha,
            "temperature": temperature_json(cfg.temp),
            "r": cfg.rs,
            "tau_max": cfg.tau_max,
            "steps": cfg.steps,
            "secular": format!("{:?}", cfg.secular).to_lowercase(),
            "truncation": serde_json::to_value(cfg.truncation).expect("truncation serializes"),
            "format": ext(cfg),
            "threads": cfg.threads,
        },
        "weak_coupling_warning": alpha_warning,
        "warnings": outcome.warnings,
        "results": outcome.records,
    });
    write(&meta_path(&cfg.output), &pretty(&meta))?;
    Ok(outcome.warnings)
}
