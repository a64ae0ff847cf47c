//! Run configuration: command-line flags over an optional `key=value` file,
//! validated in one pass so that every problem is reported at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use cvdyn::coeffs::Truncation;
use cvdyn::dynamics::{DEFAULT_STEPS, DEFAULT_TAU_MAX, MIN_STEPS};
use cvdyn::spectral::{Family, ReservoirSpec, Temperature};

/// Every flag is kept as text so that command line and file values go
/// through the same validation.
#[derive(Debug, Default, Parser)]
#[command(
    name = "cvdyn",
    version,
    about = "Entanglement dynamics of two oscillators in structured reservoirs"
)]
pub struct Cli {
    /// trajectory, sweep, coeffs-dump or figure
    #[arg(long)]
    pub mode: Option<String>,
    /// ohmic, subohmic or superohmic (comma-separated list in sweep mode)
    #[arg(long)]
    pub spectrum: Option<String>,
    /// Cutoff ratio ω_c/ω₀
    #[arg(long)]
    pub x: Option<String>,
    /// Coupling strength (default 0.1)
    #[arg(long)]
    pub alpha: Option<String>,
    /// high:<theta> or zero
    #[arg(long)]
    pub temperature: Option<String>,
    /// Squeezing (comma-separated list in sweep mode)
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long = "tau-max")]
    pub tau_max: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// exact, secular or both
    #[arg(long)]
    pub secular: Option<String>,
    /// exact or weak-leading
    #[arg(long)]
    pub truncation: Option<String>,
    /// Figure preset, e.g. fig3
    #[arg(long)]
    pub figure: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Flat key=value file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps and multi-spectrum figures
    #[arg(long)]
    pub threads: Option<String>,
}

pub const KEYS: [&str; 14] = [
    "mode",
    "spectrum",
    "x",
    "alpha",
    "temperature",
    "r",
    "tau-max",
    "steps",
    "secular",
    "truncation",
    "figure",
    "output",
    "format",
    "threads",
];

pub const DEFAULT_ALPHA: f64 = 0.1;

impl Cli {
    fn pairs(&self) -> [(&'static str, &Option<String>); 14] {
        [
            ("mode", &self.mode),
            ("spectrum", &self.spectrum),
            ("x", &self.x),
            ("alpha", &self.alpha),
            ("temperature", &self.temperature),
            ("r", &self.r),
            ("tau-max", &self.tau_max),
            ("steps", &self.steps),
            ("secular", &self.secular),
            ("truncation", &self.truncation),
            ("figure", &self.figure),
            ("output", &self.output),
            ("format", &self.format),
            ("threads", &self.threads),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Trajectory,
    Sweep,
    CoeffsDump,
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecularChoice {
    Exact,
    Secular,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Parameters pinned by a figure caption.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: &'static str,
    pub families: Vec<Family>,
    pub x: f64,
    pub temp: Temperature,
    pub r: f64,
    pub tau_max: f64,
    pub secular: SecularChoice,
}

const HOT: Temperature = Temperature::High { theta: 100.0 };

pub const FIGURES: [&str; 12] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "fig7",
    "fig8",
];

/// Caption parameters of each figure. The coupling is 0.1 throughout.
/// Horizons: 6 for the x = 10 high-temperature comparisons, 10 otherwise.
#[rustfmt::skip]
pub fn preset(id: &str) -> Option<FigurePreset> {
    use Family::*;
    use SecularChoice::{Both, Exact, Secular};
    const ZERO: Temperature = Temperature::Zero;
    let all = || Family::ALL.to_vec();
    let (id, families, x, temp, r, tau_max, secular) = match id {
        "fig1a" => ("fig1a", vec![Ohmic],      10.0, HOT,  2.0,   6.0,  Both),
        "fig1b" => ("fig1b", vec![Ohmic],      10.0, HOT,  0.5,   6.0,  Both),
        "fig2a" => ("fig2a", vec![Ohmic],      0.2,  HOT,  1.0,   10.0, Both),
        "fig2b" => ("fig2b", vec![Ohmic],      0.2,  HOT,  0.1,   10.0, Both),
        "fig3"  => ("fig3",  vec![SuperOhmic], 0.3,  ZERO, 0.01,  10.0, Both),
        "fig4a" => ("fig4a", all(),            10.0, HOT,  2.0,   6.0,  Secular),
        "fig4b" => ("fig4b", all(),            10.0, HOT,  2.0,   6.0,  Exact),
        "fig5a" => ("fig5a", all(),            0.2,  ZERO, 0.005, 10.0, Exact),
        "fig5b" => ("fig5b", all(),            10.0, ZERO, 0.01,  10.0, Exact),
        "fig6"  => ("fig6",  vec![Ohmic],      0.15, HOT,  0.06,  10.0, Exact),
        "fig7"  => ("fig7",  vec![SubOhmic],   0.3,  HOT,  2.0,   10.0, Both),
        "fig8"  => ("fig8",  all(),            0.2,  HOT,  2.0,   10.0, Exact),
        _ => return None,
    };
    Some(FigurePreset { id, families, x, temp, r, tau_max, secular })
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub families: Vec<Family>,
    pub x: f64,
    pub alpha: f64,
    pub temp: Temperature,
    pub rs: Vec<f64>,
    pub tau_max: f64,
    pub steps: usize,
    pub secular: SecularChoice,
    pub truncation: Truncation,
    pub figure: Option<&'static str>,
    pub output: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn specs(&self) -> Vec<ReservoirSpec> {
        self.families
            .iter()
            .map(|&f| ReservoirSpec {
                family: f,
                x: self.x,
                alpha: self.alpha,
                temp: self.temp,
            })
            .collect()
    }
}

/// All validation failures of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub Vec<String>);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl std::error::Error for UsageError {}

/// Parse a flat `key=value` file. Blank lines and `#` comments are
/// skipped; keys use the flag spelling (`tau-max`, also `tau_max`).
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!(
                "config line {}: expected key=value, got '{line}'",
                n + 1
            ));
            continue;
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            errors.push(format!("config line {}: unknown key '{}'", n + 1, k.trim()));
            continue;
        }
        map.insert(key, v.trim().to_string());
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(UsageError(errors))
    }
}

/// Merge flags over file values and validate the result.
pub fn parse_config(cli: &Cli, file: Option<&str>) -> Result<RunConfig, UsageError> {
    let mut raw = match file {
        Some(text) => parse_file(text)?,
        None => BTreeMap::new(),
    };
    for (k, v) in cli.pairs() {
        if let Some(v) = v {
            raw.insert(k.to_string(), v.clone());
        }
    }
    validate(&raw)
}

struct Checker<'a> {
    raw: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn fail(&mut self, key: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{key}: {msg}"));
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let v = self.get(key)?;
        match v.parse() {
            Ok(t) => Some(t),
            Err(_) => {
                self.fail(key, format!("expected {what}, got '{v}'"));
                None
            }
        }
    }

    fn required<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        if self.get(key).is_none() {
            self.fail(key, "required");
            return None;
        }
        self.parsed(key, what)
    }

    fn list<T: FromStr>(&mut self, key: &str, what: &str) -> Option<Vec<T>> {
        let Some(v) = self.get(key) else {
            self.fail(key, "required");
            return None;
        };
        let mut out = Vec::new();
        for item in v.split(',') {
            match item.trim().parse() {
                Ok(t) => out.push(t),
                Err(_) => {
                    self.fail(key, format!("expected {what}, got '{}'", item.trim()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn choice<T: Copy>(
        &mut self,
        key: &str,
        options: &[(&str, T)],
        default: Option<T>,
    ) -> Option<T> {
        let Some(v) = self.get(key) else {
            if default.is_none() {
                self.fail(key, "required");
            }
            return default;
        };
        match options
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(v))
        {
            Some((_, t)) => Some(*t),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.fail(
                    key,
                    format!("expected one of {}, got '{v}'", names.join(", ")),
                );
                None
            }
        }
    }
}

const PINNED: [&str; 6] = ["spectrum", "x", "alpha", "temperature", "r", "secular"];

fn validate(raw: &BTreeMap<String, String>) -> Result<RunConfig, UsageError> {
    let mut c = Checker {
        raw,
        errors: Vec::new(),
    };
    let mode = c.choice(
        "mode",
        &[
            ("trajectory", Mode::Trajectory),
            ("sweep", Mode::Sweep),
            ("coeffs-dump", Mode::CoeffsDump),
            ("figure", Mode::Figure),
        ],
        None,
    );
    let format = c.choice(
        "format",
        &[("csv", Format::Csv), ("json", Format::Json)],
        Some(Format::Csv),
    );
    let truncation = c.choice(
        "truncation",
        &[
            ("exact", Truncation::Exact),
            ("weak-leading", Truncation::WeakCouplingLeading),
        ],
        Some(Truncation::Exact),
    );
    let output = match c.get("output") {
        Some(p) if !p.is_empty() => Some(PathBuf::from(p)),
        _ => {
            c.fail("output", "required");
            None
        }
    };
    let threads = match c.parsed::<usize>("threads", "a positive integer") {
        Some(0) => {
            c.fail("threads", "must be at least 1");
            None
        }
        t => t,
    };
    let steps = match c.parsed::<usize>("steps", "an integer") {
        Some(n) if n < MIN_STEPS => {
            c.fail("steps", format!("must be at least {MIN_STEPS}"));
            None
        }
        Some(n) => Some(n),
        None => Some(DEFAULT_STEPS),
    };
    let tau_max_given = c.parsed::<f64>("tau-max", "a number");
    if let Some(t) = tau_max_given {
        if !(t > 0.0 && t.is_finite()) {
            c.fail("tau-max", "must be positive");
        }
    }

    let mut figure = None;
    let (families, x, alpha, temp, rs, secular, tau_max);
    if mode == Some(Mode::Figure) {
        for key in PINNED {
            if c.get(key).is_some() {
                c.fail(key, "fixed by the figure preset");
            }
        }
        let p = match c.get("figure") {
            None => {
                c.fail("figure", "required in figure mode");
                None
            }
            Some(id) => match preset(id) {
                Some(p) => Some(p),
                None => {
                    c.fail(
                        "figure",
                        format!(
                            "unknown preset '{id}' (expected one of {})",
                            FIGURES.join(", ")
                        ),
                    );
                    None
                }
            },
        };
        figure = p.as_ref().map(|p| p.id);
        families = p.as_ref().map(|p| p.families.clone());
        x = p.as_ref().map(|p| p.x);
        alpha = Some(DEFAULT_ALPHA);
        temp = p.as_ref().map(|p| p.temp);
        rs = p.as_ref().map(|p| vec![p.r]);
        secular = p.as_ref().map(|p| p.secular);
        tau_max = tau_max_given.or(p.as_ref().map(|p| p.tau_max));
    } else {
        if c.get("figure").is_some() && mode.is_some() {
            c.fail("figure", "only valid in figure mode");
        }
        families = c.list::<Family>("spectrum", "ohmic, subohmic or superohmic");
        x = c.required::<f64>("x", "a number");
        alpha = match c.get("alpha") {
            None => Some(DEFAULT_ALPHA),
            Some(_) => c.parsed("alpha", "a number"),
        };
        temp = c.required::<Temperature>("temperature", "'zero' or 'high:<theta>'");
        rs = if mode == Some(Mode::CoeffsDump) {
            if c.get("r").is_some() {
                c.fail("r", "not used in coeffs-dump mode");
            }
            Some(Vec::new())
        } else {
            c.list::<f64>("r", "a number")
        };
        secular = c.choice(
            "secular",
            &[
                ("exact", SecularChoice::Exact),
                ("secular", SecularChoice::Secular),
                ("both", SecularChoice::Both),
            ],
            Some(SecularChoice::Both),
        );
        tau_max = tau_max_given.or(Some(DEFAULT_TAU_MAX));
        if matches!(mode, Some(Mode::Trajectory) | Some(Mode::CoeffsDump)) {
            if families.as_ref().is_some_and(|f| f.len() != 1) {
                c.fail("spectrum", "exactly one spectrum outside sweep mode");
            }
            if mode == Some(Mode::Trajectory) && rs.as_ref().is_some_and(|r| r.len() != 1) {
                c.fail("r", "exactly one value outside sweep mode");
            }
        }
    }

    // physical ranges, checked through the library's own guards
    if let (Some(fs), Some(x), Some(alpha), Some(temp)) = (&families, x, alpha, temp) {
        if let Some(&f) = fs.first() {
            if let Err(e) = ReservoirSpec::new(f, x, alpha, temp) {
                c.errors.push(format!("reservoir: {e}"));
            }
        }
    }
    if let Some(rs) = &rs {
        for r in rs {
            if !(*r >= 0.0 && r.is_finite()) {
                c.fail(
                    "r",
                    format!("squeezing must be finite and non-negative, got {r}"),
                );
            }
        }
    }

    if !c.errors.is_empty() {
        return Err(UsageError(c.errors));
    }
    Ok(RunConfig {
        mode: mode.unwrap(),
        families: families.unwrap(),
        x: x.unwrap(),
        alpha: alpha.unwrap(),
        temp: temp.unwrap(),
        rs: rs.unwrap(),
        tau_max: tau_max.unwrap(),
        steps: steps.unwrap(),
        secular: secular.unwrap(),
        truncation: truncation.unwrap(),
        figure,
        output: output.unwrap(),
        format: format.unwrap(),
        threads,
    })
}
