//! Scenario configuration: a flat `key = value` file layered over
//! method-dependent defaults and under command-line overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bhdephase::{Boundary, ModelParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sf,
    Mott,
    Ed,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sf => "sf",
            Method::Mott => "mott",
            Method::Ed => "ed",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sf" => Ok(Method::Sf),
            "mott" => Ok(Method::Mott),
            "ed" => Ok(Method::Ed),
            other => Err(format!("unknown method '{other}' (expected sf|mott|ed)")),
        }
    }
}

/// Momentum discretization of the doublon-holon sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Momentum {
    Thermodynamic,
    Lattice,
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Momentum::Thermodynamic => "thermodynamic",
            Momentum::Lattice => "lattice",
        })
    }
}

impl FromStr for Momentum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "thermodynamic" => Ok(Momentum::Thermodynamic),
            "lattice" => Ok(Momentum::Lattice),
            other => Err(format!(
                "unknown momentum grid '{other}' (expected thermodynamic|lattice)"
            )),
        }
    }
}

/// Time horizon: a fixed value or the method default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Auto,
    Fixed(f64),
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Auto => f.write_str("auto"),
            Horizon::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Horizon::Auto);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| format!("expected a number or 'auto', got '{s}'"))?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("horizon must be positive, got {t}"));
        }
        Ok(Horizon::Fixed(t))
    }
}

/// Every recognised key, in the order used for the resolved config.
pub const KEYS: &[&str] = &[
    "method",
    "J",
    "U",
    "Ue",
    "Ns",
    "nbar",
    "nmax",
    "boundary",
    "dt",
    "T",
    "kcount",
    "momentum",
    "tol",
    "sweep",
    "out",
    "workers",
    "seed",
    "dim_cap",
    "density_site",
    "average_window",
    "tcl_bound",
    "deviation_bound",
];

/// Where a raw value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => f.write_str("default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

/// Unparsed key-value layers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn set(
        &mut self,
        key: &str,
        value: impl Into<String>,
        origin: Origin,
    ) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("{origin}: unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), (value.into(), origin));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn parse_text(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        raw.merge_text(text, path)?;
        Ok(raw)
    }

    pub fn merge_text(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{origin}: expected 'key = value', got '{content}'"
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::Config(format!("{origin}: missing key")));
            }
            self.set(key, value, origin)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text, path)
    }

    fn value<T>(&self, key: &str, default: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let (text, origin) = match self.entries.get(key) {
            Some((v, o)) => (v.as_str(), o.clone()),
            None => (default, Origin::Default),
        };
        text.parse::<T>().map_err(|e| {
            CliError::Config(format!("{origin}: invalid value '{text}' for '{key}': {e}"))
        })
    }
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub method: Method,
    pub hopping: f64,
    pub interaction: f64,
    pub impurity_coupling: f64,
    pub n_sites: usize,
    pub filling: usize,
    pub n_max: usize,
    pub boundary: Boundary,
    pub dt: f64,
    pub horizon: Horizon,
    pub k_count: usize,
    pub momentum: Momentum,
    pub tolerance: f64,
    pub sweep: Vec<f64>,
    pub out: PathBuf,
    pub workers: usize,
    /// Reserved; every current method is deterministic.
    pub seed: u64,
    pub dim_cap: usize,
    /// Site for the density trace, relative to the impurity.
    pub density_site: isize,
    pub average_window: f64,
    pub tcl_bound: f64,
    pub deviation_bound: f64,
}

/// Comma-separated list of U/J values.
#[derive(Debug, Clone, PartialEq)]
struct SweepList(Vec<f64>);

impl FromStr for SweepList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SweepList(Vec::new()));
        }
        s.split(',')
            .map(|x| {
                let v: f64 = x
                    .trim()
                    .parse()
                    .map_err(|_| format!("'{}' is not a number", x.trim()))?;
                if v.is_finite() && v >= 0.0 {
                    Ok(v)
                } else {
                    Err(format!("U/J must be finite and >= 0, got {v}"))
                }
            })
            .collect::<Result<_, _>>()
            .map(SweepList)
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "'{key}' must be positive and finite, got {v}"
        )))
    }
}

impl ScenarioConfig {
    /// Applies method defaults to `raw`. `method` (from the subcommand)
    /// takes precedence over a `method` key.
    pub fn resolve(raw: &RawConfig, method: Option<Method>) -> Result<Self, CliError> {
        let method = match method {
            Some(m) => m,
            None => raw.value::<Method>("method", "mott")?,
        };
        let (u_default, ns_default) = match method {
            Method::Sf => ("1", "96"),
            Method::Mott => ("30", "96"),
            Method::Ed => ("5", "8"),
        };
        let filling: usize = raw.value("nbar", "1")?;
        if filling == 0 {
            return Err(CliError::Config("'nbar' must be >= 1".into()));
        }
        let n_max_default = (filling + 3).to_string();
        let cfg = ScenarioConfig {
            method,
            hopping: raw.value("J", "1")?,
            interaction: raw.value("U", u_default)?,
            impurity_coupling: raw.value("Ue", "0.01")?,
            n_sites: raw.value("Ns", ns_default)?,
            filling,
            n_max: raw.value("nmax", &n_max_default)?,
            boundary: raw.value("boundary", "open")?,
            dt: positive("dt", raw.value("dt", "0.02")?)?,
            horizon: raw.value("T", "auto")?,
            k_count: raw.value("kcount", "1024")?,
            momentum: raw.value("momentum", "thermodynamic")?,
            tolerance: raw.value("tol", "1e-10")?,
            sweep: raw.value::<SweepList>("sweep", "")?.0,
            out: raw.value("out", "out")?,
            workers: raw.value("workers", "1")?,
            seed: raw.value("seed", "0")?,
            dim_cap: raw.value("dim_cap", "2000000")?,
            density_site: raw.value("density_site", "1")?,
            average_window: positive(
                "average_window",
                raw.value("average_window", &(2.0 * PI).to_string())?,
            )?,
            tcl_bound: raw.value("tcl_bound", "1e-3")?,
            deviation_bound: raw.value("deviation_bound", "1e-3")?,
        };
        if !(cfg.hopping >= 0.0 && cfg.hopping.is_finite()) {
            return Err(CliError::Config(format!(
                "'J' must be >= 0, got {}",
                cfg.hopping
            )));
        }
        if !(cfg.interaction >= 0.0 && cfg.interaction.is_finite()) {
            return Err(CliError::Config(format!(
                "'U' must be >= 0, got {}",
                cfg.interaction
            )));
        }
        if !cfg.impurity_coupling.is_finite() {
            return Err(CliError::Config("'Ue' must be finite".into()));
        }
        if cfg.n_sites < 2 {
            return Err(CliError::Config(format!(
                "'Ns' must be >= 2, got {}",
                cfg.n_sites
            )));
        }
        if cfg.k_count == 0 {
            return Err(CliError::Config("'kcount' must be >= 1".into()));
        }
        if !(cfg.tolerance >= 0.0) {
            return Err(CliError::Config(format!(
                "'tol' must be >= 0, got {}",
                cfg.tolerance
            )));
        }
        if cfg.workers == 0 {
            return Err(CliError::Config("'workers' must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(
            self.hopping,
            self.interaction,
            self.impurity_coupling,
            self.n_sites,
        )
        .with_filling(self.filling)
        .with_n_max(self.n_max)
        .with_boundary(self.boundary)
    }

    /// `U/J`, the sweep coordinate.
    pub fn ratio(&self) -> f64 {
        self.interaction / self.hopping
    }

    /// Copy at another `U/J` with the same `J`, for sweeps.
    pub fn at_ratio(&self, ratio: f64) -> Self {
        let mut c = self.clone();
        c.interaction = ratio * self.hopping;
        c.sweep = Vec::new();
        c
    }

    /// Short file tag, e.g. `mott_U30`.
    pub fn tag(&self) -> String {
        format!("{}_U{}", self.method, self.interaction)
    }

    /// Canonical `key = value` lines, one per key in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let sweep: Vec<String> = self.sweep.iter().map(|v| v.to_string()).collect();
        let values: Vec<(&str, String)> = vec![
            ("method", self.method.to_string()),
            ("J", self.hopping.to_string()),
            ("U", self.interaction.to_string()),
            ("Ue", self.impurity_coupling.to_string()),
            ("Ns", self.n_sites.to_string()),
            ("nbar", self.filling.to_string()),
            ("nmax", self.n_max.to_string()),
            ("boundary", self.boundary.to_string()),
            ("dt", self.dt.to_string()),
            ("T", self.horizon.to_string()),
            ("kcount", self.k_count.to_string()),
            ("momentum", self.momentum.to_string()),
            ("tol", self.tolerance.to_string()),
            ("sweep", sweep.join(",")),
            ("out", self.out.display().to_string()),
            ("workers", self.workers.to_string()),
            ("seed", self.seed.to_string()),
            ("dim_cap", self.dim_cap.to_string()),
            ("density_site", self.density_site.to_string()),
            ("average_window", self.average_window.to_string()),
            ("tcl_bound", self.tcl_bound.to_string()),
            ("deviation_bound", self.deviation_bound.to_string()),
        ];
        debug_assert_eq!(values.len(), KEYS.len());
        values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// The resolved config as a key-value map, for report echoes.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.to_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}
