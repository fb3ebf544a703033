//! Run configuration and the plain-text key=value config format.
//!
//! A config file holds `key = value` lines (`#` starts a comment). Keys
//! before the first `[section]` header are shared; each section describes
//! one run that inherits the shared keys. Keys use the CLI flag names.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::limiters::LimiterKind;
use crate::solvers::JacobianMode;
use crate::tableau;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme {
    /// Low-order fluxes with backward Euler.
    LowBe,
    /// WENO fluxes with a DIRK tableau (`be`, `sdirk5`).
    Dirk(String),
    /// WENO fluxes with implicit Euler extrapolation of the given order.
    Iex(usize),
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "low-be" => Ok(Scheme::LowBe),
            "be" | "sdirk5" => Ok(Scheme::Dirk(name.to_string())),
            _ => match name.strip_prefix("iex").and_then(|p| p.parse::<usize>().ok()) {
                Some(p) if p >= 1 => Ok(Scheme::Iex(p)),
                _ => Err(Error::UnknownName { kind: "scheme", name: name.to_string() }),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Scheme::LowBe => "low-be".into(),
            Scheme::Dirk(n) => n.clone(),
            Scheme::Iex(p) => format!("iex{p}"),
        }
    }

    pub fn tableau(&self) -> Result<Option<tableau::ButcherTableau>> {
        match self {
            Scheme::LowBe => Ok(None),
            Scheme::Dirk(n) => tableau::tableau_by_name(n).map(Some),
            Scheme::Iex(p) => tableau::iex_tableau(*p).map(Some),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Label of the config section, if any.
    pub label: Option<String>,
    pub problem: String,
    /// Diffusion override for problems with a free ε.
    pub epsilon: Option<f64>,
    pub nx: usize,
    pub ny: Option<usize>,
    pub scheme: Scheme,
    pub limiter: LimiterKind,
    pub fct_iters: usize,
    pub gamma: f64,
    /// κ in Δt = κ Δx.
    pub dt_factor: f64,
    pub t_final: Option<f64>,
    pub solver: JacobianMode,
    pub out: Option<PathBuf>,
    /// Cells per axis of a convergence study; empty for a single run.
    pub study: Vec<usize>,
    pub snapshot_times: Vec<f64>,
    pub limit_stages: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            label: None,
            problem: "linear1d".into(),
            epsilon: None,
            nx: 100,
            ny: None,
            scheme: Scheme::Dirk("sdirk5".into()),
            limiter: LimiterKind::None,
            fct_iters: 1,
            gamma: 0.0,
            dt_factor: 0.5,
            t_final: None,
            solver: JacobianMode::Fresh,
            out: None,
            study: Vec::new(),
            snapshot_times: Vec::new(),
            limit_stages: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!("`{key}`: expected a boolean, got `{other}`"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "problem" => self.problem = v.to_string(),
            "epsilon" => self.epsilon = Some(parse_num(key, v)?),
            "nx" => self.nx = parse_num(key, v)?,
            "ny" => self.ny = Some(parse_num(key, v)?),
            "scheme" => self.scheme = Scheme::parse(v)?,
            "limiter" => self.limiter = v.parse()?,
            "fct-iters" => self.fct_iters = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            "dt-factor" => self.dt_factor = parse_num(key, v)?,
            "t-final" => self.t_final = Some(parse_num(key, v)?),
            "solver" => self.solver = v.parse()?,
            "out" => self.out = Some(PathBuf::from(v)),
            "study" => self.study = parse_list(key, v)?,
            "snapshot-times" => self.snapshot_times = parse_list(key, v)?,
            "limit-stages" => self.limit_stages = parse_bool(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks the invariants of a runnable configuration.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_factor > 0.0) || !self.dt_factor.is_finite() {
            return Err(Error::InvalidArgument(format!("dt-factor must be positive, got {}", self.dt_factor)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if self.fct_iters == 0 {
            return Err(Error::InvalidArgument("fct-iters must be at least 1".into()));
        }
        if self.nx == 0 || self.ny == Some(0) {
            return Err(Error::InvalidArgument("cell counts must be positive".into()));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("t-final must be positive, got {t}")));
            }
        }
        if self.study.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("study grids must have positive cell counts".into()));
        }
        if self.scheme == Scheme::LowBe && self.limiter != LimiterKind::None {
            return Err(Error::InvalidArgument("the low-order scheme takes no limiter".into()));
        }
        Ok(())
    }
}

/// Parses config text into one run per section (or one run without
/// sections), starting from `base`.
pub fn parse_config(text: &str, base: &RunConfig) -> Result<Vec<RunConfig>> {
    let mut shared = base.clone();
    let mut sections: Vec<RunConfig> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let mut run = shared.clone();
            run.label = Some(name.trim().to_string());
            sections.push(run);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let target = sections.last_mut().unwrap_or(&mut shared);
        target
            .set(key, value)
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
    }
    if sections.is_empty() {
        sections.push(shared);
    }
    Ok(sections)
}

pub fn load_config(path: &Path, base: &RunConfig) -> Result<Vec<RunConfig>> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, base)
}
