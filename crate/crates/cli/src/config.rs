//! Run configuration: flags layered over an optional `key=value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use spp_hybrid::{ExampleId, OuterRule};

use crate::error::CliError;

pub const KEYS: [&str; 10] = ["example", "eps", "mu", "N", "M", "rho", "out", "jobs", "strict-audit", "outer"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Solve one problem; writes surface.csv and audit.csv.
    Solve,
    /// Double-mesh convergence table; writes table.csv.
    Sweep,
    /// Exact-error table of a manufactured problem; writes mms.csv.
    Mms,
    /// Sign checks of the first time step; writes audit.csv and condition.csv.
    Audit,
    /// Shishkin mesh nodes; writes mesh.csv.
    MeshDump,
}

#[derive(Debug, Parser)]
#[command(name = "spp-hybrid", version, about = "Hybrid scheme for singularly perturbed parabolic problems with a discontinuous convection coefficient")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// example1, example2, example3, mms-smooth or mms-layer
    #[arg(long)]
    pub example: Option<String>,
    /// Diffusion parameter(s), e.g. `2^-6` or `2^-20,2^-28`
    #[arg(long)]
    pub eps: Option<String>,
    /// Convection parameter(s)
    #[arg(long)]
    pub mu: Option<String>,
    /// Mesh interval count(s), divisible by 8
    #[arg(long = "N", value_name = "N")]
    pub n: Option<String>,
    /// Time steps (defaults to N)
    #[arg(long = "M", value_name = "M")]
    pub m: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads for sweeps
    #[arg(long)]
    pub jobs: Option<String>,
    /// Treat rows failing the sign checks as errors
    #[arg(long)]
    pub strict_audit: bool,
    /// Outer-region operator in the mu-dominant regime: midpoint or guarded
    #[arg(long)]
    pub outer: Option<String>,
    /// `key=value` file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Cli {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = Vec::new();
        let opts = [
            ("example", &self.example),
            ("eps", &self.eps),
            ("mu", &self.mu),
            ("N", &self.n),
            ("M", &self.m),
            ("rho", &self.rho),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("outer", &self.outer),
        ];
        for (key, value) in opts {
            if let Some(v) = value {
                pairs.push((key, v.clone()));
            }
        }
        if self.strict_audit {
            pairs.push(("strict-audit", "true".into()));
        }
        pairs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub example: ExampleId,
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    pub n: Vec<usize>,
    pub m: Option<usize>,
    pub rho: Option<f64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub strict_audit: bool,
    pub outer: OuterRule,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut values = match &cli.config {
            Some(path) => parse_file(path)?,
            None => BTreeMap::new(),
        };
        for (key, value) in cli.flag_pairs() {
            values.insert(key.to_string(), value);
        }
        Self::from_values(cli.command, &values)
    }

    pub fn from_values(command: Command, values: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(key) = values.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        let get = |key: &str| values.get(key).map(String::as_str);

        let default_example = if command == Command::Mms { "mms-smooth" } else { "example1" };
        let example: ExampleId = get("example")
            .unwrap_or(default_example)
            .parse()
            .map_err(|e: spp_hybrid::Error| CliError::Config(e.to_string()))?;
        if command == Command::Mms && example.exact(ExampleId::DEFAULT_EPS).is_none() {
            return Err(CliError::Config(format!("example `{example}` has no exact solution")));
        }

        let eps = match get("eps") {
            Some(s) => parse_list(s, "eps", parse_parameter)?,
            None => vec![ExampleId::DEFAULT_EPS],
        };
        let mu = match get("mu") {
            Some(s) => parse_list(s, "mu", parse_parameter)?,
            None => vec![ExampleId::DEFAULT_MU],
        };
        let n = match get("N") {
            Some(s) => parse_list(s, "N", parse_mesh_size)?,
            None => match command {
                Command::Sweep => vec![32, 64, 128, 256, 512, 1024],
                Command::Mms => vec![64, 128, 256, 512],
                _ => vec![64],
            },
        };
        let m = get("M")
            .map(|s| parse_count(s, "M"))
            .transpose()?;
        let rho = get("rho")
            .map(|s| {
                let v = parse_number(s).ok_or_else(|| bad_value("rho", s))?;
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(CliError::Config(format!("rho must be positive, got `{s}`")))
                }
            })
            .transpose()?;
        let jobs = get("jobs").map(|s| parse_count(s, "jobs")).transpose()?;
        let strict_audit = match get("strict-audit") {
            None => false,
            Some("true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(s) => return Err(bad_value("strict-audit", s)),
        };
        let outer = match get("outer") {
            Some(s) => s.parse().map_err(|_| bad_value("outer", s))?,
            None => OuterRule::default(),
        };

        let config = RunConfig {
            command,
            example,
            eps,
            mu,
            n,
            m,
            rho,
            out: PathBuf::from(get("out").unwrap_or("out")),
            jobs,
            strict_audit,
            outer,
        };
        config.check_shape()?;
        Ok(config)
    }

    fn check_shape(&self) -> Result<(), CliError> {
        match self.command {
            Command::Solve | Command::Audit | Command::MeshDump => {
                for (key, len) in [("eps", self.eps.len()), ("mu", self.mu.len()), ("N", self.n.len())] {
                    if len != 1 {
                        return Err(CliError::Config(format!("{key} takes a single value for this command")));
                    }
                }
            }
            Command::Sweep | Command::Mms => {
                if self.m.is_some() {
                    return Err(CliError::Config("M is tied to N in tables; drop --M".into()));
                }
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.m.unwrap_or(self.n[0])
    }
}

fn bad_value(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value `{value}` for {key}"))
}

/// Flat `key = value` lines; `#` starts a comment.
pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut values = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        values.insert(key.to_string(), value.trim().to_string());
    }
    Ok(values)
}

/// A decimal number or an exact binary power `2^k`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('^') {
        Some((base, exp)) => {
            let exp: i32 = exp.trim().parse().ok()?;
            (base.trim() == "2" && (-1074..=1023).contains(&exp)).then(|| 2f64.powi(exp))
        }
        None => s.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

fn parse_parameter(s: &str, key: &str) -> Result<f64, CliError> {
    let v = parse_number(s).ok_or_else(|| bad_value(key, s))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key} must lie in (0, 1], got `{s}`")))
    }
}

fn parse_count(s: &str, key: &str) -> Result<usize, CliError> {
    match s.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(bad_value(key, s)),
    }
}

fn parse_mesh_size(s: &str, key: &str) -> Result<usize, CliError> {
    let n = parse_count(s, key)?;
    if !n.is_multiple_of(8) || n < 16 {
        return Err(CliError::Config(format!("{key}={n} must be at least 16 and divisible by 8")));
    }
    Ok(n)
}

fn parse_list<T>(s: &str, key: &str, item: impl Fn(&str, &str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(bad_value(key, s));
    }
    items.into_iter().map(|i| item(i, key)).collect()
}
