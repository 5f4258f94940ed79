use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Solve,
    Truncation,
    Accuracy,
    Pointwise,
}

/// Flags shared by both subcommands. Anything left unset falls back to the
/// config file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Named problem: problem1 or problem2.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; lists are comma-separated.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the constant A of problem1.
    #[arg(long)]
    pub coef_a: Option<f64>,
    #[arg(long)]
    pub coef_b: Option<f64>,
    #[arg(long)]
    pub coef_d: Option<f64>,
    #[arg(long)]
    pub coef_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub kind: Kind,
    pub ns: Vec<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub pointwise_out: Option<PathBuf>,
    pub coef: [Option<f64>; 4],
}

const KEYS: [&str; 11] = [
    "problem", "kind", "n", "ns", "format", "out", "pointwise_out", "coef_a", "coef_b", "coef_d", "coef_h",
];

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key `{k}`", i + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("config line {}: duplicate key `{k}`", i + 1)));
        }
    }
    Ok(out)
}

fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_file(&text)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<usize>, CliError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("`{key}`: `{}` is not a mesh size", s.trim()))))
        .collect()
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("`{key}`: `{v}` is not a number")))
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, CliError> {
    T::from_str(v, true).map_err(|_| CliError::Config(format!("`{key}`: invalid value `{v}`")))
}

/// Merges flags over the config file and validates the result.
pub fn resolve(
    common: &Common,
    kind: Option<Kind>,
    ns: Option<Vec<usize>>,
    pointwise_out: Option<PathBuf>,
    solve: bool,
) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(p) => load(p)?,
        None => BTreeMap::new(),
    };
    let get = |k: &str| file.get(k).map(String::as_str);

    let problem = match (&common.problem, get("problem")) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p.to_string(),
        (None, None) => "problem1".to_string(),
    };
    let kind = match (kind, get("kind")) {
        (Some(k), _) => k,
        (None, Some(v)) => parse_enum("kind", v)?,
        (None, None) if solve => Kind::Solve,
        (None, None) => Kind::Accuracy,
    };
    if solve != (kind == Kind::Solve) {
        let cmd = if solve { "solve" } else { "study" };
        return Err(CliError::Config(format!("kind `{kind:?}` does not fit the `{cmd}` command").to_lowercase()));
    }
    let ns = match ns {
        Some(ns) => ns,
        None => match (get("n"), get("ns")) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `n` or `ns`, not both".into())),
            (Some(v), None) | (None, Some(v)) => parse_list("ns", v)?,
            (None, None) => return Err(CliError::Config("no mesh size given".into())),
        },
    };
    if ns.is_empty() {
        return Err(CliError::Config("mesh list is empty".into()));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Config("mesh sizes must be strictly ascending".into()));
    }
    if solve && ns.len() != 1 {
        return Err(CliError::Config("solve takes a single mesh size".into()));
    }
    let format = match (common.format, get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => parse_enum("format", v)?,
        (None, None) => Format::Csv,
    };
    let out = common.out.clone().or_else(|| get("out").map(PathBuf::from));
    let pointwise_out = pointwise_out.or_else(|| get("pointwise_out").map(PathBuf::from));
    match (kind, &pointwise_out) {
        (Kind::Pointwise, None) => return Err(CliError::Config("pointwise study needs a pointwise output path".into())),
        (Kind::Solve | Kind::Accuracy, Some(_)) => {
            return Err(CliError::Config("pointwise output only applies to truncation studies".into()))
        }
        _ => {}
    }

    let mut coef = [common.coef_a, common.coef_b, common.coef_d, common.coef_h];
    for (slot, key) in coef.iter_mut().zip(["coef_a", "coef_b", "coef_d", "coef_h"]) {
        if slot.is_none() {
            if let Some(v) = get(key) {
                *slot = Some(parse_f64(key, v)?);
            }
        }
    }
    if coef.iter().any(|c| c.is_some_and(|c| !c.is_finite())) {
        return Err(CliError::Config("coefficient overrides must be finite".into()));
    }
    if problem != "problem1" && coef.iter().any(Option::is_some) {
        return Err(CliError::Config(format!("coefficient overrides apply to problem1 only, not `{problem}`")));
    }

    Ok(RunConfig { problem, kind, ns, format, out, pointwise_out, coef })
}
