//! Run configuration: flags merged over an optional config file.
//!
//! The file is either flat `key = value` lines (`#` starts a comment) or a
//! JSON object with the same keys. Keys match the long flag names; `-` and
//! `_` are interchangeable. Lists are comma separated (JSON arrays also work).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::Format;
use crate::problem::check_open_unit;
use crate::quadrature::QuadratureConfig;
use crate::study::{NormKind, Preset, Vary, TABLE_COUNT};

pub const KEYS: &[&str] = &[
    "alpha",
    "s",
    "preset",
    "N",
    "M",
    "tau",
    "h",
    "norm",
    "format",
    "out",
    "parallelism",
    "gauss_order",
    "duffy_levels",
    "snapshots",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Study,
    Table(u8),
    Selftest,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Solve => "solve".into(),
            Command::Study => "study".into(),
            Command::Table(n) => format!("table{n}"),
            Command::Selftest => "selftest".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormChoice {
    L2,
    /// Ĥ^{2s−1}, resolved per row.
    NegativeOrder,
    Rho(f64),
}

impl NormChoice {
    pub fn resolve(self, s: f64) -> NormKind {
        match self {
            NormChoice::L2 => NormKind::L2,
            NormChoice::NegativeOrder => NormKind::negative_order(s),
            NormChoice::Rho(r) => NormKind::Hsigma(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub alphas: Vec<f64>,
    pub ss: Vec<f64>,
    pub preset: Preset,
    /// Element counts; a list when space is refined.
    pub n: Vec<usize>,
    /// Step counts; a list when time is refined.
    pub m: Vec<usize>,
    pub norm: NormChoice,
    pub format: Format,
    pub out: PathBuf,
    pub parallelism: usize,
    pub quadrature: QuadratureConfig,
    pub all_snapshots: bool,
}

/// Raw string settings keyed by canonical name.
pub type Settings = BTreeMap<String, String>;

fn canonical(key: &str) -> Option<&'static str> {
    let k = key.trim().replace('-', "_");
    KEYS.iter().copied().find(|c| *c == k)
}

pub fn read_config_file(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text).map_err(|(line, message)| {
        if line == 0 {
            Error::InvalidInput(format!("{}: {message}", path.display()))
        } else {
            Error::InvalidInput(format!("{}: line {line}: {message}", path.display()))
        }
    })
}

/// Errors carry a line number (0 for JSON input).
pub fn parse_config_text(text: &str) -> std::result::Result<Settings, (usize, String)> {
    let mut out = Settings::new();
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| (0, format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or((0, "JSON config must be an object".to_string()))?;
        for (k, v) in obj {
            let key = canonical(k).ok_or_else(|| (0, format!("unknown key {k:?}")))?;
            out.insert(key.to_string(), json_scalar(k, v).map_err(|m| (0, m))?);
        }
        return Ok(out);
    }
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| (i + 1, format!("expected key = value, got {line:?}")))?;
        let key = canonical(k).ok_or_else(|| (i + 1, format!("unknown key {:?}", k.trim())))?;
        out.insert(key.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn json_scalar(key: &str, v: &serde_json::Value) -> std::result::Result<String, String> {
    use serde_json::Value;
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => items
            .iter()
            .map(|x| json_scalar(key, x))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(|v| v.join(",")),
        _ => Err(format!("unsupported value for {key:?}")),
    }
}

fn usage(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("--{key}: {msg}"))
}

/// Accepts plain numbers and `p/q` fractions.
fn parse_real(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    let parsed = match v.split_once('/') {
        Some((p, q)) => match (p.trim().parse::<f64>(), q.trim().parse::<f64>()) {
            (Ok(p), Ok(q)) if q != 0.0 => Some(p / q),
            _ => None,
        },
        None => v.parse::<f64>().ok(),
    };
    parsed
        .filter(|x| x.is_finite())
        .ok_or_else(|| usage(key, format!("not a number: {v:?}")))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| item(key, x))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(usage(key, "empty value"));
    }
    Ok(items)
}

fn parse_count(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| usage(key, format!("not a positive integer: {v:?}")))
}

/// Turns step sizes into counts over `len`, requiring an integer count.
fn counts_from_steps(key: &str, v: &str, len: f64) -> Result<Vec<usize>> {
    parse_list(key, v, parse_real)?
        .into_iter()
        .map(|step| {
            if step <= 0.0 {
                return Err(usage(key, format!("must be positive, got {step}")));
            }
            let n = len / step;
            let r = n.round();
            if r < 1.0 || (n - r).abs() > 1e-9 * r {
                return Err(usage(
                    key,
                    format!("{step} does not divide the interval length {len}"),
                ));
            }
            Ok(r as usize)
        })
        .collect()
}

fn check_dyadic(key: &str, levels: &[usize]) -> Result<()> {
    if let Some(w) = levels.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(usage(
            key,
            format!("levels must double, {} is followed by {}", w[0], w[1]),
        ));
    }
    Ok(())
}

impl RunConfig {
    /// Validates merged settings for `command`.
    pub fn from_settings(command: Command, set: &Settings) -> Result<Self> {
        let get = |k: &str| set.get(k).map(String::as_str);
        if let Some(k) = set.keys().find(|k| canonical(k).is_none()) {
            return Err(Error::InvalidInput(format!("unknown key {k:?}")));
        }
        if let Command::Table(n) = command {
            if !(1..=TABLE_COUNT).contains(&n) {
                return Err(Error::InvalidInput(format!(
                    "table must be between 1 and {TABLE_COUNT}, got {n}"
                )));
            }
            for k in [
                "alpha",
                "s",
                "preset",
                "N",
                "M",
                "tau",
                "h",
                "norm",
                "snapshots",
            ] {
                if set.contains_key(k) {
                    return Err(usage(
                        k,
                        "tables use fixed parameter grids; this option does not apply",
                    ));
                }
            }
        }

        let mut q = QuadratureConfig::default();
        if let Some(v) = get("gauss_order") {
            q.gauss_order = parse_count("gauss-order", v)?;
        }
        if let Some(v) = get("duffy_levels") {
            q.duffy_levels = parse_count("duffy-levels", v)?;
        }
        q.validate()
            .map_err(|e| Error::InvalidInput(format!("quadrature: {e}")))?;

        let reals = |k: &str| -> Result<Vec<f64>> {
            let v = parse_list(k, get(k).unwrap_or(""), parse_real)?;
            for &x in &v {
                check_open_unit(k, x)
                    .map_err(|_| usage(k, format!("must lie in (0, 1), got {x}")))?;
            }
            Ok(v)
        };
        let needs_orders = matches!(command, Command::Solve | Command::Study);
        let (alphas, ss) = if needs_orders {
            if get("alpha").is_none() {
                return Err(usage("alpha", "required"));
            }
            if get("s").is_none() {
                return Err(usage("s", "required"));
            }
            (reals("alpha")?, reals("s")?)
        } else {
            (Vec::new(), Vec::new())
        };

        let preset = match get("preset").map(|p| p.trim().to_ascii_lowercase()) {
            None => Preset::A,
            Some(p) if p == "a" => Preset::A,
            Some(p) if p == "b" => Preset::B,
            Some(p) => return Err(usage("preset", format!("expected a or b, got {p:?}"))),
        };

        // Presets live on (0, 1) with T = 1.
        let n = match (get("N"), get("h")) {
            (Some(_), Some(_)) => return Err(usage("h", "give either --N or --h, not both")),
            (Some(v), None) => parse_list("N", v, parse_count)?,
            (None, Some(v)) => counts_from_steps("h", v, 1.0)?,
            (None, None) => vec![64],
        };
        let m = match (get("M"), get("tau")) {
            (Some(_), Some(_)) => return Err(usage("tau", "give either --M or --tau, not both")),
            (Some(v), None) => parse_list("M", v, parse_count)?,
            (None, Some(v)) => counts_from_steps("tau", v, 1.0)?,
            (None, None) => vec![64],
        };
        if let Some(&bad) = n.iter().find(|&&x| x < 2) {
            return Err(usage("N", format!("need at least 2 elements, got {bad}")));
        }
        if let Some(&bad) = m.iter().find(|&&x| x < 1) {
            return Err(usage("M", format!("need at least 1 step, got {bad}")));
        }
        match command {
            Command::Solve => {
                for (k, len) in [("alpha", alphas.len()), ("s", ss.len()), ("N", n.len()), ("M", m.len())] {
                    if len != 1 {
                        return Err(usage(k, "solve takes a single value"));
                    }
                }
            }
            Command::Study => match (n.len() > 1, m.len() > 1) {
                (true, false) => check_dyadic("N", &n)?,
                (false, true) => check_dyadic("M", &m)?,
                _ => {
                    return Err(Error::InvalidInput(
                        "study needs a level list on exactly one of --N/--h (spatial) or --M/--tau (temporal)".into(),
                    ))
                }
            },
            _ => {}
        }

        let norm = match get("norm").map(|v| v.trim().to_ascii_lowercase()) {
            None => NormChoice::L2,
            Some(v) if v == "l2" => NormChoice::L2,
            Some(v) if v == "h2s-1" || v == "hneg" => NormChoice::NegativeOrder,
            Some(v) => {
                let rho = parse_real("norm", v.trim_start_matches('h')).map_err(|_| {
                    usage("norm", format!("expected l2, h2s-1 or a number, got {v:?}"))
                })?;
                if !(-1.0..=2.0).contains(&rho) {
                    return Err(usage(
                        "norm",
                        format!("index must lie in [-1, 2], got {rho}"),
                    ));
                }
                NormChoice::Rho(rho)
            }
        };
        if norm == NormChoice::NegativeOrder {
            if let Some(&s) = ss.iter().find(|&&s| s <= 0.5) {
                return Err(usage("norm", format!("h2s-1 needs s > 1/2, got s = {s}")));
            }
        }

        let format = match get("format").map(|v| v.trim().to_ascii_lowercase()) {
            None => Format::Csv,
            Some(v) if v == "csv" => Format::Csv,
            Some(v) if v == "md" || v == "markdown" => Format::Markdown,
            Some(v) => {
                return Err(usage(
                    "format",
                    format!("expected csv or markdown, got {v:?}"),
                ))
            }
        };
        let parallelism = match get("parallelism") {
            None => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            Some(v) => match parse_count("parallelism", v)? {
                0 => return Err(usage("parallelism", "must be at least 1")),
                p => p,
            },
        };
        let all_snapshots = match get("snapshots").map(|v| v.trim().to_ascii_lowercase()) {
            None => false,
            Some(v) if v == "final" => false,
            Some(v) if v == "all" => true,
            Some(v) => {
                return Err(usage(
                    "snapshots",
                    format!("expected final or all, got {v:?}"),
                ))
            }
        };

        Ok(RunConfig {
            command,
            alphas,
            ss,
            preset,
            n,
            m,
            norm,
            format,
            out: PathBuf::from(get("out").unwrap_or("out")),
            parallelism,
            quadrature: q,
            all_snapshots,
        })
    }

    /// The refinement axis of a study.
    pub fn vary(&self) -> Vary {
        if self.n.len() > 1 {
            Vary::Spatial
        } else {
            Vary::Temporal
        }
    }
}
