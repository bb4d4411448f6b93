//! Experiment configuration: a flat `key = value` file where repeated keys
//! build lists.
//!
//! ```text
//! # IE and CN on the scalar problem
//! scheme = IE
//! scheme = CN
//! alpha = 0.5
//! kappa = -1
//! kappa = -20
//! T = 1
//! N = 256
//! N = 512
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::model::{Domain, ModelParams, SchemeId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },

    #[error("line {line}: `{key}` given more than once")]
    Duplicate { line: usize, key: String },

    #[error("missing required key `{key}`")]
    Missing { key: &'static str },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("unknown preset `{name}`; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<&'static str> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl OutputFormat {
    fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "markdown",
        }
    }
}

/// Spatial setting of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ode,
    Interval { lengths: Vec<f64> },
}

/// Grid of experiments: every combination of scheme, kappa, domain length,
/// final time and step count is one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub schemes: Vec<SchemeId>,
    pub alpha: f64,
    pub kappas: Vec<f64>,
    pub domain: DomainSpec,
    pub t_finals: Vec<f64>,
    pub steps: Vec<usize>,
    /// Spatial cells; only used on an interval.
    pub cells: usize,
    pub format: OutputFormat,
    pub conjecture_c: f64,
    /// Evaluate the error bounds and write `bounds.csv`.
    pub bounds: bool,
    /// Treat the N list as an error-vs-N scan and write `kinkscan.csv`.
    pub scan: bool,
}

pub const DEFAULT_CELLS: usize = 2000;

impl ExperimentConfig {
    /// Model parameters of every (kappa, L, T) combination, in file order.
    pub fn param_sets(&self) -> Vec<ModelParams> {
        let lengths: Vec<Option<f64>> = match &self.domain {
            DomainSpec::Ode => vec![None],
            DomainSpec::Interval { lengths } => lengths.iter().copied().map(Some).collect(),
        };
        let mut out = Vec::new();
        for &kappa in &self.kappas {
            for l in &lengths {
                for &t in &self.t_finals {
                    out.push(ModelParams {
                        alpha: self.alpha,
                        kappa,
                        domain: match l {
                            None => Domain::Ode,
                            Some(length) => Domain::Interval { length: *length },
                        },
                        t_final: t,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schemes.is_empty() {
            return Err(ConfigError::Missing { key: "scheme" });
        }
        if self.kappas.is_empty() {
            return Err(ConfigError::Missing { key: "kappa" });
        }
        if self.t_finals.is_empty() {
            return Err(ConfigError::Missing { key: "T" });
        }
        if self.steps.is_empty() {
            return Err(ConfigError::Missing { key: "N" });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Invalid(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if let Some(&n) = self.steps.iter().find(|&&n| n < 4 || n % 2 == 1) {
            return Err(ConfigError::Invalid(format!(
                "N = {n}: step counts must be even and at least 4 so that N/2 can be run"
            )));
        }
        if let Some(t) = self.t_finals.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(ConfigError::Invalid(format!("T = {t} must be positive")));
        }
        if let Some(k) = self.kappas.iter().find(|k| !k.is_finite()) {
            return Err(ConfigError::Invalid(format!("kappa = {k} must be finite")));
        }
        match &self.domain {
            DomainSpec::Ode => {
                if self.schemes.contains(&SchemeId::L1) {
                    return Err(ConfigError::Invalid(
                        "scheme L1 needs `domain = interval` with at least one `L`".into(),
                    ));
                }
            }
            DomainSpec::Interval { lengths } => {
                if lengths.is_empty() {
                    return Err(ConfigError::Missing { key: "L" });
                }
                if let Some(l) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                    return Err(ConfigError::Invalid(format!("L = {l} must be positive")));
                }
                if self.cells < 4 {
                    return Err(ConfigError::Invalid(format!("M = {} must be at least 4", self.cells)));
                }
            }
        }
        if !(self.conjecture_c > 0.0 && self.conjecture_c.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "conjecture_C = {} must be positive",
                self.conjecture_c
            )));
        }
        Ok(())
    }

    /// Serialises to the text format; [`parse_config`] reads it back to an
    /// equal value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.preset {
            let _ = writeln!(s, "preset = {p}");
        }
        for sc in &self.schemes {
            let _ = writeln!(s, "scheme = {sc}");
        }
        let _ = writeln!(s, "alpha = {}", self.alpha);
        for k in &self.kappas {
            let _ = writeln!(s, "kappa = {k}");
        }
        match &self.domain {
            DomainSpec::Ode => {
                let _ = writeln!(s, "domain = ode");
            }
            DomainSpec::Interval { lengths } => {
                let _ = writeln!(s, "domain = interval");
                for l in lengths {
                    let _ = writeln!(s, "L = {l}");
                }
                let _ = writeln!(s, "M = {}", self.cells);
            }
        }
        for t in &self.t_finals {
            let _ = writeln!(s, "T = {t}");
        }
        for n in &self.steps {
            let _ = writeln!(s, "N = {n}");
        }
        let _ = writeln!(s, "format = {}", self.format.as_str());
        let _ = writeln!(s, "conjecture_C = {}", self.conjecture_c);
        let _ = writeln!(s, "bounds = {}", self.bounds);
        let _ = writeln!(s, "scan = {}", self.scan);
        s
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

/// Accepts plain numbers plus `pi`, `2pi`, `pi/2` style lengths.
fn parse_real(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    let lower = v.to_ascii_lowercase();
    if let Some(pos) = lower.find("pi") {
        let (pre, post) = (lower[..pos].trim().trim_end_matches('*'), lower[pos + 2..].trim());
        let mul = if pre.is_empty() { 1.0 } else { parse_value::<f64>(line, key, pre)? };
        let div = match post.strip_prefix('/') {
            Some(d) => parse_value::<f64>(line, key, d.trim())?,
            None if post.is_empty() => 1.0,
            None => {
                return Err(ConfigError::BadValue {
                    line,
                    key: key.into(),
                    value: v.into(),
                    reason: "expected a number, `pi`, `a*pi` or `pi/b`".into(),
                })
            }
        };
        return Ok(mul * std::f64::consts::PI / div);
    }
    parse_value::<f64>(line, key, v)
}

/// Parses the `key = value` format. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut preset = None;
    let mut schemes = Vec::new();
    let mut alpha = None;
    let mut kappas = Vec::new();
    let mut domain_kw: Option<String> = None;
    let mut lengths = Vec::new();
    let mut t_finals = Vec::new();
    let mut steps = Vec::new();
    let mut cells = None;
    let mut format = None;
    let mut conjecture_c = None;
    let mut bounds = None;
    let mut scan = None;

    fn once<T>(slot: &mut Option<T>, v: T, line: usize, key: &str) -> Result<(), ConfigError> {
        if slot.is_some() {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        *slot = Some(v);
        Ok(())
    }

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: raw.to_string() });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line, text: raw.to_string() });
        }
        match key {
            "preset" => once(&mut preset, value.to_string(), line, key)?,
            "scheme" => schemes.push(parse_value::<SchemeId>(line, key, value)?),
            "alpha" => once(&mut alpha, parse_real(line, key, value)?, line, key)?,
            "kappa" => kappas.push(parse_real(line, key, value)?),
            "domain" => {
                let d = value.to_ascii_lowercase();
                if d != "ode" && d != "interval" {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.into(),
                        value: value.into(),
                        reason: "expected `ode` or `interval`".into(),
                    });
                }
                once(&mut domain_kw, d, line, key)?
            }
            "L" => lengths.push(parse_real(line, key, value)?),
            "T" => t_finals.push(parse_real(line, key, value)?),
            "N" => steps.push(parse_value::<usize>(line, key, value)?),
            "M" => once(&mut cells, parse_value::<usize>(line, key, value)?, line, key)?,
            "format" => {
                let f = match value.to_ascii_lowercase().as_str() {
                    "csv" => OutputFormat::Csv,
                    "markdown" | "md" => OutputFormat::Markdown,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                            reason: "expected `csv` or `markdown`".into(),
                        })
                    }
                };
                once(&mut format, f, line, key)?
            }
            "conjecture_C" => once(&mut conjecture_c, parse_real(line, key, value)?, line, key)?,
            "bounds" => once(&mut bounds, parse_value::<bool>(line, key, value)?, line, key)?,
            "scan" => once(&mut scan, parse_value::<bool>(line, key, value)?, line, key)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }

    let domain = match domain_kw.as_deref() {
        Some("ode") if !lengths.is_empty() => {
            return Err(ConfigError::Invalid("`L` given with `domain = ode`".into()));
        }
        Some("ode") => DomainSpec::Ode,
        Some(_) => DomainSpec::Interval { lengths },
        None if lengths.is_empty() => DomainSpec::Ode,
        None => DomainSpec::Interval { lengths },
    };
    let config = ExperimentConfig {
        preset,
        schemes,
        alpha: alpha.ok_or(ConfigError::Missing { key: "alpha" })?,
        kappas,
        domain,
        t_finals,
        steps,
        cells: cells.unwrap_or(DEFAULT_CELLS),
        format: format.unwrap_or_default(),
        conjecture_c: conjecture_c.unwrap_or(1.0),
        bounds: bounds.unwrap_or(false),
        scan: scan.unwrap_or(false),
    };
    config.validate()?;
    Ok(config)
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 14] = [
    "table1", "table2", "table3", "table5", "table6", "table7", "table8", "table9", "table10", "table11",
    "table12", "table13", "kink-ode", "kink-pde",
];

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |n| Some(n * 2)).take_while(|&n| n <= to).collect()
}

/// Eight step counts per octave, `round(64 * 2^{j/8}) * 2^i`, from `from` to
/// `to`. Every value's half is either in the list or one of the octave bases,
/// so each point gets an order from an exact halving.
pub fn dense_steps(from: usize, to: usize) -> Vec<usize> {
    let bases: Vec<usize> = (0..8).map(|j| (64.0 * 2f64.powf(j as f64 / 8.0)).round() as usize).collect();
    let mut out: Vec<usize> = (0..)
        .map(|i| 1usize << i)
        .take_while(|m| bases[0] * m <= to)
        .flat_map(|m| bases.iter().map(move |b| b * m))
        .filter(|&n| n >= from && n <= to && n % 2 == 0)
        .collect();
    out.sort_unstable();
    out
}

/// Parameter grid of a named reproduction table or kink scan. All use
/// `alpha = 0.5` and `M = 2000` spatial cells, except `kink-pde` (`M = 20000`).
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    use SchemeId::*;
    let pi = std::f64::consts::PI;
    let classical = vec![IE, CN, BDF2];
    let base = |schemes: Vec<SchemeId>, kappas: Vec<f64>, domain: DomainSpec, t_finals: Vec<f64>, steps: Vec<usize>| {
        ExperimentConfig {
            preset: Some(name.to_string()),
            schemes,
            alpha: 0.5,
            kappas,
            domain,
            t_finals,
            steps,
            cells: DEFAULT_CELLS,
            format: OutputFormat::Csv,
            conjecture_c: 1.0,
            bounds: false,
            scan: false,
        }
    };
    let ode = || DomainSpec::Ode;
    let lengths = |l: &[f64]| DomainSpec::Interval { lengths: l.to_vec() };
    let l1_steps = doubling(64, 512);
    let steps = doubling(128, 2048);
    let mut c = match name {
        "table1" => base(vec![L1], vec![1.0, 0.0, -8.0], lengths(&[1.0, pi]), vec![1.0, 10.0], l1_steps),
        "table2" => base(vec![IE], vec![1.0, 0.0, -1.0], lengths(&[1.0, pi]), vec![1.0, 10.0], l1_steps),
        "table3" => base(classical, vec![-1.0, -5.0, -10.0, -15.0, -20.0], ode(), vec![1.0], steps),
        "table5" => base(classical, vec![0.0, 0.5], ode(), vec![1.0, 5.0], steps),
        "table6" => base(classical, vec![0.0, -5.0, -10.0, -15.0, -20.0], lengths(&[pi]), vec![1.0], steps),
        "table7" => base(classical, vec![0.0], lengths(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![10.0], steps),
        "table8" => base(classical, vec![0.0], lengths(&[pi]), vec![1.0, 5.0, 10.0, 15.0, 20.0], steps),
        "table9" => base(classical, vec![1.0, 1.5], lengths(&[pi, 4.0]), vec![5.0], steps),
        "table10" => base(vec![L1], vec![0.0, -5.0, -10.0, -20.0, -50.0], lengths(&[pi]), vec![1.0], l1_steps),
        "table11" => base(vec![L1], vec![0.0], lengths(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![10.0], l1_steps),
        "table12" => base(vec![L1], vec![0.0], lengths(&[pi]), vec![1.0, 10.0, 20.0, 50.0, 100.0], l1_steps),
        "table13" => base(vec![L1], vec![1.0, 1.5], lengths(&[pi, 4.0]), vec![5.0], l1_steps),
        "kink-ode" => {
            let mut c = base(vec![CN, BDF2], vec![-10.0], ode(), vec![1.0], dense_steps(128, 2048));
            c.scan = true;
            c
        }
        "kink-pde" => {
            let mut c = base(vec![CN, BDF2], vec![0.0], lengths(&[pi]), vec![12.0], dense_steps(128, 4096));
            // at M = 2000 the spatial error floor hides the kink
            c.cells = 20_000;
            c.scan = true;
            c
        }
        _ => {
            return Err(ConfigError::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.to_vec(),
            })
        }
    };
    if c.schemes.iter().all(|s| !s.is_fractional()) && c.domain == DomainSpec::Ode {
        c.bounds = true;
    }
    Ok(c)
}
