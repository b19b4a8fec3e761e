//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags, parsed and validated in one place.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;
use tprabi_core::model::collapse_coupling;
use tprabi_core::{BargmannIndex, Parity};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("`{0}` is required for this command")]
    Missing(&'static str),
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gcurve,
    Spectrum,
    Degenerate,
    Exceptional,
    Collapse,
    Ed,
    Coeffs,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gcurve => "gcurve",
            Command::Spectrum => "spectrum",
            Command::Degenerate => "degenerate",
            Command::Exceptional => "exceptional",
            Command::Collapse => "collapse",
            Command::Ed => "ed",
            Command::Coeffs => "coeffs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// `lo:hi:points`, inclusive, evenly spaced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * step }).collect()
    }

    fn canonical(&self) -> String {
        format!("{}:{}:{}", num(self.lo), num(self.hi), self.points)
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-3, 1e6)`.
fn num(x: f64) -> String {
    if x != 0.0 && !(1e-3..1e6).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "delta",
    "delta_range",
    "r",
    "g",
    "g_range",
    "q",
    "parity",
    "trunc",
    "tol",
    "dim",
    "half_width",
    "h",
    "states",
    "e_range",
    "energy",
    "x_range",
    "n",
    "m",
    "scaled",
    "ed",
    "wavefunction",
    "y_max",
    "threads",
    "format",
    "out",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub delta: f64,
    pub delta_range: Option<Range>,
    pub r: f64,
    pub g: f64,
    pub g_range: Option<Range>,
    /// Empty means both subspaces.
    pub q: Vec<BargmannIndex>,
    /// Empty means both parities.
    pub parity: Vec<Parity>,
    /// Truncation ladder; empty selects the automatic truncation.
    pub trunc: Vec<usize>,
    pub tol: f64,
    pub dim: usize,
    pub half_width: f64,
    pub h: f64,
    pub states: usize,
    pub e_range: Range,
    pub energy: Option<f64>,
    pub x_range: Range,
    pub n: Vec<usize>,
    pub m: usize,
    pub scaled: bool,
    pub ed: bool,
    pub wavefunction: bool,
    pub y_max: f64,
    /// 0 uses every available core.
    pub threads: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Normalizes `g-range` and `g_range` to the same key.
pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, path: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { path: path.to_string(), line: i + 1 })?;
        let k = normalize_key(k);
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_text(&text, &path.display().to_string())
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

fn parse_f64(key: &'static str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| invalid(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &'static str, v: &str) -> Result<usize> {
    let t = v.trim();
    // accept 1e6-style integers for truncations
    if let Ok(n) = t.parse::<usize>() {
        return Ok(n);
    }
    let x = parse_f64(key, t)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1e18 {
        Ok(x as usize)
    } else {
        Err(invalid(key, format!("`{v}` is not a non-negative integer")))
    }
}

fn parse_bool(key: &'static str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(key, format!("`{v}` is not a boolean"))),
    }
}

fn parse_list<T>(key: &'static str, v: &str, f: fn(&'static str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(key, s)).collect()
}

fn parse_range(key: &'static str, v: &str) -> Result<Range> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid(key, "expected lo:hi:points"));
    }
    let r = Range { lo: parse_f64(key, parts[0])?, hi: parse_f64(key, parts[1])?, points: parse_usize(key, parts[2])? };
    if r.points == 0 || r.hi < r.lo || (r.points > 1 && r.hi == r.lo) {
        return Err(invalid(key, "empty range"));
    }
    Ok(r)
}

fn parse_q(v: &str) -> Result<Vec<BargmannIndex>> {
    match v.trim() {
        "both" => Ok(Vec::new()),
        "1/4" | "0.25" => Ok(vec![BargmannIndex::Quarter]),
        "3/4" | "0.75" => Ok(vec![BargmannIndex::ThreeQuarters]),
        other => Err(invalid("q", format!("`{other}`: use 1/4, 3/4 or both"))),
    }
}

fn parse_parity(v: &str) -> Result<Vec<Parity>> {
    match v.trim() {
        "both" => Ok(Vec::new()),
        "+" | "even" | "+1" => Ok(vec![Parity::Even]),
        "-" | "odd" | "-1" => Ok(vec![Parity::Odd]),
        other => Err(invalid("parity", format!("`{other}`: use +, - or both"))),
    }
}

impl RunConfig {
    /// Builds a configuration from merged key-value pairs, filling defaults
    /// and validating.
    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey(k.clone()));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let f64_or = |k: &'static str, d: f64| get(k).map_or(Ok(d), |v| parse_f64(k, v));
        let usize_or = |k: &'static str, d: usize| get(k).map_or(Ok(d), |v| parse_usize(k, v));
        let bool_or = |k: &'static str| get(k).map_or(Ok(false), |v| parse_bool(k, v));
        let range = |k: &'static str| get(k).map(|v| parse_range(k, v)).transpose();

        let default_trunc = match command {
            Command::Exceptional => "100000,1000000",
            Command::Coeffs => "200",
            _ => "",
        };
        let cfg = RunConfig {
            command,
            delta: f64_or("delta", 0.5)?,
            delta_range: range("delta_range")?,
            r: f64_or("r", 0.2)?,
            g: f64_or("g", 0.2)?,
            g_range: range("g_range")?,
            q: parse_q(get("q").unwrap_or("both"))?,
            parity: parse_parity(get("parity").unwrap_or("both"))?,
            trunc: parse_list("trunc", get("trunc").unwrap_or(default_trunc), parse_usize)?,
            tol: f64_or("tol", 1e-12)?,
            dim: usize_or("dim", 2000)?,
            half_width: f64_or("half_width", 400.0)?,
            h: f64_or("h", 0.05)?,
            states: usize_or("states", 3)?,
            e_range: range("e_range")?.unwrap_or(Range { lo: -1.0, hi: 8.0, points: 1801 }),
            energy: get("energy").map(|v| parse_f64("energy", v)).transpose()?,
            x_range: range("x_range")?.unwrap_or(Range { lo: 0.05, hi: 15.0, points: 300 }),
            n: parse_list("n", get("n").unwrap_or("0,1,2,3"), parse_usize)?,
            m: usize_or("m", 0)?,
            scaled: bool_or("scaled")?,
            ed: bool_or("ed")?,
            wavefunction: bool_or("wavefunction")?,
            y_max: f64_or("y_max", 1e6)?,
            threads: usize_or("threads", 0)?,
            format: match get("format").unwrap_or("csv") {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => return Err(invalid("format", format!("`{other}`: use csv or json"))),
            },
            out: get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta < 0.0 {
            return Err(invalid("delta", "must be >= 0"));
        }
        if let Some(d) = self.delta_range {
            if d.lo < 0.0 {
                return Err(invalid("delta_range", "must be >= 0"));
            }
        }
        if self.r < 0.0 {
            return Err(invalid("r", "must be >= 0"));
        }
        for (key, v) in [("tol", self.tol), ("half_width", self.half_width), ("h", self.h)] {
            if !(v > 0.0) {
                return Err(invalid(key, "must be positive"));
            }
        }
        if self.dim < 4 {
            return Err(invalid("dim", "need at least 4 basis vectors"));
        }
        if self.states == 0 {
            return Err(invalid("states", "must be positive"));
        }
        if self.trunc.contains(&0) {
            return Err(invalid("trunc", "truncations must be positive"));
        }
        if !(self.y_max > 10.0) {
            return Err(invalid("y_max", "must exceed 10"));
        }
        if self.half_width <= 10.0 * self.h {
            return Err(invalid("half_width", "must exceed 10 h"));
        }
        let g_c = collapse_coupling(self.r);
        match self.command {
            Command::Collapse => {
                if !(self.r > 0.0) {
                    return Err(invalid("r", "the collapse problem needs r > 0"));
                }
            }
            Command::Exceptional => {
                if self.x_range.lo <= 0.0 {
                    return Err(invalid("x_range", "x = -log10(1 - g/g_c) must be positive"));
                }
            }
            Command::Degenerate => {}
            Command::Spectrum => {
                let gr = self.g_range.ok_or(ConfigError::Missing("g_range"))?;
                if gr.lo < 0.0 || gr.hi >= g_c {
                    return Err(invalid("g_range", format!("must lie in [0, g_c) with g_c = {g_c}")));
                }
            }
            Command::Gcurve | Command::Ed | Command::Coeffs => {
                if !(self.g >= 0.0 && self.g < g_c) {
                    return Err(invalid("g", format!("must lie in [0, g_c) with g_c = {g_c}")));
                }
            }
        }
        if self.command == Command::Coeffs && self.energy.is_none() {
            return Err(ConfigError::Missing("energy"));
        }
        Ok(())
    }

    pub fn subspaces(&self) -> Vec<BargmannIndex> {
        if self.q.is_empty() {
            BargmannIndex::ALL.to_vec()
        } else {
            self.q.clone()
        }
    }

    pub fn parities(&self) -> Vec<Parity> {
        if self.parity.is_empty() {
            Parity::ALL.to_vec()
        } else {
            self.parity.clone()
        }
    }

    /// `delta_range` when given, else the single `delta`.
    pub fn deltas(&self) -> Vec<f64> {
        self.delta_range.map_or_else(|| vec![self.delta], |r| r.values())
    }

    /// Canonical echo of the effective configuration, for output headers.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        put("command", self.command.name().into());
        put("delta", num(self.delta));
        put("delta_range", self.delta_range.map_or("none".into(), |r| r.canonical()));
        put("r", num(self.r));
        put("g", if self.command == Command::Collapse { "g_c".into() } else { num(self.g) });
        put("g_range", self.g_range.map_or("none".into(), |r| r.canonical()));
        put("q", if self.q.is_empty() { "both".into() } else { self.q.iter().map(|q| q_label(*q)).collect::<Vec<_>>().join(",") });
        put("parity", if self.parity.is_empty() { "both".into() } else { parity_label(self.parity[0]).into() });
        put("trunc", if self.trunc.is_empty() { "auto".into() } else { join(&self.trunc) });
        put("tol", num(self.tol));
        put("dim", self.dim.to_string());
        put("half_width", num(self.half_width));
        put("h", num(self.h));
        put("states", self.states.to_string());
        put("e_range", self.e_range.canonical());
        put("energy", self.energy.map_or("none".into(), num));
        put("x_range", self.x_range.canonical());
        put("n", join(&self.n));
        put("m", self.m.to_string());
        put("scaled", self.scaled.to_string());
        put("ed", self.ed.to_string());
        put("wavefunction", self.wavefunction.to_string());
        put("y_max", num(self.y_max));
        put("format", match self.format { Format::Csv => "csv", Format::Json => "json" }.into());
        m
    }
}

pub fn q_label(q: BargmannIndex) -> &'static str {
    match q {
        BargmannIndex::Quarter => "1/4",
        BargmannIndex::ThreeQuarters => "3/4",
    }
}

pub fn parity_label(p: Parity) -> &'static str {
    match p {
        Parity::Even => "+",
        Parity::Odd => "-",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_syntax() {
        let m = parse_config_text("# comment\ndelta = 0.7\n\ng-range = 0:0.5:11  # trailing\n", "t").unwrap();
        assert_eq!(m["delta"], "0.7");
        assert_eq!(m["g_range"], "0:0.5:11");
        assert!(matches!(parse_config_text("delta 0.7", "t"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config_text("bogus = 1", "t"), Err(ConfigError::UnknownKey(_))));
    }

    #[test]
    fn ranges() {
        let r = parse_range("x", "0:1:5").unwrap();
        assert_eq!(r.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_range("x", "0:1:0").is_err());
        assert!(parse_range("x", "1:0:3").is_err());
        assert!(parse_range("x", "0:1").is_err());
    }

    #[test]
    fn spectrum_needs_a_valid_g_range() {
        assert!(matches!(RunConfig::from_map(Command::Spectrum, &map(&[])), Err(ConfigError::Missing("g_range"))));
        let bad = map(&[("r", "0.25"), ("g_range", "0:0.8:5")]);
        assert!(RunConfig::from_map(Command::Spectrum, &bad).is_err());
        let ok = map(&[("r", "0.25"), ("g_range", "0:0.79:5")]);
        assert!(RunConfig::from_map(Command::Spectrum, &ok).is_ok());
    }

    #[test]
    fn collapse_pins_the_coupling() {
        let cfg = RunConfig::from_map(Command::Collapse, &map(&[("r", "0.25"), ("g", "5")])).unwrap();
        assert_eq!(cfg.echo()["g"], "g_c");
        assert!(RunConfig::from_map(Command::Collapse, &map(&[("r", "0")])).is_err());
    }

    #[test]
    fn numeric_controls_must_be_positive() {
        for (k, v) in [("tol", "0"), ("h", "-1"), ("dim", "2"), ("states", "0"), ("trunc", "10,0")] {
            assert!(RunConfig::from_map(Command::Ed, &map(&[(k, v)])).is_err(), "{k}={v}");
        }
    }

    #[test]
    fn integer_shorthand() {
        let cfg = RunConfig::from_map(Command::Exceptional, &map(&[("trunc", "1e5,1e6")])).unwrap();
        assert_eq!(cfg.trunc, vec![100_000, 1_000_000]);
    }
}
