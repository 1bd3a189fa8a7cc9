//! Flat `key=value` run configuration with command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dse_core::tower::TheorySpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key `{0}` (known: {keys})", keys = KEYS.join(", "))]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub const KEYS: &[&str] = &[
    "theory",
    "orders",
    "closure",
    "precision_bits",
    "seed",
    "out_dir",
    "format",
    "workers",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    Zero,
    Asymptotic,
    Exact,
}

impl FromStr for ClosureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "asymptotic" => Ok(Self::Asymptotic),
            "exact" => Ok(Self::Exact),
            _ => Err(format!("`{s}` is not one of zero, asymptotic, exact")),
        }
    }
}

impl fmt::Display for ClosureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Asymptotic => "asymptotic",
            Self::Exact => "exact",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            _ => Err(format!("`{s}` is not one of csv, json, svg")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        })
    }
}

/// Inclusive range of truncation orders, written `A..B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderRange {
    pub first: u32,
    pub last: u32,
}

impl OrderRange {
    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

impl FromStr for OrderRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("`{t}` is not a nonnegative integer"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
            None => {
                let n = num(s)?;
                (n, n)
            }
        };
        if first == 0 || first > last {
            return Err(format!("`{s}` is not a range A..B with 1 ≤ A ≤ B"));
        }
        Ok(Self { first, last })
    }
}

impl fmt::Display for OrderRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub theory: String,
    pub orders: OrderRange,
    pub closure: ClosureKind,
    pub precision_bits: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Worker threads for per-order parallelism; 0 uses every core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            theory: "hermitian_quartic".into(),
            orders: OrderRange { first: 2, last: 30 },
            closure: ClosureKind::Zero,
            precision_bits: 256,
            seed: 0x5eed,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
            workers: 0,
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        reason: reason.into(),
    }
}

pub fn parse_formats(value: &str) -> Result<Vec<Format>, String> {
    let mut out: Vec<Format> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("no output format given".into());
    }
    Ok(out)
}

impl RunConfig {
    /// Sets one key. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "theory" => {
                TheorySpec::by_name(value).map_err(|e| bad(&key, e.to_string()))?;
                self.theory = value.into();
            }
            "orders" => self.orders = value.parse().map_err(|e: String| bad(&key, e))?,
            "closure" => self.closure = value.parse().map_err(|e: String| bad(&key, e))?,
            "precision_bits" => {
                let p: u32 = value.parse().map_err(|_| bad(&key, "not an integer"))?;
                if !(64..=1 << 16).contains(&p) {
                    return Err(bad(&key, "must lie in 64..=65536"));
                }
                self.precision_bits = p;
            }
            "seed" => {
                self.seed = match value.strip_prefix("0x") {
                    Some(hex) => u64::from_str_radix(hex, 16),
                    None => value.parse(),
                }
                .map_err(|_| bad(&key, "not an unsigned integer"))?;
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.formats = parse_formats(value).map_err(|e| bad(&key, e))?,
            "workers" => self.workers = value.parse().map_err(|_| bad(&key, "not an integer"))?,
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn theory_spec(&self) -> TheorySpec {
        TheorySpec::by_name(&self.theory).expect("validated on set")
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// The resolved configuration in the same `key=value` form it is read in.
    pub fn to_text(&self) -> String {
        let formats: Vec<String> = self.formats.iter().map(Format::to_string).collect();
        format!(
            "theory={}\norders={}\nclosure={}\nprecision_bits={}\nseed={}\nout_dir={}\nformat={}\nworkers={}\n",
            self.theory,
            self.orders,
            self.closure,
            self.precision_bits,
            self.seed,
            self.out_dir.display(),
            formats.join(","),
            self.workers
        )
    }
}
