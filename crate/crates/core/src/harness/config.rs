use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::p_cap_from_env;
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?} (expected csv or jsonl)"))),
        }
    }
}

/// Which subgroups of each `F_p^x` a scan visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSelection {
    All,
    /// Only these indices; those not dividing `p - 1` are skipped.
    Indices(Vec<u64>),
    /// Subgroups with `log_p |H| >= alpha_min`.
    AlphaMin(f64),
}

impl IndexSelection {
    pub fn accepts(&self, index: u64, alpha: f64) -> bool {
        match self {
            IndexSelection::All => true,
            IndexSelection::Indices(v) => v.contains(&index),
            IndexSelection::AlphaMin(a) => alpha >= *a,
        }
    }
}

fn parse_indices(s: &str) -> Result<IndexSelection> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(IndexSelection::All);
    }
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| Error::InvalidParameter(format!("bad index list {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.contains(&0) {
        return Err(Error::InvalidParameter("index 0 is not allowed".into()));
    }
    Ok(IndexSelection::Indices(v))
}

/// Settings from one source; unset fields fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanOverrides {
    pub p_min: Option<u64>,
    pub p_max: Option<u64>,
    pub index: Option<String>,
    pub alpha_min: Option<f64>,
    pub eta: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub parallelism: Option<usize>,
}

impl ScanOverrides {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected key=value", n + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<Option<u64>> {
            map.get(k)
                .map(|v| v.parse().map_err(|_| Error::InvalidParameter(format!("config {k}: not an integer: {v:?}"))))
                .transpose()
        };
        let mut out = ScanOverrides {
            p_min: num("p_min")?,
            p_max: num("p_max")?,
            index: map.get("index").cloned(),
            alpha_min: map
                .get("alpha_min")
                .map(|v| v.parse().map_err(|_| Error::InvalidParameter(format!("config alpha_min: {v:?}"))))
                .transpose()?,
            eta: map.get("eta").cloned(),
            output: map.get("output").map(PathBuf::from),
            format: map.get("format").map(|v| v.parse()).transpose()?,
            parallelism: num("parallelism")?.map(|v| v as usize),
        };
        const KNOWN: [&str; 8] = ["p_min", "p_max", "index", "alpha_min", "eta", "output", "format", "parallelism"];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key {k:?}")));
        }
        if out.index.as_deref() == Some("") {
            out.index = None;
        }
        Ok(out)
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: ScanOverrides) -> ScanOverrides {
        ScanOverrides {
            p_min: self.p_min.or(base.p_min),
            p_max: self.p_max.or(base.p_max),
            index: self.index.or(base.index),
            alpha_min: self.alpha_min.or(base.alpha_min),
            eta: self.eta.or(base.eta),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
            parallelism: self.parallelism.or(base.parallelism),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub p_min: u64,
    pub p_max: u64,
    pub selection: IndexSelection,
    #[serde(with = "crate::rational::serde_str")]
    pub eta: BigRational,
    pub output: PathBuf,
    pub format: Format,
    pub parallelism: usize,
}

impl ScanConfig {
    /// Merges sources with precedence CLI > file > defaults and validates the result.
    pub fn resolve(cli: ScanOverrides, file: Option<&Path>, cap: Option<u64>) -> Result<Self> {
        let file = match file {
            Some(path) => ScanOverrides::from_file(path)?,
            None => ScanOverrides::default(),
        };
        let m = cli.over(file);
        let format = m.format.unwrap_or(Format::Csv);
        let selection = match (&m.index, m.alpha_min) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("index and alpha_min are mutually exclusive".into()))
            }
            (Some(s), None) => parse_indices(s)?,
            (None, Some(a)) => IndexSelection::AlphaMin(a),
            (None, None) => IndexSelection::All,
        };
        let cfg = ScanConfig {
            p_min: m.p_min.unwrap_or(3),
            p_max: m.p_max.unwrap_or(101),
            selection,
            eta: parse_rational(m.eta.as_deref().unwrap_or("1/4"))?,
            output: m.output.unwrap_or_else(|| {
                PathBuf::from(match format {
                    Format::Csv => "scan.csv",
                    Format::Jsonl => "scan.jsonl",
                })
            }),
            format,
            parallelism: m.parallelism.unwrap_or_else(default_parallelism),
        };
        cfg.validate(cap.unwrap_or_else(p_cap_from_env))?;
        Ok(cfg)
    }

    pub fn validate(&self, cap: u64) -> Result<()> {
        if self.p_min > self.p_max {
            return Err(Error::InvalidParameter(format!("p_min {} exceeds p_max {}", self.p_min, self.p_max)));
        }
        if self.p_max > cap {
            return Err(Error::TooLarge { p: self.p_max, cap });
        }
        if self.eta <= BigRational::from_integer(0.into()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", format_rational(&self.eta))));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidParameter("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Numerical tolerances used by the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative, for Parseval and duality identities.
    pub parseval: f64,
    /// Absolute per entry, exact convolution vs spectral reconstruction.
    pub convolution: f64,
    /// Absolute, closed-form magnitudes of exponential sums.
    pub magnitude: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { parseval: 1e-9, convolution: 1e-8, magnitude: 1e-9 }
    }
}

impl Tolerances {
    /// Applies `"name=value,name=value"`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("tolerance override {item:?}: expected name=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| Error::InvalidParameter(format!("tolerance {k}: bad value {v:?}")))?;
            match k.trim() {
                "parseval" => self.parseval = v,
                "convolution" => self.convolution = v,
                "magnitude" => self.magnitude = v,
                other => return Err(Error::InvalidParameter(format!("unknown tolerance {other:?}"))),
            }
        }
        Ok(self)
    }
}
