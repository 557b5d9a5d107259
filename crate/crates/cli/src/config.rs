//! Run configuration: precedence between flags, key=value files, environment,
//! and per-command defaults, plus coupling-grid parsing.
//!
//! Every resolved value is recorded in a string map that the commands echo
//! into their JSON artifacts, so an artifact always carries the exact
//! configuration that produced it.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "KIRCHHOFF_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn wants_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("format must be json, csv or both, got {other:?}")),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Both => "both",
        })
    }
}

/// The --a flag: an explicit coupling or the per-command canonical choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Auto,
    Value(f64),
}

impl FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Coupling::Auto);
        }
        s.parse::<f64>().map(Coupling::Value).map_err(|_| {
            format!("coupling must be a number or \"auto\", got {s:?}")
        })
    }
}

impl std::fmt::Display for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coupling::Auto => f.write_str("auto"),
            Coupling::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Flag values overlaid on a key=value file, with the file overlaid on
/// defaults. Keys use the long flag spelling without dashes: N, p, a, b,
/// f-inf, f-min, f-max, tol, out, format, a-grid, seed, theorem, count.
pub struct Overlay {
    file: BTreeMap<String, String>,
    /// Every value this run resolved, flag or file or default, as given.
    pub resolved: BTreeMap<String, String>,
}

impl Overlay {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    format!("{}:{}: expected key=value, got {line:?}", path.display(), lineno + 1)
                })?;
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Overlay { file, resolved: BTreeMap::new() })
    }

    /// Resolve one key with flag > file > default precedence.
    pub fn take<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<Option<T>, String>
    where
        T: FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse::<T>()
                        .map_err(|e| format!("config key {key}: {e}"))?,
                ),
                None => default,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// Like take, but the key must end up with a value.
    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, String>
    where
        T: FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        self.take(key, flag, None)?
            .ok_or_else(|| format!("--{key} is required (flag or config file)"))
    }

    /// Output directory: flag, then file, then KIRCHHOFF_OUT, then the
    /// current directory. Created if missing.
    pub fn out_dir(&mut self, flag: Option<PathBuf>) -> Result<PathBuf, String> {
        let dir = flag
            .or_else(|| self.file.get("out").map(PathBuf::from))
            .or_else(|| env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)
            .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
        self.resolved.insert("out".into(), dir.display().to_string());
        Ok(dir)
    }
}

/// Parse a coupling grid spec "log:lo:hi:n" or "lin:lo:hi:n" into an
/// ascending grid with both endpoints included.
pub fn parse_a_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("a-grid must be log:lo:hi:n or lin:lo:hi:n, got {spec:?}"));
    }
    let lo: f64 = parts[1].parse().map_err(|_| format!("a-grid lower end {:?}", parts[1]))?;
    let hi: f64 = parts[2].parse().map_err(|_| format!("a-grid upper end {:?}", parts[2]))?;
    let n: usize = parts[3].parse().map_err(|_| format!("a-grid count {:?}", parts[3]))?;
    if n < 2 {
        return Err("a-grid needs at least 2 points".into());
    }
    if !(hi > lo) {
        return Err(format!("a-grid needs lo < hi, got {lo} and {hi}"));
    }
    let steps = (n - 1) as f64;
    match parts[0] {
        "lin" => {
            if lo < 0.0 {
                return Err("couplings must be nonnegative".into());
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / steps).collect())
        }
        "log" => {
            if !(lo > 0.0) {
                return Err("log grids need lo > 0".into());
            }
            let ratio = hi / lo;
            Ok((0..n).map(|i| lo * ratio.powf(i as f64 / steps)).collect())
        }
        other => Err(format!("a-grid kind must be lin or log, got {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs_parse_with_exact_endpoints() {
        let g = parse_a_grid("lin:0:1:5").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_a_grid("log:1e-3:1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[3] - 1.0).abs() < 1e-15);
        assert!((g[1] - 1e-2).abs() < 1e-15);

        assert!(parse_a_grid("log:0:1:4").is_err());
        assert!(parse_a_grid("geom:1:2:4").is_err());
        assert!(parse_a_grid("lin:1:2:1").is_err());
        assert!(parse_a_grid("lin:2:1:4").is_err());
    }

    #[test]
    fn coupling_flag_accepts_auto_and_numbers() {
        assert_eq!("auto".parse::<Coupling>().unwrap(), Coupling::Auto);
        assert_eq!("0.5".parse::<Coupling>().unwrap(), Coupling::Value(0.5));
        assert!("x".parse::<Coupling>().is_err());
    }
}
