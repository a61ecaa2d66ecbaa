//! Scenario files: flat `key = value` pairs, optionally grouped in sections.
//!
//! ```toml
//! kick_kind = "orientation"
//!
//! [strategy]
//! scheme = "S2"
//! max_kicks = 12
//! ```
//!
//! Section names are free; each key may appear once anywhere in the file.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::basis::{BasisSpec, DEFAULT_N_EXACT};
use crate::error::{Error, Result};
use crate::propagator::{KickKind, DEFAULT_SAMPLES_PER_PERIOD};
use crate::search::MaximaMode;
use crate::strategy::{
    default_area, Scheme, StrategyConfig, DEFAULT_EPSILON, DEFAULT_MAX_KICKS, DEFAULT_N_CONTROL, DEFAULT_STOP_GAIN,
};

/// Every recognised key, in emission order.
pub const KEYS: [&str; 13] = [
    "scheme",
    "maxima_mode",
    "kick_kind",
    "area",
    "epsilon",
    "n_control",
    "n_exact",
    "max_kicks",
    "stop_gain",
    "timing_shift_fraction",
    "area_scale",
    "sampling_per_period",
    "output_dir",
];

/// Defaults, one line per key, for help texts.
pub const DEFAULTS_HELP: &str = "\
scheme                = \"S1\"                 (S1 | S2)
maxima_mode           = \"global_in_period\"   (global_in_period | first_local_after_kick)
kick_kind             = \"orientation\"        (orientation | alignment)
area                  = 1.0 for orientation, 1.5 for alignment
epsilon               = 0.03
n_control             = 5
n_exact               = 40
max_kicks             = 15
stop_gain             = 0.001
timing_shift_fraction = 0.0                  (|x| < 0.05, fraction of the rotational period)
area_scale            = 1.0                  (0.5 ..= 2.0)
sampling_per_period   = 4096
output_dir            = \".\"";

/// Open-loop perturbation applied when replaying a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbations {
    /// Added to every inter-kick delay, as a fraction of the rotational period.
    pub timing_shift_fraction: f64,
    /// Multiplies every kick area.
    pub area_scale: f64,
}

impl Default for Perturbations {
    fn default() -> Self {
        Self {
            timing_shift_fraction: 0.0,
            area_scale: 1.0,
        }
    }
}

impl Perturbations {
    pub fn validate(&self) -> Result<()> {
        if !(self.timing_shift_fraction.abs() < 0.05) {
            return Err(Error::config("timing_shift_fraction", "must satisfy |x| < 0.05"));
        }
        if !(0.5..=2.0).contains(&self.area_scale) {
            return Err(Error::config("area_scale", "must lie in [0.5, 2.0]"));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.timing_shift_fraction == 0.0 && self.area_scale == 1.0
    }
}

/// Output series a scenario writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Trajectory,
    Kicks,
    Summary,
}

pub const ALL_SERIES: [Series; 3] = [Series::Trajectory, Series::Kicks, Series::Summary];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: StrategyConfig<f64>,
    pub basis: BasisSpec,
    pub perturbations: Option<Perturbations>,
    pub sampling_per_period: usize,
    pub output_dir: Option<PathBuf>,
    pub outputs: Vec<Series>,
}

impl Scenario {
    /// Default scenario for a kick kind.
    pub fn new(name: impl Into<String>, kind: KickKind) -> Self {
        Self {
            name: name.into(),
            config: StrategyConfig::new(kind),
            basis: BasisSpec {
                n_control: DEFAULT_N_CONTROL,
                n_exact: DEFAULT_N_EXACT,
            },
            perturbations: None,
            sampling_per_period: DEFAULT_SAMPLES_PER_PERIOD,
            output_dir: None,
            outputs: ALL_SERIES.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        BasisSpec::new(self.basis.n_control, self.basis.n_exact)?;
        if self.config.n_control != self.basis.n_control {
            return Err(Error::config("n_control", "strategy and basis disagree"));
        }
        if let Some(p) = &self.perturbations {
            p.validate()?;
        }
        if self.sampling_per_period < 16 {
            return Err(Error::config("sampling_per_period", "must be at least 16"));
        }
        Ok(())
    }

    pub fn perturbations(&self) -> Perturbations {
        self.perturbations.unwrap_or_default()
    }

    /// Flat config text that [`parse_str`] maps back to this scenario.
    pub fn to_toml(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("scheme", format!("\"{}\"", c.scheme.as_str()));
        line("maxima_mode", format!("\"{}\"", c.maxima_mode.as_str()));
        line("kick_kind", format!("\"{}\"", c.kick_kind.as_str()));
        line("area", float(c.area));
        line("epsilon", float(c.epsilon));
        line("n_control", c.n_control.to_string());
        line("n_exact", self.basis.n_exact.to_string());
        line("max_kicks", c.max_kicks.to_string());
        line("stop_gain", float(c.stop_gain));
        if let Some(p) = &self.perturbations {
            line("timing_shift_fraction", float(p.timing_shift_fraction));
            line("area_scale", float(p.area_scale));
        }
        line("sampling_per_period", self.sampling_per_period.to_string());
        if let Some(dir) = &self.output_dir {
            line("output_dir", Value::String(dir.display().to_string()).to_string());
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`, always with a
/// decimal point or exponent so TOML reads it as a float.
fn float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || !x.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn collect<'a>(table: &'a Table, out: &mut Vec<(&'a str, &'a Value)>) -> Result<()> {
    for (key, value) in table {
        match value {
            Value::Table(section) => {
                for (k, v) in section {
                    if v.is_table() {
                        return Err(Error::config(k, "nested sections are not supported"));
                    }
                    out.push((k.as_str(), v));
                }
            }
            _ => out.push((key.as_str(), value)),
        }
    }
    Ok(())
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::config(key, "expected a number")),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::config(key, "expected a non-negative integer")),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::config(key, "expected a string"))
}

/// Parses scenario text; `name` labels the result.
pub fn parse_str(text: &str, name: &str) -> Result<Scenario> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let mut entries = Vec::new();
    collect(&table, &mut entries)?;
    for (i, (k, _)) in entries.iter().enumerate() {
        if !KEYS.contains(k) {
            return Err(Error::config(k, "unknown key"));
        }
        if entries[..i].iter().any(|(other, _)| other == k) {
            return Err(Error::config(k, "given more than once"));
        }
    }
    let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);

    let kind = match get("kick_kind") {
        Some(v) => as_str("kick_kind", v)?
            .parse::<KickKind>()
            .map_err(|_| Error::config("kick_kind", "expected orientation or alignment"))?,
        None => KickKind::Orientation,
    };
    let mut s = Scenario::new(name, kind);
    let c = &mut s.config;
    if let Some(v) = get("scheme") {
        c.scheme = match as_str("scheme", v)? {
            "S1" | "s1" => Scheme::S1,
            "S2" | "s2" => Scheme::S2,
            _ => return Err(Error::config("scheme", "expected S1 or S2")),
        };
    }
    if let Some(v) = get("maxima_mode") {
        c.maxima_mode = match as_str("maxima_mode", v)? {
            "global_in_period" => MaximaMode::GlobalInPeriod,
            "first_local_after_kick" => MaximaMode::FirstLocalAfterKick,
            _ => {
                return Err(Error::config(
                    "maxima_mode",
                    "expected global_in_period or first_local_after_kick",
                ))
            }
        };
    }
    c.area = get("area").map_or(Ok(default_area(kind)), |v| as_f64("area", v))?;
    c.epsilon = get("epsilon").map_or(Ok(DEFAULT_EPSILON), |v| as_f64("epsilon", v))?;
    c.n_control = get("n_control").map_or(Ok(DEFAULT_N_CONTROL), |v| as_usize("n_control", v))?;
    c.max_kicks = get("max_kicks").map_or(Ok(DEFAULT_MAX_KICKS), |v| as_usize("max_kicks", v))?;
    c.stop_gain = get("stop_gain").map_or(Ok(DEFAULT_STOP_GAIN), |v| as_f64("stop_gain", v))?;
    s.basis = BasisSpec {
        n_control: c.n_control,
        n_exact: get("n_exact").map_or(Ok(DEFAULT_N_EXACT), |v| as_usize("n_exact", v))?,
    };
    let shift = get("timing_shift_fraction")
        .map(|v| as_f64("timing_shift_fraction", v))
        .transpose()?;
    let scale = get("area_scale").map(|v| as_f64("area_scale", v)).transpose()?;
    if shift.is_some() || scale.is_some() {
        s.perturbations = Some(Perturbations {
            timing_shift_fraction: shift.unwrap_or(0.0),
            area_scale: scale.unwrap_or(1.0),
        });
    }
    s.sampling_per_period = get("sampling_per_period")
        .map_or(Ok(DEFAULT_SAMPLES_PER_PERIOD), |v| as_usize("sampling_per_period", v))?;
    s.output_dir = get("output_dir")
        .map(|v| as_str("output_dir", v).map(PathBuf::from))
        .transpose()?;
    s.validate()?;
    Ok(s)
}

/// Reads and validates a scenario file; the scenario is named after the file
/// stem.
pub fn parse_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    parse_str(&text, name)
}

/// Output directory precedence: command-line flag, then the environment
/// variable, then the config file, then the working directory.
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<&str>, config: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|e| !e.is_empty()).map(PathBuf::from))
        .or_else(|| config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let s = parse_str("kick_kind = \"orientation\"\n", "min").unwrap();
        assert_eq!(s.config.area, 1.0);
        assert_eq!(s.config.epsilon, 0.03);
        assert_eq!(s.config.n_control, 5);
        assert_eq!(s.config.scheme, Scheme::S1);
        assert_eq!(s.config.maxima_mode, MaximaMode::GlobalInPeriod);
        assert_eq!(s.basis.n_exact, 40);
        assert!(s.perturbations.is_none());
        let a = parse_str("kick_kind = \"alignment\"", "a").unwrap();
        assert_eq!(a.config.area, 1.5);
    }

    #[test]
    fn sections_are_flattened() {
        let s = parse_str("[strategy]\nscheme = \"S2\"\nmax_kicks = 9\n[robustness]\narea_scale = 1.1\n", "x").unwrap();
        assert_eq!(s.config.scheme, Scheme::S2);
        assert_eq!(s.config.max_kicks, 9);
        assert_eq!(s.perturbations().area_scale, 1.1);
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(parse_str("area = 0", "x").unwrap_err()), "area");
        assert_eq!(key_of(parse_str("n_control = 40\nn_exact = 40", "x").unwrap_err()), "n_exact");
        assert_eq!(key_of(parse_str("colour = 3", "x").unwrap_err()), "colour");
        assert_eq!(key_of(parse_str("area = 1\n[s]\narea = 2", "x").unwrap_err()), "area");
        assert_eq!(key_of(parse_str("timing_shift_fraction = 0.05", "x").unwrap_err()), "timing_shift_fraction");
        assert_eq!(key_of(parse_str("area_scale = 2.5", "x").unwrap_err()), "area_scale");
        assert_eq!(key_of(parse_str("scheme = \"S3\"", "x").unwrap_err()), "scheme");
        assert_eq!(key_of(parse_str("max_kicks = -1", "x").unwrap_err()), "max_kicks");
        assert!(matches!(parse_str("area = ", "x"), Err(Error::Parse(_))));
    }

    #[test]
    fn emitted_text_round_trips() {
        let mut s = parse_str("kick_kind = \"alignment\"\nmaxima_mode = \"first_local_after_kick\"\nepsilon = 0.01", "rt").unwrap();
        s.perturbations = Some(Perturbations {
            timing_shift_fraction: -0.001,
            area_scale: 0.9,
        });
        s.output_dir = Some(PathBuf::from("out dir/\"q\""));
        assert_eq!(parse_str(&s.to_toml(), "rt").unwrap(), s);
    }

    #[test]
    fn output_dir_precedence() {
        let flag = Path::new("/flag");
        let cfg = Path::new("/cfg");
        assert_eq!(resolve_output_dir(Some(flag), Some("/env"), Some(cfg)), flag);
        assert_eq!(resolve_output_dir(None, Some("/env"), Some(cfg)), Path::new("/env"));
        assert_eq!(resolve_output_dir(None, None, Some(cfg)), cfg);
        assert_eq!(resolve_output_dir(None, Some(""), None), Path::new("."));
    }
}
