//! Line-oriented `key = value` experiment configs.
//!
//! ```text
//! # comments start with '#'
//! experiment = theta
//! d = 2
//! p = 0.3
//! p = 0.75          # vectors repeat the key (or use p = 0.3, 0.75)
//! trials = 1000
//! radius = 64
//! max_vertices = 100000
//! master_seed = 42
//! ```

use std::fmt;
use std::path::PathBuf;

use percaniso_core::lattice::validate_params;
use percaniso_core::{BoxLimits, Params};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey { line: usize, key: String, suggestion: Option<String> },

    #[error("line {line}: unknown experiment `{name}` (expected one of: {})", Experiment::NAMES.join(", "))]
    UnknownExperiment { line: usize, name: String },

    #[error("line {line}: `{key}` given more than once")]
    Duplicate { line: usize, key: String },

    #[error("`{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

impl ConfigError {
    fn invalid(field: &str, message: impl fmt::Display) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Theta,
    Pmf,
    CouplingVerify,
    CouplingLaw,
    Crossing,
    PcBisect,
    Verdict,
    Constants,
}

impl Experiment {
    pub const NAMES: [&'static str; 8] = [
        "theta",
        "pmf",
        "coupling-verify",
        "coupling-law",
        "crossing",
        "pc-bisect",
        "verdict",
        "constants",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Theta => "theta",
            Experiment::Pmf => "pmf",
            Experiment::CouplingVerify => "coupling-verify",
            Experiment::CouplingLaw => "coupling-law",
            Experiment::Crossing => "crossing",
            Experiment::PcBisect => "pc-bisect",
            Experiment::Verdict => "verdict",
            Experiment::Constants => "constants",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "theta" => Experiment::Theta,
            "pmf" => Experiment::Pmf,
            "coupling-verify" => Experiment::CouplingVerify,
            "coupling-law" => Experiment::CouplingLaw,
            "crossing" => Experiment::Crossing,
            "pc-bisect" => Experiment::PcBisect,
            "verdict" => Experiment::Verdict,
            "constants" => Experiment::Constants,
            _ => return None,
        })
    }

    fn needs_params(self) -> bool {
        !matches!(self, Experiment::PcBisect | Experiment::Constants)
    }
}

/// Sweep of one probability over `steps` evenly spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// 0-based axis (1-based in the config file).
    pub axis: usize,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|k| self.start + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Absent only for `pc-bisect` and `constants`.
    pub params: Option<Params>,
    pub d: Option<usize>,
    pub limits: BoxLimits,
    pub trials: u64,
    pub master_seed: u64,
    /// Second master seed for `coupling-law`'s direct sample.
    pub direct_seed: u64,
    pub grid: Option<Grid>,
    pub c1: Option<f64>,
    pub box_sizes: Vec<usize>,
    pub cutoff: usize,
    pub tolerance: f64,
    pub threads: Option<usize>,
    pub output_path: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_RADIUS: i64 = 64;
pub const DEFAULT_MAX_VERTICES: usize = 100_000;
pub const DEFAULT_CUTOFF: usize = 50;
pub const DEFAULT_TOLERANCE: f64 = 0.01;
pub const DEFAULT_BOX_SIZE: usize = 64;

const KEYS: [&str; 18] = [
    "experiment",
    "d",
    "p",
    "trials",
    "radius",
    "max_vertices",
    "master_seed",
    "direct_seed",
    "grid_axis",
    "grid_start",
    "grid_stop",
    "grid_steps",
    "c1",
    "box_size",
    "cutoff",
    "tolerance",
    "threads",
    "output",
];

/// Keys that may repeat; values accumulate.
const VECTOR_KEYS: [&str; 2] = ["p", "box_size"];

fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|(dist, _)| *dist <= 2)
        .min()
        .map(|(_, k)| k.to_string())
}

#[derive(Default)]
struct Raw {
    // (key, value, line) in file order
    entries: Vec<(String, String, usize)>,
}

impl Raw {
    fn scalar(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    fn vector(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _, _)| k == key)
            .flat_map(|(_, v, _)| v.trim_matches(|c| c == '[' || c == ']').split(','))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.scalar(key)
            .map(|(v, line)| {
                v.parse::<T>().map_err(|e| ConfigError::Invalid {
                    field: key.into(),
                    message: format!("line {line}: cannot parse `{v}`: {e}"),
                })
            })
            .transpose()
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = Raw::default();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: full.to_string() });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line, text: full.to_string() });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into(), suggestion: suggest(key) });
        }
        if !VECTOR_KEYS.contains(&key) && raw.scalar(key).is_some() {
            return Err(ConfigError::Duplicate { line, key: key.into() });
        }
        raw.entries.push((key.to_string(), value.to_string(), line));
    }

    let (name, line) = raw.scalar("experiment").ok_or(ConfigError::Missing("experiment"))?;
    let experiment = Experiment::parse(name)
        .ok_or_else(|| ConfigError::UnknownExperiment { line, name: name.into() })?;

    let d: Option<usize> = raw.parse("d")?;
    let p_values = raw
        .vector("p")
        .into_iter()
        .map(|s| s.parse::<f64>().map_err(|e| ConfigError::invalid("p", format!("`{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let params = if p_values.is_empty() {
        if experiment.needs_params() {
            return Err(ConfigError::Missing("p"));
        }
        None
    } else {
        let d = d.unwrap_or(p_values.len());
        validate_params(d, &p_values).map_err(|e| ConfigError::invalid("p", e))?;
        Some(Params::new(p_values).map_err(|e| ConfigError::invalid("p", e))?)
    };
    let d = d.or(params.as_ref().map(Params::d));
    if experiment == Experiment::PcBisect && d.is_none() {
        return Err(ConfigError::Missing("d"));
    }

    let trials = raw.parse("trials")?.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(ConfigError::invalid("trials", "must be at least 1"));
    }
    let radius = raw.parse("radius")?.unwrap_or(DEFAULT_RADIUS);
    let max_vertices = raw.parse("max_vertices")?.unwrap_or(DEFAULT_MAX_VERTICES);
    let limits = BoxLimits::new(max_vertices, radius).map_err(|e| ConfigError::invalid("radius", e))?;
    let master_seed = raw.parse("master_seed")?.unwrap_or(0u64);
    let direct_seed = raw.parse("direct_seed")?.unwrap_or(master_seed.wrapping_add(1));

    let grid_keys = ["grid_axis", "grid_start", "grid_stop", "grid_steps"];
    let present = grid_keys.iter().filter(|k| raw.scalar(k).is_some()).count();
    let grid = match present {
        0 => None,
        4 => {
            let axis: usize = raw.parse("grid_axis")?.unwrap();
            let start: f64 = raw.parse("grid_start")?.unwrap();
            let stop: f64 = raw.parse("grid_stop")?.unwrap();
            let steps: usize = raw.parse("grid_steps")?.unwrap();
            let dim = params.as_ref().map(Params::d).unwrap_or(0);
            if axis < 1 || axis > dim {
                return Err(ConfigError::invalid("grid_axis", format!("must be in 1..={dim}")));
            }
            for (field, v) in [("grid_start", start), ("grid_stop", stop)] {
                if !(0.0..1.0).contains(&v) {
                    return Err(ConfigError::invalid(field, format!("{v} is outside [0, 1)")));
                }
            }
            if steps == 0 {
                return Err(ConfigError::invalid("grid_steps", "must be at least 1"));
            }
            Some(Grid { axis: axis - 1, start, stop, steps })
        }
        _ => {
            let missing = grid_keys.iter().find(|k| raw.scalar(k).is_none()).unwrap();
            return Err(ConfigError::invalid(missing, "grid needs grid_axis, grid_start, grid_stop and grid_steps"));
        }
    };

    let c1: Option<f64> = raw.parse("c1")?;
    if let Some(c1) = c1 {
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(ConfigError::invalid("c1", "must be positive"));
        }
    }
    let box_sizes = raw
        .vector("box_size")
        .into_iter()
        .map(|s| s.parse::<usize>().map_err(|e| ConfigError::invalid("box_size", format!("`{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if box_sizes.iter().any(|&l| l < 2) {
        return Err(ConfigError::invalid("box_size", "must be at least 2"));
    }
    let box_sizes = if box_sizes.is_empty() { vec![DEFAULT_BOX_SIZE] } else { box_sizes };
    let cutoff = raw.parse("cutoff")?.unwrap_or(DEFAULT_CUTOFF);
    if cutoff == 0 {
        return Err(ConfigError::invalid("cutoff", "must be at least 1"));
    }
    let tolerance = raw.parse("tolerance")?.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0) {
        return Err(ConfigError::invalid("tolerance", "must be positive"));
    }
    let threads: Option<usize> = raw.parse("threads")?;
    if threads == Some(0) {
        return Err(ConfigError::invalid("threads", "must be at least 1"));
    }
    let output_path = raw.scalar("output").map(|(v, _)| PathBuf::from(v));

    match experiment {
        Experiment::Crossing if params.as_ref().map(Params::d) != Some(2) => {
            return Err(ConfigError::invalid("p", "crossing needs exactly two probabilities"));
        }
        Experiment::CouplingVerify | Experiment::CouplingLaw
            if params.as_ref().map(Params::d).unwrap_or(0) < 2 =>
        {
            return Err(ConfigError::invalid("p", "coupling needs at least two probabilities (d + 1 >= 2)"));
        }
        Experiment::Verdict if params.as_ref().map(Params::d).unwrap_or(0) < 2 => {
            return Err(ConfigError::invalid("p", "verdict needs d >= 2"));
        }
        Experiment::PcBisect if d.unwrap_or(0) < 2 => {
            return Err(ConfigError::invalid("d", "pc-bisect needs d >= 2"));
        }
        _ => {}
    }

    Ok(ExperimentConfig {
        experiment,
        params,
        d,
        limits,
        trials,
        master_seed,
        direct_seed,
        grid,
        c1,
        box_sizes,
        cutoff,
        tolerance,
        threads,
        output_path,
    })
}
