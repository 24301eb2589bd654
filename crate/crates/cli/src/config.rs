//! Flag parsing, key=value config files and the resolved run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wgscatter::PulseShape;

#[derive(Debug, Parser)]
#[command(
    name = "wgscatter",
    version,
    about = "One- and two-photon scattering on a waveguide-coupled two-level emitter"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Spectral and spatial intensity profiles of the single-photon pulses.
    Pulse,
    /// Single-photon reflection probabilities and fidelities versus width.
    Scatter1,
    /// Two-photon outcome probabilities and fidelities versus width.
    Scatter2,
    /// Input and scattered two-photon intensity spectra.
    Spectrum2d,
    /// Photon density along the waveguide before and after scattering.
    Density,
    /// Closed-form, conservation and oracle checks.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pulse => "pulse",
            Command::Scatter1 => "scatter1",
            Command::Scatter2 => "scatter2",
            Command::Spectrum2d => "spectrum2d",
            Command::Density => "density",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Options {
    /// Pulse shape: lorentzian, gaussian or square.
    #[arg(long, global = true)]
    pub shape: Option<String>,

    /// Single spectral width in units of Γ/v_g.
    #[arg(long, global = true, conflicts_with = "sigma_sweep", allow_negative_numbers = true)]
    pub sigma: Option<f64>,

    /// Width sweep `min:max:steps[:log|lin]`.
    #[arg(long, global = true)]
    pub sigma_sweep: Option<String>,

    /// Emitter detuning in units of Γ/(2v_g).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,

    /// Half width of the wavevector grid in units of Γ/v_g.
    #[arg(long, global = true)]
    pub half_width: Option<f64>,

    /// Number of grid points per axis (odd).
    #[arg(long, global = true)]
    pub n_points: Option<usize>,

    /// Drop the two-photon bound-state term.
    #[arg(long, global = true)]
    pub no_nonlinearity: bool,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// key=value file with the same keys as the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Accepted for interface stability; every computation is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// validate: skip the time-domain oracle checks.
    #[arg(long, global = true)]
    pub skip_oracle: bool,

    /// validate: oracle time step in units of 1/Γ.
    #[arg(long, global = true)]
    pub oracle_dt: Option<f64>,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Parsed `min:max:steps[:log|lin]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub spacing: Spacing,
}

impl FromStr for SweepSpec {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(usage(format!("sweep '{s}' must look like min:max:steps[:log|lin]")));
        }
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| usage(format!("'{v}' in sweep '{s}' is not a number")))
        };
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let steps: usize = parts[2]
            .parse()
            .map_err(|_| usage(format!("'{}' in sweep '{s}' is not a step count", parts[2])))?;
        let spacing = match parts.get(3).map(|v| v.to_ascii_lowercase()) {
            None => Spacing::Linear,
            Some(v) if v == "lin" || v == "linear" => Spacing::Linear,
            Some(v) if v == "log" => Spacing::Log,
            Some(v) => return Err(usage(format!("unknown sweep spacing '{v}' (expected log or lin)"))),
        };
        if steps == 0 {
            return Err(usage("sweep needs at least one step"));
        }
        if !(min > 0.0) || !max.is_finite() || max < min {
            return Err(usage(format!("sweep '{s}' needs 0 < min <= max")));
        }
        Ok(Self {
            min,
            max,
            steps,
            spacing,
        })
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

/// Everything a command needs, after merging the config file under the
/// flags. `None` means "use the command's default".
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub shape: Option<PulseShape>,
    pub sigmas: Option<Vec<f64>>,
    /// Detuning in units of Γ/(2v_g).
    pub delta: Option<f64>,
    pub half_width: Option<f64>,
    pub n_points: Option<usize>,
    pub nonlinearity: Option<bool>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub skip_oracle: bool,
    pub oracle_dt: Option<f64>,
}

const KEYS: [&str; 12] = [
    "shape",
    "sigma",
    "sigma-sweep",
    "delta",
    "half-width",
    "n-points",
    "no-nonlinearity",
    "format",
    "out",
    "seed",
    "skip-oracle",
    "oracle-dt",
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key '{key}'", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V, UsageError> {
    value
        .parse()
        .map_err(|_| usage(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, UsageError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(usage(format!("invalid boolean '{value}' for '{key}'"))),
    }
}

fn from_file<V: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<V>, UsageError> {
    file.get(key).map(|v| parse_value(key, v)).transpose()
}

fn pick<V: FromStr>(flag: Option<V>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<V>, UsageError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => from_file(file, key),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, options: &Options) -> Result<Self, UsageError> {
        let file = match &options.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        Self::merge(command, options, &file)
    }

    pub fn merge(command: Command, o: &Options, file: &BTreeMap<String, String>) -> Result<Self, UsageError> {
        let shape = match o.shape.clone().or_else(|| file.get("shape").cloned()) {
            Some(s) => Some(PulseShape::from_str(&s).map_err(|e| usage(e.to_string()))?),
            None => None,
        };

        // A flag of either kind replaces both width keys from the file.
        let (sigma, sweep) = if o.sigma.is_some() || o.sigma_sweep.is_some() {
            (o.sigma, o.sigma_sweep.clone())
        } else {
            (from_file::<f64>(file, "sigma")?, file.get("sigma-sweep").cloned())
        };
        let sigmas = match (sigma, sweep) {
            (Some(_), Some(_)) => return Err(usage("give either sigma or sigma-sweep, not both")),
            (Some(s), None) => Some(vec![s]),
            (None, Some(sweep)) => Some(sweep.parse::<SweepSpec>()?.values()),
            (None, None) => None,
        };
        if let Some(values) = &sigmas {
            if let Some(bad) = values.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
                return Err(usage(format!("spectral width must be positive, got {bad}")));
            }
        }

        let no_nl = o.no_nonlinearity
            || file
                .get("no-nonlinearity")
                .map(|v| parse_bool("no-nonlinearity", v))
                .transpose()?
                .unwrap_or(false);
        let skip_oracle = o.skip_oracle
            || file
                .get("skip-oracle")
                .map(|v| parse_bool("skip-oracle", v))
                .transpose()?
                .unwrap_or(false);

        let format = match (o.format, file.get("format")) {
            (Some(f), _) => f,
            (None, Some(v)) => Format::from_str(v, true).map_err(|_| usage(format!("invalid format '{v}'")))?,
            (None, None) => Format::Csv,
        };

        let config = Self {
            command,
            shape,
            sigmas,
            delta: pick(o.delta, file, "delta")?,
            half_width: pick(o.half_width, file, "half-width")?,
            n_points: pick(o.n_points, file, "n-points")?,
            nonlinearity: no_nl.then_some(false),
            format,
            out: o.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
            seed: pick(o.seed, file, "seed")?,
            skip_oracle,
            oracle_dt: pick(o.oracle_dt, file, "oracle-dt")?,
        };
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), UsageError> {
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return Err(usage("detuning must be finite"));
            }
        }
        if let Some(k) = self.half_width {
            if !(k > 0.0) || !k.is_finite() {
                return Err(usage(format!("half width must be positive, got {k}")));
            }
        }
        if let Some(n) = self.n_points {
            if n < 3 || n % 2 == 0 {
                return Err(usage(format!("n-points must be odd and at least 3, got {n}")));
            }
        }
        if let Some(dt) = self.oracle_dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(usage(format!("oracle time step must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    pub fn grid_override(&self) -> bool {
        self.half_width.is_some() || self.n_points.is_some()
    }
}
