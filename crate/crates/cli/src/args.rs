use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "tiltcond", version, about = "Tilted approximations to conditioned random walks")]
pub struct Cli {
    /// Worker threads for Monte Carlo commands; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the family assumptions on a compact set of tilts.
    Validate(ValidateArgs),
    /// Solve the mean-tilt equation on an index range.
    SolveTilt(SolveTiltArgs),
    /// Tabulate the Edgeworth expansion of the standardized tilted sum.
    Edgeworth(EdgeworthArgs),
    /// Evaluate log g_k at a point.
    GkDensity(GkDensityArgs),
    /// Draw paths from G_k.
    GkSample(GkSampleArgs),
    /// Estimate the total variation distance between the conditional law and G_k.
    Tv(TvArgs),
    /// Importance-sampling estimate of P(S_n >= na).
    IsRun(IsRunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::SolveTilt(_) => "solve-tilt",
            Command::Edgeworth(_) => "edgeworth",
            Command::GkDensity(_) => "gk-density",
            Command::GkSample(_) => "gk-sample",
            Command::Tv(_) => "tv",
            Command::IsRun(_) => "is-run",
        }
    }
}

/// `from:to`, inclusive and 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexRange {
    pub from: usize,
    pub to: usize,
}

impl FromStr for IndexRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected FROM:TO, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self { from: parse(a)?, to: parse(b)? })
    }
}

/// `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_floats(s, 2)?;
        Ok(Self { lo: v[0], hi: v[1] })
    }
}

/// `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_floats(s, 3)?;
        Ok(Self { lo: v[0], hi: v[1], step: v[2] })
    }
}

impl GridRange {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + self.step * i as f64).collect()
    }
}

fn parse_floats(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != count {
        return Err(format!("expected {count} colon-separated numbers, got {s:?}"));
    }
    parts.iter().map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Small,
    Large,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathFormat {
    Csv,
    Binary,
}

impl fmt::Display for PathFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathFormat::Csv => "csv",
            PathFormat::Binary => "binary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Compact set of tilts `lo:hi`; defaults to half of Θ clipped to [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    pub compact: Option<Span>,
    #[arg(long, default_value_t = 41)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub variance_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveTiltArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub range: IndexRange,
    #[arg(long, allow_hyphen_values = true)]
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EdgeworthArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Standardized evaluation grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true, default_value = "-6:6:0.01")]
    pub grid: GridRange,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GkDensityArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    pub regime: RegimeArg,
    /// Comma-separated point `y_1,...,y_k`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1..)]
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GkSampleArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PathFormat::Csv)]
    pub format: PathFormat,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TvArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Grid spacing of the convolution oracle (non-Gaussian families).
    #[arg(long)]
    pub grid_spacing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IsRunArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Threshold: the event is `S_n >= n a`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Length of the G_k prefix of the proposal; 0 tilts every coordinate at θ_n^a.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Also run plain Monte Carlo with the same sample size.
    #[arg(long)]
    pub naive: bool,
}
