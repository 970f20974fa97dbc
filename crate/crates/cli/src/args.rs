//! Flag definitions and their parsing into library types.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use blockmix::{GridRanges, Init, ModelSpec, Scenario, SemConfig, SigmaReading, TraditionalSpec};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "blockmix",
    version,
    about = "Parameter-wise Gaussian co-clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one (G, L^mu, L^sigma) model.
    Fit(FitArgs),
    /// Fit the traditional latent block model with one column partition.
    FitTraditional(FitArgs),
    /// Exhaustive ICL-BIC search over ranges of cluster counts.
    Grid(GridArgs),
    /// Greedy forward ICL-BIC search.
    Forward(ForwardArgs),
    /// Draw a dataset from one of the reference designs.
    Simulate(SimulateArgs),
    /// Rerun a reference simulation study and summarise it.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// CSV file, one row per individual.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub has_header: bool,
    /// Single-byte field delimiter.
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    #[serde(serialize_with = "ser_delimiter")]
    pub delimiter: u8,
    /// Z-score every column before fitting.
    #[arg(long)]
    pub standardize: bool,
}

fn ser_delimiter<S: serde::Serializer>(d: &u8, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&(*d as char).to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Random,
    Kmeans,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SemArgs {
    #[arg(long, default_value_t = 20)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// SE sweeps at the final estimate used for the MAP partitions.
    #[arg(long, default_value_t = 20)]
    pub final_runs: usize,
    /// Master seed; falls back to BLOCKMIX_SEED, then 0.
    #[arg(long, env = "BLOCKMIX_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
}

impl SemArgs {
    pub fn config(&self) -> SemConfig {
        SemConfig {
            burn_in: self.burn_in,
            iterations: self.iterations,
            final_partition_runs: self.final_runs,
            init: match self.init {
                InitArg::Random => Init::RandomPartitions,
                InitArg::Kmeans => Init::KMeansRows,
            },
            ..SemConfig::with_seed(self.seed)
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Directory for the output files (created if missing).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Worker threads for parallel fits.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// G,LMU,LSIGMA for `fit`; G,L for `fit-traditional`.
    #[arg(long)]
    pub spec: String,
    #[command(flatten)]
    pub sem: SemArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    /// Separate column partitions for means and variances.
    NonId,
    /// One column partition.
    Traditional,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `A-B` for every axis, or `A-B,C-D,E-F` per axis (G, L^mu, L^sigma).
    #[arg(long, default_value = "1-5")]
    pub range: String,
    #[arg(long, value_enum, default_value_t = ModelArg::NonId)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1)]
    pub fits_per_candidate: usize,
    #[command(flatten)]
    pub sem: SemArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "1,1,1")]
    pub start: String,
    #[arg(long, default_value = "5,5,5")]
    pub max: String,
    #[arg(long, value_enum, default_value_t = ModelArg::NonId)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1)]
    pub fits_per_candidate: usize,
    #[command(flatten)]
    pub sem: SemArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioArg {
    Sim1,
    Sim2,
    Sim3,
    Sim4,
}

impl ScenarioArg {
    pub fn scenario(self) -> Scenario {
        match self {
            ScenarioArg::Sim1 => Scenario::Sim1,
            ScenarioArg::Sim2 => Scenario::Sim2,
            ScenarioArg::Sim3 => Scenario::IclSelection,
            ScenarioArg::Sim4 => Scenario::ForwardSearch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaArg {
    Variance,
    StdDev,
}

impl SigmaArg {
    pub fn reading(self) -> SigmaReading {
        match self {
            SigmaArg::Variance => SigmaReading::Variance,
            SigmaArg::StdDev => SigmaReading::StdDev,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Rows; defaults to the design's size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns; defaults to the design's size.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, env = "BLOCKMIX_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SigmaArg::Variance)]
    pub sigma_reading: SigmaArg,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub scenario: ScenarioArg,
    /// Datasets to simulate; 50 (25 for sim4) when omitted.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum, default_value_t = SigmaArg::Variance)]
    pub sigma_reading: SigmaArg,
    /// Search range for sim3 (default 2-4) and sim4's reference grid (default 1-5).
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub fits_per_candidate: usize,
    #[command(flatten)]
    pub sem: SemArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    let s = if s == "\\t" || s == "tab" { "\t" } else { s };
    match s.as_bytes() {
        [b] => Ok(*b),
        _ => Err(format!("delimiter must be one byte, got '{s}'")),
    }
}

fn numbers(s: &str, count: usize, what: &str) -> Result<Vec<usize>, CliError> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "{what} '{s}' must be {count} comma-separated integers"
            ))
        })?;
    if v.len() != count {
        return Err(CliError::Usage(format!(
            "{what} '{s}' must be {count} comma-separated integers"
        )));
    }
    Ok(v)
}

pub fn parse_spec(s: &str) -> Result<ModelSpec, CliError> {
    let v = numbers(s, 3, "spec")?;
    Ok(ModelSpec::new(v[0], v[1], v[2])?)
}

pub fn parse_traditional_spec(s: &str) -> Result<TraditionalSpec, CliError> {
    let v = numbers(s, 2, "spec")?;
    Ok(TraditionalSpec::new(v[0], v[1])?)
}

fn parse_interval(s: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let bad = || CliError::Usage(format!("range '{s}' must look like A-B with 1 <= A <= B"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

pub fn parse_ranges(s: &str) -> Result<GridRanges, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [one] => Ok(GridRanges::cube(parse_interval(one)?)),
        [g, lm, ls] => Ok(GridRanges {
            g: parse_interval(g)?,
            l_mu: parse_interval(lm)?,
            l_sigma: parse_interval(ls)?,
        }),
        _ => Err(CliError::Usage(format!(
            "range '{s}' needs one or three intervals"
        ))),
    }
}
