use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skyrelay_core::plan::{Hops, Temporal, Variant};

#[derive(Debug, Parser)]
#[command(name = "skyrelay", version, about = "Plan satellite injection points and wireless relay routing for live TV")]
pub struct Cli {
    /// Worker threads for parallel solves; defaults to one per core.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a community and write its scenario document.
    Generate(GenerateArgs),
    /// Solve one planning variant and print its metrics.
    Plan(PlanArgs),
    /// Check a plan file against its scenario.
    Validate(ValidateArgs),
    /// Run a grid of planning cells and write one CSV row per cell.
    Sweep(SweepArgs),
    /// Turn a sweep CSV into plot-data files and SVG charts.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub homes: u32,
    /// Target mean nearest-neighbor distance.
    #[arg(long = "spacing-m", value_parser = positive_f64)]
    pub spacing_m: f64,
    #[arg(long = "lte-bs", default_value_t = 0)]
    pub lte_bs: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

/// Where a scenario comes from: a document on disk or a bundled community.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ScenarioSource {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Bundled community: i, ii, iii or iv.
    #[arg(long)]
    pub community: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HopsArg {
    OneHop,
    TwoHop,
    Splittable,
}

impl From<HopsArg> for Hops {
    fn from(h: HopsArg) -> Self {
        match h {
            HopsArg::OneHop => Hops::One,
            HopsArg::TwoHop => Hops::Two,
            HopsArg::Splittable => Hops::Splittable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum TemporalArg {
    Fixed,
    Dynamic,
    SemiDynamic,
    Static,
}

impl From<TemporalArg> for Temporal {
    fn from(t: TemporalArg) -> Self {
        match t {
            TemporalArg::Fixed => Temporal::Fixed,
            TemporalArg::Dynamic => Temporal::Dynamic,
            TemporalArg::SemiDynamic => Temporal::SemiDynamic,
            TemporalArg::Static => Temporal::Static,
        }
    }
}

/// Demand fed to the solver: per-household peaks or the sampled day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemandMode {
    Peak,
    Profile,
}

impl DemandMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DemandMode::Peak => "peak",
            DemandMode::Profile => "profile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "peak" => Some(DemandMode::Peak),
            "profile" => Some(DemandMode::Profile),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum SolverKind {
    Exact,
    Greedy,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Exact,
    Greedy,
    Both,
}

impl SolverChoice {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverChoice::Exact => vec![SolverKind::Exact],
            SolverChoice::Greedy => vec![SolverKind::Greedy],
            SolverChoice::Both => vec![SolverKind::Exact, SolverKind::Greedy],
        }
    }
}

/// Branch-and-bound limits shared by `plan` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Branch-and-bound node budget per model.
    #[arg(long = "node-limit")]
    pub node_limit: Option<usize>,
    /// Wall-clock budget per model. Results then depend on machine speed.
    #[arg(long = "time-limit-s", value_parser = positive_f64)]
    pub time_limit_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long, value_enum, default_value = "one-hop")]
    pub variant: HopsArg,
    /// Let LTE base stations relay.
    #[arg(long)]
    pub lte: bool,
    /// Parallel WiFi streams; defaults to the scenario's radio setting.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    pub streams: Option<u32>,
    #[arg(long, value_enum, default_value = "fixed")]
    pub temporal: TemporalArg,
    #[arg(long, value_enum, default_value = "profile")]
    pub demand: DemandMode,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: SolverKind,
    /// Demand sampling seed.
    #[arg(long, default_value_t = skyrelay_core::fixtures::DEMAND_SEED)]
    pub seed: u64,
    /// Write the plan document here.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Print the greedy step trace.
    #[arg(long)]
    pub trace: bool,
    /// Leave wall-clock timings out of the output.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long)]
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Bundled communities; all four when neither this nor --scenario is given.
    #[arg(long = "community", value_delimiter = ',')]
    pub communities: Vec<String>,
    /// Scenario documents, named by file stem in the output.
    #[arg(long = "scenario")]
    pub scenarios: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4",
          value_parser = clap::value_parser!(u32).range(1..=4))]
    pub streams: Vec<u32>,
    /// Variants such as one-hop, two-hop+lte or splittable.
    #[arg(long, value_delimiter = ',', default_value = "one-hop,two-hop", value_parser = parse_variant)]
    pub variants: Vec<VariantSpec>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fixed")]
    pub temporal: Vec<TemporalArg>,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: SolverChoice,
    #[arg(long = "seed", value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(long, value_enum, default_value = "profile")]
    pub demand: DemandMode,
    /// CSV destination; standard output when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Also write plot data and SVG charts into this directory.
    #[arg(long = "plot-dir")]
    pub plot_dir: Option<PathBuf>,
    /// Write 0 in the runtime column so repeated sweeps compare equal.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sweep CSV to read.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

/// Hop structure plus LTE switch; the temporal axis is swept separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariantSpec {
    pub hops: Hops,
    pub lte: bool,
}

impl VariantSpec {
    pub fn with_temporal(self, temporal: Temporal) -> Variant {
        Variant { hops: self.hops, lte: self.lte, temporal }
    }

    pub fn label(self) -> String {
        format!("{}{}", self.hops, if self.lte { "+lte" } else { "" })
    }
}

pub fn parse_variant(s: &str) -> Result<VariantSpec, String> {
    let (base, lte) = match s.strip_suffix("+lte") {
        Some(b) => (b, true),
        None => (s, false),
    };
    let hops = base.parse::<Hops>().map_err(|e| e.to_string())?;
    Ok(VariantSpec { hops, lte })
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}
