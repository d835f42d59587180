//! Cartesian sweeps over communities, seeds, streams, variants, temporal
//! modes and solvers.

use std::io::Write;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use skyrelay_core::fixtures::Community;
use skyrelay_core::formulation::SolverConfig;
use skyrelay_core::scenario::Scenario;

use crate::args::{DemandMode, SolverKind, SweepArgs, TemporalArg, VariantSpec};
use crate::report;
use crate::solve::{demand_profile, greedy_supports, load_community, load_file, solve, solver_config, stem, usage};

/// One CSV row. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub community: String,
    pub streams: u32,
    pub variant: String,
    pub temporal: String,
    pub solver: String,
    pub antennas: Option<usize>,
    /// Percent of planned nodes carrying an antenna, two decimals.
    pub fraction: String,
    /// Percent saved against one antenna per household, two decimals.
    pub savings: String,
    pub runtime_ms: u64,
    pub seed: u64,
    /// Antennas per period, `;`-separated.
    pub per_period: String,
    pub status: String,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.antennas.is_some() && !matches!(self.status.as_str(), "invalid" | "unsupported" | "infeasible")
            && !self.status.starts_with("error")
    }

    pub fn per_period_counts(&self) -> Vec<usize> {
        self.per_period.split(';').filter_map(|v| v.parse().ok()).collect()
    }
}

/// One grid point.
#[derive(Debug, Clone)]
pub struct Cell<'a> {
    pub community: &'a str,
    pub scenario: &'a Scenario,
    pub seed: u64,
    pub streams: u32,
    pub variant: VariantSpec,
    pub temporal: TemporalArg,
    pub solver: SolverKind,
}

fn sorted_unique<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v.dedup();
    v
}

pub fn run_cell(cell: &Cell<'_>, demand: DemandMode, cfg: &SolverConfig, timing: bool) -> Row {
    let variant = cell.variant.with_temporal(cell.temporal.into());
    let mut row = Row {
        community: cell.community.to_string(),
        streams: cell.streams,
        variant: cell.variant.label(),
        temporal: variant.temporal.to_string(),
        solver: cell.solver.as_str().to_string(),
        antennas: None,
        fraction: String::new(),
        savings: String::new(),
        runtime_ms: 0,
        seed: cell.seed,
        per_period: String::new(),
        status: String::new(),
    };
    if cell.solver == SolverKind::Greedy && !greedy_supports(variant) {
        row.status = "unsupported".into();
        return row;
    }
    let mut scenario = cell.scenario.clone();
    scenario.radio.streams = cell.streams;
    let profile = demand_profile(&scenario, demand, cell.seed);
    match solve(&scenario, variant, cell.solver, profile, cfg) {
        Ok(s) => {
            let m = &s.metrics;
            row.antennas = Some(m.antenna_count);
            row.fraction = format!("{:.2}", m.antenna_fraction);
            row.savings = format!("{:.2}", m.savings_pct);
            row.per_period = m.per_period_counts.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
            if timing {
                row.runtime_ms = u64::try_from(s.runtime.as_millis()).unwrap_or(u64::MAX);
            }
            row.status = if s.violations.is_empty() { s.status } else { "invalid".into() };
        }
        Err(skyrelay_core::error::Error::Infeasible(_)) => row.status = "infeasible".into(),
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

pub fn run(a: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let mut named: Vec<(String, Scenario)> = Vec::new();
    let mut communities = a.communities.clone();
    if communities.is_empty() && a.scenarios.is_empty() {
        communities = Community::ALL.iter().map(|c| c.name().to_string()).collect();
    }
    for c in &communities {
        if !named.iter().any(|(n, _)| n == c) {
            named.push((c.clone(), load_community(c)?));
        }
    }
    for p in &a.scenarios {
        let name = stem(p);
        if named.iter().any(|(n, _)| *n == name) {
            return Err(usage(format!("two scenarios are named '{name}'")));
        }
        named.push((name, load_file(p)?));
    }
    let seeds = sorted_unique(&a.seeds);
    let streams = sorted_unique(&a.streams);
    let variants = sorted_unique(&a.variants);
    let temporal = sorted_unique(&a.temporal);
    let solvers = a.solver.kinds();
    if seeds.is_empty() || streams.is_empty() || variants.is_empty() || temporal.is_empty() {
        return Err(usage("every sweep axis needs at least one value"));
    }
    let mut cells = Vec::new();
    for (name, scenario) in &named {
        for &seed in &seeds {
            for &s in &streams {
                for &v in &variants {
                    for &t in &temporal {
                        for &solver in &solvers {
                            cells.push(Cell { community: name, scenario, seed, streams: s, variant: v, temporal: t, solver });
                        }
                    }
                }
            }
        }
    }
    log::info!("sweeping {} cells", cells.len());
    let cfg = solver_config(&a.limits);
    let rows: Vec<Row> = cells.par_iter().map(|c| run_cell(c, a.demand, &cfg, !a.no_timing)).collect();
    let csv = to_csv(&rows)?;
    match &a.output {
        Some(path) => std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(csv.as_bytes())?,
    }
    if let Some(dir) = &a.plot_dir {
        report::write_all(&rows, dir)?;
    }
    Ok(rows.iter().all(|r| r.status != "invalid"))
}

pub fn to_csv(rows: &[Row]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(HEADER)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

pub const HEADER: [&str; 12] = [
    "community",
    "streams",
    "variant",
    "temporal",
    "solver",
    "antennas",
    "fraction",
    "savings",
    "runtime_ms",
    "seed",
    "per_period",
    "status",
];

pub fn parse_csv(text: &str) -> Result<Vec<Row>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
