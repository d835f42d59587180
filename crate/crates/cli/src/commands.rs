use std::io::Write;

use anyhow::Context;
use skyrelay_core::error::Error as CoreError;
use skyrelay_core::plan::{Plan, PlanFile, Variant};
use skyrelay_core::scenario::generate_community;
use skyrelay_core::solver::exact::graph_for;
use skyrelay_core::validator::validate_plan;

use crate::args::{Cli, Command, DemandMode, GenerateArgs, PlanArgs, ReportArgs, ValidateArgs};
use crate::solve::{demand_profile, greedy_supports, load_source, solve, solver_config, usage};
use crate::{report, sweep};

/// Runs one command. `Ok(false)` means the command completed but found an
/// infeasible or invalid plan.
pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate(a) => generate(&a, out),
        Command::Plan(a) => plan(&a, out),
        Command::Validate(a) => validate(&a, out),
        Command::Sweep(a) => sweep::run(&a, out),
        Command::Report(a) => report_cmd(&a, out),
    }
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let s = generate_community(a.homes as usize, a.spacing_m, a.lte_bs as usize, a.seed)
        .map_err(|e| usage(e.to_string()))?;
    std::fs::write(&a.output, s.to_json()).with_context(|| format!("writing {}", a.output.display()))?;
    writeln!(
        out,
        "wrote {} ({} households, {} base stations, mean spacing {:.1} m)",
        a.output.display(),
        s.households.len(),
        s.lte_bs.len(),
        s.mean_nearest_neighbor_m()
    )?;
    Ok(true)
}

fn plan(a: &PlanArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let (name, mut scenario) = load_source(&a.source)?;
    if let Some(n) = a.streams {
        scenario.radio.streams = n;
    }
    let variant = Variant { hops: a.variant.into(), lte: a.lte, temporal: a.temporal.into() };
    if a.solver == crate::args::SolverKind::Greedy && !greedy_supports(variant) {
        return Err(usage(format!("the greedy solver does not handle {variant}")));
    }
    let profile = demand_profile(&scenario, a.demand, a.seed);
    let solved = match solve(&scenario, variant, a.solver, profile, &solver_config(&a.limits)) {
        Ok(s) => s,
        Err(CoreError::Infeasible(msg)) => {
            writeln!(out, "infeasible: {msg}")?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let m = &solved.metrics;
    let sources: Vec<String> = solved
        .plans
        .iter()
        .flat_map(|p| p.sources.iter())
        .map(|&s| solved.graph.node(s).id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    writeln!(out, "scenario={name}")?;
    writeln!(out, "variant={variant}")?;
    writeln!(out, "solver={}", a.solver.as_str())?;
    writeln!(out, "streams={}", scenario.radio.streams)?;
    writeln!(out, "antennas={}", m.antenna_count)?;
    writeln!(out, "fraction={:.2}", m.antenna_fraction)?;
    writeln!(out, "savings={:.2}", m.savings_pct)?;
    writeln!(out, "sources={}", sources.join(","))?;
    let depth = m.max_relay_depth.map_or_else(|| "none".to_string(), |d| d.to_string());
    writeln!(out, "max_relay_depth={depth}")?;
    let counts: Vec<String> = m.per_period_counts.iter().map(ToString::to_string).collect();
    writeln!(out, "per_period={}", counts.join(","))?;
    writeln!(out, "status={}", solved.status)?;
    if !a.no_timing {
        writeln!(out, "runtime_ms={}", solved.runtime.as_millis())?;
    }
    if a.trace {
        if let Some(t) = &solved.trace {
            write!(out, "{}", t.to_text(&solved.graph))?;
        }
    }
    if let Some(path) = &a.output {
        let file = PlanFile {
            variant,
            streams: scenario.radio.streams,
            solver: a.solver.as_str().into(),
            demand: a.demand.as_str().into(),
            seed: a.seed,
            antennas: m.antenna_count,
            plans: solved.plans.iter().map(|p| p.to_doc(&solved.graph)).collect(),
        };
        let json = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    for v in &solved.violations {
        writeln!(out, "{v}")?;
    }
    Ok(solved.violations.is_empty())
}

fn validate(a: &ValidateArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let (_, mut scenario) = load_source(&a.source)?;
    let text = std::fs::read_to_string(&a.plan).map_err(|e| usage(format!("cannot read {}: {e}", a.plan.display())))?;
    let file: PlanFile = match serde_json::from_str(&text) {
        Ok(f) => f,
        Err(e) => {
            writeln!(out, "structure plan file lhs=0 == rhs=1: {e}")?;
            return Ok(false);
        }
    };
    if !(1..=4).contains(&file.streams) {
        writeln!(out, "structure streams={} outside 1..=4", file.streams)?;
        return Ok(false);
    }
    let Some(mode) = DemandMode::parse(&file.demand) else {
        writeln!(out, "structure demand mode '{}' unknown", file.demand)?;
        return Ok(false);
    };
    scenario.radio.streams = file.streams;
    let profile = demand_profile(&scenario, mode, file.seed);
    let graph = graph_for(&scenario, file.variant, &profile);
    let mut violations = 0;
    let mut antennas = 0;
    for doc in &file.plans {
        let checked = Plan::from_doc(doc, file.variant, &graph)
            .and_then(|p| validate_plan(&p, &graph, &profile, file.variant, &scenario).map(|r| (p, r)));
        match checked {
            Ok((p, report)) => {
                antennas = antennas.max(p.antenna_count());
                violations += report.violations.len();
                write!(out, "{}", report.to_text())?;
            }
            Err(e) => {
                violations += 1;
                writeln!(out, "structure {e}")?;
            }
        }
    }
    if file.plans.is_empty() {
        violations += 1;
        writeln!(out, "structure plan file holds no plans")?;
    }
    if violations == 0 && antennas != file.antennas {
        violations += 1;
        writeln!(out, "structure antennas lhs={} == rhs={}", file.antennas, antennas)?;
    }
    if violations == 0 {
        writeln!(out, "feasible")?;
    } else {
        writeln!(out, "violations={violations}")?;
    }
    Ok(violations == 0)
}

fn report_cmd(a: &ReportArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&a.csv).map_err(|e| usage(format!("cannot read {}: {e}", a.csv.display())))?;
    let rows = sweep::parse_csv(&text).map_err(|e| usage(format!("{}: {e}", a.csv.display())))?;
    let written = report::write_all(&rows, &a.out_dir)?;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(true)
}
