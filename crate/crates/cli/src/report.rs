//! Plot data and charts from sweep rows:
//!
//! - `fixed_antennas.dat`: antennas at peak demand per streams, community
//!   and variant, plus one bar chart per stream count;
//! - `per_period_antennas.dat`: dynamic-mode antennas per period, mean and
//!   95% interval half-width over seeds;
//! - `temporal_comparison.dat`: antennas under each temporal mode.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::svg;
use crate::sweep::Row;

const TEMPORAL_ORDER: [&str; 4] = ["fixed", "dynamic", "semi-dynamic", "static"];

fn num(v: Option<f64>) -> String {
    match v {
        None => "nan".into(),
        Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
        Some(v) => format!("{v:.3}"),
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Normal-approximation half-width; zero for a single sample.
fn ci95(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v).unwrap_or(0.0);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    1.96 * (var / v.len() as f64).sqrt()
}

/// Order of first appearance, which is the canonical sweep order.
fn ordered<T: Clone + Ord>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    items.filter(|i| seen.insert(i.clone())).collect()
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(())
}

/// Writes every figure that has data and returns the written paths.
pub fn write_all(rows: &[Row], dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ok: Vec<&Row> = rows.iter().filter(|r| r.ok()).collect();
    let mut written = Vec::new();
    fixed(&ok, dir, &mut written)?;
    per_period(&ok, dir, &mut written)?;
    temporal(&ok, dir, &mut written)?;
    Ok(written)
}

fn fixed(rows: &[&Row], dir: &Path, written: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let rows: Vec<&Row> = rows.iter().copied().filter(|r| r.temporal == "fixed").collect();
    if rows.is_empty() {
        return Ok(());
    }
    let variants = ordered(rows.iter().map(|r| r.variant.clone()));
    let mut cells: BTreeMap<(u32, String, u64, String), BTreeMap<String, f64>> = BTreeMap::new();
    for r in &rows {
        let key = (r.streams, r.community.clone(), r.seed, r.solver.clone());
        cells.entry(key).or_default().insert(r.variant.clone(), r.antennas.unwrap_or(0) as f64);
    }
    let communities = ordered(rows.iter().map(|r| r.community.clone()));
    let mut keys: Vec<_> = cells.keys().cloned().collect();
    let pos = |c: &String| communities.iter().position(|x| x == c);
    keys.sort_by(|a, b| (a.0, pos(&a.1), a.2, &a.3).cmp(&(b.0, pos(&b.1), b.2, &b.3)));

    let mut text = String::from("# antennas needed at peak demand\n# streams community seed solver");
    for v in &variants {
        let _ = write!(text, " {v}");
    }
    text.push('\n');
    for k in &keys {
        let _ = write!(text, "{} {} {} {}", k.0, k.1, k.2, k.3);
        for v in &variants {
            let _ = write!(text, " {}", num(cells[k].get(v).copied()));
        }
        text.push('\n');
    }
    write(dir, "fixed_antennas.dat", &text, written)?;

    let solvers = ordered(rows.iter().map(|r| r.solver.clone()));
    for s in ordered(rows.iter().map(|r| r.streams)) {
        let mut cats = Vec::new();
        let mut values = Vec::new();
        for c in &communities {
            for solver in &solvers {
                let picked: Vec<&BTreeMap<String, f64>> =
                    cells.iter().filter(|(k, _)| k.0 == s && &k.1 == c && &k.3 == solver).map(|(_, v)| v).collect();
                if picked.is_empty() {
                    continue;
                }
                cats.push(if solvers.len() > 1 { format!("{c} {solver}") } else { c.clone() });
                values.push(
                    variants
                        .iter()
                        .map(|v| mean(&picked.iter().filter_map(|m| m.get(v).copied()).collect::<Vec<_>>()))
                        .collect(),
                );
            }
        }
        let chart = svg::grouped_bars(&format!("Antennas at peak demand, {s} stream(s)"), "antennas", &cats, &variants, &values);
        write(dir, &format!("fixed_antennas_s{s}.svg"), &chart, written)?;
    }
    Ok(())
}

fn per_period(rows: &[&Row], dir: &Path, written: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let rows: Vec<&Row> = rows.iter().copied().filter(|r| r.temporal == "dynamic").collect();
    if rows.is_empty() {
        return Ok(());
    }
    let mut series: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for r in &rows {
        let label = format!("{}/s{}/{}/{}", r.community, r.streams, r.variant, r.solver);
        let counts = r.per_period_counts();
        let entry = match series.iter_mut().find(|(l, _)| *l == label) {
            Some(e) => e,
            None => {
                series.push((label, Vec::new()));
                series.last_mut().expect("just pushed")
            }
        };
        for (t, &c) in counts.iter().enumerate() {
            if entry.1.len() <= t {
                entry.1.push(Vec::new());
            }
            entry.1[t].push(c as f64);
        }
    }
    let periods = series.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let mut text = String::from("# antennas per period under dynamic planning, mean and 95% half-width over seeds\n# period");
    for (label, _) in &series {
        let _ = write!(text, " {label}:mean {label}:ci95");
    }
    text.push('\n');
    for t in 0..periods {
        let _ = write!(text, "{t}");
        for (_, s) in &series {
            let samples = s.get(t).map_or(&[][..], Vec::as_slice);
            let _ = write!(text, " {} {}", num(mean(samples)), num(Some(ci95(samples))));
        }
        text.push('\n');
    }
    write(dir, "per_period_antennas.dat", &text, written)?;
    let labels: Vec<String> = series.iter().map(|(l, _)| l.clone()).collect();
    let values: Vec<Vec<f64>> =
        series.iter().map(|(_, s)| s.iter().map(|v| mean(v).unwrap_or(0.0)).collect()).collect();
    let chart = svg::lines("Antennas per period, dynamic planning", "antennas", &labels, &values);
    write(dir, "per_period_antennas.svg", &chart, written)
}

fn temporal(rows: &[&Row], dir: &Path, written: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let modes: Vec<&str> = TEMPORAL_ORDER.iter().copied().filter(|m| rows.iter().any(|r| r.temporal == *m)).collect();
    if modes.len() < 2 {
        return Ok(());
    }
    let keys = ordered(rows.iter().map(|r| (r.community.clone(), r.streams, r.variant.clone(), r.solver.clone())));
    let mut text = String::from("# antennas under each temporal mode, mean over seeds\n# community streams variant solver");
    for m in &modes {
        let _ = write!(text, " {m}");
    }
    text.push('\n');
    let mut cats = Vec::new();
    let mut values = Vec::new();
    for k in &keys {
        let _ = write!(text, "{} {} {} {}", k.0, k.1, k.2, k.3);
        let mut vals = Vec::new();
        for m in &modes {
            let samples: Vec<f64> = rows
                .iter()
                .filter(|r| r.community == k.0 && r.streams == k.1 && r.variant == k.2 && r.solver == k.3 && r.temporal == *m)
                .filter_map(|r| r.antennas.map(|a| a as f64))
                .collect();
            let v = mean(&samples);
            let _ = write!(text, " {}", num(v));
            vals.push(v);
        }
        text.push('\n');
        cats.push(format!("{} s{} {}", k.0, k.1, k.2));
        values.push(vals);
    }
    write(dir, "temporal_comparison.dat", &text, written)?;
    let series: Vec<String> = modes.iter().map(|m| (*m).to_string()).collect();
    let chart = svg::grouped_bars("Antennas by temporal mode", "antennas", &cats, &series, &values);
    write(dir, "temporal_comparison.svg", &chart, written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(community: &str, streams: u32, variant: &str, temporal: &str, seed: u64, per_period: &str) -> Row {
        let counts: Vec<usize> = per_period.split(';').map(|v| v.parse().unwrap()).collect();
        Row {
            community: community.into(),
            streams,
            variant: variant.into(),
            temporal: temporal.into(),
            solver: "exact".into(),
            antennas: counts.iter().copied().max(),
            fraction: "0".into(),
            savings: "0".into(),
            runtime_ms: 0,
            seed,
            per_period: per_period.into(),
            status: "optimal".into(),
        }
    }

    #[test]
    fn interval_of_constant_samples_is_zero() {
        assert_eq!(ci95(&[2.0, 2.0, 2.0]), 0.0);
        assert!((ci95(&[1.0, 3.0]) - 1.96).abs() < 1e-12);
        assert_eq!(mean(&[]), None);
    }

    #[test]
    fn files_follow_the_rows() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            row("i", 1, "one-hop", "fixed", 1, "5"),
            row("i", 1, "two-hop", "fixed", 1, "4"),
            row("i", 1, "one-hop", "dynamic", 1, "3;5"),
            row("i", 1, "one-hop", "dynamic", 2, "1;5"),
        ];
        let written = write_all(&rows, dir.path()).unwrap();
        let names: Vec<String> =
            written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(
            names,
            [
                "fixed_antennas.dat",
                "fixed_antennas_s1.svg",
                "per_period_antennas.dat",
                "per_period_antennas.svg",
                "temporal_comparison.dat",
                "temporal_comparison.svg"
            ]
        );
        let fixed = std::fs::read_to_string(dir.path().join("fixed_antennas.dat")).unwrap();
        assert_eq!(fixed.lines().last().unwrap(), "1 i 1 exact 5 4");
        let pp = std::fs::read_to_string(dir.path().join("per_period_antennas.dat")).unwrap();
        assert_eq!(pp.lines().nth(2).unwrap(), "0 2 1.960");
        assert_eq!(pp.lines().nth(3).unwrap(), "1 5 0");
        let tc = std::fs::read_to_string(dir.path().join("temporal_comparison.dat")).unwrap();
        assert_eq!(tc.lines().nth(2).unwrap(), "i 1 one-hop exact 5 5");
    }
}
