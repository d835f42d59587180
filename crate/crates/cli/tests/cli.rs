use std::path::Path;
use std::process::{Command, Output};

fn skyrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skyrelay")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in:\n{text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const LINE: &str = r#"{"households":[{"id":"a","x_m":0,"y_m":0},{"id":"b","x_m":30,"y_m":0},{"id":"c","x_m":60,"y_m":0}]}"#;

#[test]
fn generate_writes_a_loadable_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = skyrelay(&["generate", "--homes", "8", "--spacing-m", "40", "--lte-bs", "1", "--seed", "3", "-o", p(&out)]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("8 households, 1 base stations"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["households"].as_array().unwrap().len(), 8);
    assert_eq!(doc["radio"]["wifi_tx_power_dbm"], 20.0);
    assert_eq!(doc["radio"]["wifi_sensitivity_dbm"], -82.0);
    let plan = skyrelay(&["plan", "--scenario", p(&out), "--no-timing"]);
    assert!(plan.status.success(), "{plan:?}");
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    assert_eq!(skyrelay(&["generate", "--homes", "0", "--spacing-m", "40", "-o", p(&out)]).status.code(), Some(2));
    assert_eq!(skyrelay(&["plan", "--community", "v"]).status.code(), Some(2));
    assert_eq!(skyrelay(&["plan", "--community", "i", "--streams", "5"]).status.code(), Some(2));
    assert_eq!(
        skyrelay(&["plan", "--community", "i", "--solver", "greedy", "--variant", "splittable"]).status.code(),
        Some(2)
    );
    assert_eq!(skyrelay(&["plan", "--scenario", p(&dir.path().join("missing.json"))]).status.code(), Some(2));
}

#[test]
fn three_home_line_needs_one_antenna() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    std::fs::write(&path, LINE).unwrap();
    for solver in ["exact", "greedy"] {
        let o = skyrelay(&["plan", "--scenario", p(&path), "--solver", solver, "--no-timing"]);
        assert!(o.status.success(), "{o:?}");
        let text = stdout(&o);
        assert_eq!(field(&text, "antennas"), "1");
        assert_eq!(field(&text, "scenario"), "line");
        assert!(!text.contains("runtime_ms"));
    }
}

#[test]
fn greedy_matches_exact_on_bundled_communities() {
    for c in ["i", "ii", "iii", "iv"] {
        for variant in ["one-hop", "two-hop"] {
            let count = |solver: &str| {
                let o = skyrelay(&["plan", "--community", c, "--variant", variant, "--solver", solver, "--demand", "peak"]);
                assert!(o.status.success(), "{o:?}");
                field(&stdout(&o), "antennas").to_string()
            };
            assert_eq!(count("exact"), count("greedy"), "community {c} {variant}");
        }
    }
}

#[test]
fn validate_accepts_written_plans_and_rejects_corrupted_ones() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let o = skyrelay(&["plan", "--community", "iii", "--variant", "two-hop", "-o", p(&plan)]);
    assert!(o.status.success(), "{o:?}");
    let ok = skyrelay(&["validate", "--community", "iii", "--plan", p(&plan)]);
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");
    assert_eq!(stdout(&ok).trim_end().lines().last(), Some("feasible"));

    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    doc["plans"][0]["sources"].as_array_mut().unwrap().remove(0);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, doc.to_string()).unwrap();
    let bad = skyrelay(&["validate", "--community", "iii", "--plan", p(&broken)]);
    assert_eq!(bad.status.code(), Some(1), "{bad:?}");
    let text = stdout(&bad);
    assert!(text.lines().last().unwrap().starts_with("violations="), "{text}");
    assert!(text.lines().count() > 1);

    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(skyrelay(&["validate", "--community", "iii", "--plan", p(&broken)]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(skyrelay(&["validate", "--community", "iii", "--plan", p(&missing)]).status.code(), Some(2));
}

#[test]
fn default_sweep_covers_every_cell() {
    let o = skyrelay(&["sweep", "--no-timing"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("community,streams,variant,temporal,solver,antennas,fraction,savings,runtime_ms,seed,per_period,status")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 4 * 2);
    assert!(rows.iter().all(|r| r.ends_with(",optimal") && r.contains(",0,1,")), "{text}");
    assert!(rows[0].starts_with("i,1,one-hop,fixed,exact,"));
}

#[test]
fn dynamic_rows_carry_one_count_per_period() {
    let o = skyrelay(&["sweep", "--community", "ii", "--streams", "1", "--variants", "one-hop", "--temporal", "dynamic,static"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let dynamic = rows.iter().find(|r| r[3] == "dynamic").unwrap();
    let counts: Vec<usize> = dynamic[10].split(';').map(|v| v.parse().unwrap()).collect();
    assert_eq!(counts.len(), 24);
    assert_eq!(dynamic[5].parse::<usize>().unwrap(), *counts.iter().max().unwrap());
    let fixed: usize = rows.iter().find(|r| r[3] == "static").unwrap()[5].parse().unwrap();
    assert!(counts.iter().all(|&c| c <= fixed));
}

#[test]
fn report_writes_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = skyrelay(&[
        "sweep", "--community", "iv", "--streams", "1,2", "--temporal", "fixed,dynamic", "--no-timing", "-o", p(&csv),
    ]);
    assert!(o.status.success(), "{o:?}");
    let plots = dir.path().join("plots");
    let r = skyrelay(&["report", "--csv", p(&csv), "--out-dir", p(&plots)]);
    assert!(r.status.success(), "{r:?}");
    for name in [
        "fixed_antennas.dat",
        "fixed_antennas_s1.svg",
        "fixed_antennas_s2.svg",
        "per_period_antennas.dat",
        "per_period_antennas.svg",
        "temporal_comparison.dat",
        "temporal_comparison.svg",
    ] {
        let text = std::fs::read_to_string(plots.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!text.is_empty());
    }
    assert_eq!(stdout(&r).lines().count(), 7);
    assert_eq!(skyrelay(&["report", "--csv", p(&dir.path().join("none.csv")), "--out-dir", p(&plots)]).status.code(), Some(2));
}
