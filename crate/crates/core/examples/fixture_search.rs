//! Scans layout seeds for a community shape and prints, per seed, the
//! quantities the bundled fixtures are tuned on.
//!
//! usage: fixture_search HOMES SPACING_M BS FIRST_SEED LAST_SEED [PSI_MAX [WIFI_TX_DBM]]

use skyrelay_core::demand::DemandModel;
use skyrelay_core::formulation::SolverConfig;
use skyrelay_core::plan::{Hops, Variant};
use skyrelay_core::scenario::{generate_community, Scenario};
use skyrelay_core::solver::exact::plan_exact;
use skyrelay_core::solver::greedy::{greedy_plan, ReceiverRule};

fn count(s: &Scenario, hops: Hops, lte: bool, streams: u32, cfg: &SolverConfig) -> String {
    let mut s = s.clone();
    s.radio.streams = streams;
    let p = s.demand_model.sample(&s.households, 1).peak_profile();
    match plan_exact(&s, Variant::fixed(hops, lte), &p, cfg) {
        Ok(o) if o.proven_optimal() => o.antenna_count().to_string(),
        Ok(o) => format!("{}?", o.antenna_count()),
        Err(_) => "err".into(),
    }
}

fn greedy(s: &Scenario, hops: Hops, streams: u32) -> usize {
    let mut s = s.clone();
    s.radio.streams = streams;
    let p = s.demand_model.sample(&s.households, 1).peak_profile();
    greedy_plan(&s, Variant::fixed(hops, false), &p, ReceiverRule::SmallestBin).unwrap().1.antenna_count()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args[1].parse().unwrap();
    let spacing: f64 = args[2].parse().unwrap();
    let bs: usize = args[3].parse().unwrap();
    let first: u64 = args[4].parse().unwrap();
    let last: u64 = args[5].parse().unwrap();
    let psi_max: Option<usize> = args.get(6).map(|v| v.parse().unwrap());
    let tx: Option<f64> = args.get(7).map(|v| v.parse().unwrap());
    let cfg = SolverConfig { node_limit: 200_000, ..SolverConfig::default() };
    for seed in first..=last {
        let mut s = generate_community(n, spacing, bs, seed).unwrap();
        if let Some(m) = psi_max {
            s.demand_model = DemandModel::diurnal(24, s.channel_rate_mbps, m);
        }
        if let Some(p) = tx {
            s.radio.wifi_tx_power_dbm = p;
        }
        let nn = s.mean_nearest_neighbor_m();
        let mut line = format!("seed {seed} nn {nn:.1}");
        for streams in [1, 4] {
            let e1 = count(&s, Hops::One, false, streams, &cfg);
            let e2 = count(&s, Hops::Two, false, streams, &cfg);
            let g1 = greedy(&s, Hops::One, streams);
            let g2 = greedy(&s, Hops::Two, streams);
            let sp = count(&s, Hops::Splittable, false, streams, &cfg);
            line += &format!(" | s{streams} one {e1}/{g1} two {e2}/{g2} split {sp}");
            if bs > 0 {
                line += &format!(" split+lte {}", count(&s, Hops::Splittable, true, streams, &cfg));
            }
        }
        println!("{line}");
    }
}
