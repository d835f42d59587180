//! Writes one bundled community fixture.
//!
//! usage: fixture_write HOMES SPACING_M BS SEED PSI_MAX WIFI_TX_DBM OUT

use skyrelay_core::demand::DemandModel;
use skyrelay_core::scenario::generate_community;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut s = generate_community(
        args[1].parse().unwrap(),
        args[2].parse().unwrap(),
        args[3].parse().unwrap(),
        args[4].parse().unwrap(),
    )
    .unwrap();
    s.demand_model = DemandModel::diurnal(s.demand_model.periods, s.channel_rate_mbps, args[5].parse().unwrap());
    s.radio.wifi_tx_power_dbm = args[6].parse().unwrap();
    std::fs::write(&args[7], s.to_json()).unwrap();
}
