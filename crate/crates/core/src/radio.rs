//! Propagation models and link capacities for household WiFi links and
//! LTE base-station links.
//!
//! Distances are in meters unless a function says otherwise, frequencies in
//! Hz, powers in dBm and rates in Mbps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::LteBaseStation;

/// Thermal noise density at room temperature.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// One row of the RSS to rate mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsRow {
    pub min_rss_dbm: f64,
    pub rate_mbps: f64,
}

/// 802.11n, 20 MHz, long guard interval, one spatial stream (MCS 0-7).
pub fn default_mcs_table() -> Vec<McsRow> {
    [
        (-82.0, 6.5),
        (-79.0, 13.0),
        (-77.0, 19.5),
        (-74.0, 26.0),
        (-70.0, 39.0),
        (-66.0, 52.0),
        (-65.0, 58.5),
        (-64.0, 65.0),
    ]
    .into_iter()
    .map(|(min_rss_dbm, rate_mbps)| McsRow { min_rss_dbm, rate_mbps })
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    pub wifi_carrier_hz: f64,
    pub lte_carrier_hz: f64,
    pub channel_bandwidth_hz: f64,
    pub wifi_tx_power_dbm: f64,
    pub wifi_sensitivity_dbm: f64,
    pub breakpoint_distance_m: f64,
    pub shadow_fading_db: f64,
    pub streams: u32,
    pub beta: f64,
    pub gamma: f64,
    pub lte_noise_figure_db: f64,
    pub mcs_table: Vec<McsRow>,
    /// Standard deviation of an optional per-link log-normal shadowing
    /// draw. Zero disables it.
    pub shadow_sigma_db: f64,
    pub shadow_seed: u64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            wifi_carrier_hz: 5.0e9,
            lte_carrier_hz: 2.0e9,
            channel_bandwidth_hz: 20.0e6,
            wifi_tx_power_dbm: 20.0,
            wifi_sensitivity_dbm: -82.0,
            breakpoint_distance_m: 5.0,
            shadow_fading_db: 0.0,
            streams: 1,
            beta: 0.65,
            gamma: 0.55,
            lte_noise_figure_db: 7.0,
            mcs_table: default_mcs_table(),
            shadow_sigma_db: 0.0,
            shadow_seed: 0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wifi_carrier_hz", self.wifi_carrier_hz),
            ("lte_carrier_hz", self.lte_carrier_hz),
            ("channel_bandwidth_hz", self.channel_bandwidth_hz),
            ("breakpoint_distance_m", self.breakpoint_distance_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("radio.{name} must be positive, got {v}")));
            }
        }
        let finite = [
            ("wifi_tx_power_dbm", self.wifi_tx_power_dbm),
            ("wifi_sensitivity_dbm", self.wifi_sensitivity_dbm),
            ("shadow_fading_db", self.shadow_fading_db),
            ("lte_noise_figure_db", self.lte_noise_figure_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Validation(format!("radio.{name} must be finite")));
            }
        }
        if !(1..=4).contains(&self.streams) {
            return Err(Error::Validation(format!(
                "radio.streams must be in 1..=4, got {}",
                self.streams
            )));
        }
        if !(0.5..=0.8).contains(&self.beta) {
            return Err(Error::Validation(format!("radio.beta must be in [0.5, 0.8], got {}", self.beta)));
        }
        if !(0.5..=0.6).contains(&self.gamma) {
            return Err(Error::Validation(format!("radio.gamma must be in [0.5, 0.6], got {}", self.gamma)));
        }
        if !(self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0) {
            return Err(Error::Validation("radio.shadow_sigma_db must be >= 0".into()));
        }
        if self.mcs_table.is_empty() {
            return Err(Error::Validation("radio.mcs_table is empty".into()));
        }
        for w in self.mcs_table.windows(2) {
            if w[1].min_rss_dbm <= w[0].min_rss_dbm {
                return Err(Error::Validation(
                    "radio.mcs_table must be sorted by strictly ascending min_rss_dbm".into(),
                ));
            }
        }
        if self.mcs_table.iter().any(|r| !(r.rate_mbps > 0.0 && r.rate_mbps.is_finite())) {
            return Err(Error::Validation("radio.mcs_table rates must be positive".into()));
        }
        Ok(())
    }
}

/// Everything computed for a single directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub pathloss_db: f64,
    pub rss_dbm: f64,
    pub snr_db: f64,
    pub capacity_mbps: f64,
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Free-space loss in dB for distance `d_m` (meters) and carrier `f_hz`.
pub fn free_space_pathloss(d_m: f64, f_hz: f64) -> Result<f64> {
    check_positive("distance", d_m)?;
    check_positive("frequency", f_hz)?;
    Ok(20.0 * d_m.log10() + 20.0 * f_hz.log10() - 147.5)
}

/// Dual-slope WiFi loss: free space up to the breakpoint, 35 dB/decade after.
pub fn wifi_pathloss(d_m: f64, cfg: &RadioConfig) -> Result<f64> {
    check_positive("distance", d_m)?;
    let d_bp = cfg.breakpoint_distance_m;
    let loss = if d_m < d_bp {
        free_space_pathloss(d_m, cfg.wifi_carrier_hz)?
    } else {
        free_space_pathloss(d_bp, cfg.wifi_carrier_hz)? + 35.0 * (d_m / d_bp).log10()
    };
    Ok(loss + cfg.shadow_fading_db)
}

/// Line-of-sight LTE macro loss; the distance is in kilometers.
pub fn lte_pathloss_los(d_km: f64) -> Result<f64> {
    check_positive("distance", d_km)?;
    Ok(103.8 + 20.9 * d_km.log10())
}

/// Highest per-stream MCS rate supported at `rss_dbm`, times the stream
/// count. Zero below the receiver sensitivity.
pub fn wifi_rate_for_rss(rss_dbm: f64, cfg: &RadioConfig) -> f64 {
    if rss_dbm < cfg.wifi_sensitivity_dbm {
        return 0.0;
    }
    cfg.mcs_table
        .iter()
        .rev()
        .find(|row| row.min_rss_dbm <= rss_dbm)
        .map_or(0.0, |row| row.rate_mbps * f64::from(cfg.streams))
}

pub fn wifi_link_budget(d_m: f64, cfg: &RadioConfig, extra_loss_db: f64) -> Result<LinkBudget> {
    let pathloss_db = wifi_pathloss(d_m, cfg)? + extra_loss_db;
    let rss_dbm = cfg.wifi_tx_power_dbm - pathloss_db;
    let noise = THERMAL_NOISE_DBM_PER_HZ + 10.0 * cfg.channel_bandwidth_hz.log10();
    Ok(LinkBudget {
        pathloss_db,
        rss_dbm,
        snr_db: rss_dbm - noise,
        capacity_mbps: wifi_rate_for_rss(rss_dbm, cfg),
    })
}

/// WiFi capacity in Mbps between two households `d_m` apart; 0 means no link.
pub fn wifi_link_capacity(d_m: f64, cfg: &RadioConfig) -> f64 {
    wifi_link_budget(d_m, cfg, 0.0).map_or(0.0, |b| b.capacity_mbps)
}

/// Shannon-style LTE rate with bandwidth efficiency `beta` and SNR
/// efficiency `gamma`.
pub fn lte_capacity_for_snr(snr_db: f64, cfg: &RadioConfig) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    cfg.beta * cfg.channel_bandwidth_hz * (1.0 + cfg.gamma * snr).log2() / 1e6
}

pub fn lte_link_budget(d_m: f64, bs: &LteBaseStation, cfg: &RadioConfig) -> Result<LinkBudget> {
    check_positive("distance", d_m)?;
    let pathloss_db = lte_pathloss_los(d_m / 1000.0)?;
    let rss_dbm = bs.tx_power_dbm - pathloss_db;
    let noise_floor = THERMAL_NOISE_DBM_PER_HZ + 10.0 * cfg.channel_bandwidth_hz.log10();
    let snr_db = rss_dbm - noise_floor - cfg.lte_noise_figure_db;
    Ok(LinkBudget {
        pathloss_db,
        rss_dbm,
        snr_db,
        capacity_mbps: lte_capacity_for_snr(snr_db, cfg),
    })
}

/// Full-airtime LTE capacity from `bs` to a household `d_m` away.
pub fn lte_link_capacity(d_m: f64, bs: &LteBaseStation, cfg: &RadioConfig) -> Result<f64> {
    Ok(lte_link_budget(d_m, bs, cfg)?.capacity_mbps)
}

/// Symmetric per-pair shadowing draws. Entry `[i][j] == [j][i]`; all zero
/// when `shadow_sigma_db` is zero.
pub fn shadowing_matrix(n: usize, cfg: &RadioConfig) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    if cfg.shadow_sigma_db == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shadow_seed);
    let normal = Normal::new(0.0, cfg.shadow_sigma_db).expect("sigma validated non-negative");
    for i in 0..n {
        for j in (i + 1)..n {
            let v = normal.sample(&mut rng);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn free_space_reference_points() {
        assert!(close(free_space_pathloss(1.0, 5e9).unwrap(), 46.48, 0.01));
        assert!(close(free_space_pathloss(1.0, 2e9).unwrap(), 38.52, 0.01));
        assert!(close(free_space_pathloss(10.0, 5e9).unwrap(), 66.48, 0.01));
    }

    #[test]
    fn non_positive_distance_is_a_domain_error() {
        assert!(matches!(free_space_pathloss(0.0, 5e9), Err(Error::Domain(_))));
        assert!(matches!(free_space_pathloss(1.0, -1.0), Err(Error::Domain(_))));
        assert!(wifi_pathloss(-3.0, &RadioConfig::default()).is_err());
        assert!(lte_pathloss_los(0.0).is_err());
        let bs = LteBaseStation::new("bs", 0.0, 0.0, 0.5, 46.0);
        assert!(lte_link_capacity(0.0, &bs, &RadioConfig::default()).is_err());
    }

    #[test]
    fn wifi_pathloss_branches() {
        let cfg = RadioConfig::default();
        assert!(close(wifi_pathloss(1.0, &cfg).unwrap(), 46.48, 0.01));
        assert!(close(wifi_pathloss(5.0, &cfg).unwrap(), 60.46, 0.01));
        assert!(close(wifi_pathloss(50.0, &cfg).unwrap(), 95.46, 0.01));
        let below = free_space_pathloss(5.0, cfg.wifi_carrier_hz).unwrap();
        assert!((wifi_pathloss(5.0, &cfg).unwrap() - below).abs() < 1e-9);
    }

    #[test]
    fn lte_pathloss_reference_points() {
        assert!(close(lte_pathloss_los(1.0).unwrap(), 103.8, 1e-9));
        assert!(close(lte_pathloss_los(0.1).unwrap(), 82.9, 0.01));
        assert!(close(lte_pathloss_los(0.5).unwrap(), 97.51, 0.01));
    }

    #[test]
    fn wifi_rate_lookup() {
        let mut cfg = RadioConfig::default();
        assert_eq!(wifi_rate_for_rss(-60.0, &cfg), 65.0);
        assert_eq!(wifi_rate_for_rss(-90.0, &cfg), 0.0);
        assert_eq!(wifi_rate_for_rss(-82.0, &cfg), 6.5);
        assert_eq!(wifi_rate_for_rss(-75.5, &cfg), 19.5);
        cfg.streams = 4;
        assert_eq!(wifi_rate_for_rss(-60.0, &cfg), 260.0);
    }

    #[test]
    fn lte_capacity_reference_points() {
        let cfg = RadioConfig::default();
        assert!(close(lte_capacity_for_snr(10.0, &cfg), 35.11, 0.01));
        assert!(close(lte_capacity_for_snr(0.0, &cfg), 8.22, 0.01));
        assert!(lte_capacity_for_snr(f64::NEG_INFINITY, &cfg).abs() < 1e-12);
    }

    #[test]
    fn shadowing_is_symmetric_and_seeded() {
        let cfg = RadioConfig { shadow_sigma_db: 4.0, shadow_seed: 9, ..RadioConfig::default() };
        let a = shadowing_matrix(5, &cfg);
        let b = shadowing_matrix(5, &cfg);
        assert_eq!(a, b);
        for i in 0..5 {
            assert_eq!(a[i][i], 0.0);
            for j in 0..5 {
                assert_eq!(a[i][j], a[j][i]);
            }
        }
        assert!(shadowing_matrix(4, &RadioConfig::default()).iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(RadioConfig::default().validate().is_ok());
        let bad = RadioConfig { streams: 5, ..RadioConfig::default() };
        assert!(bad.validate().is_err());
        let bad = RadioConfig { beta: 0.9, ..RadioConfig::default() };
        assert!(bad.validate().is_err());
        let mut bad = RadioConfig::default();
        bad.mcs_table.swap(0, 1);
        assert!(bad.validate().is_err());
    }
}
