//! Problem instances: households, LTE base stations, radio parameters and
//! the demand model, plus the JSON scenario document and a synthetic
//! community generator.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::demand::{DemandModel, DemandSpec, HomeDemand};
use crate::error::{Error, Result};
use crate::radio::{McsRow, RadioConfig};

pub const DEFAULT_RHO: u32 = 5;
pub const DEFAULT_HOP_LIMIT: u32 = 2;
pub const DEFAULT_LTE_TAU: f64 = 0.5;
pub const DEFAULT_LTE_TX_POWER_DBM: f64 = 46.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

impl Position {
    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub id: String,
    pub position: Position,
    pub lte_capable: bool,
}

impl Household {
    pub fn new(id: impl Into<String>, x_m: f64, y_m: f64) -> Self {
        Self { id: id.into(), position: Position { x_m, y_m }, lte_capable: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LteBaseStation {
    pub id: String,
    pub position: Position,
    /// Fraction of the cell's airtime available for TV delivery.
    pub tau: f64,
    pub tx_power_dbm: f64,
}

impl LteBaseStation {
    pub fn new(id: impl Into<String>, x_m: f64, y_m: f64, tau: f64, tx_power_dbm: f64) -> Self {
        Self { id: id.into(), position: Position { x_m, y_m }, tau, tx_power_dbm }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub households: Vec<Household>,
    pub lte_bs: Vec<LteBaseStation>,
    pub radio: RadioConfig,
    pub demand_model: DemandModel,
    /// Maximum number of outgoing relay links at a source or relay.
    pub rho: u32,
    pub channel_rate_mbps: f64,
    /// Average hop budget for splittable routing.
    pub hop_limit: u32,
}

impl Scenario {
    /// Scenario with default radio, demand and routing parameters.
    pub fn with_households(households: Vec<Household>) -> Self {
        Self {
            households,
            lte_bs: Vec::new(),
            radio: RadioConfig::default(),
            demand_model: DemandModel::default(),
            rho: DEFAULT_RHO,
            channel_rate_mbps: crate::demand::DEFAULT_CHANNEL_RATE_MBPS,
            hop_limit: DEFAULT_HOP_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.households.is_empty() {
            return Err(Error::Validation("scenario has no households".into()));
        }
        let mut seen = HashSet::new();
        let ids = self
            .households
            .iter()
            .map(|h| &h.id)
            .chain(self.lte_bs.iter().map(|b| &b.id));
        for id in ids {
            if id.is_empty() {
                return Err(Error::Validation("empty node id".into()));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("duplicate node id '{id}'")));
            }
        }
        let positions = self
            .households
            .iter()
            .map(|h| (&h.id, h.position))
            .chain(self.lte_bs.iter().map(|b| (&b.id, b.position)));
        for (id, p) in positions {
            if !(p.x_m.is_finite() && p.y_m.is_finite()) {
                return Err(Error::Validation(format!("node '{id}' has non-finite coordinates")));
            }
        }
        for bs in &self.lte_bs {
            if !(0.0..=1.0).contains(&bs.tau) {
                return Err(Error::Validation(format!(
                    "LTE BS '{}' has tau {} outside [0, 1]",
                    bs.id, bs.tau
                )));
            }
            if !bs.tx_power_dbm.is_finite() {
                return Err(Error::Validation(format!("LTE BS '{}' has non-finite power", bs.id)));
            }
        }
        if self.rho < 1 {
            return Err(Error::Validation("rho must be at least 1".into()));
        }
        if !(self.channel_rate_mbps.is_finite() && self.channel_rate_mbps > 0.0) {
            return Err(Error::Validation("channel_rate_mbps must be positive".into()));
        }
        if self.hop_limit < 1 {
            return Err(Error::Validation("hop_limit must be at least 1".into()));
        }
        if (self.channel_rate_mbps - self.demand_model.channel_rate_mbps).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "channel_rate_mbps ({}) disagrees with demand.b_mbps ({})",
                self.channel_rate_mbps, self.demand_model.channel_rate_mbps
            )));
        }
        self.radio.validate()?;
        self.demand_model.validate(&self.households)?;
        Ok(())
    }

    pub fn household_index(&self, id: &str) -> Option<usize> {
        self.households.iter().position(|h| h.id == id)
    }

    /// Mean distance from each household to its closest neighbor; zero for
    /// a single household.
    pub fn mean_nearest_neighbor_m(&self) -> f64 {
        let n = self.households.len();
        if n < 2 {
            return 0.0;
        }
        let total: f64 = self
            .households
            .iter()
            .enumerate()
            .map(|(i, a)| {
                self.households
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| a.position.distance_to(&b.position))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / n as f64
    }

    pub fn to_document(&self) -> ScenarioDocument {
        ScenarioDocument::from(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scenario serializes")
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(bytes: &[u8]) -> Result<Scenario> {
    let doc: ScenarioDocument =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let scenario = doc.into_scenario()?;
    scenario.validate()?;
    Ok(scenario)
}

/// Side of the square for which `n` uniform points have an expected mean
/// nearest-neighbor distance of `spacing_m`, using the Donnelly
/// edge-corrected estimate `0.5*sqrt(A/n) + (0.0514 + 0.041/sqrt(n)) * P/n`.
pub fn square_side_for_spacing(n: usize, spacing_m: f64) -> f64 {
    let n = n as f64;
    let per_side = 0.5 / n.sqrt() + 4.0 * (0.0514 + 0.041 / n.sqrt()) / n;
    spacing_m / per_side
}

/// Synthetic community: households uniform in a square sized for the
/// requested mean nearest-neighbor spacing, base stations uniform in the
/// same square. Pure function of its arguments.
pub fn generate_community(
    n_homes: usize,
    target_spacing_m: f64,
    lte_bs_count: usize,
    seed: u64,
) -> Result<Scenario> {
    if n_homes == 0 {
        return Err(Error::Domain("n_homes must be at least 1".into()));
    }
    if !(target_spacing_m.is_finite() && target_spacing_m > 0.0) {
        return Err(Error::Domain("target spacing must be positive".into()));
    }
    let side = square_side_for_spacing(n_homes, target_spacing_m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n_homes.to_string().len().max(2);
    let households = if n_homes == 1 {
        vec![Household::new(format!("h{:0width$}", 1), side / 2.0, side / 2.0)]
    } else {
        (1..=n_homes)
            .map(|k| {
                let x = rng.gen::<f64>() * side;
                let y = rng.gen::<f64>() * side;
                Household::new(format!("h{k:0width$}"), x, y)
            })
            .collect()
    };
    let lte_bs = (1..=lte_bs_count)
        .map(|k| {
            let x = rng.gen::<f64>() * side;
            let y = rng.gen::<f64>() * side;
            LteBaseStation::new(format!("bs{k}"), x, y, DEFAULT_LTE_TAU, DEFAULT_LTE_TX_POWER_DBM)
        })
        .collect();
    let scenario = Scenario { lte_bs, ..Scenario::with_households(households) };
    scenario.validate()?;
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub households: Vec<HouseholdDoc>,
    #[serde(default)]
    pub lte_bs: Vec<LteBsDoc>,
    #[serde(default)]
    pub radio: RadioDoc,
    #[serde(default)]
    pub demand: DemandDoc,
    #[serde(default = "default_rho")]
    pub rho: u32,
    #[serde(default = "default_channel_rate")]
    pub channel_rate_mbps: f64,
    #[serde(default = "default_hop_limit")]
    pub hop_limit: u32,
}

fn default_rho() -> u32 {
    DEFAULT_RHO
}
fn default_channel_rate() -> f64 {
    crate::demand::DEFAULT_CHANNEL_RATE_MBPS
}
fn default_hop_limit() -> u32 {
    DEFAULT_HOP_LIMIT
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HouseholdDoc {
    pub id: String,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default = "default_true")]
    pub lte_capable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LteBsDoc {
    pub id: String,
    pub x_m: f64,
    pub y_m: f64,
    pub tau: f64,
    #[serde(default = "default_bs_power")]
    pub tx_power_dbm: f64,
}

fn default_bs_power() -> f64 {
    DEFAULT_LTE_TX_POWER_DBM
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioDoc {
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
    pub mcs_table: Vec<[f64; 2]>,
    pub shadow_sigma_db: f64,
    pub shadow_seed: u64,
}

impl Default for RadioDoc {
    fn default() -> Self {
        RadioDoc::from(&RadioConfig::default())
    }
}

impl From<&RadioConfig> for RadioDoc {
    fn from(r: &RadioConfig) -> Self {
        Self {
            wifi_carrier_hz: r.wifi_carrier_hz,
            lte_carrier_hz: r.lte_carrier_hz,
            channel_bandwidth_hz: r.channel_bandwidth_hz,
            wifi_tx_power_dbm: r.wifi_tx_power_dbm,
            wifi_sensitivity_dbm: r.wifi_sensitivity_dbm,
            breakpoint_distance_m: r.breakpoint_distance_m,
            shadow_fading_db: r.shadow_fading_db,
            streams: r.streams,
            beta: r.beta,
            gamma: r.gamma,
            lte_noise_figure_db: r.lte_noise_figure_db,
            mcs_table: r.mcs_table.iter().map(|m| [m.min_rss_dbm, m.rate_mbps]).collect(),
            shadow_sigma_db: r.shadow_sigma_db,
            shadow_seed: r.shadow_seed,
        }
    }
}

impl From<RadioDoc> for RadioConfig {
    fn from(d: RadioDoc) -> Self {
        Self {
            wifi_carrier_hz: d.wifi_carrier_hz,
            lte_carrier_hz: d.lte_carrier_hz,
            channel_bandwidth_hz: d.channel_bandwidth_hz,
            wifi_tx_power_dbm: d.wifi_tx_power_dbm,
            wifi_sensitivity_dbm: d.wifi_sensitivity_dbm,
            breakpoint_distance_m: d.breakpoint_distance_m,
            shadow_fading_db: d.shadow_fading_db,
            streams: d.streams,
            beta: d.beta,
            gamma: d.gamma,
            lte_noise_figure_db: d.lte_noise_figure_db,
            mcs_table: d
                .mcs_table
                .into_iter()
                .map(|[min_rss_dbm, rate_mbps]| McsRow { min_rss_dbm, rate_mbps })
                .collect(),
            shadow_sigma_db: d.shadow_sigma_db,
            shadow_seed: d.shadow_seed,
        }
    }
}

/// `{T, b_mbps}` plus exactly one of `uniform`, `per_hour` or `per_home`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDoc {
    #[serde(rename = "T")]
    pub periods: usize,
    pub b_mbps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_hour: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_home: Option<Vec<HomeDemandDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomeDemandDoc {
    pub id: String,
    pub per_hour: Vec<Vec<f64>>,
}

impl Default for DemandDoc {
    fn default() -> Self {
        DemandDoc::from(&DemandModel::default())
    }
}

impl From<&DemandModel> for DemandDoc {
    fn from(m: &DemandModel) -> Self {
        let mut doc = DemandDoc {
            periods: m.periods,
            b_mbps: m.channel_rate_mbps,
            uniform: None,
            per_hour: None,
            per_home: None,
        };
        match &m.spec {
            DemandSpec::Uniform(d) => doc.uniform = Some(d.clone()),
            DemandSpec::PerHour(h) => doc.per_hour = Some(h.clone()),
            DemandSpec::PerHome(homes) => {
                doc.per_home = Some(
                    homes
                        .iter()
                        .map(|h| HomeDemandDoc { id: h.id.clone(), per_hour: h.per_hour.clone() })
                        .collect(),
                )
            }
        }
        doc
    }
}

impl DemandDoc {
    fn into_model(self) -> std::result::Result<DemandModel, String> {
        let spec = match (self.uniform, self.per_hour, self.per_home) {
            (Some(u), None, None) => DemandSpec::Uniform(u),
            (None, Some(h), None) => DemandSpec::PerHour(h),
            (None, None, Some(homes)) => DemandSpec::PerHome(
                homes
                    .into_iter()
                    .map(|h| HomeDemand { id: h.id, per_hour: h.per_hour })
                    .collect(),
            ),
            _ => {
                return Err("demand needs exactly one of 'uniform', 'per_hour', 'per_home'".into())
            }
        };
        Ok(DemandModel { periods: self.periods, channel_rate_mbps: self.b_mbps, spec })
    }
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        Self {
            households: s
                .households
                .iter()
                .map(|h| HouseholdDoc {
                    id: h.id.clone(),
                    x_m: h.position.x_m,
                    y_m: h.position.y_m,
                    lte_capable: h.lte_capable,
                })
                .collect(),
            lte_bs: s
                .lte_bs
                .iter()
                .map(|b| LteBsDoc {
                    id: b.id.clone(),
                    x_m: b.position.x_m,
                    y_m: b.position.y_m,
                    tau: b.tau,
                    tx_power_dbm: b.tx_power_dbm,
                })
                .collect(),
            radio: RadioDoc::from(&s.radio),
            demand: DemandDoc::from(&s.demand_model),
            rho: s.rho,
            channel_rate_mbps: s.channel_rate_mbps,
            hop_limit: s.hop_limit,
        }
    }
}

impl ScenarioDocument {
    fn into_scenario(self) -> Result<Scenario> {
        let demand_model = self.demand.into_model().map_err(Error::Validation)?;
        Ok(Scenario {
            households: self
                .households
                .into_iter()
                .map(|h| Household {
                    id: h.id,
                    position: Position { x_m: h.x_m, y_m: h.y_m },
                    lte_capable: h.lte_capable,
                })
                .collect(),
            lte_bs: self
                .lte_bs
                .into_iter()
                .map(|b| LteBaseStation::new(b.id, b.x_m, b.y_m, b.tau, b.tx_power_dbm))
                .collect(),
            radio: self.radio.into(),
            demand_model,
            rho: self.rho,
            channel_rate_mbps: self.channel_rate_mbps,
            hop_limit: self.hop_limit,
        })
    }
}
