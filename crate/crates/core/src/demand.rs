//! Household demand: categorical distributions over the number of watched
//! channels, sampled into a per-period Mbps matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::Household;

/// Largest channel count in the shipped diurnal model.
pub const DEFAULT_PSI_MAX: usize = 4;
pub const DEFAULT_PERIODS: usize = 24;
pub const DEFAULT_CHANNEL_RATE_MBPS: f64 = 5.0;

/// Per-channel watching probability by hour of day: quiet early morning,
/// a small midday bump and an evening peak.
const DIURNAL_WATCH_PROB: [f64; 24] = [
    0.30, 0.20, 0.12, 0.08, 0.06, 0.06, 0.10, 0.18, 0.22, 0.20, 0.18, 0.18, 0.20, 0.20, 0.22,
    0.25, 0.30, 0.38, 0.48, 0.58, 0.65, 0.62, 0.52, 0.40,
];

const PROB_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSpec {
    /// One distribution for every household and period.
    Uniform(Vec<f64>),
    /// One distribution per period, shared by all households.
    PerHour(Vec<Vec<f64>>),
    /// Distributions per household (matched by id) and period.
    PerHome(Vec<HomeDemand>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomeDemand {
    pub id: String,
    pub per_hour: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    pub periods: usize,
    pub channel_rate_mbps: f64,
    pub spec: DemandSpec,
}

impl Default for DemandModel {
    fn default() -> Self {
        Self::diurnal(DEFAULT_PERIODS, DEFAULT_CHANNEL_RATE_MBPS, DEFAULT_PSI_MAX)
    }
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut choose = 1.0;
    for k in 0..=n {
        if k > 0 {
            choose = choose * (n - k + 1) as f64 / k as f64;
        }
        out.push(choose * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
    }
    out
}

impl DemandModel {
    /// Evening-peaked model: channel count ~ Binomial(psi_max, p(hour)).
    pub fn diurnal(periods: usize, channel_rate_mbps: f64, psi_max: usize) -> Self {
        let per_hour = (0..periods)
            .map(|t| {
                let hour = t * 24 / periods.max(1);
                binomial_pmf(psi_max, DIURNAL_WATCH_PROB[hour % 24])
            })
            .collect();
        Self { periods, channel_rate_mbps, spec: DemandSpec::PerHour(per_hour) }
    }

    /// Every household always watches exactly `channels` channels.
    pub fn constant(periods: usize, channel_rate_mbps: f64, channels: usize) -> Self {
        let mut dist = vec![0.0; channels + 1];
        dist[channels] = 1.0;
        Self { periods, channel_rate_mbps, spec: DemandSpec::Uniform(dist) }
    }

    pub fn psi_max(&self) -> usize {
        let longest = match &self.spec {
            DemandSpec::Uniform(d) => d.len(),
            DemandSpec::PerHour(h) => h.iter().map(Vec::len).max().unwrap_or(0),
            DemandSpec::PerHome(homes) => homes
                .iter()
                .flat_map(|h| h.per_hour.iter().map(Vec::len))
                .max()
                .unwrap_or(0),
        };
        longest.saturating_sub(1)
    }

    fn check_distribution(dist: &[f64], ctx: &str) -> Result<()> {
        if dist.is_empty() {
            return Err(Error::Validation(format!("{ctx}: empty distribution")));
        }
        if dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Validation(format!("{ctx}: probabilities must be >= 0")));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::Validation(format!("{ctx}: probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }

    pub fn validate(&self, homes: &[Household]) -> Result<()> {
        if self.periods == 0 {
            return Err(Error::Validation("demand.T must be at least 1".into()));
        }
        if !(self.channel_rate_mbps.is_finite() && self.channel_rate_mbps > 0.0) {
            return Err(Error::Validation("demand.b_mbps must be positive".into()));
        }
        match &self.spec {
            DemandSpec::Uniform(d) => Self::check_distribution(d, "demand.uniform")?,
            DemandSpec::PerHour(hours) => {
                if hours.len() != self.periods {
                    return Err(Error::Validation(format!(
                        "demand.per_hour has {} entries, expected T = {}",
                        hours.len(),
                        self.periods
                    )));
                }
                for (t, d) in hours.iter().enumerate() {
                    Self::check_distribution(d, &format!("demand.per_hour[{t}]"))?;
                }
            }
            DemandSpec::PerHome(entries) => {
                if entries.len() != homes.len() {
                    return Err(Error::Validation(format!(
                        "demand.per_home has {} entries for {} households",
                        entries.len(),
                        homes.len()
                    )));
                }
                for entry in entries {
                    if !homes.iter().any(|h| h.id == entry.id) {
                        return Err(Error::Validation(format!(
                            "demand.per_home references unknown household '{}'",
                            entry.id
                        )));
                    }
                    if entry.per_hour.len() != self.periods {
                        return Err(Error::Validation(format!(
                            "demand.per_home '{}' has {} periods, expected {}",
                            entry.id,
                            entry.per_hour.len(),
                            self.periods
                        )));
                    }
                    for (t, d) in entry.per_hour.iter().enumerate() {
                        Self::check_distribution(d, &format!("demand.per_home '{}'[{t}]", entry.id))?;
                    }
                }
                let mut ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
                ids.sort_unstable();
                if ids.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Validation("demand.per_home has duplicate ids".into()));
                }
            }
        }
        Ok(())
    }

    fn distribution(&self, home: &Household, period: usize) -> &[f64] {
        match &self.spec {
            DemandSpec::Uniform(d) => d,
            DemandSpec::PerHour(hours) => &hours[period],
            DemandSpec::PerHome(entries) => {
                let entry = entries
                    .iter()
                    .find(|e| e.id == home.id)
                    .expect("per_home entries validated against households");
                &entry.per_hour[period]
            }
        }
    }

    /// Draws one channel count per (household, period). Deterministic in
    /// `seed`.
    pub fn sample(&self, homes: &[Household], seed: u64) -> DemandProfile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut delta = Vec::with_capacity(homes.len());
        for home in homes {
            let mut row = Vec::with_capacity(self.periods);
            for t in 0..self.periods {
                let dist = self.distribution(home, t);
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut psi = dist.len() - 1;
                for (k, p) in dist.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        psi = k;
                        break;
                    }
                }
                // Trailing zero-probability entries can never be drawn.
                while psi > 0 && dist[psi] == 0.0 {
                    psi -= 1;
                }
                row.push(psi as f64 * self.channel_rate_mbps);
            }
            delta.push(row);
        }
        DemandProfile::new(delta)
    }
}

/// Demand matrix `delta[household][period]` in Mbps plus activity flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    delta: Vec<Vec<f64>>,
    active: Vec<Vec<bool>>,
}

impl DemandProfile {
    /// Panics on negative or non-finite entries or ragged rows.
    pub fn new(delta: Vec<Vec<f64>>) -> Self {
        let periods = delta.first().map_or(0, Vec::len);
        assert!(delta.iter().all(|r| r.len() == periods), "ragged demand matrix");
        assert!(
            delta.iter().flatten().all(|d| d.is_finite() && *d >= 0.0),
            "demands must be finite and non-negative"
        );
        let active = delta.iter().map(|r| r.iter().map(|d| *d > 0.0).collect()).collect();
        Self { delta, active }
    }

    /// Single-period profile.
    pub fn fixed(demands: Vec<f64>) -> Self {
        Self::new(demands.into_iter().map(|d| vec![d]).collect())
    }

    pub fn households(&self) -> usize {
        self.delta.len()
    }

    pub fn periods(&self) -> usize {
        self.delta.first().map_or(0, Vec::len)
    }

    pub fn delta(&self, household: usize, period: usize) -> f64 {
        self.delta[household][period]
    }

    pub fn active(&self, household: usize, period: usize) -> bool {
        self.active[household][period]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.delta
    }

    /// Demands of every household in period `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        self.delta.iter().map(|r| r[t]).collect()
    }

    /// Per-household maximum over all periods.
    pub fn peak_demands(&self) -> Vec<f64> {
        self.delta.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect()
    }

    /// Collapses the horizon to one period holding the peaks.
    pub fn peak_profile(&self) -> DemandProfile {
        DemandProfile::fixed(self.peak_demands())
    }

    pub fn total_demand(&self, t: usize) -> Result<f64> {
        if self.households() > 0 && t >= self.periods() {
            return Err(Error::Domain(format!(
                "period {t} outside horizon of {} periods",
                self.periods()
            )));
        }
        Ok(self.delta.iter().map(|r| r[t]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Household;
    use proptest::prelude::*;

    fn homes(n: usize) -> Vec<Household> {
        (0..n).map(|i| Household::new(format!("h{i}"), i as f64 * 10.0, 0.0)).collect()
    }

    #[test]
    fn degenerate_distribution_is_deterministic() {
        let model = DemandModel::constant(3, 5.0, 2);
        let p = model.sample(&homes(4), 11);
        assert!(p.rows().iter().flatten().all(|&d| d == 10.0));
    }

    #[test]
    fn zero_period_marks_inactive() {
        let mut per_hour = vec![vec![0.0, 0.0, 1.0]; 4];
        per_hour[3] = vec![1.0, 0.0, 0.0];
        let model = DemandModel { periods: 4, channel_rate_mbps: 5.0, spec: DemandSpec::PerHour(per_hour) };
        let p = model.sample(&homes(3), 1);
        for i in 0..3 {
            assert!(!p.active(i, 3));
            assert!(p.active(i, 0));
        }
    }

    #[test]
    fn same_seed_same_profile() {
        let model = DemandModel::default();
        assert_eq!(model.sample(&homes(6), 42), model.sample(&homes(6), 42));
        assert_ne!(model.sample(&homes(6), 42), model.sample(&homes(6), 43));
    }

    #[test]
    fn peaks_and_totals() {
        let p = DemandProfile::new(vec![vec![10.0, 15.0, 5.0], vec![0.0, 0.0, 0.0]]);
        assert_eq!(p.peak_demands(), vec![15.0, 0.0]);
        let single = DemandProfile::fixed(vec![7.0, 3.0]);
        assert_eq!(single.peak_demands(), vec![7.0, 3.0]);
        let uniform = DemandProfile::fixed(vec![10.0; 5]);
        assert_eq!(uniform.total_demand(0).unwrap(), 50.0);
        assert!(uniform.total_demand(1).is_err());
        assert_eq!(DemandProfile::new(vec![]).total_demand(0).unwrap(), 0.0);
    }

    #[test]
    fn default_model_validates() {
        let model = DemandModel::default();
        model.validate(&homes(3)).unwrap();
        assert_eq!(model.psi_max(), 4);
        let bad = DemandModel { periods: 2, channel_rate_mbps: 5.0, spec: DemandSpec::Uniform(vec![0.5, 0.4]) };
        assert!(bad.validate(&homes(1)).is_err());
    }

    proptest! {
        #[test]
        fn samples_stay_on_support(seed in any::<u64>(), n in 1usize..8) {
            let model = DemandModel::default();
            let p = model.sample(&homes(n), seed);
            let peaks = p.peak_demands();
            for (i, row) in p.rows().iter().enumerate() {
                for (t, &d) in row.iter().enumerate() {
                    let psi = d / model.channel_rate_mbps;
                    prop_assert_eq!(psi.fract(), 0.0);
                    prop_assert!(psi <= model.psi_max() as f64);
                    prop_assert!(peaks[i] >= d);
                    prop_assert_eq!(p.active(i, t), d > 0.0);
                }
            }
            for t in 0..p.periods() {
                let manual: f64 = (0..n).map(|i| p.delta(i, t)).sum();
                prop_assert_eq!(p.total_demand(t).unwrap(), manual);
            }
        }
    }
}
