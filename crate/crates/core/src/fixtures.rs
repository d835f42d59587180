//! The four bundled communities. See `fixtures/PROVENANCE.md` for how they
//! were produced.

use crate::error::Result;
use crate::scenario::{load_scenario, Scenario};

/// Seed used for demand sampling when a fixture is evaluated.
pub const DEMAND_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Community {
    I,
    II,
    III,
    IV,
}

impl Community {
    pub const ALL: [Community; 4] = [Community::I, Community::II, Community::III, Community::IV];

    pub fn name(self) -> &'static str {
        match self {
            Community::I => "i",
            Community::II => "ii",
            Community::III => "iii",
            Community::IV => "iv",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn document(self) -> &'static str {
        match self {
            Community::I => include_str!("../fixtures/community_i.json"),
            Community::II => include_str!("../fixtures/community_ii.json"),
            Community::III => include_str!("../fixtures/community_iii.json"),
            Community::IV => include_str!("../fixtures/community_iv.json"),
        }
    }

    pub fn scenario(self) -> Result<Scenario> {
        load_scenario(self.document().as_bytes())
    }

    /// Dense communities are the ones without an LTE base station.
    pub fn dense(self) -> bool {
        self != Community::I
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load_with_expected_sizes() {
        let sizes: Vec<(usize, usize)> = Community::ALL
            .iter()
            .map(|c| {
                let s = c.scenario().unwrap();
                (s.households.len(), s.lte_bs.len())
            })
            .collect();
        assert_eq!(sizes, vec![(22, 1), (21, 0), (13, 0), (17, 0)]);
    }

    #[test]
    fn names_round_trip() {
        for c in Community::ALL {
            assert_eq!(Community::from_name(c.name()), Some(c));
        }
        assert_eq!(Community::from_name("v"), None);
    }
}
