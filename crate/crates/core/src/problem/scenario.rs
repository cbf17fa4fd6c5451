use serde::{Deserialize, Serialize};

use super::ProblemError;

/// A channel-allocation instance: who transmits, to which gateways, over
/// which carriers, for how many slots, and how much data each node owes.
///
/// Slots are 0-based in every API and in the JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub num_nodes: usize,
    pub num_gateways: usize,
    /// Carrier frequencies in MHz, pairwise distinct.
    pub frequencies: Vec<f64>,
    pub horizon: usize,
    /// Per gateway: how many distinct carriers it can listen on in one slot.
    pub gateway_capacity: Vec<u32>,
    /// Per frequency: maximum symbols per slot.
    pub freq_capacity: Vec<u32>,
    pub min_symbols: u32,
    /// Per node: total symbols to deliver over the horizon.
    pub demand: Vec<u32>,
    /// Optional node × slot activity mask. A `true` entry obliges the node to
    /// pick exactly one carrier towards every gateway in that slot. Empty
    /// means no slot is mandatory.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub must_transmit: Vec<Vec<bool>>,
}

impl Scenario {
    pub fn num_frequencies(&self) -> usize {
        self.frequencies.len()
    }

    pub fn dims(&self) -> Dims {
        Dims {
            nodes: self.num_nodes,
            gateways: self.num_gateways,
            frequencies: self.frequencies.len(),
            slots: self.horizon,
        }
    }

    /// Whether node `i` is obliged to transmit in slot `t`.
    pub fn requires(&self, node: usize, slot: usize) -> bool {
        self.must_transmit
            .get(node)
            .and_then(|row| row.get(slot))
            .copied()
            .unwrap_or(false)
    }

    /// Checks the structural invariants of the instance.
    pub fn check(&self) -> Result<(), ProblemError> {
        let invalid = |msg: String| Err(ProblemError::InvalidScenario(msg));
        if self.num_nodes == 0 {
            return invalid("num_nodes must be positive".into());
        }
        if self.num_gateways == 0 {
            return invalid("num_gateways must be positive".into());
        }
        if self.frequencies.is_empty() {
            return invalid("at least one frequency is required".into());
        }
        if self.horizon == 0 {
            return invalid("horizon must be positive".into());
        }
        for (k, f) in self.frequencies.iter().enumerate() {
            if !f.is_finite() || *f <= 0.0 {
                return invalid(format!("frequency #{k} is not a positive finite value"));
            }
            if self.frequencies[..k].contains(f) {
                return invalid(format!("frequency {f} MHz listed twice"));
            }
        }
        if self.gateway_capacity.len() != self.num_gateways {
            return invalid(format!(
                "gateway_capacity has {} entries, expected {}",
                self.gateway_capacity.len(),
                self.num_gateways
            ));
        }
        if self.gateway_capacity.contains(&0) {
            return invalid("gateway capacities must be positive".into());
        }
        if self.freq_capacity.len() != self.frequencies.len() {
            return invalid(format!(
                "freq_capacity has {} entries, expected {}",
                self.freq_capacity.len(),
                self.frequencies.len()
            ));
        }
        if self.min_symbols == 0 {
            return invalid("min_symbols must be positive".into());
        }
        let tightest = self.freq_capacity.iter().copied().min().unwrap_or(0);
        if self.min_symbols > tightest {
            return invalid(format!(
                "min_symbols {} exceeds the smallest frequency capacity {tightest}",
                self.min_symbols
            ));
        }
        if self.demand.len() != self.num_nodes {
            return invalid(format!(
                "demand has {} entries, expected {}",
                self.demand.len(),
                self.num_nodes
            ));
        }
        if !self.must_transmit.is_empty()
            && (self.must_transmit.len() != self.num_nodes
                || self.must_transmit.iter().any(|r| r.len() != self.horizon))
        {
            return invalid("must_transmit must be a num_nodes × horizon matrix".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.check()?;
        Ok(scenario)
    }
}

/// Index extents shared by a scenario and its schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub nodes: usize,
    pub gateways: usize,
    pub frequencies: usize,
    pub slots: usize,
}

impl Dims {
    /// Row-major offset of `(node, gateway, frequency, slot)`.
    #[inline]
    pub fn cell(&self, node: usize, gateway: usize, freq: usize, slot: usize) -> usize {
        ((node * self.gateways + gateway) * self.frequencies + freq) * self.slots + slot
    }

    #[inline]
    pub fn channel(&self, gateway: usize, freq: usize, slot: usize) -> usize {
        (gateway * self.frequencies + freq) * self.slots + slot
    }

    pub fn cells(&self) -> usize {
        self.nodes * self.gateways * self.frequencies * self.slots
    }

    pub fn channels(&self) -> usize {
        self.gateways * self.frequencies * self.slots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario {
            num_nodes: 2,
            num_gateways: 1,
            frequencies: vec![868.1, 868.3],
            horizon: 2,
            gateway_capacity: vec![2],
            freq_capacity: vec![4, 4],
            min_symbols: 1,
            demand: vec![2, 2],
            must_transmit: vec![],
        }
    }

    #[test]
    fn valid_scenario_passes() {
        base().check().unwrap();
    }

    #[test]
    fn duplicate_frequency_rejected() {
        let mut s = base();
        s.frequencies = vec![868.1, 868.1];
        assert!(matches!(s.check(), Err(ProblemError::InvalidScenario(_))));
    }

    #[test]
    fn min_symbols_above_capacity_rejected() {
        let mut s = base();
        s.min_symbols = 5;
        assert!(s.check().is_err());
    }

    #[test]
    fn mask_shape_checked() {
        let mut s = base();
        s.must_transmit = vec![vec![true]];
        assert!(s.check().is_err());
        s.must_transmit = vec![vec![true, false], vec![false, false]];
        s.check().unwrap();
        assert!(s.requires(0, 0));
        assert!(!s.requires(1, 1));
    }

    #[test]
    fn json_round_trip() {
        let s = base();
        let text = serde_json::to_string(&s).unwrap();
        assert!(!text.contains("must_transmit"));
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(
            Scenario::from_json("{ not json"),
            Err(ProblemError::Json(_))
        ));
    }
}
