use rand::Rng;

use crate::problem::Scenario;
use crate::rng;

/// Size limits for [`random_scenario`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceLimits {
    pub max_nodes: usize,
    pub max_gateways: usize,
    pub max_frequencies: usize,
    pub max_slots: usize,
    /// Probability that a (node, slot) is mandatory.
    pub mandatory_rate: f64,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        Self {
            max_nodes: 3,
            max_gateways: 2,
            max_frequencies: 2,
            max_slots: 3,
            mandatory_rate: 0.3,
        }
    }
}

/// Draws a small random instance. Demands are mostly reachable so that a
/// fair share of draws is feasible.
pub fn random_scenario(seed: u64, limits: InstanceLimits) -> Scenario {
    let mut r = rng::seeded(seed);
    let nodes = r.random_range(1..=limits.max_nodes);
    let gateways = r.random_range(1..=limits.max_gateways);
    let freqs = r.random_range(1..=limits.max_frequencies);
    let slots = r.random_range(1..=limits.max_slots);
    let min_symbols = r.random_range(1..=2u32);
    let freq_capacity: Vec<u32> = (0..freqs)
        .map(|_| r.random_range(min_symbols..=min_symbols + 2))
        .collect();
    let gateway_capacity = (0..gateways)
        .map(|_| r.random_range(1..=freqs as u32))
        .collect();
    let must_transmit: Vec<Vec<bool>> = (0..nodes)
        .map(|_| (0..slots).map(|_| r.random_bool(limits.mandatory_rate)).collect())
        .collect();
    let demand = (0..nodes)
        .map(|i| {
            let mandatory = must_transmit[i].iter().filter(|&&m| m).count() as u32;
            let floor = mandatory * gateways as u32 * min_symbols;
            floor + r.random_range(0..=2 * min_symbols)
        })
        .collect();
    Scenario {
        num_nodes: nodes,
        num_gateways: gateways,
        frequencies: (0..freqs).map(|k| 868.1 + 0.2 * k as f64).collect(),
        horizon: slots,
        gateway_capacity,
        freq_capacity,
        min_symbols,
        demand,
        must_transmit,
    }
}
