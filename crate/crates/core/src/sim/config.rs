use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{ChannelTrace, SimError};
use crate::telemetry::DEFAULT_WINDOW_SLOTS;

pub const DEFAULT_PAYLOAD_SIZES: [u32; 6] = [30, 74, 118, 162, 206, 250];
pub const DEFAULT_PACKETS_PER_SIZE: u32 = 50;
pub const DEFAULT_SEED: u64 = 7;

/// Where a hopping model gets its decision from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// Clairvoyant: replays the slot on every carrier and keeps the best.
    Oracle,
    /// A trained network stored in the flat binary format.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Fixed { freq_mhz: f64 },
    RandomHop,
    SensingHop,
    PredictorHop { model: ModelSource },
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Fixed { .. } => "fixed",
            Strategy::RandomHop => "random_hop",
            Strategy::SensingHop => "sensing_hop",
            Strategy::PredictorHop { .. } => "predictor_hop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub source: String,
    #[serde(default)]
    pub gateway: usize,
    /// Offset inside the slot. Only packets with equal phase overlap in the
    /// air, so nodes on distinct phases never collide.
    #[serde(default)]
    pub phase: u32,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// The node decides from the full channel report the gateway sends back.
    #[default]
    EndNode,
    /// The gateway decides from what it decoded, so undecodable
    /// transmissions do not show up in the availability counts.
    Gateway,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopGranularity {
    #[default]
    PerPacket,
    PerSizeBlock,
}

fn default_sizes() -> Vec<u32> {
    DEFAULT_PAYLOAD_SIZES.to_vec()
}
fn default_packets() -> u32 {
    DEFAULT_PACKETS_PER_SIZE
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_capture() -> f64 {
    6.0
}
fn default_rssi_jitter() -> f64 {
    1.0
}
fn default_snr_jitter() -> f64 {
    0.5
}
fn default_window() -> usize {
    DEFAULT_WINDOW_SLOTS
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_sizes")]
    pub payload_sizes: Vec<u32>,
    #[serde(default = "default_packets")]
    pub packets_per_size: u32,
    pub nodes: Vec<NodeConfig>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_capture")]
    pub capture_threshold_db: f64,
    #[serde(default = "default_rssi_jitter")]
    pub rssi_jitter_db: f64,
    #[serde(default = "default_snr_jitter")]
    pub snr_jitter_db: f64,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub hop_granularity: HopGranularity,
    #[serde(default = "default_window")]
    pub window_slots: usize,
    /// Whether a node's own packet counts towards the users it sees on
    /// its carrier.
    #[serde(default = "default_true")]
    pub count_own_transmission: bool,
}

impl SimConfig {
    /// One end-node with the given trace source, default everything else.
    pub fn single(source: &str, strategy: Strategy) -> Self {
        Self {
            payload_sizes: default_sizes(),
            packets_per_size: DEFAULT_PACKETS_PER_SIZE,
            nodes: vec![NodeConfig {
                source: source.into(),
                gateway: 0,
                phase: 0,
                strategy,
            }],
            seed: DEFAULT_SEED,
            capture_threshold_db: default_capture(),
            rssi_jitter_db: default_rssi_jitter(),
            snr_jitter_db: default_snr_jitter(),
            placement: Placement::default(),
            hop_granularity: HopGranularity::default(),
            window_slots: DEFAULT_WINDOW_SLOTS,
            count_own_transmission: true,
        }
    }

    /// Same configuration with every node switched to `strategy`.
    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.strategy = strategy.clone();
        }
        out
    }

    pub fn total_slots(&self) -> usize {
        self.payload_sizes.len() * self.packets_per_size as usize
    }

    pub fn validate(&self, trace: &ChannelTrace) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.payload_sizes.is_empty() {
            return bad("payload schedule is empty".into());
        }
        if let Some(z) = self.payload_sizes.iter().find(|z| !trace.sizes().contains(z)) {
            return bad(format!("payload size {z} is not in the trace"));
        }
        if self.packets_per_size == 0 {
            return bad("packets_per_size must be at least 1".into());
        }
        if self.nodes.is_empty() {
            return bad("no nodes configured".into());
        }
        if self.window_slots == 0 {
            return bad("window_slots must be at least 1".into());
        }
        for (name, v) in [
            ("capture_threshold_db", self.capture_threshold_db),
            ("rssi_jitter_db", self.rssi_jitter_db),
            ("snr_jitter_db", self.snr_jitter_db),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !trace.sources().contains(&n.source) {
                return bad(format!("node {i}: source {:?} is not in the trace", n.source));
            }
            if let Strategy::Fixed { freq_mhz } = n.strategy {
                if trace.channel_index(freq_mhz).is_none() {
                    return bad(format!("node {i}: carrier {freq_mhz} MHz is not in the trace"));
                }
            }
        }
        Ok(())
    }
}
