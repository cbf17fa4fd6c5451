use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::report::{NodeSizeStats, SimReport, SlotEvent};
use super::{ChannelTrace, HopGranularity, ModelSource, Placement, SimConfig, SimError, Strategy, TraceEntry};
use crate::predictor::FcnnModel;
use crate::rng::{substream, DetRng};
use crate::telemetry::{feature_len, TelemetryWindow, RSSI_FLOOR_DBM, SNR_FLOOR_DB};

/// Anything that maps a telemetry snapshot to a carrier index.
pub trait ChannelModel: Send + Sync + fmt::Debug {
    fn input_dim(&self) -> usize;
    fn num_channels(&self) -> usize;
    fn choose(&self, features: &[f64]) -> Result<usize, String>;
}

/// Runtime form of a [`Strategy`], with channel indices and loaded models.
#[derive(Debug, Clone)]
pub enum Policy {
    Fixed(usize),
    RandomHop,
    SensingHop,
    Model(Arc<dyn ChannelModel>),
    Oracle,
}

impl Policy {
    fn label(&self) -> &'static str {
        match self {
            Policy::Fixed(_) => "fixed",
            Policy::RandomHop => "random_hop",
            Policy::SensingHop => "sensing_hop",
            Policy::Model(_) | Policy::Oracle => "predictor_hop",
        }
    }
}

/// Turns configured strategies into policies, loading model files from disk.
pub fn resolve_policies(config: &SimConfig, trace: &ChannelTrace) -> Result<Vec<Policy>, SimError> {
    config.validate(trace)?;
    config
        .nodes
        .iter()
        .map(|n| {
            Ok(match &n.strategy {
                Strategy::Fixed { freq_mhz } => Policy::Fixed(
                    trace.channel_index(*freq_mhz).expect("checked by validate"),
                ),
                Strategy::RandomHop => Policy::RandomHop,
                Strategy::SensingHop => Policy::SensingHop,
                Strategy::PredictorHop { model: ModelSource::Oracle } => Policy::Oracle,
                Strategy::PredictorHop { model: ModelSource::File(path) } => {
                    let model = FcnnModel::load(path).map_err(|e| SimError::Model {
                        path: path.display().to_string(),
                        detail: e.to_string(),
                    })?;
                    Policy::Model(Arc::new(model))
                }
            })
        })
        .collect()
}

/// Runs the full payload schedule with the configured strategies.
pub fn run(config: &SimConfig, trace: &ChannelTrace) -> Result<SimReport, SimError> {
    let policies = resolve_policies(config, trace)?;
    run_with_policies(config, trace, policies)
}

pub fn run_with_policies(
    config: &SimConfig,
    trace: &ChannelTrace,
    policies: Vec<Policy>,
) -> Result<SimReport, SimError> {
    let mut sim = Simulator::new(config, trace, policies)?;
    while !sim.is_finished() {
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Fixed-composition delivery deck: holds exactly `round(pdr * len)`
/// successes in shuffled order and reshuffles once drawn through, so a
/// node that stays on one carrier for a whole block reproduces the
/// measured delivery ratio exactly.
#[derive(Debug, Clone)]
struct Deck {
    cards: Vec<bool>,
    next: usize,
    rng: DetRng,
}

impl Deck {
    fn new(pdr: f64, len: usize, mut rng: DetRng) -> Self {
        let hits = ((pdr * len as f64).round() as usize).min(len);
        let mut cards: Vec<bool> = (0..len).map(|k| k < hits).collect();
        cards.shuffle(&mut rng);
        Self { cards, next: 0, rng }
    }

    fn draw(&mut self) -> bool {
        if self.next == self.cards.len() {
            self.cards.shuffle(&mut self.rng);
            self.next = 0;
        }
        self.next += 1;
        self.cards[self.next - 1]
    }
}

/// Random state consumed while resolving a slot. Cloned for
/// counterfactual replays.
#[derive(Debug, Clone)]
struct Channels {
    noise: Vec<DetRng>,
    decks: Vec<Vec<Deck>>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    rssi: f64,
    snr: f64,
    delivered: bool,
    collided: bool,
}

#[derive(Debug, Clone, Default)]
struct RunningMean {
    n: u64,
    mean: f64,
}

impl RunningMean {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.mean += (x - self.mean) / self.n as f64;
    }

    fn get(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    sent: u64,
    delivered: u64,
    collisions: u64,
    hops: u64,
    rssi: RunningMean,
    snr: RunningMean,
    link_rssi: RunningMean,
    link_snr: RunningMean,
}

/// Slot-by-slot replay state.
#[derive(Debug)]
pub struct Simulator {
    config: SimConfig,
    frequencies: Vec<f64>,
    entries: Vec<Vec<TraceEntry>>,
    policies: Vec<Policy>,
    channels: Channels,
    choice_rng: Vec<DetRng>,
    windows: Vec<TelemetryWindow>,
    current: Vec<Option<usize>>,
    slot: usize,
    tallies: Vec<Tally>,
    events: Vec<SlotEvent>,
}

const STREAMS_PER_NODE: u64 = 1 << 16;

impl Simulator {
    pub fn new(config: &SimConfig, trace: &ChannelTrace, policies: Vec<Policy>) -> Result<Self, SimError> {
        config.validate(trace)?;
        let n = config.nodes.len();
        if policies.len() != n {
            return Err(SimError::Config(format!("{} policies for {n} nodes", policies.len())));
        }
        let f = trace.frequencies().len();
        let sizes = config.payload_sizes.len();
        for (i, p) in policies.iter().enumerate() {
            match p {
                Policy::Fixed(c) if *c >= f => {
                    return Err(SimError::Config(format!("node {i}: channel {c} out of range")))
                }
                Policy::Model(m) => {
                    if m.num_channels() != f {
                        return Err(SimError::ModelArity { node: i, expected: f, got: m.num_channels() });
                    }
                    let want = feature_len(config.window_slots, f);
                    if m.input_dim() != want {
                        return Err(SimError::ModelInput { node: i, expected: want, got: m.input_dim() });
                    }
                }
                _ => {}
            }
        }

        let mut entries = Vec::with_capacity(n);
        let mut decks = Vec::with_capacity(n);
        let mut noise = Vec::with_capacity(n);
        let mut choice_rng = Vec::with_capacity(n);
        let mut windows = Vec::with_capacity(n);
        for (i, node) in config.nodes.iter().enumerate() {
            let base = i as u64 * STREAMS_PER_NODE;
            let mut e = Vec::with_capacity(f * sizes);
            let mut d = Vec::with_capacity(f * sizes);
            for (c, &freq) in trace.frequencies().iter().enumerate() {
                for (z, &size) in config.payload_sizes.iter().enumerate() {
                    let entry = *trace.get(&node.source, freq, size).expect("complete trace");
                    let stream = base + 16 + (c * sizes + z) as u64;
                    d.push(Deck::new(entry.pdr, config.packets_per_size as usize, substream(config.seed, stream)));
                    e.push(entry);
                }
            }
            entries.push(e);
            decks.push(d);
            choice_rng.push(substream(config.seed, base + 1));
            noise.push(substream(config.seed, base + 2));
            windows.push(TelemetryWindow::new(config.window_slots, f)?);
        }
        Ok(Self {
            config: config.clone(),
            frequencies: trace.frequencies().to_vec(),
            entries,
            policies,
            channels: Channels { noise, decks },
            choice_rng,
            windows,
            current: vec![None; n],
            slot: 0,
            tallies: vec![Tally::default(); n * sizes],
            events: Vec::new(),
        })
    }

    pub fn num_channels(&self) -> usize {
        self.frequencies.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.config.nodes.len()
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn is_finished(&self) -> bool {
        self.slot >= self.config.total_slots()
    }

    pub fn window(&self, node: usize) -> &TelemetryWindow {
        &self.windows[node]
    }

    fn size_index(&self) -> usize {
        self.slot / self.config.packets_per_size as usize
    }

    /// Carrier each node picks for the coming slot. Advances the
    /// strategies' own randomness, so call it once per slot.
    pub fn decide(&mut self) -> Result<Vec<usize>, SimError> {
        let f = self.num_channels();
        let block_start = self.slot.is_multiple_of(self.config.packets_per_size as usize);
        let mut choices = Vec::with_capacity(self.num_nodes());
        for i in 0..self.num_nodes() {
            let c = match &self.policies[i] {
                Policy::Fixed(c) => *c,
                Policy::RandomHop => match (self.config.hop_granularity, self.current[i]) {
                    (HopGranularity::PerSizeBlock, Some(c)) if !block_start => c,
                    _ => self.choice_rng[i].random_range(0..f),
                },
                Policy::SensingHop => sensing_choice(self.current[i], self.windows[i].last_availability(), i % f),
                Policy::Model(m) => {
                    let c = m
                        .choose(&self.windows[i].snapshot())
                        .map_err(|detail| SimError::Inference { node: i, detail })?;
                    if c >= f {
                        return Err(SimError::Inference { node: i, detail: format!("channel {c} out of range") });
                    }
                    c
                }
                Policy::Oracle => self.current[i].unwrap_or(i % f),
            };
            choices.push(c);
        }
        for i in 0..self.num_nodes() {
            if matches!(self.policies[i], Policy::Oracle) {
                choices[i] = argmax_lowest(&self.realized_rssi(i, &choices));
            }
        }
        Ok(choices)
    }

    /// RSSI node `node` would realize on every carrier this slot with the
    /// other nodes held at `choices`; `-inf` where the packet would be lost.
    pub fn realized_rssi(&self, node: usize, choices: &[usize]) -> Vec<f64> {
        let mut alt = choices.to_vec();
        (0..self.num_channels())
            .map(|c| {
                alt[node] = c;
                let mut probe = self.channels.clone();
                let o = self.resolve(&mut probe, &alt)[node];
                if o.delivered {
                    o.rssi
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }

    fn resolve(&self, ch: &mut Channels, choices: &[usize]) -> Vec<Outcome> {
        let z = self.size_index();
        let sizes = self.config.payload_sizes.len();
        let mut out: Vec<Outcome> = choices
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = c * sizes + z;
                let entry = self.entries[i][k];
                let ok = ch.decks[i][k].draw();
                let rng = &mut ch.noise[i];
                Outcome {
                    rssi: truncated_rssi(entry.mean_rssi, self.config.rssi_jitter_db, rng),
                    snr: entry.mean_snr + self.config.snr_jitter_db * rng.sample::<f64, _>(StandardNormal),
                    delivered: ok,
                    collided: false,
                }
            })
            .collect();

        let mut groups: BTreeMap<(usize, usize, u32), Vec<usize>> = BTreeMap::new();
        for (i, &c) in choices.iter().enumerate() {
            let node = &self.config.nodes[i];
            groups.entry((node.gateway, c, node.phase)).or_default().push(i);
        }
        for mut members in groups.into_values().filter(|m| m.len() > 1) {
            members.sort_by(|&a, &b| out[b].rssi.total_cmp(&out[a].rssi).then(a.cmp(&b)));
            let captured = out[members[0]].rssi - out[members[1]].rssi >= self.config.capture_threshold_db;
            for (rank, &i) in members.iter().enumerate() {
                out[i].collided = true;
                if rank > 0 || !captured {
                    out[i].delivered = false;
                }
            }
        }
        out
    }

    /// Transmits with the given carriers, updates telemetry and tallies.
    pub fn apply(&mut self, choices: &[usize]) -> Result<Vec<SlotEvent>, SimError> {
        if self.is_finished() {
            return Ok(Vec::new());
        }
        let n = self.num_nodes();
        let f = self.num_channels();
        if choices.len() != n || choices.iter().any(|&c| c >= f) {
            return Err(SimError::Config(format!("invalid carrier choice {choices:?}")));
        }
        let mut channels = std::mem::replace(
            &mut self.channels,
            Channels { noise: Vec::new(), decks: Vec::new() },
        );
        let outcomes = self.resolve(&mut channels, choices);
        self.channels = channels;

        let z = self.size_index();
        let size = self.config.payload_sizes[z];
        let mut users = vec![0u32; f];
        for (i, &c) in choices.iter().enumerate() {
            if self.config.placement == Placement::EndNode || outcomes[i].delivered {
                users[c] += 1;
            }
        }
        let mut events = Vec::with_capacity(n);
        for i in 0..n {
            let c = choices[i];
            let o = outcomes[i];
            let hopped = self.current[i].is_some_and(|p| p != c);
            let mut seen = users.clone();
            let counted = self.config.placement == Placement::EndNode || o.delivered;
            if !self.config.count_own_transmission && counted {
                seen[c] -= 1;
            }
            let (rssi, snr) = if o.delivered { (o.rssi, o.snr) } else { (RSSI_FLOOR_DBM, SNR_FLOOR_DB) };
            self.windows[i].record(&seen, rssi, snr)?;

            let t = &mut self.tallies[i * self.config.payload_sizes.len() + z];
            t.sent += 1;
            t.collisions += u64::from(o.collided);
            t.hops += u64::from(hopped);
            t.link_rssi.push(rssi);
            t.link_snr.push(snr);
            if o.delivered {
                t.delivered += 1;
                t.rssi.push(o.rssi);
                t.snr.push(o.snr);
            }
            self.current[i] = Some(c);
            events.push(SlotEvent {
                slot: self.slot,
                node: i,
                gateway: self.config.nodes[i].gateway,
                freq_mhz: self.frequencies[c],
                size,
                rssi: o.rssi,
                snr: o.snr,
                delivered: o.delivered,
                collided: o.collided,
                hopped,
            });
        }
        self.events.extend(events.iter().cloned());
        self.slot += 1;
        Ok(events)
    }

    /// Runs one slot; returns no events once the schedule is exhausted.
    pub fn step(&mut self) -> Result<Vec<SlotEvent>, SimError> {
        if self.is_finished() {
            return Ok(Vec::new());
        }
        let choices = self.decide()?;
        self.apply(&choices)
    }

    pub fn finish(self) -> SimReport {
        let sizes = &self.config.payload_sizes;
        let mut stats = Vec::with_capacity(self.tallies.len());
        for (i, node) in self.config.nodes.iter().enumerate() {
            for (z, &size) in sizes.iter().enumerate() {
                let t = &self.tallies[i * sizes.len() + z];
                stats.push(NodeSizeStats {
                    node: i,
                    source: node.source.clone(),
                    strategy: self.policies[i].label().to_owned(),
                    size,
                    sent: t.sent,
                    delivered: t.delivered,
                    lost: t.sent - t.delivered,
                    collisions: t.collisions,
                    hops: t.hops,
                    pdr: if t.sent == 0 { 0.0 } else { t.delivered as f64 / t.sent as f64 },
                    mean_rssi: t.rssi.get(),
                    mean_snr: t.snr.get(),
                    link_rssi: t.link_rssi.get().unwrap_or(RSSI_FLOOR_DBM),
                    link_snr: t.link_snr.get().unwrap_or(SNR_FLOOR_DB),
                });
            }
        }
        SimReport {
            seed: self.config.seed,
            frequencies: self.frequencies,
            payload_sizes: self.config.payload_sizes,
            stats,
            events: self.events,
        }
    }
}

/// Stay while the current carrier had at most one user last slot,
/// otherwise move to the least used carrier.
fn sensing_choice(current: Option<usize>, last: Option<&[u32]>, cold: usize) -> usize {
    match (current, last) {
        (Some(c), Some(seen)) if seen[c] <= 1 => c,
        (_, Some(seen)) => {
            let mut best = 0;
            for (k, &v) in seen.iter().enumerate() {
                if v < seen[best] {
                    best = k;
                }
            }
            best
        }
        (Some(c), None) => c,
        (None, None) => cold,
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Gaussian jitter around `mean`, redrawn until the sample is a physical
/// (non-positive) dBm value.
fn truncated_rssi(mean: f64, sigma: f64, rng: &mut DetRng) -> f64 {
    for _ in 0..64 {
        let v = mean + sigma * rng.sample::<f64, _>(StandardNormal);
        if v <= 0.0 {
            return v;
        }
    }
    mean.min(0.0)
}
