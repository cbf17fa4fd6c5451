use lorahop::sim::{
    compare_strategies, run, ChannelTrace, ModelSource, NodeConfig, Placement, SimConfig,
    Strategy as Hop,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn quiet(cfg: SimConfig) -> SimConfig {
    SimConfig { rssi_jitter_db: 0.0, snr_jitter_db: 0.0, ..cfg }
}

fn node(source: &str, strategy: Hop) -> NodeConfig {
    NodeConfig { source: source.into(), gateway: 0, phase: 0, strategy }
}

#[test]
fn fixed_channel_reproduces_every_trace_cell() {
    let trace = ChannelTrace::bundled();
    for source in trace.sources() {
        for &freq in trace.frequencies() {
            let cfg = quiet(SimConfig::single(source, Hop::Fixed { freq_mhz: freq }));
            let report = run(&cfg, &trace).unwrap();
            for &size in trace.sizes() {
                let want = trace.get(source, freq, size).unwrap();
                let got = report.stats_for(0, size).unwrap();
                assert_eq!(got.pdr, want.pdr, "{source} {freq} {size}");
                if want.pdr > 0.0 {
                    assert_eq!(got.mean_rssi, Some(want.mean_rssi), "{source} {freq} {size}");
                    assert_eq!(got.mean_snr, Some(want.mean_snr), "{source} {freq} {size}");
                }
            }
        }
    }
}

#[test]
fn random_hop_replays_identically() {
    let trace = ChannelTrace::bundled();
    let cfg = SimConfig::single("B", Hop::RandomHop);
    let a = serde_json::to_string(&run(&cfg, &trace).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&cfg, &trace).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = SimConfig { seed: cfg.seed + 1, ..cfg };
    assert_ne!(a, serde_json::to_string(&run(&other, &trace).unwrap()).unwrap());
}

#[test]
fn oracle_beats_every_fixed_channel_on_delivery() {
    let trace = ChannelTrace::bundled();
    for source in trace.sources() {
        let oracle = SimConfig::single(source, Hop::PredictorHop { model: ModelSource::Oracle });
        let best = run(&oracle, &trace).unwrap();
        for &freq in trace.frequencies() {
            let fixed = run(&oracle.with_strategy(Hop::Fixed { freq_mhz: freq }), &trace).unwrap();
            for &size in trace.sizes() {
                let o = best.stats_for(0, size).unwrap().pdr;
                let f = fixed.stats_for(0, size).unwrap().pdr;
                assert!(o >= f, "{source} {freq} {size}: oracle {o} < fixed {f}");
            }
        }
    }
}

#[test]
fn comparing_a_report_with_itself_is_neutral() {
    let trace = ChannelTrace::bundled();
    let r = run(&SimConfig::single("A", Hop::RandomHop), &trace).unwrap();
    for row in compare_strategies(&r, &r).unwrap() {
        assert_eq!(row.rssi_improvement_pct, Some(0.0));
        assert_eq!(row.snr_improvement_pct, Some(0.0));
        assert_eq!(row.pdr_delta, 0.0);
    }
}

#[test]
fn model_with_wrong_arity_is_rejected() {
    let dir = std::env::temp_dir().join(format!("lorahop-sim-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("two.fhop");
    lorahop::predictor::FcnnModel::init(8 * 4, 2, 0).unwrap().save(&path).unwrap();
    let cfg = SimConfig::single("A", Hop::PredictorHop { model: ModelSource::File(path) });
    let err = run(&cfg, &ChannelTrace::bundled()).unwrap_err();
    assert!(err.to_string().contains("channels"), "{err}");
    std::fs::remove_dir_all(dir).ok();
}

fn strategy() -> impl Strategy<Value = Hop> {
    prop_oneof![
        (0usize..3).prop_map(|k| Hop::Fixed { freq_mhz: 868.0 + k as f64 }),
        Just(Hop::RandomHop),
        Just(Hop::SensingHop),
        Just(Hop::PredictorHop { model: ModelSource::Oracle }),
    ]
}

fn multi_node() -> impl Strategy<Value = SimConfig> {
    (
        prop::collection::vec((0usize..3, 0usize..2, 0u32..2, strategy()), 1..5),
        any::<u64>(),
        prop::bool::ANY,
    )
        .prop_map(|(nodes, seed, gateway_side)| {
            let nodes = nodes
                .into_iter()
                .map(|(s, g, p, st)| NodeConfig {
                    source: ["A", "B", "C"][s].into(),
                    gateway: g,
                    phase: p,
                    strategy: st,
                })
                .collect();
            SimConfig {
                nodes,
                seed,
                packets_per_size: 6,
                placement: if gateway_side {
                    Placement::Gateway
                } else {
                    Placement::EndNode
                },
                ..SimConfig::single("A", Hop::RandomHop)
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packets_are_conserved(cfg in multi_node()) {
        let r = run(&cfg, &ChannelTrace::bundled()).unwrap();
        for s in &r.stats {
            prop_assert_eq!(s.delivered + s.lost, s.sent);
            prop_assert_eq!(s.sent, u64::from(cfg.packets_per_size));
            prop_assert_eq!(s.pdr, s.delivered as f64 / s.sent as f64);
        }
    }

    #[test]
    fn at_most_one_packet_survives_per_channel(cfg in multi_node()) {
        let r = run(&cfg, &ChannelTrace::bundled()).unwrap();
        let mut delivered: BTreeMap<(usize, u64, usize, u32), u32> = BTreeMap::new();
        for e in r.events.iter().filter(|e| e.delivered) {
            let phase = cfg.nodes[e.node].phase;
            *delivered.entry((e.slot, e.freq_mhz.to_bits(), e.gateway, phase)).or_default() += 1;
        }
        prop_assert!(delivered.values().all(|&n| n == 1));
    }

    #[test]
    fn sensing_avoids_crowded_channels(n in 2usize..6, seed in any::<u64>()) {
        let nodes = (0..n).map(|_| node("A", Hop::SensingHop)).collect();
        let cfg = SimConfig { nodes, seed, packets_per_size: 5, ..SimConfig::single("A", Hop::SensingHop) };
        let trace = ChannelTrace::bundled();
        let r = run(&cfg, &trace).unwrap();
        // rebuild what each node saw after the previous slot
        let freqs = trace.frequencies();
        let slots = cfg.total_slots();
        let mut used = vec![vec![0u32; freqs.len()]; slots];
        for e in &r.events {
            used[e.slot][freqs.iter().position(|&f| f == e.freq_mhz).unwrap()] += 1;
        }
        for e in r.events.iter().filter(|e| e.slot > 0) {
            let seen = &used[e.slot - 1];
            let k = freqs.iter().position(|&f| f == e.freq_mhz).unwrap();
            if seen.iter().any(|&d| d <= 1) {
                prop_assert!(seen[k] < 2, "slot {} picked a crowded channel: {:?}", e.slot, seen);
            }
        }
    }
}
