use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SimError;

/// One packet attempt as seen by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotEvent {
    pub slot: usize,
    pub node: usize,
    pub gateway: usize,
    pub freq_mhz: f64,
    pub size: u32,
    pub rssi: f64,
    pub snr: f64,
    pub delivered: bool,
    pub collided: bool,
    pub hopped: bool,
}

/// Outcome counters for one node at one payload size.
///
/// `mean_rssi`/`mean_snr` average the delivered packets only. The `link_*`
/// means average every attempt, charging lost packets with the floor
/// values a node records when it hears nothing back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSizeStats {
    pub node: usize,
    pub source: String,
    pub strategy: String,
    pub size: u32,
    pub sent: u64,
    pub delivered: u64,
    pub lost: u64,
    pub collisions: u64,
    pub hops: u64,
    pub pdr: f64,
    pub mean_rssi: Option<f64>,
    pub mean_snr: Option<f64>,
    pub link_rssi: f64,
    pub link_snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub frequencies: Vec<f64>,
    pub payload_sizes: Vec<u32>,
    pub stats: Vec<NodeSizeStats>,
    pub events: Vec<SlotEvent>,
}

impl SimReport {
    pub fn stats_for(&self, node: usize, size: u32) -> Option<&NodeSizeStats> {
        self.stats.iter().find(|s| s.node == node && s.size == size)
    }

    /// Totals over all nodes at one payload size.
    pub fn size_summary(&self, size: u32) -> Option<SizeSummary> {
        let rows: Vec<_> = self.stats.iter().filter(|s| s.size == size).collect();
        let sent: u64 = rows.iter().map(|s| s.sent).sum();
        if sent == 0 {
            return None;
        }
        let delivered: u64 = rows.iter().map(|s| s.delivered).sum();
        let weighted = |f: fn(&NodeSizeStats) -> f64| {
            if rows.len() == 1 {
                f(rows[0])
            } else {
                rows.iter().map(|s| f(s) * s.sent as f64).sum::<f64>() / sent as f64
            }
        };
        Some(SizeSummary {
            size,
            sent,
            delivered,
            pdr: delivered as f64 / sent as f64,
            link_rssi: weighted(|s| s.link_rssi),
            link_snr: weighted(|s| s.link_snr),
        })
    }

    pub fn write_events_csv(&self, out: impl Write) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.events {
            w.serialize(e).map_err(|e| SimError::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| SimError::Output(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: u32,
    pub sent: u64,
    pub delivered: u64,
    pub pdr: f64,
    pub link_rssi: f64,
    pub link_snr: f64,
}

/// Per-size comparison of strategy A against baseline B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeComparison {
    pub size: u32,
    pub rssi_a: f64,
    pub rssi_b: f64,
    pub rssi_improvement_pct: Option<f64>,
    pub snr_a: f64,
    pub snr_b: f64,
    pub snr_improvement_pct: Option<f64>,
    pub pdr_a: f64,
    pub pdr_b: f64,
    pub pdr_delta: f64,
}

/// Relative gain in signal strength, measured on dBm magnitudes: a
/// smaller magnitude is a stronger signal. `None` when the baseline is 0.
pub fn rssi_improvement(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (b.abs() - a.abs()) / b.abs() * 100.0)
}

pub fn snr_improvement(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (a - b) / b.abs() * 100.0)
}

pub fn compare_strategies(a: &SimReport, b: &SimReport) -> Result<Vec<SizeComparison>, SimError> {
    let mut sa = a.payload_sizes.clone();
    let mut sb = b.payload_sizes.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Err(SimError::SizeMismatch {
            a: a.payload_sizes.clone(),
            b: b.payload_sizes.clone(),
        });
    }
    let mut out = Vec::with_capacity(a.payload_sizes.len());
    for &size in &a.payload_sizes {
        let (Some(x), Some(y)) = (a.size_summary(size), b.size_summary(size)) else {
            return Err(SimError::SizeMismatch {
                a: a.payload_sizes.clone(),
                b: b.payload_sizes.clone(),
            });
        };
        out.push(SizeComparison {
            size,
            rssi_a: x.link_rssi,
            rssi_b: y.link_rssi,
            rssi_improvement_pct: rssi_improvement(x.link_rssi, y.link_rssi),
            snr_a: x.link_snr,
            snr_b: y.link_snr,
            snr_improvement_pct: snr_improvement(x.link_snr, y.link_snr),
            pdr_a: x.pdr,
            pdr_b: y.pdr,
            pdr_delta: x.pdr - y.pdr,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(size: u32, rssi: f64, snr: f64, delivered: u64) -> SimReport {
        SimReport {
            seed: 0,
            frequencies: vec![868.0],
            payload_sizes: vec![size],
            stats: vec![NodeSizeStats {
                node: 0,
                source: "A".into(),
                strategy: "fixed".into(),
                size,
                sent: 10,
                delivered,
                lost: 10 - delivered,
                collisions: 0,
                hops: 0,
                pdr: delivered as f64 / 10.0,
                mean_rssi: Some(rssi),
                mean_snr: Some(snr),
                link_rssi: rssi,
                link_snr: snr,
            }],
            events: vec![],
        }
    }

    #[test]
    fn identical_reports_show_no_improvement() {
        let r = report(30, -80.0, 7.0, 9);
        let t = compare_strategies(&r, &r).unwrap();
        assert_eq!(t[0].rssi_improvement_pct, Some(0.0));
        assert_eq!(t[0].snr_improvement_pct, Some(0.0));
        assert_eq!(t[0].pdr_delta, 0.0);
    }

    #[test]
    fn improvement_formulas() {
        let r = rssi_improvement(-40.0, -108.0).unwrap();
        assert!((r - 62.96).abs() < 0.01, "{r}");
        let s = snr_improvement(9.4, 6.5).unwrap();
        assert!((s - 44.615).abs() < 0.01, "{s}");
        let t = compare_strategies(&report(30, -40.0, 9.4, 10), &report(30, -108.0, 6.5, 5)).unwrap();
        assert_eq!(t[0].rssi_improvement_pct, Some(r));
        assert_eq!(t[0].pdr_delta, 0.5);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let err = compare_strategies(&report(30, -40.0, 9.0, 10), &report(74, -40.0, 9.0, 10));
        assert!(matches!(err, Err(SimError::SizeMismatch { .. })));
    }

    #[test]
    fn event_csv_has_expected_header() {
        let mut r = report(30, -40.0, 9.0, 10);
        r.events.push(SlotEvent {
            slot: 0,
            node: 0,
            gateway: 0,
            freq_mhz: 868.0,
            size: 30,
            rssi: -40.5,
            snr: 9.0,
            delivered: true,
            collided: false,
            hopped: false,
        });
        let mut buf = Vec::new();
        r.write_events_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("slot,node,gateway,freq_mhz,size,rssi,snr,delivered,collided,hopped\n"));
    }
}
