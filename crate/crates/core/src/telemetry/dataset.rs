use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{feature_len, TelemetryError};
use crate::sim::{argmax_lowest, resolve_policies, ChannelTrace, SimConfig, Simulator};

pub const DEFAULT_ROWS: usize = 5000;
/// Tag for the feature scaling used by [`super::TelemetryWindow::snapshot`].
pub const NORMALIZATION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub window_slots: usize,
    pub channels: usize,
    pub rows: Vec<DatasetRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    ts: usize,
    #[serde(rename = "F")]
    channels: usize,
    normalization: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Item {
    Header(Header),
    Row(DatasetRow),
}

impl Dataset {
    pub fn input_dim(&self) -> usize {
        feature_len(self.window_slots, self.channels)
    }

    pub fn check(&self) -> Result<(), TelemetryError> {
        let dim = self.input_dim();
        for (k, r) in self.rows.iter().enumerate() {
            if r.features.len() != dim {
                return Err(TelemetryError::InvalidDataset(format!(
                    "row {k}: {} features, expected {dim}",
                    r.features.len()
                )));
            }
            if r.label >= self.channels {
                return Err(TelemetryError::InvalidDataset(format!(
                    "row {k}: label {} out of range for {} channels",
                    r.label, self.channels
                )));
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(TelemetryError::InvalidDataset(format!("row {k}: non-finite feature")));
            }
        }
        Ok(())
    }

    /// JSON array: a header object `{ts, F, normalization}` followed by one
    /// `{features, label}` object per row.
    pub fn to_json(&self) -> Result<String, TelemetryError> {
        let mut items = Vec::with_capacity(self.rows.len() + 1);
        items.push(Item::Header(Header {
            ts: self.window_slots,
            channels: self.channels,
            normalization: NORMALIZATION.into(),
        }));
        items.extend(self.rows.iter().cloned().map(Item::Row));
        Ok(serde_json::to_string(&items)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TelemetryError> {
        let items: Vec<Item> = serde_json::from_str(text)?;
        let mut it = items.into_iter();
        let Some(Item::Header(h)) = it.next() else {
            return Err(TelemetryError::InvalidDataset("first element must be the header".into()));
        };
        if h.normalization != NORMALIZATION {
            return Err(TelemetryError::InvalidDataset(format!(
                "unsupported normalization {:?}",
                h.normalization
            )));
        }
        let rows = it
            .map(|item| match item {
                Item::Row(r) => Ok(r),
                Item::Header(_) => Err(TelemetryError::InvalidDataset("header repeated".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ds = Self { window_slots: h.ts, channels: h.channels, rows };
        ds.check()?;
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TelemetryError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| TelemetryError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TelemetryError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TelemetryError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }
}

/// Replays the configured strategies and, before every transmission,
/// probes each carrier from the same state; the row is labelled with the
/// carrier giving the highest realized RSSI (a lost packet counts as no
/// signal, ties go to the lower index). Episodes are repeated with
/// successive seeds until `n_rows` rows exist; nodes contribute rows in
/// turn.
pub fn generate_labeled_dataset(
    trace: &ChannelTrace,
    config: &SimConfig,
    n_rows: usize,
    seed: u64,
) -> Result<Dataset, TelemetryError> {
    if n_rows == 0 {
        return Err(TelemetryError::NoRows);
    }
    let policies = resolve_policies(config, trace)?;
    let channels = trace.frequencies().len();
    let mut rows = Vec::with_capacity(n_rows);
    let mut episode = 0u64;
    while rows.len() < n_rows {
        let cfg = SimConfig { seed: seed.wrapping_add(episode), ..config.clone() };
        let mut sim = Simulator::new(&cfg, trace, policies.clone())?;
        while !sim.is_finished() && rows.len() < n_rows {
            let choices = sim.decide()?;
            for node in 0..sim.num_nodes() {
                if rows.len() == n_rows {
                    break;
                }
                rows.push(DatasetRow {
                    features: sim.window(node).snapshot(),
                    label: argmax_lowest(&sim.realized_rssi(node, &choices)),
                });
            }
            sim.apply(&choices)?;
        }
        episode += 1;
    }
    Ok(Dataset { window_slots: config.window_slots, channels, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Strategy;

    #[test]
    fn json_round_trip_is_lossless() {
        let ds = Dataset {
            window_slots: 1,
            channels: 2,
            rows: vec![
                DatasetRow { features: vec![1.0, 0.0, 0.1 + 0.2, 1.0 / 3.0], label: 1 },
                DatasetRow { features: vec![0.0, 2.0, 0.9, f64::MIN_POSITIVE], label: 0 },
            ],
        };
        let text = ds.to_json().unwrap();
        assert!(text.starts_with(r#"[{"ts":1,"F":2,"normalization":"v1"}"#), "{text}");
        assert_eq!(Dataset::from_json(&text).unwrap(), ds);
    }

    #[test]
    fn bad_label_is_rejected() {
        let text = r#"[{"ts":1,"F":2,"normalization":"v1"},{"features":[0,0,1,0],"label":2}]"#;
        assert!(Dataset::from_json(text).is_err());
    }

    #[test]
    fn zero_rows_is_an_error() {
        let cfg = SimConfig::single("A", Strategy::RandomHop);
        assert!(matches!(
            generate_labeled_dataset(&ChannelTrace::bundled(), &cfg, 0, 1),
            Err(TelemetryError::NoRows)
        ));
    }

    #[test]
    fn requested_row_count_is_met_across_episodes() {
        let cfg = SimConfig::single("B", Strategy::RandomHop);
        let ds = generate_labeled_dataset(&ChannelTrace::bundled(), &cfg, 700, 3).unwrap();
        assert_eq!(ds.rows.len(), 700);
        assert_eq!(ds.channels, 3);
        ds.check().unwrap();
    }
}
