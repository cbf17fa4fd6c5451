use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;

const BUNDLED: &str = include_str!("../../../../traces/paper_tables.csv");

/// Link statistics measured for one (source, carrier, payload size) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub mean_rssi: f64,
    pub mean_snr: f64,
    pub pdr: f64,
    pub sample_count: u32,
}

#[derive(Debug, Deserialize)]
struct Row {
    source: String,
    freq_mhz: f64,
    size_bytes: u32,
    rssi: f64,
    snr: f64,
    count: u32,
    pdr: f64,
}

/// Complete grid of link measurements over sources × carriers × sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    sources: Vec<String>,
    frequencies: Vec<f64>,
    sizes: Vec<u32>,
    entries: BTreeMap<(String, u64, u32), TraceEntry>,
}

fn freq_key(mhz: f64) -> u64 {
    (mhz * 1000.0).round() as u64
}

impl ChannelTrace {
    /// Measurements shipped with the crate: three end-nodes, carriers
    /// 868/869/870 MHz, payloads 30..250 bytes, 50 packets per cell.
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED.as_bytes()).expect("bundled trace is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, SimError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut entries = BTreeMap::new();
        let mut sources = BTreeSet::new();
        let mut freqs = BTreeSet::new();
        let mut sizes = BTreeSet::new();
        for (k, rec) in rdr.deserialize::<Row>().enumerate() {
            let line = k + 2;
            let row = rec.map_err(|e| SimError::Trace(format!("line {line}: {e}")))?;
            if row.source.is_empty() {
                return Err(SimError::Trace(format!("line {line}: empty source id")));
            }
            if !(0.0..=1.0).contains(&row.pdr) {
                return Err(SimError::Trace(format!("line {line}: pdr {} outside [0, 1]", row.pdr)));
            }
            if !row.rssi.is_finite() || row.rssi > 0.0 {
                return Err(SimError::Trace(format!("line {line}: rssi {} must be <= 0 dBm", row.rssi)));
            }
            if !row.snr.is_finite() || !row.freq_mhz.is_finite() || row.freq_mhz <= 0.0 {
                return Err(SimError::Trace(format!("line {line}: non-finite or non-positive value")));
            }
            let key = (row.source.clone(), freq_key(row.freq_mhz), row.size_bytes);
            let entry = TraceEntry {
                mean_rssi: row.rssi,
                mean_snr: row.snr,
                pdr: row.pdr,
                sample_count: row.count,
            };
            if entries.insert(key, entry).is_some() {
                return Err(SimError::Trace(format!(
                    "line {line}: duplicate cell ({}, {}, {})",
                    row.source, row.freq_mhz, row.size_bytes
                )));
            }
            sources.insert(row.source);
            freqs.insert(freq_key(row.freq_mhz));
            sizes.insert(row.size_bytes);
        }
        if entries.is_empty() {
            return Err(SimError::Trace("trace has no rows".into()));
        }
        for s in &sources {
            for &f in &freqs {
                for &z in &sizes {
                    if !entries.contains_key(&(s.clone(), f, z)) {
                        return Err(SimError::Trace(format!(
                            "missing cell ({s}, {}, {z})",
                            f as f64 / 1000.0
                        )));
                    }
                }
            }
        }
        Ok(Self {
            sources: sources.into_iter().collect(),
            frequencies: freqs.into_iter().map(|f| f as f64 / 1000.0).collect(),
            sizes: sizes.into_iter().collect(),
            entries,
        })
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Carriers in ascending order; a channel index is a position here.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn channel_index(&self, freq_mhz: f64) -> Option<usize> {
        let key = freq_key(freq_mhz);
        self.frequencies.iter().position(|&f| freq_key(f) == key)
    }

    pub fn get(&self, source: &str, freq_mhz: f64, size: u32) -> Option<&TraceEntry> {
        self.entries.get(&(source.to_owned(), freq_key(freq_mhz), size))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64, u32, &TraceEntry)> {
        self.entries
            .iter()
            .map(|((s, f, z), e)| (s.as_str(), *f as f64 / 1000.0, *z, e))
    }
}
