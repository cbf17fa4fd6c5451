use std::collections::VecDeque;

use super::TelemetryError;

/// Value recorded for RSSI when nothing was heard, also used to pad
/// windows that have not filled up yet.
pub const RSSI_FLOOR_DBM: f64 = -120.0;
pub const SNR_FLOOR_DB: f64 = 0.0;
pub const DEFAULT_WINDOW_SLOTS: usize = 8;

const RSSI_SCALE: f64 = -120.0;
const SNR_SCALE: f64 = 10.0;

/// Length of the feature vector produced by [`TelemetryWindow::snapshot`].
pub fn feature_len(slots: usize, channels: usize) -> usize {
    slots * (channels + 2)
}

/// Fixed-length history of what a node learned from the gateway after each
/// slot: per-channel user counts, and the RSSI/SNR of its own last packet.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryWindow {
    slots: usize,
    channels: usize,
    availability: VecDeque<Vec<u32>>,
    rssi: VecDeque<f64>,
    snr: VecDeque<f64>,
}

impl TelemetryWindow {
    pub fn new(slots: usize, channels: usize) -> Result<Self, TelemetryError> {
        if slots == 0 || channels == 0 {
            return Err(TelemetryError::InvalidShape { slots, channels });
        }
        Ok(Self {
            slots,
            channels,
            availability: VecDeque::with_capacity(slots),
            rssi: VecDeque::with_capacity(slots),
            snr: VecDeque::with_capacity(slots),
        })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.rssi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rssi.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.slots
    }

    pub fn record(&mut self, availability: &[u32], rssi: f64, snr: f64) -> Result<(), TelemetryError> {
        if availability.len() != self.channels {
            return Err(TelemetryError::WrongLength {
                expected: self.channels,
                got: availability.len(),
            });
        }
        if !rssi.is_finite() || !snr.is_finite() {
            return Err(TelemetryError::NonFinite);
        }
        if self.is_full() {
            self.availability.pop_front();
            self.rssi.pop_front();
            self.snr.pop_front();
        }
        self.availability.push_back(availability.to_vec());
        self.rssi.push_back(rssi);
        self.snr.push_back(snr);
        Ok(())
    }

    /// Most recent availability vector, if any.
    pub fn last_availability(&self) -> Option<&[u32]> {
        self.availability.back().map(Vec::as_slice)
    }

    /// Entries oldest first as `(availability, rssi, snr)`.
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64, f64)> + '_ {
        self.availability
            .iter()
            .zip(&self.rssi)
            .zip(&self.snr)
            .map(|((a, &r), &s)| (a.as_slice(), r, s))
    }

    /// Flattened, normalized features: every availability row oldest first,
    /// then the RSSI column divided by -120, then the SNR column divided by
    /// 10. Missing history is padded at the front with (0, -120 dBm, 0 dB).
    pub fn snapshot(&self) -> Vec<f64> {
        let pad = self.slots - self.len();
        let mut out = Vec::with_capacity(feature_len(self.slots, self.channels));
        out.extend(std::iter::repeat_n(0.0, pad * self.channels));
        for row in &self.availability {
            out.extend(row.iter().map(|&d| f64::from(d)));
        }
        out.extend(std::iter::repeat_n(RSSI_FLOOR_DBM / RSSI_SCALE, pad));
        out.extend(self.rssi.iter().map(|r| r / RSSI_SCALE));
        out.extend(std::iter::repeat_n(SNR_FLOOR_DB / SNR_SCALE, pad));
        out.extend(self.snr.iter().map(|s| s / SNR_SCALE));
        out
    }
}
