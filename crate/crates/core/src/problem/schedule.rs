use serde::{Deserialize, Serialize};

use super::{Dims, ProblemError, Scenario};

/// Decision variables of the channel-hopping problem.
///
/// * `x[i,g,f,t]`: node `i` sends to gateway `g` on carrier `f` in slot `t`.
/// * `s[i,g,f,t]`: symbols sent on that cell.
/// * `z[i,t]`: node `i` hopped between slot `t-1` and `t` (`t = 0` is always 0).
/// * `delta[g,f,t]`: carrier `f` at gateway `g` was contended in slot `t-1`.
///
/// All tensors are stored flat in row-major order of their indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub dims: Dims,
    pub x: Vec<bool>,
    pub s: Vec<u32>,
    pub z: Vec<bool>,
    pub delta: Vec<bool>,
}

impl Schedule {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            x: vec![false; dims.cells()],
            s: vec![0; dims.cells()],
            z: vec![false; dims.nodes * dims.slots],
            delta: vec![false; dims.channels()],
        }
    }

    /// Builds a schedule from `x` and `s`, deriving `z` and `delta`.
    pub fn from_assignment(dims: Dims, x: Vec<bool>, s: Vec<u32>) -> Result<Self, ProblemError> {
        if x.len() != dims.cells() || s.len() != dims.cells() {
            return Err(ProblemError::Dimension(format!(
                "x/s tensors have {}/{} cells, expected {}",
                x.len(),
                s.len(),
                dims.cells()
            )));
        }
        let mut sched = Self {
            dims,
            x,
            s,
            z: vec![false; dims.nodes * dims.slots],
            delta: vec![false; dims.channels()],
        };
        sched.derive_auxiliary();
        Ok(sched)
    }

    #[inline]
    pub fn x(&self, node: usize, gateway: usize, freq: usize, slot: usize) -> bool {
        self.x[self.dims.cell(node, gateway, freq, slot)]
    }

    #[inline]
    pub fn s(&self, node: usize, gateway: usize, freq: usize, slot: usize) -> u32 {
        self.s[self.dims.cell(node, gateway, freq, slot)]
    }

    #[inline]
    pub fn z(&self, node: usize, slot: usize) -> bool {
        self.z[node * self.dims.slots + slot]
    }

    #[inline]
    pub fn delta(&self, gateway: usize, freq: usize, slot: usize) -> bool {
        self.delta[self.dims.channel(gateway, freq, slot)]
    }

    /// Sets a transmission, keeping `s` zero on inactive cells.
    pub fn set(&mut self, node: usize, gateway: usize, freq: usize, slot: usize, symbols: u32) {
        let c = self.dims.cell(node, gateway, freq, slot);
        self.x[c] = symbols > 0;
        self.s[c] = symbols;
    }

    pub fn set_z(&mut self, node: usize, slot: usize, value: bool) {
        let k = node * self.dims.slots + slot;
        self.z[k] = value;
    }

    /// Number of nodes on `(gateway, freq)` in `slot`.
    pub fn occupancy(&self, gateway: usize, freq: usize, slot: usize) -> usize {
        (0..self.dims.nodes)
            .filter(|&i| self.x(i, gateway, freq, slot))
            .count()
    }

    /// Whether node `i` uses a different set of `(gateway, freq)` pairs in
    /// `slot` than in `slot - 1`.
    pub fn channel_set_changed(&self, node: usize, slot: usize) -> bool {
        if slot == 0 {
            return false;
        }
        let d = self.dims;
        (0..d.gateways).any(|g| {
            (0..d.frequencies).any(|f| self.x(node, g, f, slot) != self.x(node, g, f, slot - 1))
        })
    }

    /// Recomputes `z` (hop iff the active set changed) and `delta`
    /// (contention in the previous slot) from `x`.
    pub fn derive_auxiliary(&mut self) {
        let d = self.dims;
        for i in 0..d.nodes {
            for t in 0..d.slots {
                let hop = self.channel_set_changed(i, t);
                self.z[i * d.slots + t] = hop;
            }
        }
        for g in 0..d.gateways {
            for f in 0..d.frequencies {
                for t in 0..d.slots {
                    let trig = t > 0 && self.occupancy(g, f, t - 1) >= 2;
                    self.delta[d.channel(g, f, t)] = trig;
                }
            }
        }
    }

    /// Structural check against the owning scenario.
    pub fn conforms(&self, scenario: &Scenario) -> Result<(), ProblemError> {
        let want = scenario.dims();
        if self.dims != want {
            return Err(ProblemError::Dimension(format!(
                "schedule dims {:?} do not match scenario dims {:?}",
                self.dims, want
            )));
        }
        let d = self.dims;
        if self.x.len() != d.cells()
            || self.s.len() != d.cells()
            || self.z.len() != d.nodes * d.slots
            || self.delta.len() != d.channels()
        {
            return Err(ProblemError::Dimension(
                "schedule tensor lengths disagree with its dims".into(),
            ));
        }
        Ok(())
    }
}
