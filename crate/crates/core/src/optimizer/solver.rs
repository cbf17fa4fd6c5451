//! Depth-first branch and bound over per-node trajectories.
//!
//! Each node's trajectory (one carrier or nothing per gateway and slot) is
//! pre-enumerated and filtered by the constraints that involve that node
//! alone. The search places nodes in index order, trying trajectories in
//! ascending order of their `x` bit pattern, so leaves are visited in
//! lexicographic order of the full `x` tensor. With pruning at
//! `bound >= incumbent`, the first optimum found is the lexicographically
//! smallest one.

use std::collections::BTreeMap;

use super::{SolveError, SolveResult};
use crate::problem::{self, check_weights, ConstraintFamily, Dims, Scenario, Schedule};

/// Trajectories per node above this are refused outright.
const MAX_TRAJECTORIES: u64 = 1 << 22;

struct Trajectory {
    /// `x` bits of this node in (gateway, frequency, slot) order.
    bits: Vec<bool>,
    /// Active cells as (gateway, frequency, slot).
    cells: Vec<(usize, usize, usize)>,
    hops: u64,
}

struct Search<'a> {
    scenario: &'a Scenario,
    dims: Dims,
    alpha: f64,
    beta: f64,
    budget: u64,
    candidates: Vec<Vec<Trajectory>>,
    occupancy: Vec<u32>,
    /// distinct carriers in use per (gateway, slot)
    carriers: Vec<u32>,
    chosen: Vec<usize>,
    collisions: u64,
    hops: u64,
    explored: u64,
    exhausted: bool,
    best: Option<(f64, Vec<usize>, Vec<u32>)>,
    rejections: BTreeMap<ConstraintFamily, u64>,
}

/// Exact minimisation of `alpha * collisions + beta * hops`.
///
/// `budget` caps the number of trajectory placements. When it runs out the
/// best schedule found so far is returned with `proven_optimal = false`.
pub fn solve_exact(
    scenario: &Scenario,
    alpha: f64,
    beta: f64,
    budget: u64,
) -> Result<SolveResult, SolveError> {
    scenario.check()?;
    check_weights(alpha, beta)?;
    let dims = scenario.dims();
    precheck(scenario)?;

    let mut rejections = BTreeMap::new();
    let mut candidates = Vec::with_capacity(dims.nodes);
    for node in 0..dims.nodes {
        let list = enumerate_trajectories(scenario, node, &mut rejections)?;
        if list.is_empty() {
            let family = binding(&rejections).unwrap_or(ConstraintFamily::DemandFulfilment);
            return Err(SolveError::Infeasible {
                family,
                detail: format!("node {node} has no trajectory meeting its own constraints"),
            });
        }
        candidates.push(list);
    }

    let mut search = Search {
        scenario,
        dims,
        alpha,
        beta,
        budget,
        candidates,
        occupancy: vec![0; dims.channels()],
        carriers: vec![0; dims.gateways * dims.slots],
        chosen: Vec::with_capacity(dims.nodes),
        collisions: 0,
        hops: 0,
        explored: 0,
        exhausted: false,
        best: None,
        rejections,
    };
    search.descend(0);

    let proven = !search.exhausted;
    let explored = search.explored;
    let Some((_, chosen, symbols)) = search.best.take() else {
        if !proven {
            return Err(SolveError::BudgetExhausted {
                nodes_explored: explored,
            });
        }
        let family = binding(&search.rejections).unwrap_or(ConstraintFamily::DemandFulfilment);
        return Err(SolveError::Infeasible {
            family,
            detail: "search space exhausted without a feasible schedule".into(),
        });
    };

    let schedule = search.build(&chosen, &symbols);
    let objective_value = problem::objective(scenario, &schedule, alpha, beta)?;
    debug_assert!(problem::validate(scenario, &schedule)?.is_empty());
    Ok(SolveResult {
        schedule,
        objective_value,
        nodes_explored: explored,
        proven_optimal: proven,
    })
}

fn binding(rejections: &BTreeMap<ConstraintFamily, u64>) -> Option<ConstraintFamily> {
    rejections
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(f, _)| *f)
}

/// Cheap infeasibility certificates that name the binding family directly.
fn precheck(scenario: &Scenario) -> Result<(), SolveError> {
    let d = scenario.dims();
    let widest = u64::from(scenario.freq_capacity.iter().copied().max().unwrap_or(0));
    let reach = widest * (d.gateways * d.slots) as u64;
    for (i, &want) in scenario.demand.iter().enumerate() {
        let want = u64::from(want);
        if want > reach {
            return Err(SolveError::Infeasible {
                family: ConstraintFamily::DemandFulfilment,
                detail: format!(
                    "node {i} demands {want} symbols but at most {reach} fit in the horizon"
                ),
            });
        }
        let mandatory = (0..d.slots).filter(|&t| scenario.requires(i, t)).count() as u64;
        let floor = mandatory * d.gateways as u64 * u64::from(scenario.min_symbols);
        if floor > want {
            return Err(SolveError::Infeasible {
                family: ConstraintFamily::SymbolBounds,
                detail: format!(
                    "node {i} must send at least {floor} symbols on mandatory slots, demand is {want}"
                ),
            });
        }
    }
    Ok(())
}

fn enumerate_trajectories(
    scenario: &Scenario,
    node: usize,
    rejections: &mut BTreeMap<ConstraintFamily, u64>,
) -> Result<Vec<Trajectory>, SolveError> {
    let d = scenario.dims();
    let cells = d.gateways * d.slots;
    let options = d.frequencies as u64 + 1;
    let total = options.checked_pow(cells as u32).unwrap_or(u64::MAX);
    if total > MAX_TRAJECTORIES {
        return Err(SolveError::TooLarge {
            trajectories: total,
            limit: MAX_TRAJECTORIES,
        });
    }
    let demand = u64::from(scenario.demand[node]);
    let bmin = u64::from(scenario.min_symbols);

    // choice[(g, t)] = 0 (idle) or 1 + carrier index
    let mut choice = vec![0usize; cells];
    let mut out = Vec::new();
    loop {
        let mut ok = true;
        for g in 0..d.gateways {
            for t in 0..d.slots {
                if scenario.requires(node, t) && choice[g * d.slots + t] == 0 {
                    ok = false;
                }
            }
        }
        if ok {
            let active: Vec<(usize, usize, usize)> = (0..d.gateways)
                .flat_map(|g| (0..d.slots).map(move |t| (g, t)))
                .filter_map(|(g, t)| {
                    let c = choice[g * d.slots + t];
                    (c > 0).then(|| (g, c - 1, t))
                })
                .collect();
            let lo = active.len() as u64 * bmin;
            let hi: u64 = active
                .iter()
                .map(|&(_, f, _)| u64::from(scenario.freq_capacity[f]))
                .sum();
            if lo > demand || hi < demand {
                *rejections.entry(ConstraintFamily::DemandFulfilment).or_default() += 1;
            } else {
                out.push(trajectory(d, &choice, active));
            }
        }
        // odometer increment over cells, last cell fastest
        let mut k = cells;
        loop {
            if k == 0 {
                out.sort_by(|a, b| a.bits.cmp(&b.bits));
                return Ok(out);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] <= d.frequencies {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn trajectory(d: Dims, choice: &[usize], cells: Vec<(usize, usize, usize)>) -> Trajectory {
    let mut bits = vec![false; d.gateways * d.frequencies * d.slots];
    for &(g, f, t) in &cells {
        bits[(g * d.frequencies + f) * d.slots + t] = true;
    }
    let mut hops = 0;
    for t in 1..d.slots {
        if (0..d.gateways).any(|g| choice[g * d.slots + t] != choice[g * d.slots + t - 1]) {
            hops += 1;
        }
    }
    Trajectory { bits, cells, hops }
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        self.alpha * self.collisions as f64 + self.beta * self.hops as f64
    }

    fn reject(&mut self, family: ConstraintFamily) {
        *self.rejections.entry(family).or_default() += 1;
    }

    fn descend(&mut self, node: usize) {
        if self.exhausted {
            return;
        }
        if node == self.dims.nodes {
            self.leaf();
            return;
        }
        for k in 0..self.candidates[node].len() {
            if self.explored >= self.budget {
                self.exhausted = true;
                return;
            }
            self.explored += 1;
            if let Some(added) = self.place(node, k) {
                let pruned = matches!(&self.best, Some((inc, _, _)) if self.bound() >= *inc);
                if !pruned {
                    self.chosen.push(k);
                    self.descend(node + 1);
                    self.chosen.pop();
                }
                self.unplace(node, k, added);
                if self.exhausted {
                    return;
                }
            }
        }
    }

    /// Places trajectory `k` of `node`. Returns the collisions it added, or
    /// `None` (with state untouched) when a cross-node constraint breaks.
    fn place(&mut self, node: usize, k: usize) -> Option<u64> {
        let d = self.dims;
        let bmin = self.scenario.min_symbols;
        // check before mutating
        let mut family = None;
        {
            let traj = &self.candidates[node][k];
            for &(g, f, t) in &traj.cells {
                let occ = self.occupancy[d.channel(g, f, t)];
                if (occ + 1) * bmin > self.scenario.freq_capacity[f] {
                    family = Some(ConstraintFamily::FrequencyCapacity);
                    break;
                }
                // at most one carrier per (gateway, slot) in a trajectory
                if occ == 0 && self.carriers[g * d.slots + t] + 1 > self.scenario.gateway_capacity[g] {
                    family = Some(ConstraintFamily::GatewayCapacity);
                    break;
                }
                // a contended carrier must drop to one node in the next slot
                if occ + 1 >= 2 {
                    let prev = t > 0 && self.occupancy[d.channel(g, f, t - 1)] >= 2;
                    let next = t + 1 < d.slots && self.occupancy[d.channel(g, f, t + 1)] >= 2;
                    if prev || next {
                        family = Some(ConstraintFamily::CollisionHop);
                        break;
                    }
                }
            }
        }
        if let Some(f) = family {
            self.reject(f);
            return None;
        }
        let traj = &self.candidates[node][k];
        let mut added = 0;
        for &(g, f, t) in &traj.cells {
            let c = d.channel(g, f, t);
            added += 2 * u64::from(self.occupancy[c]);
            if self.occupancy[c] == 0 {
                self.carriers[g * d.slots + t] += 1;
            }
            self.occupancy[c] += 1;
        }
        self.collisions += added;
        self.hops += traj.hops;
        Some(added)
    }

    fn unplace(&mut self, node: usize, k: usize, added: u64) {
        let d = self.dims;
        let traj = &self.candidates[node][k];
        for &(g, f, t) in &traj.cells {
            let c = d.channel(g, f, t);
            self.occupancy[c] -= 1;
            if self.occupancy[c] == 0 {
                self.carriers[g * d.slots + t] -= 1;
            }
        }
        self.collisions -= added;
        self.hops -= traj.hops;
    }

    fn leaf(&mut self) {
        let d = self.dims;
        for g in 0..d.gateways {
            for f in 0..d.frequencies {
                for t in 1..d.slots {
                    if self.occupancy[d.channel(g, f, t - 1)] >= 2
                        && self.occupancy[d.channel(g, f, t)] != 1
                    {
                        self.reject(ConstraintFamily::CollisionHop);
                        return;
                    }
                }
            }
        }
        match self.assign_symbols() {
            Some(symbols) => {
                let value = self.bound();
                self.best = Some((value, self.chosen.clone(), symbols));
            }
            None => self.reject(ConstraintFamily::DemandFulfilment),
        }
    }

    /// Finds symbol counts meeting every demand exactly within per-carrier
    /// budgets. Values are tried from the largest useful one downwards.
    fn assign_symbols(&self) -> Option<Vec<u32>> {
        let d = self.dims;
        let mut cells: Vec<(usize, usize)> = Vec::new(); // (node, channel index)
        let mut carrier_of = Vec::new();
        for (node, &k) in self.chosen.iter().enumerate() {
            for &(g, f, t) in &self.candidates[node][k].cells {
                cells.push((node, d.channel(g, f, t)));
                carrier_of.push(f);
            }
        }
        let mut residual_channel: Vec<i64> = (0..d.channels())
            .map(|c| {
                let f = (c / d.slots) % d.frequencies;
                i64::from(self.scenario.freq_capacity[f])
            })
            .collect();
        let mut pending_users: Vec<i64> = self.occupancy.iter().map(|&o| i64::from(o)).collect();
        let mut residual_demand: Vec<i64> =
            self.scenario.demand.iter().map(|&v| i64::from(v)).collect();
        let mut remaining_cells = vec![0i64; d.nodes];
        for &(n, _) in &cells {
            remaining_cells[n] += 1;
        }
        let mut out = vec![0u32; cells.len()];
        let ctx = SymbolCtx {
            cells: &cells,
            carrier_of: &carrier_of,
            bmin: i64::from(self.scenario.min_symbols),
            caps: &self.scenario.freq_capacity,
        };
        if ctx.fill(
            0,
            &mut residual_channel,
            &mut pending_users,
            &mut residual_demand,
            &mut remaining_cells,
            &mut out,
        ) {
            Some(out)
        } else {
            None
        }
    }

    fn build(&self, chosen: &[usize], symbols: &[u32]) -> Schedule {
        let mut schedule = Schedule::empty(self.dims);
        let mut k = 0;
        for (node, &choice) in chosen.iter().enumerate() {
            for &(g, f, t) in &self.candidates[node][choice].cells {
                schedule.set(node, g, f, t, symbols[k]);
                k += 1;
            }
        }
        schedule.derive_auxiliary();
        schedule
    }
}

struct SymbolCtx<'a> {
    cells: &'a [(usize, usize)],
    carrier_of: &'a [usize],
    bmin: i64,
    caps: &'a [u32],
}

impl SymbolCtx<'_> {
    fn fill(
        &self,
        idx: usize,
        channel: &mut [i64],
        users: &mut [i64],
        demand: &mut [i64],
        cells_left: &mut [i64],
        out: &mut [u32],
    ) -> bool {
        if idx == self.cells.len() {
            return demand.iter().all(|&r| r == 0);
        }
        let (node, ch) = self.cells[idx];
        let cap = i64::from(self.caps[self.carrier_of[idx]]);
        let after_node = cells_left[node] - 1;
        let after_channel = users[ch] - 1;
        let hi = cap
            .min(channel[ch] - self.bmin * after_channel)
            .min(demand[node] - self.bmin * after_node);
        let lo = if after_node == 0 {
            demand[node]
        } else {
            self.bmin
        };
        if lo < self.bmin {
            return false;
        }
        let mut v = hi;
        while v >= lo {
            channel[ch] -= v;
            users[ch] -= 1;
            demand[node] -= v;
            cells_left[node] -= 1;
            out[idx] = v as u32;
            if self.fill(idx + 1, channel, users, demand, cells_left, out) {
                return true;
            }
            channel[ch] += v;
            users[ch] += 1;
            demand[node] += v;
            cells_left[node] += 1;
            v -= 1;
        }
        false
    }
}
