//! Exhaustive enumeration of every `(x, s)` pair. Slow by construction and
//! meant as ground truth in tests; it shares nothing with the solver except
//! the scoring and validation functions of [`crate::problem`].

use super::{SolveError, SolveResult};
use crate::problem::{self, check_weights, ConstraintFamily, Scenario, Schedule};

pub const DEFAULT_STATE_CAP: u64 = 10_000_000;

/// Exact number of `(x, s)` combinations the oracle would visit in the
/// worst case: every (node, gateway, slot) cell is idle or picks a carrier
/// together with one admissible symbol count.
pub fn state_count(scenario: &Scenario) -> f64 {
    let d = scenario.dims();
    let per_cell: f64 = 1.0
        + scenario
            .freq_capacity
            .iter()
            .map(|&cap| f64::from(cap.saturating_sub(scenario.min_symbols) + 1))
            .sum::<f64>();
    per_cell.powi((d.nodes * d.gateways * d.slots) as i32)
}

pub fn enumerate_oracle(
    scenario: &Scenario,
    alpha: f64,
    beta: f64,
) -> Result<SolveResult, SolveError> {
    enumerate_oracle_with_cap(scenario, alpha, beta, DEFAULT_STATE_CAP)
}

pub fn enumerate_oracle_with_cap(
    scenario: &Scenario,
    alpha: f64,
    beta: f64,
    cap: u64,
) -> Result<SolveResult, SolveError> {
    scenario.check()?;
    check_weights(alpha, beta)?;
    let estimate = state_count(scenario);
    if estimate > cap as f64 {
        return Err(SolveError::CapExceeded { estimate, cap });
    }
    let d = scenario.dims();
    let cells = d.nodes * d.gateways * d.slots;
    let mut choice = vec![0usize; cells];
    let mut best: Option<(f64, Schedule)> = None;
    let mut visited = 0u64;

    loop {
        let mut x = vec![false; d.cells()];
        let mut s = vec![0u32; d.cells()];
        for i in 0..d.nodes {
            for g in 0..d.gateways {
                for t in 0..d.slots {
                    let c = choice[(i * d.gateways + g) * d.slots + t];
                    if c > 0 {
                        let k = d.cell(i, g, c - 1, t);
                        x[k] = true;
                        s[k] = scenario.min_symbols;
                    }
                }
            }
        }
        let probe = Schedule::from_assignment(d, x, s)?;
        let value = problem::objective(scenario, &probe, alpha, beta)?;
        let improves = match &best {
            None => true,
            Some((v, sched)) => value < *v || (value == *v && probe.x < sched.x),
        };
        if improves && x_admissible(scenario, &probe)? {
            if let Some(found) = search_symbols(scenario, probe, &mut visited)? {
                best = Some((value, found));
            }
        } else {
            visited += 1;
        }

        let mut k = cells;
        loop {
            if k == 0 {
                return match best {
                    Some((objective_value, schedule)) => Ok(SolveResult {
                        schedule,
                        objective_value,
                        nodes_explored: visited,
                        proven_optimal: true,
                    }),
                    None => Err(SolveError::Infeasible {
                        family: ConstraintFamily::DemandFulfilment,
                        detail: "no (x, s) combination satisfies every constraint".into(),
                    }),
                };
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

/// Rules out `x` patterns whose violations no symbol choice can repair.
fn x_admissible(scenario: &Scenario, probe: &Schedule) -> Result<bool, SolveError> {
    Ok(problem::validate(scenario, probe)?.iter().all(|v| {
        matches!(
            v.constraint,
            ConstraintFamily::FrequencyCapacity
                | ConstraintFamily::SymbolBounds
                | ConstraintFamily::DemandFulfilment
        )
    }))
}

fn search_symbols(
    scenario: &Scenario,
    mut sched: Schedule,
    visited: &mut u64,
) -> Result<Option<Schedule>, SolveError> {
    let active: Vec<usize> = (0..sched.x.len()).filter(|&k| sched.x[k]).collect();
    let d = sched.dims;
    let cap_of = |k: usize| scenario.freq_capacity[(k / d.slots) % d.frequencies];
    for &k in &active {
        sched.s[k] = scenario.min_symbols;
    }
    loop {
        *visited += 1;
        if problem::validate(scenario, &sched)?.is_empty() {
            return Ok(Some(sched));
        }
        let mut j = active.len();
        loop {
            if j == 0 {
                return Ok(None);
            }
            j -= 1;
            let k = active[j];
            sched.s[k] += 1;
            if sched.s[k] <= cap_of(k) {
                break;
            }
            sched.s[k] = scenario.min_symbols;
        }
    }
}
