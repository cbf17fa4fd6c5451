use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ProblemError, Scenario, Schedule};

/// The eight constraint families a schedule must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// At most one carrier per (node, gateway, slot); exactly one on
    /// mandatory slots.
    SingleFrequency,
    /// Distinct carriers in use at a gateway within its channel count.
    GatewayCapacity,
    /// Symbols on a (gateway, carrier, slot) within the carrier budget.
    FrequencyCapacity,
    /// Each active cell carries between `min_symbols` and the carrier budget.
    SymbolBounds,
    /// Each node delivers exactly its demand.
    DemandFulfilment,
    /// A carrier contended in slot `t-1` holds exactly one node in slot `t`.
    CollisionHop,
    /// A changed channel set must be flagged as a hop.
    HopTrigger,
    /// A hop flag needs an actual channel-set change.
    HopBound,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 8] = [
        ConstraintFamily::SingleFrequency,
        ConstraintFamily::GatewayCapacity,
        ConstraintFamily::FrequencyCapacity,
        ConstraintFamily::SymbolBounds,
        ConstraintFamily::DemandFulfilment,
        ConstraintFamily::CollisionHop,
        ConstraintFamily::HopTrigger,
        ConstraintFamily::HopBound,
    ];
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstraintFamily::SingleFrequency => "single-frequency",
            ConstraintFamily::GatewayCapacity => "gateway-capacity",
            ConstraintFamily::FrequencyCapacity => "frequency-capacity",
            ConstraintFamily::SymbolBounds => "symbol-bounds",
            ConstraintFamily::DemandFulfilment => "demand-fulfilment",
            ConstraintFamily::CollisionHop => "collision-hop",
            ConstraintFamily::HopTrigger => "hop-trigger",
            ConstraintFamily::HopBound => "hop-bound",
        };
        f.write_str(name)
    }
}

/// Offending indices; fields that do not apply to a family are `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationSite {
    pub node: Option<usize>,
    pub gateway: Option<usize>,
    pub frequency: Option<usize>,
    pub slot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintFamily,
    pub site: ViolationSite,
    pub detail: String,
}

/// Ordered-pair collision count: for every (gateway, carrier, slot) with
/// `k` transmitters, contributes `k * (k - 1)`.
pub fn collision_count(scenario: &Scenario, schedule: &Schedule) -> Result<u64, ProblemError> {
    schedule.conforms(scenario)?;
    let d = schedule.dims;
    let mut total = 0u64;
    for g in 0..d.gateways {
        for f in 0..d.frequencies {
            for t in 0..d.slots {
                let k = schedule.occupancy(g, f, t) as u64;
                total += k * k.saturating_sub(1);
            }
        }
    }
    Ok(total)
}

/// Sum of hop indicators over slots `1..T`.
pub fn hop_count(scenario: &Scenario, schedule: &Schedule) -> Result<u64, ProblemError> {
    schedule.conforms(scenario)?;
    let d = schedule.dims;
    let mut total = 0u64;
    for i in 0..d.nodes {
        for t in 1..d.slots {
            total += u64::from(schedule.z(i, t));
        }
    }
    Ok(total)
}

/// Weighted objective `alpha * collisions + beta * hops`.
pub fn objective(
    scenario: &Scenario,
    schedule: &Schedule,
    alpha: f64,
    beta: f64,
) -> Result<f64, ProblemError> {
    check_weights(alpha, beta)?;
    let c = collision_count(scenario, schedule)?;
    let h = hop_count(scenario, schedule)?;
    Ok(alpha * c as f64 + beta * h as f64)
}

pub(crate) fn check_weights(alpha: f64, beta: f64) -> Result<(), ProblemError> {
    if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
        return Err(ProblemError::InvalidWeights { alpha, beta });
    }
    Ok(())
}

/// Lists every violated constraint. An empty list means the schedule is
/// feasible for the scenario.
pub fn validate(scenario: &Scenario, schedule: &Schedule) -> Result<Vec<Violation>, ProblemError> {
    schedule.conforms(scenario)?;
    let d = schedule.dims;
    let mut out = Vec::new();
    let mut push = |constraint, site: ViolationSite, detail: String| {
        out.push(Violation {
            constraint,
            site,
            detail,
        })
    };

    // one carrier per (node, gateway, slot)
    for i in 0..d.nodes {
        for g in 0..d.gateways {
            for t in 0..d.slots {
                let used = (0..d.frequencies).filter(|&f| schedule.x(i, g, f, t)).count();
                let required = scenario.requires(i, t);
                if used > 1 || (required && used != 1) {
                    push(
                        ConstraintFamily::SingleFrequency,
                        ViolationSite {
                            node: Some(i),
                            gateway: Some(g),
                            slot: Some(t),
                            ..Default::default()
                        },
                        format!(
                            "{used} carriers in use{}",
                            if required { " on a mandatory slot" } else { "" }
                        ),
                    );
                }
            }
        }
    }

    for g in 0..d.gateways {
        for t in 0..d.slots {
            let distinct = (0..d.frequencies)
                .filter(|&f| schedule.occupancy(g, f, t) > 0)
                .count();
            let cap = scenario.gateway_capacity[g] as usize;
            if distinct > cap {
                push(
                    ConstraintFamily::GatewayCapacity,
                    ViolationSite {
                        gateway: Some(g),
                        slot: Some(t),
                        ..Default::default()
                    },
                    format!("{distinct} carriers active, capacity {cap}"),
                );
            }
        }
    }

    for g in 0..d.gateways {
        for f in 0..d.frequencies {
            for t in 0..d.slots {
                let load: u64 = (0..d.nodes).map(|i| u64::from(schedule.s(i, g, f, t))).sum();
                let cap = u64::from(scenario.freq_capacity[f]);
                if load > cap {
                    push(
                        ConstraintFamily::FrequencyCapacity,
                        ViolationSite {
                            gateway: Some(g),
                            frequency: Some(f),
                            slot: Some(t),
                            ..Default::default()
                        },
                        format!("{load} symbols, capacity {cap}"),
                    );
                }
            }
        }
    }

    for i in 0..d.nodes {
        for g in 0..d.gateways {
            for f in 0..d.frequencies {
                for t in 0..d.slots {
                    let on = schedule.x(i, g, f, t);
                    let sym = schedule.s(i, g, f, t);
                    let cap = scenario.freq_capacity[f];
                    let bad = if on {
                        sym < scenario.min_symbols || sym > cap
                    } else {
                        sym != 0
                    };
                    if bad {
                        push(
                            ConstraintFamily::SymbolBounds,
                            ViolationSite {
                                node: Some(i),
                                gateway: Some(g),
                                frequency: Some(f),
                                slot: Some(t),
                            },
                            if on {
                                format!(
                                    "{sym} symbols outside [{}, {cap}]",
                                    scenario.min_symbols
                                )
                            } else {
                                format!("{sym} symbols on an inactive cell")
                            },
                        );
                    }
                }
            }
        }
    }

    for i in 0..d.nodes {
        let mut sent = 0u64;
        for g in 0..d.gateways {
            for f in 0..d.frequencies {
                for t in 0..d.slots {
                    if schedule.x(i, g, f, t) {
                        sent += u64::from(schedule.s(i, g, f, t));
                    }
                }
            }
        }
        let want = u64::from(scenario.demand[i]);
        if sent != want {
            push(
                ConstraintFamily::DemandFulfilment,
                ViolationSite {
                    node: Some(i),
                    ..Default::default()
                },
                format!("delivers {sent} symbols, demand {want}"),
            );
        }
    }

    for g in 0..d.gateways {
        for f in 0..d.frequencies {
            for t in 0..d.slots {
                let triggered = t > 0 && schedule.occupancy(g, f, t - 1) >= 2;
                let site = ViolationSite {
                    gateway: Some(g),
                    frequency: Some(f),
                    slot: Some(t),
                    ..Default::default()
                };
                if triggered {
                    let now = schedule.occupancy(g, f, t);
                    if now != 1 {
                        push(
                            ConstraintFamily::CollisionHop,
                            site.clone(),
                            format!("contended in the previous slot, {now} nodes remain"),
                        );
                    }
                }
                if schedule.delta(g, f, t) != triggered {
                    push(
                        ConstraintFamily::CollisionHop,
                        site,
                        format!("delta flag {} disagrees with contention", schedule.delta(g, f, t)),
                    );
                }
            }
        }
    }

    for i in 0..d.nodes {
        for t in 0..d.slots {
            let changed = schedule.channel_set_changed(i, t);
            let flagged = schedule.z(i, t);
            let site = ViolationSite {
                node: Some(i),
                slot: Some(t),
                ..Default::default()
            };
            if changed && !flagged {
                push(
                    ConstraintFamily::HopTrigger,
                    site,
                    "channel set changed without a hop flag".into(),
                );
            } else if flagged && !changed {
                push(
                    ConstraintFamily::HopBound,
                    site,
                    "hop flagged but channel set unchanged".into(),
                );
            }
        }
    }

    Ok(out)
}
