//! Exhaustive optimum for small queues, and an independent trace checker.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{DiskGeometry, GeometryError, MemoryRequest, PhysicalAddress};
use crate::metrics::{self, rotational_delta, transfer_cost, MetricsTotals, PathPoint, ServiceStep};
use crate::workload::Scenario;

/// Largest queue [`optimal_order`] accepts by default (9! orders).
pub const DEFAULT_MAX_REQUESTS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{requests} requests exceed the oracle cap of {max} ({requests}! orders); trim the queue or raise the cap explicitly")]
    TooLarge { requests: usize, max: usize },
    #[error("the oracle only handles fault-free scenarios")]
    Faulty,
    #[error("scenario has no requests")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Request indices in service order.
    pub best_order: Vec<usize>,
    pub best_totals: MetricsTotals,
    pub orders_examined: u64,
}

pub fn optimal_order(scenario: &Scenario) -> Result<OracleResult, OracleError> {
    optimal_order_capped(scenario, DEFAULT_MAX_REQUESTS)
}

/// Minimum total access time over every permutation of the queue. Equal
/// totals resolve to the lexicographically smallest order.
pub fn optimal_order_capped(scenario: &Scenario, max_requests: usize) -> Result<OracleResult, OracleError> {
    let n = scenario.requests.len();
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > max_requests {
        return Err(OracleError::TooLarge { requests: n, max: max_requests });
    }
    if !scenario.faults.is_empty() {
        return Err(OracleError::Faulty);
    }
    scenario.validate()?;

    // cost[from][to]; row n is the initial head.
    let g = &scenario.geometry;
    let mut points: Vec<PhysicalAddress> = scenario.requests.iter().map(|r| r.address).collect();
    points.push(scenario.initial_head);
    let cost: Vec<Vec<u64>> = points
        .iter()
        .map(|&from| points[..n].iter().map(|&to| step_cost(g, from, to)).collect())
        .collect();

    let best = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut search = Search { cost: &cost, n, order: vec![first], used: vec![false; n], best: None };
            search.used[first] = true;
            search.descend(cost[n][first]);
            search.best.expect("at least one completion")
        })
        .reduce_with(|a, b| if (b.0, &b.1) < (a.0, &a.1) { b } else { a })
        .expect("n >= 1");

    let order: Vec<PhysicalAddress> = best.1.iter().map(|&i| scenario.requests[i].address).collect();
    let steps = metrics::replay(g, scenario.initial_head, &order)?;
    let best_totals = metrics::totals(&steps, n).map_err(|_| OracleError::Empty)?;
    debug_assert_eq!(best_totals.tdat, best.0);
    Ok(OracleResult { best_order: best.1, best_totals, orders_examined: (1..=n as u64).product() })
}

fn step_cost(g: &DiskGeometry, from: PhysicalAddress, to: PhysicalAddress) -> u64 {
    u64::from(from.track.abs_diff(to.track))
        + u64::from(rotational_delta(from.sector, to.sector, g.sectors_per_track))
        + u64::from(transfer_cost(from.platter, to.platter))
}

struct Search<'a> {
    cost: &'a [Vec<u64>],
    n: usize,
    order: Vec<usize>,
    used: Vec<bool>,
    best: Option<(u64, Vec<usize>)>,
}

impl Search<'_> {
    // Visits completions in lexicographic order, so keeping only strict
    // improvements leaves the smallest order among equal totals.
    fn descend(&mut self, so_far: u64) {
        if self.order.len() == self.n {
            if self.best.as_ref().is_none_or(|(b, _)| so_far < *b) {
                self.best = Some((so_far, self.order.clone()));
            }
            return;
        }
        let last = *self.order.last().expect("non-empty");
        for next in 0..self.n {
            if self.used[next] {
                continue;
            }
            self.used[next] = true;
            self.order.push(next);
            self.descend(so_far + self.cost[last][next]);
            self.order.pop();
            self.used[next] = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    StepCost { step: usize, field: &'static str, recorded: u32, recomputed: u32 },
    AccessSum { step: usize },
    LatencyBound { step: usize, latency: u32, max: u32 },
    TransferBound { step: usize },
    Totals { field: &'static str, recorded: u64, recomputed: u64 },
    /// A request was never visited.
    Missing(PhysicalAddress),
    /// A visit to an address nobody requested.
    Unexpected(PhysicalAddress),
    Geometry(String),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::StepCost { step, field, recorded, recomputed } => {
                write!(f, "step {step}: {field} recorded {recorded}, recomputed {recomputed}")
            }
            Violation::AccessSum { step } => write!(f, "step {step}: access != seek + latency + transfer"),
            Violation::LatencyBound { step, latency, max } => {
                write!(f, "step {step}: latency {latency} exceeds {max}")
            }
            Violation::TransferBound { step } => write!(f, "step {step}: transfer below 1"),
            Violation::Totals { field, recorded, recomputed } => {
                write!(f, "totals: {field} recorded {recorded}, recomputed {recomputed}")
            }
            Violation::Missing(a) => write!(f, "request {a} never visited"),
            Violation::Unexpected(a) => write!(f, "visit to unrequested {a}"),
            Violation::Geometry(e) => write!(f, "geometry: {e}"),
        }
    }
}

/// Re-prices `trace` from scratch and checks it against `totals` and the
/// request list. Every request must be visited at least as many times as it
/// appears in `requests` (retries may add visits), and nothing else may be
/// visited. An empty result means the trace is consistent.
pub fn verify_trace(
    geometry: &DiskGeometry,
    initial_head: PhysicalAddress,
    requests: &[MemoryRequest],
    trace: &[ServiceStep],
    totals: &MetricsTotals,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(trace.len());
    for s in trace {
        path.extend(s.via.iter().map(|&t| PathPoint::PassThrough(t)));
        path.push(PathPoint::Service(s.address));
    }
    let repriced = match metrics::replay_path(geometry, initial_head, &path) {
        Ok(steps) => steps,
        Err(e) => return vec![Violation::Geometry(e.to_string())],
    };
    let max_latency = geometry.sectors_per_track - 1;
    for (i, (s, r)) in trace.iter().zip(&repriced).enumerate() {
        let step = i + 1;
        for (field, recorded, recomputed) in [
            ("seek", s.seek, r.seek),
            ("latency", s.latency, r.latency),
            ("transfer", s.transfer, r.transfer),
            ("access", s.access, r.access),
        ] {
            if recorded != recomputed {
                out.push(Violation::StepCost { step, field, recorded, recomputed });
            }
        }
        if s.access != s.seek + s.latency + s.transfer {
            out.push(Violation::AccessSum { step });
        }
        if s.latency > max_latency {
            out.push(Violation::LatencyBound { step, latency: s.latency, max: max_latency });
        }
        if s.transfer < 1 {
            out.push(Violation::TransferBound { step });
        }
    }

    let sum = |f: fn(&ServiceStep) -> u32| repriced.iter().map(|s| u64::from(f(s))).sum::<u64>();
    let (tskt, trl, tdtt) = (sum(|s| s.seek), sum(|s| s.latency), sum(|s| s.transfer));
    for (field, recorded, recomputed) in [
        ("tskt", totals.tskt, tskt),
        ("trl", totals.trl, trl),
        ("tdtt", totals.tdtt, tdtt),
        ("tdat", totals.tdat, tskt + trl + tdtt),
        ("steps", totals.steps as u64, repriced.len() as u64),
    ] {
        if recorded != recomputed {
            out.push(Violation::Totals { field, recorded, recomputed });
        }
    }
    if totals.tdat != totals.tskt + totals.trl + totals.tdtt {
        out.push(Violation::Totals { field: "identity", recorded: totals.tdat, recomputed: totals.tskt + totals.trl + totals.tdtt });
    }

    let mut wanted: BTreeMap<PhysicalAddress, usize> = BTreeMap::new();
    for r in requests {
        *wanted.entry(r.address).or_default() += 1;
    }
    let mut seen: BTreeMap<PhysicalAddress, usize> = BTreeMap::new();
    for s in trace {
        *seen.entry(s.address).or_default() += 1;
    }
    for (a, &count) in &wanted {
        if seen.get(a).copied().unwrap_or(0) < count {
            out.push(Violation::Missing(*a));
        }
    }
    for a in seen.keys() {
        if !wanted.contains_key(a) {
            out.push(Violation::Unexpected(*a));
        }
    }
    out
}
