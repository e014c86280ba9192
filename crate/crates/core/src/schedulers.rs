//! Service orders for the six traditional and five referred schedulers, plus
//! the common `simulate` entry point that prices any of the twelve.
//!
//! Schedulers only decide an order; pricing always goes through
//! [`metrics::replay_path`](crate::metrics::replay_path).

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::faults::{AccessOutcome, FaultModel};
use crate::geometry::{GeometryError, TrackId};
use crate::metrics::{self, MetricsTotals, PathPoint, ServiceStep};
use crate::modsbsm::{self, RunResult};
use crate::workload::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fcfs,
    Sstf,
    Scan,
    Cscan,
    Look,
    Clook,
    Odsa,
    Hdsa,
    Rp10,
    Smcc,
    Mrsa,
    Modsbsm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Fcfs,
        Algorithm::Sstf,
        Algorithm::Scan,
        Algorithm::Cscan,
        Algorithm::Look,
        Algorithm::Clook,
        Algorithm::Odsa,
        Algorithm::Hdsa,
        Algorithm::Rp10,
        Algorithm::Smcc,
        Algorithm::Mrsa,
        Algorithm::Modsbsm,
    ];
    pub const TRADITIONAL: [Algorithm; 6] = [
        Algorithm::Fcfs,
        Algorithm::Sstf,
        Algorithm::Scan,
        Algorithm::Cscan,
        Algorithm::Look,
        Algorithm::Clook,
    ];
    pub const REFERRED: [Algorithm; 5] =
        [Algorithm::Odsa, Algorithm::Hdsa, Algorithm::Rp10, Algorithm::Smcc, Algorithm::Mrsa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fcfs => "fcfs",
            Algorithm::Sstf => "sstf",
            Algorithm::Scan => "scan",
            Algorithm::Cscan => "cscan",
            Algorithm::Look => "look",
            Algorithm::Clook => "clook",
            Algorithm::Odsa => "odsa",
            Algorithm::Hdsa => "hdsa",
            Algorithm::Rp10 => "rp10",
            Algorithm::Smcc => "smcc",
            Algorithm::Mrsa => "mrsa",
            Algorithm::Modsbsm => "modsbsm",
        }
    }

    pub fn sweep_kind(self) -> Option<SweepKind> {
        match self {
            Algorithm::Scan => Some(SweepKind::Scan),
            Algorithm::Cscan => Some(SweepKind::Cscan),
            Algorithm::Look => Some(SweepKind::Look),
            Algorithm::Clook => Some(SweepKind::Clook),
            _ => None,
        }
    }

    pub fn derived_variant(self) -> Option<DerivedVariant> {
        match self {
            Algorithm::Odsa => Some(DerivedVariant::Odsa),
            Algorithm::Hdsa => Some(DerivedVariant::Hdsa),
            Algorithm::Rp10 => Some(DerivedVariant::Rp10),
            Algorithm::Smcc => Some(DerivedVariant::Smcc),
            Algorithm::Mrsa => Some(DerivedVariant::Mrsa),
            _ => None,
        }
    }

    /// Comma-separated list of every valid name.
    pub fn valid_names() -> String {
        Self::ALL.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scheduler {0:?} (valid: {names})", names = Algorithm::valid_names())]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let normalized = lower.replace('-', "");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == normalized)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// Direction of arm travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Toward higher track numbers.
    Up,
    /// Toward track 0.
    Down,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }

    pub fn between(from: TrackId, to: TrackId) -> Option<Direction> {
        match to.cmp(&from) {
            std::cmp::Ordering::Greater => Some(Direction::Up),
            std::cmp::Ordering::Less => Some(Direction::Down),
            std::cmp::Ordering::Equal => None,
        }
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            other => Err(format!("direction must be up or down, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Scan,
    Cscan,
    Look,
    Clook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepVariant {
    pub kind: SweepKind,
    pub initial_direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedVariant {
    Odsa,
    Hdsa,
    Rp10,
    Smcc,
    Mrsa,
}

/// One entry of a schedule: service a request (by index into the scenario)
/// or sweep the arm to a track without servicing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Serve(usize),
    PassThrough(TrackId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    pub visits: Vec<Visit>,
}

impl Schedule {
    fn serving(order: impl IntoIterator<Item = usize>) -> Self {
        Self { visits: order.into_iter().map(Visit::Serve).collect() }
    }

    /// Request indices in service order.
    pub fn order(&self) -> Vec<usize> {
        self.visits
            .iter()
            .filter_map(|v| match v {
                Visit::Serve(i) => Some(*i),
                Visit::PassThrough(_) => None,
            })
            .collect()
    }

    pub fn path(&self, scenario: &Scenario) -> Vec<PathPoint> {
        self.visits
            .iter()
            .map(|v| match *v {
                Visit::Serve(i) => PathPoint::Service(scenario.requests[i].address),
                Visit::PassThrough(t) => PathPoint::PassThrough(t),
            })
            .collect()
    }
}

/// Request indices sorted by track. Within a track the order follows
/// arrival, except when the whole queue arrived in non-increasing track
/// order: then the list is that queue reversed, so ties run against
/// arrival. Schedulers walk this list forward when moving up and backward
/// when moving down.
pub fn track_sorted(scenario: &Scenario) -> Vec<usize> {
    let tracks: Vec<TrackId> = scenario.requests.iter().map(|r| r.address.track).collect();
    let mut idx: Vec<usize> = (0..tracks.len()).collect();
    let descending =
        tracks.windows(2).all(|w| w[0] >= w[1]) && tracks.first().zip(tracks.last()).is_some_and(|(a, b)| a > b);
    if descending {
        idx.sort_by(|&a, &b| tracks[b].cmp(&tracks[a]));
        idx.reverse();
    } else {
        idx.sort_by_key(|&i| tracks[i]);
    }
    idx
}

pub fn fcfs_order(scenario: &Scenario) -> Schedule {
    Schedule::serving(0..scenario.requests.len())
}

/// Shortest seek first at track granularity. Equidistant tracks resolve
/// toward the lower one; requests sharing a track are served together in
/// track-list order along the direction of travel.
pub fn sstf_order(scenario: &Scenario) -> Schedule {
    let mut groups: BTreeMap<TrackId, Vec<usize>> = BTreeMap::new();
    for i in track_sorted(scenario) {
        groups.entry(scenario.requests[i].address.track).or_default().push(i);
    }
    let mut at = scenario.initial_head.track;
    let mut order = Vec::with_capacity(scenario.requests.len());
    while !groups.is_empty() {
        let below = groups.range(..=at).next_back().map(|(t, _)| *t);
        let above = groups.range(at..).next().map(|(t, _)| *t);
        let next = match (below, above) {
            (Some(b), Some(a)) => {
                if at - b <= a - at {
                    b
                } else {
                    a
                }
            }
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => unreachable!("groups is non-empty"),
        };
        let group = groups.remove(&next).expect("track present");
        if next < at {
            order.extend(group.into_iter().rev());
        } else {
            order.extend(group);
        }
        at = next;
    }
    Schedule::serving(order)
}

pub fn sweep_order(scenario: &Scenario, variant: SweepVariant) -> Schedule {
    let list = track_sorted(scenario);
    let head = scenario.initial_head.track;
    let track = |i: &usize| scenario.requests[*i].address.track;
    let last = scenario.geometry.last_track();
    let (first, second, near_end, far_end): (Vec<usize>, Vec<usize>, TrackId, TrackId) =
        match variant.initial_direction {
            Direction::Down => {
                let lower: Vec<usize> = list.iter().copied().filter(|i| track(i) <= head).collect();
                let upper: Vec<usize> = list.iter().copied().filter(|i| track(i) > head).collect();
                let first = lower.into_iter().rev().collect();
                let second = match variant.kind {
                    SweepKind::Scan | SweepKind::Look => upper,
                    SweepKind::Cscan | SweepKind::Clook => upper.into_iter().rev().collect(),
                };
                (first, second, 0, last)
            }
            Direction::Up => {
                let upper: Vec<usize> = list.iter().copied().filter(|i| track(i) >= head).collect();
                let lower: Vec<usize> = list.iter().copied().filter(|i| track(i) < head).collect();
                let second = match variant.kind {
                    SweepKind::Scan | SweepKind::Look => lower.into_iter().rev().collect(),
                    SweepKind::Cscan | SweepKind::Clook => lower,
                };
                (upper, second, last, 0)
            }
        };
    let mut visits: Vec<Visit> = first.into_iter().map(Visit::Serve).collect();
    if !second.is_empty() {
        match variant.kind {
            SweepKind::Scan => visits.push(Visit::PassThrough(near_end)),
            SweepKind::Cscan => {
                visits.push(Visit::PassThrough(near_end));
                visits.push(Visit::PassThrough(far_end));
            }
            SweepKind::Look | SweepKind::Clook => {}
        }
        visits.extend(second.into_iter().map(Visit::Serve));
    }
    Schedule { visits }
}

fn look(scenario: &Scenario, initial_direction: Direction) -> Schedule {
    sweep_order(scenario, SweepVariant { kind: SweepKind::Look, initial_direction })
}

/// Lowest and highest requested track.
pub fn track_span(scenario: &Scenario) -> Option<(TrackId, TrackId)> {
    let tracks = scenario.requests.iter().map(|r| r.address.track);
    Some((tracks.clone().min()?, tracks.max()?))
}

/// Direction that reaches the nearer extreme request first; a tie goes to
/// the lowest track first.
pub fn nearest_extreme_direction(head: TrackId, min: TrackId, max: TrackId) -> Direction {
    if head.abs_diff(min) <= max.abs_diff(head) {
        Direction::Down
    } else {
        Direction::Up
    }
}

/// Lower and upper median of the sorted request tracks. For an odd count
/// both are the middle track.
pub fn median_range(scenario: &Scenario) -> Option<(TrackId, TrackId)> {
    let mut tracks: Vec<TrackId> = scenario.requests.iter().map(|r| r.address.track).collect();
    if tracks.is_empty() {
        return None;
    }
    tracks.sort_unstable();
    let n = tracks.len();
    Some((tracks[(n - 1) / 2], tracks[n / 2]))
}

pub fn derived_order(scenario: &Scenario, variant: DerivedVariant) -> Schedule {
    let head = scenario.initial_head.track;
    let Some((min, max)) = track_span(scenario) else {
        return Schedule::default();
    };
    match variant {
        DerivedVariant::Odsa | DerivedVariant::Hdsa => look(scenario, nearest_extreme_direction(head, min, max)),
        DerivedVariant::Smcc => {
            // head < (min + max) / 2, kept in integers
            let dir = if 2 * u64::from(head) < u64::from(min) + u64::from(max) {
                Direction::Down
            } else {
                Direction::Up
            };
            look(scenario, dir)
        }
        DerivedVariant::Rp10 => {
            let dir = if head >= max - min { Direction::Down } else { Direction::Up };
            look(scenario, dir)
        }
        DerivedVariant::Mrsa => {
            let (lo, hi) = median_range(scenario).expect("non-empty");
            if (lo..=hi).contains(&head) {
                sstf_order(scenario)
            } else {
                look(scenario, nearest_extreme_direction(head, min, max))
            }
        }
    }
}

/// Initial direction of a sweep scheduler: the scenario hint when hints are
/// enabled, otherwise down.
pub fn sweep_direction(scenario: &Scenario, algorithm: Algorithm, use_hints: bool) -> Direction {
    if use_hints {
        if let Some(d) = scenario.direction_hints.get(&algorithm) {
            return *d;
        }
    }
    Direction::Down
}

/// Order produced by any scheduler other than MODSBSM.
pub fn baseline_schedule(scenario: &Scenario, algorithm: Algorithm, use_hints: bool) -> Option<Schedule> {
    if let Some(kind) = algorithm.sweep_kind() {
        let initial_direction = sweep_direction(scenario, algorithm, use_hints);
        return Some(sweep_order(scenario, SweepVariant { kind, initial_direction }));
    }
    if let Some(variant) = algorithm.derived_variant() {
        return Some(derived_order(scenario, variant));
    }
    match algorithm {
        Algorithm::Fcfs => Some(fcfs_order(scenario)),
        Algorithm::Sstf => Some(sstf_order(scenario)),
        _ => None,
    }
}

/// Total attempts a baseline scheduler spends on an unreadable request
/// before giving up on it.
pub const BASELINE_MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("scenario has no requests")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Priced run of one scheduler over one scenario.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub algorithm: Algorithm,
    /// Request index of each step, aligned with `steps`.
    pub visits: Vec<usize>,
    pub steps: Vec<ServiceStep>,
    pub totals: MetricsTotals,
    pub faults: FaultModel,
    /// Requests a baseline scheduler gave up on after repeated failures.
    pub unresolved: Vec<usize>,
    /// Present for MODSBSM runs.
    pub modsbsm: Option<RunResult>,
}

/// Runs `algorithm` on `scenario`, injecting the scenario's fault table.
pub fn simulate(scenario: &Scenario, algorithm: Algorithm, use_hints: bool) -> Result<SimulationRun, SimError> {
    if scenario.requests.is_empty() {
        return Err(SimError::Empty);
    }
    let faults = FaultModel::new(scenario.faults.clone());
    if algorithm == Algorithm::Modsbsm {
        let run = modsbsm::execute(scenario, faults).map_err(|e| match e {
            modsbsm::ModsbsmError::Geometry(g) => SimError::Geometry(g),
            _ => SimError::Empty,
        })?;
        return Ok(SimulationRun {
            algorithm,
            visits: run.visits.iter().map(|v| v.request).collect(),
            steps: run.trace.clone(),
            totals: run.totals,
            faults: run.faults.clone(),
            unresolved: Vec::new(),
            modsbsm: Some(run),
        });
    }
    let schedule = baseline_schedule(scenario, algorithm, use_hints).expect("baseline algorithm");
    run_with_retries(scenario, algorithm, &schedule, faults)
}

/// Walks a baseline schedule against the fault model. An unreadable request
/// goes back to the tail of the queue until it has been tried
/// [`BASELINE_MAX_ATTEMPTS`] times. There is no bad-sector table, so every
/// logical access is a physical probe.
pub fn run_with_retries(
    scenario: &Scenario,
    algorithm: Algorithm,
    schedule: &Schedule,
    mut faults: FaultModel,
) -> Result<SimulationRun, SimError> {
    let mut path = Vec::with_capacity(schedule.visits.len());
    let mut visits = Vec::with_capacity(scenario.requests.len());
    let mut attempts = vec![0u32; scenario.requests.len()];
    let mut retry: VecDeque<usize> = VecDeque::new();
    let mut unresolved = Vec::new();

    let mut attempt = |i: usize, path: &mut Vec<PathPoint>, retry: &mut VecDeque<usize>| {
        let address = scenario.requests[i].address;
        path.push(PathPoint::Service(address));
        visits.push(i);
        attempts[i] += 1;
        if faults.access(address) == AccessOutcome::Unreadable {
            if attempts[i] < BASELINE_MAX_ATTEMPTS {
                retry.push_back(i);
            } else {
                unresolved.push(i);
            }
        }
    };
    for visit in &schedule.visits {
        match *visit {
            Visit::Serve(i) => attempt(i, &mut path, &mut retry),
            Visit::PassThrough(t) => path.push(PathPoint::PassThrough(t)),
        }
    }
    while let Some(i) = retry.pop_front() {
        attempt(i, &mut path, &mut retry);
    }
    let steps = metrics::replay_path(&scenario.geometry, scenario.initial_head, &path)?;
    let totals = metrics::totals(&steps, steps.len()).map_err(|_| SimError::Empty)?;
    Ok(SimulationRun { algorithm, visits, steps, totals, faults, unresolved, modsbsm: None })
}
