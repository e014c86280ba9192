//! Cylinder-ordered scheduling with bad-sector management.
//!
//! Each pass sorts the pending list by track, heads for the nearer extreme
//! request and sweeps across, serving every surface of a cylinder before
//! moving on. An unreadable address is retried on the next pass; on its
//! second failure it enters the bad-sector table, and its next access is
//! resolved by [`bsm`] with one last physical probe. After that the table
//! answers for it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::faults::{AccessOutcome, FaultModel, SectorHealth};
use crate::geometry::{GeometryError, MemoryRequest, Op, PhysicalAddress, TrackId};
use crate::metrics::{self, MetricsTotals, ServiceStep};
use crate::schedulers::Direction;
use crate::workload::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModsbsmError {
    #[error("request list is empty")]
    Empty,
    #[error("request tracks are not sorted ascending")]
    Unsorted,
    #[error("{0} is not in the bad-sector table")]
    NotInTable(PhysicalAddress),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Sweep order of one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Jump to the lowest request track, then move up.
    Ascending,
    /// Jump to the highest request track, then move down.
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionDecision {
    /// Head track minus lowest request track. Negative when the head is
    /// below every request.
    pub ld: i64,
    /// Highest request track minus head track.
    pub rd: i64,
    pub chosen: Sweep,
}

impl DirectionDecision {
    /// Seek spent reaching the first extreme.
    pub fn seek_prefix(&self) -> u64 {
        match self.chosen {
            Sweep::Ascending => self.ld.unsigned_abs(),
            Sweep::Descending => self.rd.unsigned_abs(),
        }
    }
}

/// Picks the sweep for one pass. On a tie the arm keeps the opposite of its
/// last inter-track move: after moving down it sweeps up from the bottom,
/// after moving up it sweeps down from the top. With no history it sweeps
/// ascending.
pub fn decide_direction(
    head_track: TrackId,
    sorted_request_tracks: &[TrackId],
    last_move: Option<Direction>,
) -> Result<DirectionDecision, ModsbsmError> {
    let (Some(&min), Some(&max)) = (sorted_request_tracks.first(), sorted_request_tracks.last()) else {
        return Err(ModsbsmError::Empty);
    };
    if sorted_request_tracks.windows(2).any(|w| w[0] > w[1]) {
        return Err(ModsbsmError::Unsorted);
    }
    let ld = i64::from(head_track) - i64::from(min);
    let rd = i64::from(max) - i64::from(head_track);
    let chosen = match ld.cmp(&rd) {
        std::cmp::Ordering::Less => Sweep::Ascending,
        std::cmp::Ordering::Greater => Sweep::Descending,
        std::cmp::Ordering::Equal => match last_move {
            Some(Direction::Up) => Sweep::Descending,
            Some(Direction::Down) | None => Sweep::Ascending,
        },
    };
    Ok(DirectionDecision { ld, rd, chosen })
}

fn arrange_key(a: PhysicalAddress, sweep: Sweep) -> (TrackId, i64, i64) {
    let (sector, platter) = (i64::from(a.sector), i64::from(a.platter));
    match sweep {
        Sweep::Ascending => (a.track, sector, platter),
        Sweep::Descending => (a.track, -sector, -platter),
    }
}

/// Stable order by track ascending, then sector and platter ascending
/// (descending for [`Sweep::Descending`]).
pub fn arrange(queue: &[MemoryRequest], sweep: Sweep) -> Vec<MemoryRequest> {
    let mut out = queue.to_vec();
    out.sort_by_key(|r| arrange_key(r.address, sweep));
    out
}

/// Service order of an arranged list: as is for an ascending sweep,
/// reversed for a descending one.
pub fn service_order<T: Clone>(arranged: &[T], sweep: Sweep) -> Vec<T> {
    match sweep {
        Sweep::Ascending => arranged.to_vec(),
        Sweep::Descending => arranged.iter().rev().cloned().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Entered the table, answer not yet confirmed.
    Temp,
    /// Resolved by a probe; the table answers from now on.
    Permanent,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Temp => "temp",
            Classification::Permanent => "permanent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BadSectorEntry {
    pub index: PhysicalAddress,
    pub bsi: u8,
    pub classification: Classification,
    pub prescribed_bit: u8,
    pub finalized: bool,
}

impl BadSectorEntry {
    pub fn new(index: PhysicalAddress) -> Self {
        Self { index, bsi: 2, classification: Classification::Temp, prescribed_bit: 0, finalized: false }
    }
}

/// Bad-sector table in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BadSectorTable {
    entries: Vec<BadSectorEntry>,
}

pub const BAD_SECTOR_CSV_HEADER: &str = "index,bsi,classification,prescribed_bit,finalized";

impl BadSectorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[BadSectorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: PhysicalAddress) -> Option<&BadSectorEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    pub fn get_mut(&mut self, index: PhysicalAddress) -> Option<&mut BadSectorEntry> {
        self.entries.iter_mut().find(|e| e.index == index)
    }

    /// Inserts a fresh entry unless one already exists.
    pub fn insert(&mut self, entry: BadSectorEntry) {
        if self.get(entry.index).is_none() {
            self.entries.push(entry);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(BAD_SECTOR_CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.index,
                e.bsi,
                e.classification.name(),
                e.prescribed_bit,
                u8::from(e.finalized)
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsmOutcome {
    /// Bit handed to the caller.
    pub bit: u8,
    pub probed: bool,
    pub flipped: bool,
}

/// Resolves one access to an indexed bad address. A finalized entry is
/// answered from the table. Otherwise the address is probed once, the
/// prescribed bit is corrected if it disagrees with the medium, and the entry
/// is finalized. Writes take the same path as reads.
pub fn bsm(
    table: &mut BadSectorTable,
    index: PhysicalAddress,
    faults: &mut FaultModel,
    _op: Op,
) -> Result<BsmOutcome, ModsbsmError> {
    let entry = table.get_mut(index).ok_or(ModsbsmError::NotInTable(index))?;
    if entry.finalized {
        return Ok(BsmOutcome { bit: entry.prescribed_bit, probed: false, flipped: false });
    }
    let _ = faults.access(index);
    let applicable = match faults.health(index) {
        SectorHealth::Bad { true_bit } => entry.prescribed_bit == true_bit,
        SectorHealth::Healthy => true,
    };
    if !applicable {
        entry.prescribed_bit ^= 1;
    }
    entry.finalized = true;
    entry.classification = Classification::Permanent;
    Ok(BsmOutcome { bit: entry.prescribed_bit, probed: true, flipped: !applicable })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitOutcome {
    Served,
    /// Unreadable; the request stays pending with this bsi.
    Failed { bsi: u8 },
    /// Served through [`bsm`].
    Resolved(BsmOutcome),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisitRecord {
    /// Index into the scenario's requests.
    pub request: usize,
    pub pass: usize,
    pub outcome: VisitOutcome,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Every physical visit, failed ones included.
    pub trace: Vec<ServiceStep>,
    /// Aligned with `trace`.
    pub visits: Vec<VisitRecord>,
    pub totals: MetricsTotals,
    pub bad_sector_table: BadSectorTable,
    pub passes: usize,
    pub decisions: Vec<DirectionDecision>,
    /// Probe counters at the end of the run.
    pub faults: FaultModel,
    /// Requests with their final bsi.
    pub requests: Vec<MemoryRequest>,
}

/// Runs the whole request list to completion.
pub fn execute(scenario: &Scenario, mut faults: FaultModel) -> Result<RunResult, ModsbsmError> {
    if scenario.requests.is_empty() {
        return Err(ModsbsmError::Empty);
    }
    scenario.validate()?;
    let mut requests = scenario.requests.clone();
    let mut bsi: BTreeMap<PhysicalAddress, u8> = BTreeMap::new();
    let mut table = BadSectorTable::new();
    let mut pending: Vec<usize> = (0..requests.len()).collect();
    let mut arm = scenario.initial_head.track;
    let mut last_move: Option<Direction> = None;
    let mut path = Vec::new();
    let mut visits = Vec::new();
    let mut decisions = Vec::new();
    let mut passes = 0;

    while !pending.is_empty() {
        passes += 1;
        pending.sort_by_key(|&i| requests[i].address.track);
        let tracks: Vec<TrackId> = pending.iter().map(|&i| requests[i].address.track).collect();
        let decision = decide_direction(arm, &tracks, last_move)?;
        decisions.push(decision);
        pending.sort_by_key(|&i| arrange_key(requests[i].address, decision.chosen));
        let order = service_order(&pending, decision.chosen);
        let mut next = Vec::new();

        for i in order {
            let address = requests[i].address;
            if let Some(d) = Direction::between(arm, address.track) {
                last_move = Some(d);
            }
            arm = address.track;
            path.push(address);
            let count = bsi.entry(address).or_insert(0);
            let outcome = if *count >= 2 {
                VisitOutcome::Resolved(bsm(&mut table, address, &mut faults, requests[i].op)?)
            } else {
                match faults.access(address) {
                    AccessOutcome::Readable => VisitOutcome::Served,
                    AccessOutcome::Unreadable => {
                        *count += 1;
                        if *count == 2 {
                            table.insert(BadSectorEntry::new(address));
                        }
                        next.push(i);
                        VisitOutcome::Failed { bsi: *count }
                    }
                }
            };
            requests[i].bsi = *count;
            visits.push(VisitRecord { request: i, pass: passes, outcome });
        }
        pending = next;
    }

    let trace = metrics::replay(&scenario.geometry, scenario.initial_head, &path)?;
    let totals = metrics::totals(&trace, trace.len()).map_err(|_| ModsbsmError::Empty)?;
    Ok(RunResult { trace, visits, totals, bad_sector_table: table, passes, decisions, faults, requests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::FaultTable;
    use crate::workload::builtin_case;

    fn run(case: u32) -> RunResult {
        let s = builtin_case(case).unwrap();
        execute(&s, FaultModel::new(s.faults.clone())).unwrap()
    }

    #[test]
    fn direction_examples() {
        let d = decide_direction(75, &[28, 185], None).unwrap();
        assert_eq!((d.ld, d.rd, d.chosen), (47, 110, Sweep::Ascending));
        let d = decide_direction(140, &[18, 197], None).unwrap();
        assert_eq!((d.ld, d.rd, d.chosen), (122, 57, Sweep::Descending));
        let d = decide_direction(90, &[15, 165], None).unwrap();
        assert_eq!(d.chosen, Sweep::Ascending);
        assert_eq!(decide_direction(90, &[15, 165], Some(Direction::Up)).unwrap().chosen, Sweep::Descending);
        assert_eq!(decide_direction(90, &[15, 165], Some(Direction::Down)).unwrap().chosen, Sweep::Ascending);
        assert_eq!(decide_direction(1, &[], None), Err(ModsbsmError::Empty));
        assert_eq!(decide_direction(1, &[5, 3], None), Err(ModsbsmError::Unsorted));
    }

    #[test]
    fn head_outside_span() {
        let d = decide_direction(5, &[20, 80], None).unwrap();
        assert_eq!((d.chosen, d.seek_prefix()), (Sweep::Ascending, 15));
        let d = decide_direction(120, &[20, 80], None).unwrap();
        assert_eq!((d.chosen, d.seek_prefix()), (Sweep::Descending, 40));
    }

    #[test]
    fn arrange_case1_track48() {
        let s = builtin_case(1).unwrap();
        let t48: Vec<_> = s.requests.iter().copied().filter(|r| r.address.track == 48).collect();
        let sectors: Vec<_> = arrange(&t48, Sweep::Ascending).iter().map(|r| r.address.sector).collect();
        assert_eq!(sectors, vec![0, 4, 6, 7]);
        let one = &t48[..1];
        assert_eq!(arrange(one, Sweep::Descending), one.to_vec());
    }

    #[test]
    fn arrange_orders_platters_within_sector() {
        let q = [
            MemoryRequest::new(PhysicalAddress::new(5, 3, 2), Op::Read, 0),
            MemoryRequest::new(PhysicalAddress::new(5, 1, 2), Op::Read, 1),
            MemoryRequest::new(PhysicalAddress::new(5, 2, 1), Op::Read, 2),
        ];
        let asc: Vec<_> = arrange(&q, Sweep::Ascending).iter().map(|r| r.arrival_rank).collect();
        assert_eq!(asc, vec![2, 1, 0]);
        let desc: Vec<_> = arrange(&q, Sweep::Descending).iter().map(|r| r.arrival_rank).collect();
        assert_eq!(desc, vec![0, 1, 2]);
    }

    #[test]
    fn reference_totals() {
        let r = run(2);
        assert_eq!(r.totals.as_tuple(), (204, 62, 20, 286));
        assert_eq!(r.totals.adat_display(), "14.30");
        assert_eq!(r.passes, 1);
        assert_eq!(run(5).totals.as_tuple(), (223, 51, 45, 319));
        assert_eq!(run(6).totals.as_tuple(), (225, 57, 47, 329));
    }

    #[test]
    fn case2_latency_sequence() {
        let lat: Vec<u32> = run(2).trace.iter().map(|s| s.latency).collect();
        assert_eq!(lat, vec![0, 3, 3, 1, 5, 2, 2, 5, 6, 3, 1, 2, 2, 2, 5, 5, 3, 3, 3, 6]);
    }

    #[test]
    fn bad_address_lifecycle() {
        let mut s = builtin_case(2).unwrap();
        let bad = s.requests[5].address;
        s.faults.mark_bad(bad, 1);
        let r = execute(&s, FaultModel::new(s.faults.clone())).unwrap();
        assert_eq!(r.passes, 3);
        assert_eq!(r.faults.probe_count(bad), 3);
        let e = r.bad_sector_table.get(bad).unwrap();
        assert_eq!((e.bsi, e.finalized, e.prescribed_bit), (2, true, 1));
        assert_eq!(e.classification, Classification::Permanent);
        let outcomes: Vec<_> = r.visits.iter().filter(|v| v.request == 5).map(|v| v.outcome).collect();
        assert_eq!(outcomes.len(), 3);
        assert!(matches!(outcomes[0], VisitOutcome::Failed { bsi: 1 }));
        assert!(matches!(outcomes[1], VisitOutcome::Failed { bsi: 2 }));
        assert!(matches!(outcomes[2], VisitOutcome::Resolved(BsmOutcome { probed: true, flipped: true, bit: 1 })));
        assert_eq!(r.trace.len(), 22);
        assert_eq!(r.requests[5].bsi, 2);
    }

    #[test]
    fn repeated_bad_address_answered_from_table() {
        let mut s = builtin_case(1).unwrap();
        let bad = s.requests[3].address;
        let mut dup = s.requests[3];
        dup.arrival_rank = 20;
        s.requests.push(dup);
        s.faults.mark_bad(bad, 0);
        let r = execute(&s, FaultModel::new(s.faults.clone())).unwrap();
        assert_eq!(r.faults.probe_count(bad), 3);
        let resolved: Vec<_> = r
            .visits
            .iter()
            .filter_map(|v| match v.outcome {
                VisitOutcome::Resolved(o) => Some(o),
                _ => None,
            })
            .collect();
        assert_eq!(resolved.len(), 2);
        assert_eq!(resolved.iter().filter(|o| o.probed).count(), 1);
        assert!(resolved.iter().all(|o| o.bit == 0));
    }

    #[test]
    fn bsm_examples() {
        let a = PhysicalAddress::new(10, 1, 1);
        let mut faults = FaultTable::new();
        faults.mark_bad(a, 1);
        let mut model = FaultModel::new(faults);

        let mut table = BadSectorTable::new();
        table.insert(BadSectorEntry { finalized: true, ..BadSectorEntry::new(a) });
        let o = bsm(&mut table, a, &mut model, Op::Read).unwrap();
        assert_eq!((o.bit, o.probed), (0, false));
        assert_eq!(model.probe_count(a), 0);

        let mut table = BadSectorTable::new();
        table.insert(BadSectorEntry::new(a));
        let o = bsm(&mut table, a, &mut model, Op::Read).unwrap();
        assert_eq!((o.bit, o.probed, o.flipped), (1, true, true));
        assert!(table.get(a).unwrap().finalized);

        let b = PhysicalAddress::new(11, 1, 1);
        let mut t2 = FaultTable::new();
        t2.mark_bad(b, 0);
        let mut m2 = FaultModel::new(t2);
        let mut table = BadSectorTable::new();
        table.insert(BadSectorEntry::new(b));
        let o = bsm(&mut table, b, &mut m2, Op::Write).unwrap();
        assert_eq!((o.bit, o.flipped), (0, false));
        assert_eq!(table.get(b).unwrap().prescribed_bit, 0);

        assert_eq!(bsm(&mut table, a, &mut m2, Op::Read), Err(ModsbsmError::NotInTable(a)));
    }

    #[test]
    fn table_csv() {
        let mut table = BadSectorTable::new();
        table.insert(BadSectorEntry::new(PhysicalAddress::new(45, 1, 5)));
        assert_eq!(table.to_csv(), "index,bsi,classification,prescribed_bit,finalized\n45t1p5s,2,temp,0,0\n");
    }

    #[test]
    fn empty_rejected() {
        let mut s = builtin_case(1).unwrap();
        s.requests.clear();
        assert_eq!(execute(&s, FaultModel::healthy()).unwrap_err(), ModsbsmError::Empty);
    }
}
