//! Cost model shared by every scheduler.
//!
//! All costs are abstract integer units: seek counts tracks of arm travel,
//! rotational latency counts sectors of forward rotation, and transfer is the
//! head-selection distance `|Δplatter|` plus one unit for moving the data.
//! The reference for each step is always the previously visited address.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{DiskGeometry, GeometryError, PhysicalAddress, PlatterId, SectorId, TrackId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("cannot total an empty step sequence")]
    Empty,
    #[error("request count {expected} does not match {actual} priced steps")]
    CountMismatch { expected: usize, actual: usize },
    #[error("improvement needs at least one baseline average")]
    EmptyBaseline,
    #[error("energy savings need at least 2 projected accesses, got {0}")]
    TooFewAccesses(u64),
    #[error("energy model parameters must be positive")]
    NonPositiveEnergy,
    #[error("totals csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Sectors the platter must rotate forward to bring `next` under the head
/// after servicing `prev`. Equal sectors cost nothing.
pub fn rotational_delta(prev: SectorId, next: SectorId, sectors_per_track: u32) -> u32 {
    if next >= prev {
        next - prev
    } else {
        sectors_per_track - 1 - prev + 1 + next
    }
}

/// Head selection plus the unit transfer.
pub fn transfer_cost(prev: PlatterId, next: PlatterId) -> u32 {
    prev.abs_diff(next) + 1
}

/// One priced visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceStep {
    pub address: PhysicalAddress,
    pub seek: u32,
    pub latency: u32,
    pub transfer: u32,
    pub access: u32,
    /// Tracks the arm passed through without servicing on the way here
    /// (SCAN/C-SCAN boundaries). Their travel is included in `seek`.
    pub via: Vec<TrackId>,
}

/// A point on the arm's path: either a serviced address or a track the arm
/// sweeps to without servicing anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathPoint {
    Service(PhysicalAddress),
    PassThrough(TrackId),
}

/// Prices a plain service order.
pub fn replay(
    geometry: &DiskGeometry,
    initial_head: PhysicalAddress,
    order: &[PhysicalAddress],
) -> Result<Vec<ServiceStep>, GeometryError> {
    let path: Vec<PathPoint> = order.iter().copied().map(PathPoint::Service).collect();
    replay_path(geometry, initial_head, &path)
}

/// Prices a path that may contain pass-through tracks. A pass-through adds
/// arm travel to the next serviced step but does not move the rotation or
/// platter reference.
pub fn replay_path(
    geometry: &DiskGeometry,
    initial_head: PhysicalAddress,
    path: &[PathPoint],
) -> Result<Vec<ServiceStep>, GeometryError> {
    geometry.validate(initial_head)?;
    let mut steps = Vec::with_capacity(path.len());
    let mut reference = initial_head;
    let mut arm = initial_head.track;
    let mut pending_seek = 0u32;
    let mut via = Vec::new();
    for point in path {
        match *point {
            PathPoint::PassThrough(track) => {
                if track >= geometry.num_tracks {
                    return Err(GeometryError::OutOfBounds {
                        component: crate::geometry::Component::Track,
                        value: track,
                        limit: geometry.num_tracks,
                    });
                }
                pending_seek += arm.abs_diff(track);
                arm = track;
                via.push(track);
            }
            PathPoint::Service(address) => {
                geometry.validate(address)?;
                let seek = pending_seek + arm.abs_diff(address.track);
                let latency = rotational_delta(reference.sector, address.sector, geometry.sectors_per_track);
                let transfer = transfer_cost(reference.platter, address.platter);
                steps.push(ServiceStep {
                    address,
                    seek,
                    latency,
                    transfer,
                    access: seek + latency + transfer,
                    via: std::mem::take(&mut via),
                });
                pending_seek = 0;
                arm = address.track;
                reference = address;
            }
        }
    }
    Ok(steps)
}

/// Aggregate cost of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsTotals {
    pub tskt: u64,
    pub trl: u64,
    pub tdtt: u64,
    pub tdat: u64,
    pub steps: usize,
    pub adat: f64,
}

impl MetricsTotals {
    pub fn from_parts(tskt: u64, trl: u64, tdtt: u64, steps: usize) -> Self {
        let tdat = tskt + trl + tdtt;
        Self { tskt, trl, tdtt, tdat, steps, adat: tdat as f64 / steps.max(1) as f64 }
    }

    /// Average access time in hundredths, rounded half up.
    pub fn adat_hundredths(&self) -> u64 {
        let n = self.steps.max(1) as u64;
        (self.tdat * 200 + n) / (2 * n)
    }

    /// Two-decimal rendering of the average access time.
    pub fn adat_display(&self) -> String {
        let h = self.adat_hundredths();
        format!("{}.{:02}", h / 100, h % 100)
    }

    pub fn as_tuple(&self) -> (u64, u64, u64, u64) {
        (self.tskt, self.trl, self.tdtt, self.tdat)
    }

    /// Componentwise sum, used to aggregate several workloads.
    pub fn combine(&self, other: &MetricsTotals) -> MetricsTotals {
        MetricsTotals::from_parts(
            self.tskt + other.tskt,
            self.trl + other.trl,
            self.tdtt + other.tdtt,
            self.steps + other.steps,
        )
    }
}

pub fn totals(steps: &[ServiceStep], request_count: usize) -> Result<MetricsTotals, MetricsError> {
    if steps.is_empty() {
        return Err(MetricsError::Empty);
    }
    if request_count != steps.len() {
        return Err(MetricsError::CountMismatch { expected: request_count, actual: steps.len() });
    }
    let (mut tskt, mut trl, mut tdtt) = (0u64, 0u64, 0u64);
    for step in steps {
        tskt += u64::from(step.seek);
        trl += u64::from(step.latency);
        tdtt += u64::from(step.transfer);
    }
    Ok(MetricsTotals::from_parts(tskt, trl, tdtt, steps.len()))
}

/// Percentage by which `candidate` undercuts the mean of `baselines`.
pub fn improvement(baselines: &[f64], candidate: f64) -> Result<f64, MetricsError> {
    if baselines.is_empty() {
        return Err(MetricsError::EmptyBaseline);
    }
    let mean = baselines.iter().sum::<f64>() / baselines.len() as f64;
    Ok(100.0 * (mean - candidate) / mean)
}

/// Energy per one-bit access (femtojoules) and heat per bit access
/// (abstract units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub energy_per_bit_fj: f64,
    pub heat_per_bit: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self { energy_per_bit_fj: 100.0, heat_per_bit: 1.0 }
    }
}

impl EnergyModel {
    pub fn new(energy_per_bit_fj: f64, heat_per_bit: f64) -> Result<Self, MetricsError> {
        if !(energy_per_bit_fj > 0.0 && heat_per_bit > 0.0) {
            return Err(MetricsError::NonPositiveEnergy);
        }
        Ok(Self { energy_per_bit_fj, heat_per_bit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Savings {
    pub energy_fj: f64,
    pub heat: f64,
}

/// Savings from resolving a bad index that would otherwise be read `n`
/// times: all but two of those reads are avoided.
pub fn energy_saved(access_count_n: u64, model: &EnergyModel) -> Result<Savings, MetricsError> {
    if access_count_n < 2 {
        return Err(MetricsError::TooFewAccesses(access_count_n));
    }
    let avoided = (access_count_n - 2) as f64;
    Ok(Savings { energy_fj: model.energy_per_bit_fj * avoided, heat: model.heat_per_bit * avoided })
}

pub const TRACE_CSV_HEADER: &str = "step,track,platter,sector,seek,latency,transfer,access";
pub const TOTALS_CSV_HEADER: &str = "algorithm,tskt,trl,tdtt,tdat,adat";

pub fn trace_csv(steps: &[ServiceStep]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for (i, s) in steps.iter().enumerate() {
        let a = s.address;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            a.track,
            a.platter,
            a.sector,
            s.seek,
            s.latency,
            s.transfer,
            s.access
        );
    }
    out
}

pub fn totals_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a MetricsTotals)>) -> String {
    let mut out = String::from(TOTALS_CSV_HEADER);
    out.push('\n');
    for (name, t) in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", name, t.tskt, t.trl, t.tdtt, t.tdat, t.adat_display());
    }
    out
}

/// One parsed row of a totals CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalsRow {
    pub algorithm: String,
    pub tskt: u64,
    pub trl: u64,
    pub tdtt: u64,
    pub tdat: u64,
    pub adat: String,
}

pub fn parse_totals_csv(text: &str) -> Result<Vec<TotalsRow>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TOTALS_CSV_HEADER => {}
        _ => return Err(MetricsError::Csv { line: 1, reason: "missing header".into() }),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |reason: &str| MetricsError::Csv { line: i + 1, reason: reason.to_string() };
        if fields.len() != 6 {
            return Err(bad("expected 6 fields"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad("non-numeric total"));
        rows.push(TotalsRow {
            algorithm: fields[0].to_string(),
            tskt: num(fields[1])?,
            trl: num(fields[2])?,
            tdtt: num(fields[3])?,
            tdat: num(fields[4])?,
            adat: fields[5].to_string(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(t: u32, p: u32, s: u32) -> PhysicalAddress {
        PhysicalAddress::new(t, p, s)
    }

    /// Rotates one sector at a time until aligned.
    fn rotate_until_aligned(prev: u32, next: u32, spt: u32) -> u32 {
        let mut at = prev;
        let mut n = 0;
        while at != next {
            at = (at + 1) % spt;
            n += 1;
        }
        n
    }

    #[test]
    fn rotational_delta_examples() {
        assert_eq!(rotational_delta(4, 4, 8), 0);
        assert_eq!(rotational_delta(6, 4, 8), 6);
        assert_eq!(rotational_delta(7, 2, 8), 3);
    }

    #[test]
    fn rotational_delta_matches_step_forward_oracle() {
        for spt in [2u32, 5, 8, 16] {
            for prev in 0..spt {
                for next in 0..spt {
                    assert_eq!(rotational_delta(prev, next, spt), rotate_until_aligned(prev, next, spt));
                }
            }
        }
    }

    #[test]
    fn transfer_cost_examples() {
        assert_eq!(transfer_cost(1, 1), 1);
        assert_eq!(transfer_cost(1, 2), 2);
        assert_eq!(transfer_cost(1, 4), 4);
        assert_eq!(transfer_cost(4, 1), 4);
    }

    #[test]
    fn replay_hand_example() {
        let g = DiskGeometry::standard(1);
        let steps = replay(&g, addr(50, 1, 0), &[addr(52, 1, 1), addr(52, 1, 3), addr(40, 1, 0)]).unwrap();
        let seeks: Vec<_> = steps.iter().map(|s| s.seek).collect();
        let lat: Vec<_> = steps.iter().map(|s| s.latency).collect();
        let xfer: Vec<_> = steps.iter().map(|s| s.transfer).collect();
        assert_eq!(seeks, [2, 0, 12]);
        assert_eq!(lat, [1, 2, 5]);
        assert_eq!(xfer, [1, 1, 1]);
        assert_eq!(totals(&steps, 3).unwrap().tdat, 25);
    }

    #[test]
    fn replay_request_at_head() {
        let g = DiskGeometry::standard(1);
        let steps = replay(&g, addr(65, 1, 4), &[addr(65, 1, 4)]).unwrap();
        assert_eq!((steps[0].seek, steps[0].latency, steps[0].transfer, steps[0].access), (0, 0, 1, 1));
        let t = totals(&steps, 1).unwrap();
        assert_eq!(t.as_tuple(), (0, 0, 1, 1));
        assert_eq!(t.adat_display(), "1.00");
    }

    #[test]
    fn replay_rejects_out_of_bounds() {
        let g = DiskGeometry::standard(1);
        assert!(replay(&g, addr(65, 1, 4), &[addr(65, 2, 4)]).is_err());
        assert!(replay(&g, addr(65, 1, 9), &[]).is_err());
    }

    #[test]
    fn pass_through_adds_seek_only() {
        let g = DiskGeometry::standard(1);
        let path = [PathPoint::Service(addr(10, 1, 3)), PathPoint::PassThrough(0), PathPoint::Service(addr(20, 1, 5))];
        let steps = replay_path(&g, addr(12, 1, 3), &path).unwrap();
        assert_eq!(steps[1].seek, 10 + 20);
        assert_eq!(steps[1].latency, 2);
        assert_eq!(steps[1].via, vec![0]);
    }

    #[test]
    fn totals_errors() {
        assert_eq!(totals(&[], 0), Err(MetricsError::Empty));
        let g = DiskGeometry::standard(1);
        let steps = replay(&g, addr(1, 1, 1), &[addr(2, 1, 1)]).unwrap();
        assert!(matches!(totals(&steps, 2), Err(MetricsError::CountMismatch { .. })));
    }

    #[test]
    fn adat_rounding() {
        assert_eq!(MetricsTotals::from_parts(204, 62, 20, 20).adat_display(), "14.30");
        assert_eq!(MetricsTotals::from_parts(223, 75, 49, 20).adat_display(), "17.35");
        // 4639 / 120 = 38.658..
        assert_eq!(MetricsTotals::from_parts(3978, 461, 200, 120).adat_display(), "38.66");
    }

    #[test]
    fn improvement_examples() {
        let trad = [38.66, 18.03, 20.02, 24.61, 18.48, 21.99];
        assert!((improvement(&trad, 15.72).unwrap() - 33.5).abs() < 0.1);
        let referred = [16.55, 16.73, 18.60, 16.55, 16.53];
        assert!((improvement(&referred, 15.72).unwrap() - 7.5).abs() < 0.1);
        assert_eq!(improvement(&[10.0], 10.0).unwrap(), 0.0);
        assert_eq!(improvement(&[], 1.0), Err(MetricsError::EmptyBaseline));
    }

    #[test]
    fn energy_examples() {
        let m = EnergyModel::default();
        assert_eq!(energy_saved(5, &m).unwrap().energy_fj, 300.0);
        let two = energy_saved(2, &m).unwrap();
        assert_eq!((two.energy_fj, two.heat), (0.0, 0.0));
        assert_eq!(energy_saved(10, &m).unwrap().energy_fj, 800.0);
        assert_eq!(energy_saved(1, &m), Err(MetricsError::TooFewAccesses(1)));
        assert!(EnergyModel::new(0.0, 1.0).is_err());
        assert!(EnergyModel::new(1.0, -1.0).is_err());
    }

    #[test]
    fn csv_layouts() {
        let g = DiskGeometry::standard(1);
        let steps = replay(&g, addr(50, 1, 0), &[addr(52, 1, 1)]).unwrap();
        assert_eq!(trace_csv(&steps), format!("{TRACE_CSV_HEADER}\n1,52,1,1,2,1,1,4\n"));
        let t = totals(&steps, 1).unwrap();
        let text = totals_csv([("fcfs", &t)]);
        let rows = parse_totals_csv(&text).unwrap();
        assert_eq!(rows[0].algorithm, "fcfs");
        assert_eq!((rows[0].tskt, rows[0].trl, rows[0].tdtt, rows[0].tdat), t.as_tuple());
        assert_eq!(rows[0].adat, "4.00");
        assert!(parse_totals_csv("nope\n").is_err());
    }
}
