//! Scenarios: the text format, the six reference workloads and a seeded
//! generator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::faults::FaultTable;
use crate::geometry::{parse_index, DiskGeometry, GeometryError, MemoryRequest, Op, PhysicalAddress};
use crate::schedulers::{Algorithm, Direction};

/// A static disk queue plus everything needed to run it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub geometry: DiskGeometry,
    pub initial_head: PhysicalAddress,
    /// Arrival order.
    pub requests: Vec<MemoryRequest>,
    pub faults: FaultTable,
    /// Initial sweep direction per scheduler, for schedulers that have one.
    pub direction_hints: BTreeMap<Algorithm, Direction>,
}

impl Scenario {
    pub fn new(geometry: DiskGeometry, initial_head: PhysicalAddress, requests: Vec<MemoryRequest>) -> Self {
        Self { geometry, initial_head, requests, faults: FaultTable::new(), direction_hints: BTreeMap::new() }
    }

    /// Checks the head, every request and every fault entry against the geometry.
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.geometry.validate(self.initial_head)?;
        for r in &self.requests {
            self.geometry.validate(r.address)?;
        }
        for (a, _) in self.faults.bad_entries() {
            self.geometry.validate(a)?;
        }
        Ok(())
    }

    /// Same scenario restricted to the first `n` requests.
    pub fn prefix(&self, n: usize) -> Scenario {
        let mut s = self.clone();
        s.requests.truncate(n);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{0}")]
    Bounds(GeometryError),
    #[error("duplicate {0} directive")]
    Duplicate(&'static str),
    #[error("syntax error: missing {0} directive")]
    Missing(&'static str),
}

/// Parse failure. `line` is 1-based; 0 means the whole file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {kind}")]
    At { line: usize, kind: ScenarioErrorKind },
    #[error("{0}")]
    File(ScenarioErrorKind),
    #[error("no built-in case {0} (valid: 1..6)")]
    UnknownCase(u32),
    #[error("bad_count {bad} exceeds request_count {requests}")]
    TooManyBad { bad: usize, requests: usize },
    #[error("only {distinct} distinct request addresses, cannot mark {bad} bad")]
    NotEnoughDistinct { bad: usize, distinct: usize },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::At { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub fn kind(&self) -> Option<&ScenarioErrorKind> {
        match self {
            ScenarioError::At { kind, .. } | ScenarioError::File(kind) => Some(kind),
            _ => None,
        }
    }
}

fn at(line: usize, kind: ScenarioErrorKind) -> ScenarioError {
    ScenarioError::At { line, kind }
}

fn syntax(line: usize, msg: impl Into<String>) -> ScenarioError {
    at(line, ScenarioErrorKind::Syntax(msg.into()))
}

fn key_value(line: usize, token: &str) -> Result<(&str, &str), ScenarioError> {
    token.split_once('=').ok_or_else(|| syntax(line, format!("expected key=value, got {token:?}")))
}

fn index(line: usize, token: Option<&str>) -> Result<PhysicalAddress, ScenarioError> {
    let token = token.ok_or_else(|| syntax(line, "missing index"))?;
    parse_index(token).map_err(|e| syntax(line, e.to_string()))
}

fn number(line: usize, key: &str, value: &str) -> Result<u32, ScenarioError> {
    value.parse().map_err(|_| syntax(line, format!("{key} must be a non-negative integer, got {value:?}")))
}

/// Parses the line-oriented scenario format:
///
/// ```text
/// geometry platters=1 tracks=200 sectors=8
/// head 65t1p4s
/// request 15t1p2s
/// request 48t1p7s op=w
/// bad 48t1p7s bit=1
/// direction scan=up
/// ```
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut geometry: Option<(usize, DiskGeometry)> = None;
    let mut head: Option<(usize, PhysicalAddress)> = None;
    let mut requests: Vec<(usize, PhysicalAddress, Op)> = Vec::new();
    let mut bad: Vec<(usize, PhysicalAddress, u8)> = Vec::new();
    let mut hints = BTreeMap::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(directive) = tokens.next() else { continue };
        match directive {
            "geometry" => {
                if geometry.is_some() {
                    return Err(at(line, ScenarioErrorKind::Duplicate("geometry")));
                }
                let (mut p, mut t, mut s) = (None, None, None);
                for token in tokens.by_ref() {
                    let (k, v) = key_value(line, token)?;
                    let slot = match k {
                        "platters" => &mut p,
                        "tracks" => &mut t,
                        "sectors" => &mut s,
                        other => return Err(syntax(line, format!("unknown geometry key {other:?}"))),
                    };
                    if slot.replace(number(line, k, v)?).is_some() {
                        return Err(syntax(line, format!("geometry key {k} given twice")));
                    }
                }
                let (Some(p), Some(t), Some(s)) = (p, t, s) else {
                    return Err(syntax(line, "geometry needs platters=, tracks= and sectors="));
                };
                let g = DiskGeometry::new(p, t, s).map_err(|e| at(line, ScenarioErrorKind::Bounds(e)))?;
                geometry = Some((line, g));
            }
            "head" => {
                if head.is_some() {
                    return Err(at(line, ScenarioErrorKind::Duplicate("head")));
                }
                head = Some((line, index(line, tokens.next())?));
            }
            "request" => {
                let address = index(line, tokens.next())?;
                let op = match tokens.next() {
                    None => Op::Read,
                    Some(token) => match key_value(line, token)? {
                        ("op", "r") => Op::Read,
                        ("op", "w") => Op::Write,
                        _ => return Err(syntax(line, format!("expected op=r or op=w, got {token:?}"))),
                    },
                };
                requests.push((line, address, op));
            }
            "bad" => {
                let address = index(line, tokens.next())?;
                let token = tokens.next().ok_or_else(|| syntax(line, "bad needs bit=0 or bit=1"))?;
                let bit = match key_value(line, token)? {
                    ("bit", "0") => 0,
                    ("bit", "1") => 1,
                    _ => return Err(syntax(line, format!("expected bit=0 or bit=1, got {token:?}"))),
                };
                bad.push((line, address, bit));
            }
            "direction" => {
                let token = tokens.next().ok_or_else(|| syntax(line, "direction needs <scheduler>=<up|down>"))?;
                let (k, v) = key_value(line, token)?;
                let alg: Algorithm = k.parse().map_err(|e: crate::schedulers::UnknownAlgorithm| syntax(line, e.to_string()))?;
                let dir: Direction = v.parse().map_err(|e: String| syntax(line, e))?;
                hints.insert(alg, dir);
            }
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        }
        if let Some(extra) = tokens.next() {
            return Err(syntax(line, format!("unexpected token {extra:?}")));
        }
    }

    let (_, geometry) = geometry.ok_or(ScenarioError::File(ScenarioErrorKind::Missing("geometry")))?;
    let (head_line, initial_head) = head.ok_or(ScenarioError::File(ScenarioErrorKind::Missing("head")))?;
    let check = |line: usize, a: PhysicalAddress| {
        geometry.validate(a).map_err(|e| at(line, ScenarioErrorKind::Bounds(e)))
    };
    check(head_line, initial_head)?;
    let mut scenario_requests = Vec::with_capacity(requests.len());
    for (rank, (line, address, op)) in requests.into_iter().enumerate() {
        check(line, address)?;
        scenario_requests.push(MemoryRequest::new(address, op, rank));
    }
    let mut faults = FaultTable::new();
    for (line, address, bit) in bad {
        check(line, address)?;
        if faults.is_bad(address) {
            return Err(syntax(line, format!("{address} already marked bad")));
        }
        faults.mark_bad(address, bit);
    }
    Ok(Scenario { geometry, initial_head, requests: scenario_requests, faults, direction_hints: hints })
}

/// Canonical text form; `parse_scenario(&render(s)) == s` for any scenario
/// whose requests carry bsi 0 and ranks in file order.
pub fn render(scenario: &Scenario) -> String {
    let g = &scenario.geometry;
    let mut out = String::new();
    let _ = writeln!(out, "geometry platters={} tracks={} sectors={}", g.num_platters, g.num_tracks, g.sectors_per_track);
    let _ = writeln!(out, "head {}", scenario.initial_head);
    for r in &scenario.requests {
        match r.op {
            Op::Read => {
                let _ = writeln!(out, "request {}", r.address);
            }
            Op::Write => {
                let _ = writeln!(out, "request {} op=w", r.address);
            }
        }
    }
    for (a, bit) in scenario.faults.bad_entries() {
        let _ = writeln!(out, "bad {a} bit={bit}");
    }
    for (alg, dir) in &scenario.direction_hints {
        let _ = writeln!(out, "direction {}={}", alg, dir.name());
    }
    out
}

const CASES: [(u32, &str, &str); 6] = [
    (
        1,
        "65t1p4s",
        "15t1p2s 48t1p7s 48t1p0s 48t1p4s 48t1p6s 60t1p1s 90t1p6s 90t1p1s 90t1p4s 108t1p7s \
         108t1p2s 108t1p5s 126t1p7s 168t1p1s 168t1p5s 168t1p4s 179t1p4s 179t1p2s 179t1p6s 196t1p7s",
    ),
    (
        1,
        "75t1p7s",
        "185t1p5s 167t1p7s 167t1p1s 167t1p4s 143t1p1s 143t1p6s 129t1p0s 129t1p4s 129t1p2s 118t1p6s \
         118t1p2s 118t1p5s 106t1p4s 65t1p3s 65t1p7s 65t1p5s 42t1p5s 42t1p2s 42t1p6s 28t1p7s",
    ),
    (
        1,
        "165t1p7s",
        "45t1p5s 98t1p2s 15t1p3s 98t1p6s 160t1p2s 198t1p1s 15t1p0s 45t1p0s 98t1p4s 160t1p7s \
         198t1p6s 65t1p2s 45t1p6s 160t1p6s 198t1p4s 113t1p4s 15t1p6s 59t1p0s 15t1p4s 5t1p2s",
    ),
    (
        4,
        "140t1p0s",
        "18t1p3s 25t2p6s 25t2p4s 25t3p0s 32t2p2s 46t1p4s 46t4p7s 46t1p2s 78t3p5s 95t4p2s \
         95t2p5s 95t1p1s 95t2p6s 123t4p2s 148t1p0s 156t3p6s 156t3p7s 156t3p5s 156t2p1s 197t2p7s",
    ),
    (
        4,
        "65t1p4s",
        "196t4p7s 167t1p4s 167t2p7s 167t1p2s 167t2p3s 143t4p2s 143t2p0s 126t3p1s 126t4p6s 126t4p4s \
         98t4p6s 98t2p5s 98t1p2s 63t1p7s 63t4p0s 63t1p6s 42t3p4s 19t4p6s 19t1p2s 19t2p4s",
    ),
    (
        4,
        "90t1p6s",
        "55t3p1s 15t4p6s 105t2p4s 48t4p2s 83t1p6s 165t2p3s 39t4p6s 83t4p7s 22t4p7s 165t4p5s \
         105t3p1s 15t2p4s 83t3p3s 165t2p7s 39t1p2s 15t2p0s 105t2p6s 39t4p7s 22t2p0s 165t1p6s",
    ),
];

/// Initial direction of SCAN, C-SCAN, LOOK and C-LOOK that reproduces the
/// published totals of each reference case.
fn case_direction(id: u32) -> Direction {
    if id <= 3 {
        Direction::Down
    } else {
        Direction::Up
    }
}

/// One of the six reference workloads (1..=6).
pub fn builtin_case(id: u32) -> Result<Scenario, ScenarioError> {
    let (platters, head, queue) = *CASES
        .get((id as usize).wrapping_sub(1))
        .ok_or(ScenarioError::UnknownCase(id))?;
    let requests = queue
        .split_whitespace()
        .enumerate()
        .map(|(rank, t)| MemoryRequest::new(parse_index(t).expect("built-in index"), Op::Read, rank))
        .collect();
    let mut s = Scenario::new(DiskGeometry::standard(platters), parse_index(head).expect("built-in head"), requests);
    for alg in [Algorithm::Scan, Algorithm::Cscan, Algorithm::Look, Algorithm::Clook] {
        s.direction_hints.insert(alg, case_direction(id));
    }
    Ok(s)
}

pub fn builtin_cases() -> Vec<Scenario> {
    (1..=6).map(|id| builtin_case(id).expect("valid id")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackOrder {
    Ascending,
    Descending,
    Random,
}

impl std::str::FromStr for TrackOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" | "ascending" => Ok(TrackOrder::Ascending),
            "desc" | "descending" => Ok(TrackOrder::Descending),
            "random" => Ok(TrackOrder::Random),
            other => Err(format!("order must be asc, desc or random, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub request_count: usize,
    pub order: TrackOrder,
    pub bad_count: usize,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(request_count: usize, order: TrackOrder, seed: u64) -> Self {
        Self { request_count, order, bad_count: 0, seed }
    }
}

/// Fraction of generated requests that are writes.
const WRITE_PROBABILITY: f64 = 0.25;

/// Seeded random scenario. Addresses are uniform over the geometry; the
/// head is uniform too.
pub fn generate(geometry: DiskGeometry, params: GeneratorParams) -> Result<Scenario, ScenarioError> {
    if params.bad_count > params.request_count {
        return Err(ScenarioError::TooManyBad { bad: params.bad_count, requests: params.request_count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let address = |rng: &mut ChaCha8Rng| {
        PhysicalAddress::new(
            rng.gen_range(0..geometry.num_tracks),
            rng.gen_range(1..=geometry.num_platters),
            rng.gen_range(0..geometry.sectors_per_track),
        )
    };
    let head = address(&mut rng);
    let mut drawn: Vec<(PhysicalAddress, Op)> = (0..params.request_count)
        .map(|_| {
            let a = address(&mut rng);
            let op = if rng.gen_bool(WRITE_PROBABILITY) { Op::Write } else { Op::Read };
            (a, op)
        })
        .collect();
    match params.order {
        TrackOrder::Ascending => drawn.sort_by_key(|(a, _)| a.track),
        TrackOrder::Descending => drawn.sort_by_key(|(a, _)| std::cmp::Reverse(a.track)),
        TrackOrder::Random => {}
    }
    let requests: Vec<MemoryRequest> =
        drawn.into_iter().enumerate().map(|(rank, (a, op))| MemoryRequest::new(a, op, rank)).collect();

    let mut distinct: Vec<PhysicalAddress> = requests.iter().map(|r| r.address).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < params.bad_count {
        return Err(ScenarioError::NotEnoughDistinct { bad: params.bad_count, distinct: distinct.len() });
    }
    let mut scenario = Scenario::new(geometry, head, requests);
    for &a in distinct.choose_multiple(&mut rng, params.bad_count) {
        scenario.faults.mark_bad(a, rng.gen_range(0..=1));
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "geometry platters=1 tracks=200 sectors=8\nhead 65t1p4s\nrequest 15t1p2s\n";

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.requests.len(), 1);
        assert_eq!(s.initial_head, PhysicalAddress::new(65, 1, 4));
        assert_eq!(s.requests[0].address, PhysicalAddress::new(15, 1, 2));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# queue\n\ngeometry platters=2 tracks=10 sectors=4 # shape\nhead 1t1p0s\nrequest 2t2p3s op=w\nbad 2t2p3s bit=1\ndirection look=up\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.requests[0].op, Op::Write);
        assert!(s.faults.is_bad(PhysicalAddress::new(2, 2, 3)));
        assert_eq!(s.direction_hints[&Algorithm::Look], Direction::Up);
    }

    #[test]
    fn missing_head_is_syntax_error() {
        let err = parse_scenario("geometry platters=1 tracks=200 sectors=8\nrequest 15t1p2s\n").unwrap_err();
        assert!(err.to_string().contains("syntax error"), "{err}");
        assert_eq!(err.kind(), Some(&ScenarioErrorKind::Missing("head")));
    }

    #[test]
    fn bounds_error_reports_line() {
        let err = parse_scenario("geometry platters=1 tracks=200 sectors=8\nhead 65t1p4s\nrequest 15t1p9s\n").unwrap_err();
        assert_eq!(err.line(), Some(3));
        assert!(matches!(err.kind(), Some(ScenarioErrorKind::Bounds(_))));
    }

    #[test]
    fn rejects_duplicates_and_unknown_lines() {
        let dup = format!("{MINIMAL}head 1t1p0s\n");
        assert!(matches!(parse_scenario(&dup).unwrap_err().kind(), Some(ScenarioErrorKind::Duplicate("head"))));
        let dup = format!("{MINIMAL}geometry platters=1 tracks=200 sectors=8\n");
        assert_eq!(parse_scenario(&dup).unwrap_err().line(), Some(4));
        let unknown = format!("{MINIMAL}seek 4\n");
        assert_eq!(parse_scenario(&unknown).unwrap_err().line(), Some(4));
        let junk = format!("{MINIMAL}request 1t1p1s op=x\n");
        assert!(parse_scenario(&junk).is_err());
        let bad_bit = format!("{MINIMAL}bad 15t1p2s bit=2\n");
        assert!(parse_scenario(&bad_bit).is_err());
        let alg = format!("{MINIMAL}direction warp=up\n");
        assert!(parse_scenario(&alg).is_err());
    }

    #[test]
    fn empty_queue_parses() {
        let s = parse_scenario("geometry platters=1 tracks=200 sectors=8\nhead 0t1p0s\n").unwrap();
        assert!(s.requests.is_empty());
    }

    #[test]
    fn builtin_shapes() {
        let c1 = builtin_case(1).unwrap();
        assert_eq!(c1.requests.len(), 20);
        assert!(c1.requests.iter().all(|r| r.address.platter == 1));
        let tracks: Vec<_> = c1.requests.iter().map(|r| r.address.track).collect();
        assert!(tracks.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!((tracks[0], tracks[19]), (15, 196));

        let c4 = builtin_case(4).unwrap();
        let platters: std::collections::BTreeSet<_> = c4.requests.iter().map(|r| r.address.platter).collect();
        assert_eq!(platters.into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        let (lo, hi) = crate::schedulers::track_span(&c4).unwrap();
        assert_eq!((lo, hi), (18, 197));

        let c6 = builtin_case(6).unwrap();
        assert_eq!(c6.initial_head, PhysicalAddress::new(90, 1, 6));
        assert_eq!(crate::schedulers::track_span(&c6), Some((15, 165)));

        for s in builtin_cases() {
            assert_eq!(s.requests.len(), 20);
            s.validate().unwrap();
        }
        assert!(builtin_case(0).is_err());
        assert!(builtin_case(7).is_err());
    }

    #[test]
    fn builtin_round_trip() {
        for s in builtin_cases() {
            assert_eq!(parse_scenario(&render(&s)).unwrap(), s);
        }
    }

    #[test]
    fn generator_examples() {
        let g = DiskGeometry::standard(4);
        let p = GeneratorParams { request_count: 20, order: TrackOrder::Random, bad_count: 2, seed: 7 };
        let a = generate(g, p).unwrap();
        assert_eq!(a, generate(g, p).unwrap());
        assert_eq!(a.faults.len(), 2);
        for (addr, _) in a.faults.bad_entries() {
            assert!(a.requests.iter().any(|r| r.address == addr));
        }
        let asc = generate(g, GeneratorParams { order: TrackOrder::Ascending, ..p }).unwrap();
        assert!(asc.requests.windows(2).all(|w| w[0].address.track <= w[1].address.track));
        let desc = generate(g, GeneratorParams { order: TrackOrder::Descending, ..p }).unwrap();
        assert!(desc.requests.windows(2).all(|w| w[0].address.track >= w[1].address.track));
        assert!(generate(g, GeneratorParams { bad_count: 21, ..p }).is_err());
    }

    proptest! {
        #[test]
        fn generated_round_trip(seed in any::<u64>(), n in 0usize..30, platters in 1u32..5, bad in 0usize..3) {
            let g = DiskGeometry::new(platters, 50, 6).unwrap();
            let p = GeneratorParams { request_count: n, order: TrackOrder::Random, bad_count: bad.min(n), seed };
            let s = match generate(g, p) {
                Err(ScenarioError::NotEnoughDistinct { .. }) => return Ok(()),
                other => other.unwrap(),
            };
            s.validate().unwrap();
            prop_assert_eq!(parse_scenario(&render(&s)).unwrap(), s);
        }
    }
}
