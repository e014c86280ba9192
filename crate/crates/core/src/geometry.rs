//! Physical disk model and address arithmetic.
//!
//! Platters are numbered from 1, tracks and sectors from 0. An address is
//! written `<track>t<platter>p<sector>s`, e.g. `15t1p2s`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub type TrackId = u32;
pub type PlatterId = u32;
pub type SectorId = u32;

/// Shape of a disk: platter count, tracks per surface and sectors per track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiskGeometry {
    pub num_platters: u32,
    pub num_tracks: u32,
    pub sectors_per_track: u32,
}

impl DiskGeometry {
    pub fn new(num_platters: u32, num_tracks: u32, sectors_per_track: u32) -> Result<Self, GeometryError> {
        if num_platters < 1 {
            return Err(GeometryError::Shape { field: "platters", min: 1, got: num_platters });
        }
        if num_tracks < 1 {
            return Err(GeometryError::Shape { field: "tracks", min: 1, got: num_tracks });
        }
        if sectors_per_track < 2 {
            return Err(GeometryError::Shape { field: "sectors", min: 2, got: sectors_per_track });
        }
        Ok(Self { num_platters, num_tracks, sectors_per_track })
    }

    /// 200 tracks of 8 sectors, the layout of all six reference workloads.
    pub fn standard(num_platters: u32) -> Self {
        Self::new(num_platters, 200, 8).expect("standard geometry is valid")
    }

    /// Highest track id.
    pub fn last_track(&self) -> TrackId {
        self.num_tracks - 1
    }

    pub fn validate(&self, address: PhysicalAddress) -> Result<(), GeometryError> {
        if address.track >= self.num_tracks {
            return Err(GeometryError::OutOfBounds {
                component: Component::Track,
                value: address.track,
                limit: self.num_tracks,
            });
        }
        if address.platter < 1 || address.platter > self.num_platters {
            return Err(GeometryError::OutOfBounds {
                component: Component::Platter,
                value: address.platter,
                limit: self.num_platters,
            });
        }
        if address.sector >= self.sectors_per_track {
            return Err(GeometryError::OutOfBounds {
                component: Component::Sector,
                value: address.sector,
                limit: self.sectors_per_track,
            });
        }
        Ok(())
    }

    /// Every valid address, ordered by (track, platter, sector).
    pub fn addresses(&self) -> impl Iterator<Item = PhysicalAddress> + '_ {
        (0..self.num_tracks).flat_map(move |track| {
            (1..=self.num_platters).flat_map(move |platter| {
                (0..self.sectors_per_track).map(move |sector| PhysicalAddress { track, platter, sector })
            })
        })
    }
}

/// Names one address component in error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Track,
    Platter,
    Sector,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Track => "track",
            Component::Platter => "platter",
            Component::Sector => "sector",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("geometry {field} must be at least {min}, got {got}")]
    Shape { field: &'static str, min: u32, got: u32 },
    /// For the platter the limit is the highest valid id; for track and
    /// sector it is the exclusive upper bound.
    #[error("{component} {value} out of bounds (limit {limit})")]
    OutOfBounds { component: Component, value: u32, limit: u32 },
}

/// One block on the disk: which cylinder, which surface, which angular slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysicalAddress {
    pub track: TrackId,
    pub platter: PlatterId,
    pub sector: SectorId,
}

impl PhysicalAddress {
    pub const fn new(track: TrackId, platter: PlatterId, sector: SectorId) -> Self {
        Self { track, platter, sector }
    }
}

impl fmt::Display for PhysicalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}t{}p{}s", self.track, self.platter, self.sector)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed index {text:?}: {reason}")]
pub struct ParseIndexError {
    pub text: String,
    pub reason: String,
}

impl FromStr for PhysicalAddress {
    type Err = ParseIndexError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_index(text)
    }
}

/// Decodes `<track>t<platter>p<sector>s`. Bounds are not checked here.
pub fn parse_index(text: &str) -> Result<PhysicalAddress, ParseIndexError> {
    let fail = |reason: String| ParseIndexError { text: text.to_string(), reason };
    let mut rest = text;
    let mut take = |suffix: char, component: Component| -> Result<u32, ParseIndexError> {
        let end = rest
            .find(suffix)
            .ok_or_else(|| fail(format!("missing '{suffix}' after {component}")))?;
        let digits = &rest[..end];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(fail(format!("{component} must be a decimal integer, got {digits:?}")));
        }
        let value = digits
            .parse::<u32>()
            .map_err(|_| fail(format!("{component} {digits} does not fit in 32 bits")))?;
        rest = &rest[end + 1..];
        Ok(value)
    };
    let track = take('t', Component::Track)?;
    let platter = take('p', Component::Platter)?;
    let sector = take('s', Component::Sector)?;
    if !rest.is_empty() {
        return Err(fail(format!("trailing characters {rest:?}")));
    }
    Ok(PhysicalAddress { track, platter, sector })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Op {
    #[default]
    Read,
    Write,
}

impl Op {
    pub fn code(self) -> char {
        match self {
            Op::Read => 'r',
            Op::Write => 'w',
        }
    }
}

/// Queued read or write against one address (a disk-queue row).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryRequest {
    pub address: PhysicalAddress,
    pub op: Op,
    /// Failure counter, 0 at boot, 2 once the index is in the bad-sector table.
    pub bsi: u8,
    pub arrival_rank: usize,
}

impl MemoryRequest {
    pub fn new(address: PhysicalAddress, op: Op, arrival_rank: usize) -> Self {
        Self { address, op, bsi: 0, arrival_rank }
    }
}
