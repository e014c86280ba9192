//! Ground truth for the disk surface: which addresses hold an unreadable bit,
//! what that bit really is, and how often each address has been probed.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::PhysicalAddress;
use crate::metrics::{energy_saved, EnergyModel, MetricsError, Savings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorHealth {
    Healthy,
    /// Holds a bit the head cannot read; `true_bit` is its real value.
    Bad { true_bit: u8 },
}

/// Bad addresses declared by a scenario. Absent addresses are healthy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultTable {
    entries: BTreeMap<PhysicalAddress, SectorHealth>,
}

impl FaultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mark_bad(&mut self, address: PhysicalAddress, true_bit: u8) {
        self.entries.insert(address, SectorHealth::Bad { true_bit: true_bit & 1 });
    }

    pub fn health(&self, address: PhysicalAddress) -> SectorHealth {
        self.entries.get(&address).copied().unwrap_or(SectorHealth::Healthy)
    }

    pub fn is_bad(&self, address: PhysicalAddress) -> bool {
        matches!(self.health(address), SectorHealth::Bad { .. })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Bad addresses with their true bit, in address order.
    pub fn bad_entries(&self) -> impl Iterator<Item = (PhysicalAddress, u8)> + '_ {
        self.entries.iter().filter_map(|(a, h)| match h {
            SectorHealth::Bad { true_bit } => Some((*a, *true_bit)),
            SectorHealth::Healthy => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessOutcome {
    Readable,
    Unreadable,
}

/// A fault table plus the probe counters of one run.
#[derive(Debug, Clone, Default)]
pub struct FaultModel {
    table: FaultTable,
    probe_counts: BTreeMap<PhysicalAddress, u64>,
}

impl FaultModel {
    pub fn new(table: FaultTable) -> Self {
        Self { table, probe_counts: BTreeMap::new() }
    }

    pub fn healthy() -> Self {
        Self::default()
    }

    pub fn table(&self) -> &FaultTable {
        &self.table
    }

    pub fn health(&self, address: PhysicalAddress) -> SectorHealth {
        self.table.health(address)
    }

    /// One physical read attempt.
    pub fn access(&mut self, address: PhysicalAddress) -> AccessOutcome {
        *self.probe_counts.entry(address).or_insert(0) += 1;
        if self.table.is_bad(address) {
            AccessOutcome::Unreadable
        } else {
            AccessOutcome::Readable
        }
    }

    pub fn probe_count(&self, address: PhysicalAddress) -> u64 {
        self.probe_counts.get(&address).copied().unwrap_or(0)
    }

    pub fn probe_counts(&self) -> &BTreeMap<PhysicalAddress, u64> {
        &self.probe_counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsRow {
    pub address: PhysicalAddress,
    pub probes: u64,
    pub savings: Savings,
}

/// Projected savings for each resolved address if it were read
/// `projected_accesses_n` times.
pub fn savings_report(
    model: &FaultModel,
    resolved: &BTreeSet<PhysicalAddress>,
    energy: &EnergyModel,
    projected_accesses_n: u64,
) -> Result<Vec<SavingsRow>, MetricsError> {
    resolved
        .iter()
        .map(|&address| {
            Ok(SavingsRow {
                address,
                probes: model.probe_count(address),
                savings: energy_saved(projected_accesses_n, energy)?,
            })
        })
        .collect()
}
