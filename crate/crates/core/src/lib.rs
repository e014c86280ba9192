//! Deterministic multi-platter disk-scheduling simulator.
//!
//! Every schedule is priced by one cost model ([`metrics`]): seek in track
//! units, rotational latency in sector units and transfer as head-selection
//! distance plus one unit per request. Eleven baseline schedulers live in
//! [`schedulers`]; the cylinder-ordered scheduler with bad-sector management
//! lives in [`modsbsm`]. [`oracle`] provides an exhaustive optimum and a
//! trace checker used to cross-check everything else.

pub mod faults;
pub mod geometry;
pub mod metrics;
pub mod modsbsm;
pub mod oracle;
pub mod report;
pub mod schedulers;
pub mod workload;

pub use faults::{AccessOutcome, FaultModel, FaultTable, SectorHealth};
pub use geometry::{DiskGeometry, GeometryError, MemoryRequest, Op, ParseIndexError, PhysicalAddress};
pub use metrics::{EnergyModel, MetricsError, MetricsTotals, PathPoint, ServiceStep};
pub use modsbsm::{BadSectorEntry, BadSectorTable, Classification, RunResult};
pub use oracle::{OracleError, OracleResult, Violation};
pub use report::ComparisonReport;
pub use schedulers::{Algorithm, Direction, Schedule, SimulationRun};
pub use workload::{GeneratorParams, Scenario, ScenarioError, TrackOrder};
