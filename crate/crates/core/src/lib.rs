//! Planning the distribution of CZ+unary circuits over heterogeneous quantum
//! networks with cat-entanglement migrations and teleportations.
//!
//! The pipeline for a fixed circuit window picks qubit homes by Tabu search
//! over a pairwise interaction estimate, covers the resulting non-local gates
//! with budgeted multiplicative-weights selection, and repairs any
//! execution-memory overflow. Teleportation planners cut the circuit into
//! windows and stitch the per-window solutions together.

pub mod circuit;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generators;
pub mod interaction;
pub mod network;
pub mod oracle;
pub mod planner;
pub mod repair;
pub mod tabu;


pub type Qubit = usize;
pub type Node = usize;
/// Position on the global timebase. Gates sit at odd instants.
pub type Instant = u32;
pub type Cost = u64;

pub use circuit::{Circuit, CircuitView, Gate, GateKind, GateOp};
pub use coverage::{CoverMode, Migration};
pub use error::{Error, Result};
pub use network::{DistanceMatrix, Network};
pub use planner::{Plan, PlanParams, Teleportation};
pub use tabu::{Assignment, TabuParams};
