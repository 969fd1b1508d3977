//! Compilation against hardware coupling graphs: basis translation, initial
//! layout and SWAP routing. The compiled width, depth and 2Q count are the
//! provider-visible routing tax.

mod decompose;
mod layout;
mod sabre;
mod topology;

pub use decompose::{decompose_to_basis, BASIS};
pub use layout::{initial_layout, perfect_layout};
pub use sabre::{route, route_with_layout, routing_overhead, CompiledCircuit, RoutingOverhead, LOOKAHEAD_WINDOW};
pub use topology::{build_topology, heavy_hex_shape, CouplingGraph, TopologyKind};

use thiserror::Error;

use crate::circuit::GateKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouterError {
    #[error("invalid topology size: {0}")]
    InvalidSize(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("unsupported gate {0:?}")]
    UnsupportedGate(GateKind),
    #[error("circuit is not in the basis gate set: found {0:?}")]
    NotBasis(GateKind),
    #[error("circuit needs {need} qubits but the device has {have}")]
    TooWide { need: usize, have: usize },
    #[error("depth ratio undefined for zero logical depth")]
    UndefinedRatio,
}
