//! Dense statevector simulator.
//!
//! The register convention throughout: qubit `i` is bit `i` of the basis
//! index, so |q_{n-1} ... q_1 q_0> maps to index q_0 + 2 q_1 + ... .

mod circuit;
mod gate;
mod sample;
mod state;

pub use circuit::Circuit;
pub use gate::{BasisPredicate, Control, GateKind, GateOp};
pub use sample::{sample, ShotRecord};
pub use state::{QuantumState, DEFAULT_QUBIT_CAP, MAX_QUBITS};
