//! Register model, native gates and statevector simulation.

mod gate;
mod register;
mod state;
pub mod text;

pub use gate::{NativeGate, Pair};
pub use register::{all_pairs, graph_connected, EncodingMap, IonConfig, IonSpec, QubitOrder, Register, RegisterConfig};
pub use state::{apply_gate, circuit_unitary, embed_standard, sample_indices, sample_measurement, StateVector};
