//! Simulation, compilation and analysis toolkit for trapped-ion registers that
//! hold several virtual qubits per ion.

pub mod compiler;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod qec;
pub mod sampling;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use sim::{EncodingMap, IonSpec, NativeGate, QubitOrder, Register, StateVector};
