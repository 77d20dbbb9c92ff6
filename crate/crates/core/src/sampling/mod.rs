//! Random circuit ensembles, cross-entropy statistics and Bernstein–Vazirani circuits.

mod bv;
mod circuits;
mod xeb;

pub use bv::{build_bv, hadamard_pulses, BvCircuit, BvLayout, GateCount};
pub use circuits::{build_brickwork, build_longrange, Architecture, BrickStream, Circuit, CircuitPolicy, Connectivity};
pub use xeb::{
    estimate_second_moment, estimate_xeb, fit_n_log_n, gates_to_threshold, second_moment, simulate, xeb_exact, CrossingRule, Statistic,
    ThresholdStats, XebMode, XebResult, MAX_QUBITS,
};
