//! Pulse synthesis, sequence verification and the appendix-table audit.

mod exact;
pub mod expr;
mod tables;
mod variational;

use serde::{Deserialize, Serialize};

pub use exact::{block_path, givens_path, su2_as_two_pulses, synthesize_exact, ExactOptions};
pub use tables::{
    builtin_tables, load_tables, run_table_suite, Alternative, AuditOptions, Convention, ConventionStatus, TableAuditEntry, TableFile,
    TableRow, TargetSpec,
};
pub use variational::{optimize_slots, prune_identities, pulse_search, synthesize_variational, Budget, SlotSpec, VariationalReport};

use crate::linalg::{phase_distance, CMat};
use crate::sim::{circuit_unitary, NativeGate, Register};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CompositionOrder {
    /// The first listed gate acts first.
    #[default]
    LeftmostFirst,
    /// The list reads as a matrix product: the last listed gate acts first.
    LeftmostLast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub gates: Vec<NativeGate>,
    pub order: CompositionOrder,
}

impl PulseSequence {
    pub fn new(gates: Vec<NativeGate>) -> Self {
        Self { gates, order: CompositionOrder::LeftmostFirst }
    }

    pub fn with_order(gates: Vec<NativeGate>, order: CompositionOrder) -> Self {
        Self { gates, order }
    }

    /// Gates in the order they act.
    pub fn applied(&self) -> Vec<NativeGate> {
        match self.order {
            CompositionOrder::LeftmostFirst => self.gates.clone(),
            CompositionOrder::LeftmostLast => self.gates.iter().rev().cloned().collect(),
        }
    }

    pub fn unitary(&self, reg: &Register) -> CMat {
        circuit_unitary(reg, &self.applied())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn ms_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    /// Move every gate from ion 0 to `ion` (single-ion sequences).
    pub fn on_ion(mut self, ion: usize) -> Self {
        for g in &mut self.gates {
            if let NativeGate::R { ion: i, .. } = g {
                *i = ion;
            }
        }
        self
    }
}

/// 1 − |Tr(U†V)|/dim for the sequence product V.
pub fn verify_sequence(reg: &Register, seq: &PulseSequence, target: &CMat) -> f64 {
    phase_distance(target, &seq.unitary(reg))
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisReport {
    pub sequence: PulseSequence,
    pub distance: f64,
    pub pulse_count: usize,
    pub bound: usize,
    pub within_bound: bool,
    pub method: String,
}

/// d(d−1)/2 + 2(d−1).
pub fn pulse_bound(d: usize) -> usize {
    d * (d - 1) / 2 + 2 * (d - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, kron, pauli};
    use crate::sim::Register;

    #[test]
    fn empty_sequence_is_identity() {
        let reg = Register::uniform(1, 4).unwrap();
        let d = verify_sequence(&reg, &PulseSequence::new(vec![]), &CMat::identity(4, 4));
        assert_eq!(d, 0.0);
    }

    #[test]
    fn xx_from_outer_and_inner_pairs() {
        let reg = Register::uniform(1, 4).unwrap();
        let j = 0.61;
        let xx = kron(&pauli('X'), &pauli('X'));
        let target = crate::sim::embed_standard(&expm_hermitian(&xx, j), &[0, 1], &reg).unwrap();
        let seq = PulseSequence::new(vec![NativeGate::r(0, 0, 3, j, 0.0), NativeGate::r(0, 1, 2, j, 0.0)]);
        assert!(verify_sequence(&reg, &seq, &target) < 1e-12);
    }

    #[test]
    fn composition_order_reverses() {
        let reg = Register::uniform(1, 4).unwrap();
        let gates = vec![NativeGate::r(0, 0, 1, 0.3, 0.1), NativeGate::r(0, 1, 2, 0.7, 0.4)];
        let a = PulseSequence::with_order(gates.clone(), CompositionOrder::LeftmostFirst).unwrap_unitary(&reg);
        let b = PulseSequence::with_order(gates.into_iter().rev().collect(), CompositionOrder::LeftmostLast).unwrap_unitary(&reg);
        assert!((a - b).norm() < 1e-14);
    }

    impl PulseSequence {
        fn unwrap_unitary(&self, reg: &Register) -> CMat {
            self.unitary(reg)
        }
    }
}
