use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::xeb::simulate;
use crate::error::{Error, Result};
use crate::sim::{EncodingMap, IonSpec, NativeGate, Register};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvLayout {
    /// One qubit per ion, auxiliary ion last.
    OneQubitIons,
    /// Two qubits per data ion under M1, one-qubit auxiliary ion last.
    TwoQubitIons,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCount {
    pub intra: usize,
    pub inter: usize,
}

#[derive(Clone, Debug)]
pub struct BvCircuit {
    pub register: Register,
    /// State preparation: |+⟩ on data qubits with s_i = 1, |−⟩ on the auxiliary qubit. Not counted.
    pub prep: Vec<NativeGate>,
    /// Oracle followed by the readout basis change.
    pub gates: Vec<NativeGate>,
    pub counts: GateCount,
    /// Global qubit index of each bit of s.
    pub data_qubits: Vec<usize>,
    pub secret: Vec<bool>,
}

impl BvCircuit {
    /// Probability that a noiseless measurement of the data qubits returns s.
    pub fn success_probability(&self) -> Result<f64> {
        let all: Vec<NativeGate> = self.prep.iter().chain(&self.gates).cloned().collect();
        let probs = simulate(&self.register, &all)?.probabilities();
        let mut total = 0.0;
        for (idx, p) in probs.iter().enumerate() {
            if self.data_qubits.iter().zip(&self.secret).all(|(&q, &b)| (self.register.qubit_value(idx, q) == 1) == b) {
                total += p;
            }
        }
        Ok(total)
    }
}

/// Mask of virtual qubit k in an M1 label of `bits` bits.
fn mask(bits: usize, k: usize) -> usize {
    1 << (bits - 1 - k)
}

/// Rotation R(θ, φ) applied to every flip pair (a, a ^ mask) of virtual qubit k.
fn qubit_rotation(ion: usize, bits: usize, k: usize, theta: f64, phi: f64) -> Vec<NativeGate> {
    let m = mask(bits, k);
    (0..1 << bits).filter(|a| a & m == 0).map(|a| NativeGate::r(ion, a, a | m, theta, phi)).collect()
}

/// Readout basis change on virtual qubit k of an M1 ion with `bits` qubits, in applied order.
///
/// For two-qubit ions this is −H in three pulses. For one-qubit ions it is the single pulse
/// R(−π/4, π/2), which sends |+⟩ → |0⟩ and |−⟩ → −|1⟩.
pub fn hadamard_pulses(ion: usize, bits: usize, k: usize) -> Result<Vec<NativeGate>> {
    match bits {
        1 => Ok(vec![NativeGate::r(ion, 0, 1, -FRAC_PI_4, FRAC_PI_2)]),
        2 => {
            let m = mask(2, k);
            let mut g = qubit_rotation(ion, 2, k, FRAC_PI_4, 3.0 * FRAC_PI_2);
            let low: Vec<usize> = (0..4).filter(|a| a & m == 0).collect();
            g.push(NativeGate::r(ion, low[0], low[1], PI, 0.0));
            Ok(g)
        }
        _ => Err(Error::Unsupported(format!("no Hadamard decomposition for {bits} qubits per ion"))),
    }
}

/// CNOT between two one-qubit ions in five pulses, applied order.
fn cnot_single(c: usize, t: usize) -> [NativeGate; 5] {
    [
        NativeGate::r(c, 0, 1, FRAC_PI_4, FRAC_PI_2),
        NativeGate::ms(c, t, (0, 1), (0, 1), -FRAC_PI_4),
        NativeGate::r(c, 0, 1, FRAC_PI_4, 0.0),
        NativeGate::r(t, 0, 1, FRAC_PI_4, 0.0),
        NativeGate::r(c, 0, 1, -FRAC_PI_4, FRAC_PI_2),
    ]
}

/// CNOT from the selected qubits of a two-qubit M1 ion onto a one-qubit ion (one R and one MS).
fn cnot_pair(ion: usize, aux: usize, q0: bool, q1: bool) -> [NativeGate; 2] {
    let pair = match (q0, q1) {
        (true, false) => (2, 3),
        (false, true) => (1, 3),
        _ => (1, 2),
    };
    [NativeGate::r(ion, pair.0, pair.1, FRAC_PI_2, 0.0), NativeGate::ms(ion, aux, pair, (0, 1), -FRAC_PI_2)]
}

pub fn build_bv(s: &[bool], layout: BvLayout) -> Result<BvCircuit> {
    let bits = match layout {
        BvLayout::OneQubitIons => 1,
        BvLayout::TwoQubitIons => 2,
    };
    if !s.len().is_multiple_of(bits) {
        return Err(Error::Param(format!("secret of length {} does not fill ions of {bits} qubits", s.len())));
    }
    let data_ions = s.len() / bits;
    let d = 1 << bits;
    let mut ions = (0..data_ions).map(|_| IonSpec::all_to_all(d, EncodingMap::m1(d)?)).collect::<Result<Vec<_>>>()?;
    ions.push(IonSpec::qudit(2)?);
    let register = Register::build(ions)?;
    let aux = data_ions;

    let mut prep = Vec::new();
    for (i, &b) in s.iter().enumerate() {
        if b {
            prep.extend(qubit_rotation(i / bits, bits, i % bits, FRAC_PI_4, FRAC_PI_2));
        }
    }
    prep.push(NativeGate::r(aux, 0, 1, FRAC_PI_4, 3.0 * FRAC_PI_2));

    let mut gates = Vec::new();
    for ion in 0..data_ions {
        let ones = &s[ion * bits..(ion + 1) * bits];
        match layout {
            BvLayout::OneQubitIons if ones[0] => gates.extend(cnot_single(ion, aux)),
            BvLayout::TwoQubitIons if ones.iter().any(|&b| b) => gates.extend(cnot_pair(ion, aux, ones[0], ones[1])),
            _ => {}
        }
    }
    for (i, &b) in s.iter().enumerate() {
        if b {
            gates.extend(hadamard_pulses(i / bits, bits, i % bits)?);
        }
    }
    let inter = gates.iter().filter(|g| g.is_entangling()).count();
    let counts = GateCount { intra: gates.len() - inter, inter };
    let data_qubits = (0..s.len()).map(|i| register.global_qubit(i / bits, i % bits)).collect();
    Ok(BvCircuit { register, prep, gates, counts, data_qubits, secret: s.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, phase_distance, CMat};
    use crate::sim::{circuit_unitary, embed_standard};

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn three_pulse_hadamard() {
        let reg = Register::build(vec![IonSpec::all_to_all(4, EncodingMap::m1(4).unwrap()).unwrap()]).unwrap();
        for k in 0..2 {
            let h = embed_standard(&hadamard(), &[k], &reg).unwrap();
            let g = hadamard_pulses(0, 2, k).unwrap();
            assert_eq!(g.len(), 3);
            assert!(phase_distance(&h, &circuit_unitary(&reg, &g)) < 1e-12);
        }
    }

    #[test]
    fn five_pulse_cnot() {
        let reg = Register::uniform(2, 2).unwrap();
        let mut cnot = CMat::identity(4, 4);
        cnot.swap_rows(2, 3);
        let target = embed_standard(&cnot, &[0, 1], &reg).unwrap();
        assert!(phase_distance(&target, &circuit_unitary(&reg, &cnot_single(0, 1))) < 1e-12);
    }

    #[test]
    fn paired_cnots() {
        let reg = Register::build(vec![IonSpec::all_to_all(4, EncodingMap::m1(4).unwrap()).unwrap(), IonSpec::qudit(2).unwrap()]).unwrap();
        let mut cnot = CMat::identity(4, 4);
        cnot.swap_rows(2, 3);
        let c0 = embed_standard(&cnot, &[0, 2], &reg).unwrap();
        let c1 = embed_standard(&cnot, &[1, 2], &reg).unwrap();
        for (q0, q1, t) in [(true, false, c0.clone()), (false, true, c1.clone()), (true, true, &c0 * &c1)] {
            assert!(phase_distance(&t, &circuit_unitary(&reg, &cnot_pair(0, 1, q0, q1))) < 1e-12);
        }
    }

    #[test]
    fn worked_counts() {
        let c = build_bv(&bits("1010"), BvLayout::TwoQubitIons).unwrap();
        assert_eq!(c.counts, GateCount { intra: 8, inter: 2 });
        let c = build_bv(&bits("1100"), BvLayout::TwoQubitIons).unwrap();
        assert_eq!(c.counts.inter, 1);
        let c = build_bv(&bits("0000"), BvLayout::TwoQubitIons).unwrap();
        assert!(c.gates.is_empty());
        assert!(build_bv(&bits("101"), BvLayout::TwoQubitIons).is_err());
    }

    #[test]
    fn recovers_secret() {
        for s in ["1", "0110", "1011", "111111", "10000001"] {
            for layout in [BvLayout::OneQubitIons, BvLayout::TwoQubitIons] {
                if layout == BvLayout::TwoQubitIons && s.len() % 2 == 1 {
                    continue;
                }
                let c = build_bv(&bits(s), layout).unwrap();
                let p = c.success_probability().unwrap();
                assert!((p - 1.0).abs() < 1e-12, "{s} {layout:?}: {p}");
            }
        }
    }
}
