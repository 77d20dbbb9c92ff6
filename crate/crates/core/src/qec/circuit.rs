use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported code distance (data and ancilla frames share one u128).
pub const MAX_DISTANCE: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Three-qubit site after the intra-ion parity layer.
    E1,
    /// Three-qubit site after an inter-ion layer.
    E2,
    /// Two-qubit site after a CNOT between one-qubit ions.
    E3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DepolarizingReading {
    /// With probability λ, a uniformly random non-identity Pauli.
    #[default]
    NonIdentity,
    /// With probability λ, a uniformly random Pauli including the identity.
    IncludeIdentity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Intra-ion gate error ε1.
    pub eps1: f64,
    /// ε2 / ε1.
    pub ms_ratio: f64,
    pub reading: DepolarizingReading,
}

impl ChannelModel {
    pub fn new(eps1: f64) -> Result<Self> {
        if !(0.0..=0.1).contains(&eps1) {
            return Err(Error::Param(format!("eps1 = {eps1} outside [0, 0.1]")));
        }
        Ok(Self { eps1, ms_ratio: 10.0, reading: DepolarizingReading::NonIdentity })
    }

    /// Model whose reporting axis p = 14·ε1 equals `p`.
    pub fn from_p(p: f64) -> Result<Self> {
        Self::new(p / 14.0)
    }

    pub fn eps2(&self) -> f64 {
        self.ms_ratio * self.eps1
    }

    /// λ per site: ε1 + ε2 for the three-qubit sites, 4ε1 + ε2 for the two-qubit site.
    pub fn rate(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::E1 | ChannelKind::E2 => self.eps1 + self.eps2(),
            ChannelKind::E3 => 4.0 * self.eps1 + self.eps2(),
        }
    }

    pub fn p(&self) -> f64 {
        14.0 * self.eps1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Op {
    /// CNOT from every control onto the target (a parity CNOT when there are two).
    Cnot { controls: Vec<usize>, target: usize },
    /// Depolarizing site; `None` marks an unused slot of a partly filled ion.
    Channel { qubits: Vec<Option<usize>>, kind: ChannelKind },
}

/// One syndrome-extraction round, repeated `rounds` times, followed by a perfect data readout.
///
/// Data qubits are 0..d, the ancilla of stabilizer Z_k Z_{k+1} is d + k.
#[derive(Clone, Debug, Serialize)]
pub struct NoisyCircuit {
    pub d: usize,
    pub encoding_n: usize,
    pub rounds: usize,
    pub layers: Vec<Vec<Op>>,
}

impl NoisyCircuit {
    pub fn ancilla(&self, k: usize) -> usize {
        self.d + k
    }

    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.layers.iter().flatten()
    }

    pub fn cnot_count(&self) -> usize {
        self.ops().filter(|o| matches!(o, Op::Cnot { .. })).count()
    }

    pub fn sites(&self) -> Vec<(&[Option<usize>], ChannelKind)> {
        self.ops()
            .filter_map(|o| match o {
                Op::Channel { qubits, kind } => Some((qubits.as_slice(), *kind)),
                _ => None,
            })
            .collect()
    }

    /// Ions used: data ions plus one serial ancilla ion.
    pub fn ions(&self) -> usize {
        self.d.div_ceil(self.encoding_n) + 1
    }
}

pub fn build_repcode_circuit(d: usize, encoding_n: usize, rounds: usize) -> Result<NoisyCircuit> {
    if d.is_multiple_of(2) || d == 0 {
        return Err(Error::Param(format!("code distance {d} must be odd")));
    }
    if d > MAX_DISTANCE {
        return Err(Error::Param(format!("code distance {d} exceeds {MAX_DISTANCE}")));
    }
    let anc = |k: usize| d + k;
    let layers = match encoding_n {
        1 => {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for k in 0..d - 1 {
                a.push(Op::Cnot { controls: vec![k], target: anc(k) });
                a.push(Op::Channel { qubits: vec![Some(k), Some(anc(k))], kind: ChannelKind::E3 });
                b.push(Op::Cnot { controls: vec![k + 1], target: anc(k) });
                b.push(Op::Channel { qubits: vec![Some(k + 1), Some(anc(k))], kind: ChannelKind::E3 });
            }
            vec![a, b]
        }
        2 => {
            let partner = |q: usize| if q + 1 < d { Some(q + 1) } else { None };
            let (mut intra, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
            for k in 0..d - 1 {
                if k % 2 == 0 {
                    intra.push(Op::Cnot { controls: vec![k, k + 1], target: anc(k) });
                    intra.push(Op::Channel { qubits: vec![Some(k), Some(k + 1), Some(anc(k))], kind: ChannelKind::E1 });
                } else {
                    left.push(Op::Cnot { controls: vec![k], target: anc(k) });
                    left.push(Op::Channel { qubits: vec![Some(k - 1), Some(k), Some(anc(k))], kind: ChannelKind::E2 });
                    right.push(Op::Cnot { controls: vec![k + 1], target: anc(k) });
                    right.push(Op::Channel { qubits: vec![Some(k + 1), partner(k + 1), Some(anc(k))], kind: ChannelKind::E2 });
                }
            }
            vec![intra, left, right]
        }
        n => return Err(Error::Unsupported(format!("repetition code with {n} qubits per data ion"))),
    };
    Ok(NoisyCircuit { d, encoding_n, rounds, layers })
}

/// Distances of the n=1 and n=2 codes that fit in L ions.
pub fn matched_distances(l: usize) -> Result<(usize, usize)> {
    if l < 3 {
        return Err(Error::Param(format!("L = {l} is below 3")));
    }
    let d1 = l - 2;
    Ok((d1, 2 * d1 + 1))
}
