use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{all_pairs, EncodingMap, IonSpec, NativeGate, Pair, Register};

pub type Circuit = Vec<NativeGate>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// Any level pair for R and MS.
    AllToAll,
    /// R on neighbouring levels only, MS on levels (0,1) of both ions.
    Minimal,
    /// Any R, MS on levels (0,1) of both ions.
    MsLimited,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Brickwork,
    #[serde(rename = "longrange")]
    LongRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitPolicy {
    pub connectivity: Connectivity,
    pub architecture: Architecture,
    /// Virtual qubits per ion.
    pub n: usize,
    /// Ions.
    pub l: usize,
}

impl CircuitPolicy {
    pub fn new(connectivity: Connectivity, architecture: Architecture, n: usize, l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::Param(format!("random circuits need at least 2 ions, got {l}")));
        }
        if !(1..=4).contains(&n) {
            return Err(Error::Param(format!("n = {n} per ion is out of range")));
        }
        Ok(Self { connectivity, architecture, n, l })
    }

    pub fn d(&self) -> usize {
        1 << self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.l
    }

    pub fn r_pairs(&self) -> Vec<Pair> {
        let d = self.d();
        match self.connectivity {
            Connectivity::Minimal => (0..d - 1).map(|k| (k, k + 1)).collect(),
            _ => all_pairs(d),
        }
    }

    pub fn register(&self) -> Result<Register> {
        let d = self.d();
        let ions = (0..self.l).map(|_| IonSpec::new(d, self.r_pairs(), EncodingMap::m1(d)?)).collect::<Result<Vec<_>>>()?;
        Register::build(ions)
    }

    fn ms_pair<R: Rng>(&self, rng: &mut R) -> Pair {
        match self.connectivity {
            Connectivity::AllToAll => {
                let pairs = all_pairs(self.d());
                pairs[rng.random_range(0..pairs.len())]
            }
            _ => (0, 1),
        }
    }

    /// One MS on (i, j) followed by a random rotation on each ion.
    pub fn brick<R: Rng>(&self, rng: &mut R, i: usize, j: usize) -> [NativeGate; 3] {
        let r_pairs = self.r_pairs();
        let pi = self.ms_pair(rng);
        let pj = self.ms_pair(rng);
        let ms = NativeGate::ms(i, j, pi, pj, rng.random_range(0.0..TAU));
        let mut rot = |ion: usize| {
            let (a, b) = r_pairs[rng.random_range(0..r_pairs.len())];
            NativeGate::r(ion, a, b, rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
        };
        let ri = rot(i);
        let rj = rot(j);
        [ms, ri, rj]
    }

    /// Ion pairs of one brickwork layer: (0,1),(2,3),… then (1,2),(3,4),…,(L−1,0).
    pub fn layer_pairs(&self) -> Vec<(usize, usize)> {
        let l = self.l;
        let mut v: Vec<(usize, usize)> = (0..l / 2).map(|k| (2 * k, 2 * k + 1)).collect();
        let mut k = 1;
        while k + 1 < l {
            v.push((k, k + 1));
            k += 2;
        }
        v.push((l - 1, 0));
        v
    }
}

/// Endless gate stream of a policy, deterministic per seed.
pub struct BrickStream {
    policy: CircuitPolicy,
    rng: ChaCha8Rng,
    buffer: VecDeque<NativeGate>,
}

impl BrickStream {
    pub fn new(policy: CircuitPolicy, seed: u64) -> Self {
        Self { policy, rng: ChaCha8Rng::seed_from_u64(seed), buffer: VecDeque::new() }
    }

    fn refill(&mut self) {
        let p = self.policy;
        match p.architecture {
            Architecture::Brickwork => {
                for (i, j) in p.layer_pairs() {
                    let b = p.brick(&mut self.rng, i, j);
                    self.buffer.extend(b);
                }
            }
            Architecture::LongRange => {
                let i = self.rng.random_range(0..p.l);
                let mut j = self.rng.random_range(0..p.l - 1);
                if j >= i {
                    j += 1;
                }
                let b = p.brick(&mut self.rng, i, j);
                self.buffer.extend(b);
            }
        }
    }
}

impl Iterator for BrickStream {
    type Item = NativeGate;

    fn next(&mut self) -> Option<NativeGate> {
        if self.buffer.is_empty() {
            self.refill();
        }
        self.buffer.pop_front()
    }
}

pub fn build_brickwork(policy: &CircuitPolicy, layers: usize, seed: u64) -> Result<Circuit> {
    let policy = CircuitPolicy { architecture: Architecture::Brickwork, ..*policy };
    let n = 3 * policy.layer_pairs().len() * layers;
    Ok(BrickStream::new(policy, seed).take(n).collect())
}

pub fn build_longrange(policy: &CircuitPolicy, bricks: usize, seed: u64) -> Result<Circuit> {
    let policy = CircuitPolicy { architecture: Architecture::LongRange, ..*policy };
    Ok(BrickStream::new(policy, seed).take(3 * bricks).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy(c: Connectivity, n: usize, l: usize) -> CircuitPolicy {
        CircuitPolicy::new(c, Architecture::Brickwork, n, l).unwrap()
    }

    #[test]
    fn one_layer_counts() {
        for l in [2, 3, 4, 5, 8] {
            let p = policy(Connectivity::AllToAll, 2, l);
            let c = build_brickwork(&p, 1, 9).unwrap();
            let ms = c.iter().filter(|g| g.is_entangling()).count();
            assert_eq!((ms, c.len() - ms), (l, 2 * l), "L = {l}");
            let reg = p.register().unwrap();
            assert!(c.iter().all(|g| g.validate(&reg).is_ok() && g.respects_connectivity(&reg)));
        }
    }

    #[test]
    fn same_seed_same_circuit() {
        let p = policy(Connectivity::AllToAll, 2, 4);
        assert_eq!(build_brickwork(&p, 3, 5).unwrap(), build_brickwork(&p, 3, 5).unwrap());
        assert_ne!(build_longrange(&p, 10, 5).unwrap(), build_longrange(&p, 10, 6).unwrap());
        assert!(build_longrange(&p, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn minimal_policy_gate_set() {
        let p = policy(Connectivity::Minimal, 2, 4);
        for g in build_brickwork(&p, 5, 2).unwrap() {
            match g {
                NativeGate::R { a, b, .. } => assert!(matches!((a, b), (0, 1) | (1, 2) | (2, 3))),
                NativeGate::Ms { pair_i, pair_j, .. } => assert_eq!((pair_i, pair_j), ((0, 1), (0, 1))),
                _ => panic!("unexpected gate"),
            }
        }
        assert!(p.register().unwrap().ions().iter().all(|i| i.is_connected()));
    }

    #[test]
    fn too_few_ions() {
        assert!(CircuitPolicy::new(Connectivity::AllToAll, Architecture::Brickwork, 1, 1).is_err());
    }
}
