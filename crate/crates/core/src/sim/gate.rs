use serde::{Deserialize, Serialize};

use super::register::Register;
use crate::error::{Error, Result};

pub type Pair = (usize, usize);

/// Native operations of the ion chain. Angles in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeGate {
    /// Rabi rotation between levels `a` and `b` of one ion.
    R { ion: usize, a: usize, b: usize, theta: f64, phi: f64 },
    /// Mølmer–Sørensen coupling of one level pair on each of two ions.
    Ms { ion_i: usize, ion_j: usize, pair_i: Pair, pair_j: Pair, coupling: f64 },
    /// Generator (Σ X over `pairs_i`) ⊗ (Σ X over `pairs_j`).
    MultiPairMs { ion_i: usize, ion_j: usize, pairs_i: Vec<Pair>, pairs_j: Vec<Pair>, coupling: f64 },
    /// Generator ⊗ over every ion of Σ X over its pairs.
    GlobalMs { pairs: Vec<Vec<Pair>>, coupling: f64 },
}

impl NativeGate {
    pub fn r(ion: usize, a: usize, b: usize, theta: f64, phi: f64) -> Self {
        NativeGate::R { ion, a, b, theta, phi }
    }

    pub fn ms(ion_i: usize, ion_j: usize, pair_i: Pair, pair_j: Pair, coupling: f64) -> Self {
        NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, coupling }
    }

    pub fn is_entangling(&self) -> bool {
        !matches!(self, NativeGate::R { .. })
    }

    /// Ions touched by the gate.
    pub fn ions(&self) -> Vec<usize> {
        match self {
            NativeGate::R { ion, .. } => vec![*ion],
            NativeGate::Ms { ion_i, ion_j, .. } | NativeGate::MultiPairMs { ion_i, ion_j, .. } => vec![*ion_i, *ion_j],
            NativeGate::GlobalMs { pairs, .. } => (0..pairs.len()).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut g = self.clone();
        match &mut g {
            NativeGate::R { theta, .. } => *theta = -*theta,
            NativeGate::Ms { coupling, .. } | NativeGate::MultiPairMs { coupling, .. } | NativeGate::GlobalMs { coupling, .. } => {
                *coupling = -*coupling
            }
        }
        g
    }

    /// Rename the levels of `ion` through `perm`.
    pub fn relabel(&self, ion: usize, perm: &[usize]) -> Self {
        let p = |x: usize| perm[x];
        let pp = |(a, b): Pair| {
            let (x, y) = (p(a), p(b));
            (x.min(y), x.max(y))
        };
        let mut g = self.clone();
        match &mut g {
            NativeGate::R { ion: i, a, b, phi, .. } if *i == ion => {
                let (x, y) = (p(*a), p(*b));
                if x > y {
                    *phi = -*phi;
                }
                *a = x.min(y);
                *b = x.max(y);
            }
            NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, .. } => {
                if *ion_i == ion {
                    *pair_i = pp(*pair_i);
                }
                if *ion_j == ion {
                    *pair_j = pp(*pair_j);
                }
            }
            NativeGate::MultiPairMs { ion_i, ion_j, pairs_i, pairs_j, .. } => {
                if *ion_i == ion {
                    pairs_i.iter_mut().for_each(|x| *x = pp(*x));
                }
                if *ion_j == ion {
                    pairs_j.iter_mut().for_each(|x| *x = pp(*x));
                }
            }
            NativeGate::GlobalMs { pairs, .. } => {
                if let Some(list) = pairs.get_mut(ion) {
                    list.iter_mut().for_each(|x| *x = pp(*x));
                }
            }
            _ => {}
        }
        g
    }

    /// Index and level checks against a register. Connectivity is not enforced here.
    pub fn validate(&self, reg: &Register) -> Result<()> {
        let ion_ok = |i: usize| {
            if i < reg.len() {
                Ok(reg.ion(i).d)
            } else {
                Err(Error::Gate(format!("ion {i} out of range")))
            }
        };
        let pair_ok = |(a, b): Pair, d: usize| {
            if a < d && b < d && a != b {
                Ok(())
            } else {
                Err(Error::Gate(format!("level pair ({a},{b}) invalid for d={d}")))
            }
        };
        let disjoint = |pairs: &[Pair], d: usize| -> Result<()> {
            if pairs.is_empty() {
                return Err(Error::Gate("empty pair list".into()));
            }
            let mut used = vec![false; d];
            for &(a, b) in pairs {
                pair_ok((a, b), d)?;
                if used[a] || used[b] {
                    return Err(Error::Gate(format!("pairs {pairs:?} are not disjoint")));
                }
                used[a] = true;
                used[b] = true;
            }
            Ok(())
        };
        let finite = |x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::Gate("non-finite angle".into()))
            }
        };
        match self {
            NativeGate::R { ion, a, b, theta, phi } => {
                let d = ion_ok(*ion)?;
                pair_ok((*a, *b), d)?;
                finite(*theta)?;
                finite(*phi)
            }
            NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, coupling } => {
                if ion_i == ion_j {
                    return Err(Error::Gate("MS needs two distinct ions".into()));
                }
                pair_ok(*pair_i, ion_ok(*ion_i)?)?;
                pair_ok(*pair_j, ion_ok(*ion_j)?)?;
                finite(*coupling)
            }
            NativeGate::MultiPairMs { ion_i, ion_j, pairs_i, pairs_j, coupling } => {
                if ion_i == ion_j {
                    return Err(Error::Gate("MS needs two distinct ions".into()));
                }
                disjoint(pairs_i, ion_ok(*ion_i)?)?;
                disjoint(pairs_j, ion_ok(*ion_j)?)?;
                finite(*coupling)
            }
            NativeGate::GlobalMs { pairs, coupling } => {
                if pairs.len() != reg.len() {
                    return Err(Error::Gate("global MS needs one pair list per ion".into()));
                }
                for (i, list) in pairs.iter().enumerate() {
                    disjoint(list, ion_ok(i)?)?;
                }
                finite(*coupling)
            }
        }
    }

    /// True when every intra-ion pair used is in the ion's allowed set.
    pub fn respects_connectivity(&self, reg: &Register) -> bool {
        match self {
            NativeGate::R { ion, a, b, .. } => reg.ion(*ion).allows(*a, *b),
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let reg = Register::uniform(2, 4).unwrap();
        assert!(NativeGate::r(0, 0, 3, 0.1, 0.2).validate(&reg).is_ok());
        assert!(NativeGate::r(0, 0, 4, 0.1, 0.2).validate(&reg).is_err());
        assert!(NativeGate::r(2, 0, 1, 0.1, 0.2).validate(&reg).is_err());
        assert!(NativeGate::ms(0, 0, (0, 1), (0, 1), 0.3).validate(&reg).is_err());
        let bad = NativeGate::MultiPairMs { ion_i: 0, ion_j: 1, pairs_i: vec![(0, 1), (1, 2)], pairs_j: vec![(0, 1)], coupling: 0.2 };
        assert!(bad.validate(&reg).is_err());
    }
}
