use mwmatching::{Matching, SENTINEL};
use serde::{Deserialize, Serialize};

use super::circuit::{ChannelModel, DepolarizingReading, NoisyCircuit};
use super::decoder::decode;
use super::frame::{run_shot, DefectRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Minimum-weight matching over the space-time detector graph.
    #[default]
    SpaceTime,
    /// Independent chain matching of every differenced round.
    PerRound,
}

/// Minimum-weight perfect matching decoder on the detector graph of a circuit.
///
/// Edges come from injecting a single X on every slot of every channel site; their weight is
/// ln((1−q)/q) for the marginal flip probability q. Defects are matched on shortest-path
/// distances, each with its own boundary twin.
#[derive(Clone, Debug)]
pub struct SpaceTimeDecoder {
    nodes: usize,
    dist: Vec<f64>,
    parity: Vec<bool>,
    scale: f64,
}

impl SpaceTimeDecoder {
    pub fn new(circuit: &NoisyCircuit, model: &ChannelModel) -> Self {
        let checks = circuit.d - 1;
        let nodes = (circuit.rounds + 1) * checks + 1;
        let boundary = nodes - 1;
        let sites = circuit.sites();
        // (q, logical) per edge
        let mut edges: Vec<Option<(f64, bool)>> = vec![None; nodes * nodes];
        let mut g = 0;
        for _ in 0..circuit.rounds {
            for (slots, kind) in &sites {
                let k = slots.len() as i32;
                let lambda = model.rate(*kind);
                let q = match model.reading {
                    DepolarizingReading::NonIdentity => lambda * 2.0 * 4f64.powi(k - 1) / (4f64.powi(k) - 1.0),
                    DepolarizingReading::IncludeIdentity => lambda / 2.0,
                };
                for q_idx in slots.iter().flatten() {
                    let rec = run_shot(circuit, |s| if s == g { 1u128 << q_idx } else { 0 });
                    let dets: Vec<usize> = rec
                        .rounds
                        .iter()
                        .enumerate()
                        .flat_map(|(r, &m)| (0..checks).filter(move |k| m >> k & 1 == 1).map(move |k| r * checks + k))
                        .collect();
                    let (a, b) = match dets.as_slice() {
                        [] => continue,
                        [a] => (*a, boundary),
                        [a, b] => (*a, *b),
                        _ => unreachable!("single X flips at most two detectors"),
                    };
                    if q <= 0.0 {
                        continue;
                    }
                    for (i, j) in [(a, b), (b, a)] {
                        let e = &mut edges[i * nodes + j];
                        *e = Some(match *e {
                            None => (q, rec.logical),
                            Some((p, l)) => {
                                let merged = p * (1.0 - q) + q * (1.0 - p);
                                (merged, if q > p { rec.logical } else { l })
                            }
                        });
                    }
                }
                g += 1;
            }
        }
        // all-pairs shortest paths with path parity
        let mut dist = vec![f64::INFINITY; nodes * nodes];
        let mut parity = vec![false; nodes * nodes];
        for i in 0..nodes {
            dist[i * nodes + i] = 0.0;
            for j in 0..nodes {
                if let Some((q, l)) = edges[i * nodes + j] {
                    dist[i * nodes + j] = ((1.0 - q) / q).ln().max(1e-9);
                    parity[i * nodes + j] = l;
                }
            }
        }
        for k in 0..nodes {
            for i in 0..nodes {
                let dik = dist[i * nodes + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..nodes {
                    let v = dik + dist[k * nodes + j];
                    if v < dist[i * nodes + j] {
                        dist[i * nodes + j] = v;
                        parity[i * nodes + j] = parity[i * nodes + k] ^ parity[k * nodes + j];
                    }
                }
            }
        }
        let max = dist.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
        let scale = if max > 0.0 { 1e5 / max } else { 1.0 };
        Self { nodes, dist, parity, scale }
    }

    fn node(&self, checks: usize, round: usize, k: usize) -> usize {
        round * checks + k
    }

    /// Predicted flip of the logical observable.
    pub fn decode(&self, d: usize, rec: &DefectRecord) -> bool {
        let checks = d - 1;
        let boundary = self.nodes - 1;
        let defects: Vec<usize> = rec
            .rounds
            .iter()
            .enumerate()
            .flat_map(|(r, &m)| (0..checks).filter(move |k| m >> k & 1 == 1).map(move |k| (r, k)))
            .map(|(r, k)| self.node(checks, r, k))
            .collect();
        let n = defects.len();
        if n == 0 {
            return false;
        }
        let w = |a: usize, b: usize| -> i32 {
            let v = self.dist[a * self.nodes + b];
            if v.is_finite() {
                (v * self.scale).round() as i32
            } else {
                i32::MAX / 8
            }
        };
        let big = 200_001;
        let mut edges = Vec::with_capacity(n * n);
        for i in 0..n {
            edges.push((i, n + i, big - w(defects[i], boundary)));
            for j in i + 1..n {
                edges.push((i, j, big - w(defects[i], defects[j])));
                edges.push((n + i, n + j, big));
            }
        }
        let mate = Matching::new(edges).max_cardinality().solve();
        let mut flip = false;
        for i in 0..n {
            let m = mate[i];
            assert!(m != SENTINEL, "perfect matching always exists");
            if m == n + i {
                flip ^= self.parity[defects[i] * self.nodes + boundary];
            } else if m < n && m > i {
                flip ^= self.parity[defects[i] * self.nodes + defects[m]];
            }
        }
        flip
    }
}

/// Decoder prepared for one circuit and model.
pub enum PreparedDecoder {
    SpaceTime(SpaceTimeDecoder),
    PerRound,
}

impl PreparedDecoder {
    pub fn new(kind: DecoderKind, circuit: &NoisyCircuit, model: &ChannelModel) -> Self {
        match kind {
            DecoderKind::SpaceTime => Self::SpaceTime(SpaceTimeDecoder::new(circuit, model)),
            DecoderKind::PerRound => Self::PerRound,
        }
    }

    pub fn predict(&self, d: usize, rec: &DefectRecord) -> bool {
        match self {
            Self::SpaceTime(s) => s.decode(d, rec),
            Self::PerRound => decode(d, &rec.rounds).1,
        }
    }
}
