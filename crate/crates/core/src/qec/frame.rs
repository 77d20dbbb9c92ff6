use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::circuit::{ChannelModel, DepolarizingReading, NoisyCircuit, Op};
use super::spacetime::{DecoderKind, PreparedDecoder};
use crate::error::{Error, Result};

const CHUNK: u64 = 4096;

/// Differenced syndromes of one shot and the true logical flip.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefectRecord {
    /// One mask per syndrome round, then the round read from the final data measurement.
    pub rounds: Vec<u128>,
    /// X parity of the error frame on the logical support (data qubit 0).
    pub logical: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LogicalErrorEstimate {
    pub p_l: f64,
    pub failures: u64,
    pub shots: u64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LogicalErrorEstimate {
    fn new(failures: u64, shots: u64) -> Self {
        let n = shots as f64;
        let p = failures as f64 / n;
        let z = 1.959_963_984_540_054_f64;
        let den = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / den;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
        Self { p_l: p, failures, shots, ci_low: (centre - half).max(0.0), ci_high: (centre + half).min(1.0) }
    }
}

fn mask_of(qubits: &[Option<usize>], pattern: u32) -> u128 {
    qubits.iter().enumerate().filter(|(j, _)| pattern >> j & 1 == 1).filter_map(|(_, q)| *q).fold(0, |m, q| m | 1u128 << q)
}

/// X part of one draw from the site's depolarizing channel, as a pattern over its slots.
fn draw<R: Rng>(rng: &mut R, slots: usize, rate: f64, reading: DepolarizingReading) -> u32 {
    if rng.random::<f64>() >= rate {
        return 0;
    }
    let total = 1u32 << (2 * slots);
    let idx = match reading {
        DepolarizingReading::NonIdentity => rng.random_range(1..total),
        DepolarizingReading::IncludeIdentity => rng.random_range(0..total),
    };
    // per slot: 0 = I, 1 = X, 2 = Y, 3 = Z
    (0..slots).filter(|j| matches!(idx >> (2 * j) & 3, 1 | 2)).fold(0, |m, j| m | 1 << j)
}

/// Propagate one shot. `inject(site)` returns the X mask added at the site-th channel site
/// (counted over all rounds).
pub fn run_shot(circuit: &NoisyCircuit, mut inject: impl FnMut(usize) -> u128) -> DefectRecord {
    let d = circuit.d;
    let data_mask: u128 = (1u128 << d) - 1;
    let mut frame = 0u128;
    let mut prev = 0u128;
    let mut rounds = Vec::with_capacity(circuit.rounds + 1);
    let mut site = 0;
    for _ in 0..circuit.rounds {
        for op in circuit.ops() {
            match op {
                Op::Cnot { controls, target } => {
                    let parity = controls.iter().fold(0, |p, &c| p ^ (frame >> c & 1));
                    frame ^= parity << target;
                }
                Op::Channel { .. } => {
                    frame ^= inject(site);
                    site += 1;
                }
            }
        }
        let s = frame >> d;
        rounds.push(s ^ prev);
        prev = s;
        frame &= data_mask;
    }
    let fin = (0..d - 1).filter(|&k| (frame >> k & 1) != (frame >> (k + 1) & 1)).fold(0u128, |m, k| m | 1 << k);
    rounds.push(fin ^ prev);
    DefectRecord { rounds, logical: frame & 1 == 1 }
}

fn shot_fails(circuit: &NoisyCircuit, decoder: &PreparedDecoder, inject: impl FnMut(usize) -> u128) -> bool {
    let rec = run_shot(circuit, inject);
    decoder.predict(circuit.d, &rec) != rec.logical
}

fn site_table(circuit: &NoisyCircuit, model: &ChannelModel) -> Vec<(Vec<Option<usize>>, f64)> {
    circuit.sites().into_iter().map(|(q, k)| (q.to_vec(), model.rate(k))).collect()
}

pub fn sample_defects(circuit: &NoisyCircuit, model: &ChannelModel, shots: u64, seed: u64) -> Vec<DefectRecord> {
    let sites = site_table(circuit, model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots)
        .map(|_| {
            run_shot(circuit, |s| {
                let (q, rate) = &sites[s % sites.len()];
                mask_of(q, draw(&mut rng, q.len(), *rate, model.reading))
            })
        })
        .collect()
}

/// Monte Carlo logical error rate. Shots run in fixed chunks with per-chunk streams, so the
/// result does not depend on the thread count.
pub fn sample_logical_error(
    circuit: &NoisyCircuit,
    model: &ChannelModel,
    decoder: DecoderKind,
    shots: u64,
    seed: u64,
) -> Result<LogicalErrorEstimate> {
    if shots == 0 {
        return Err(Error::Param("zero shots".into()));
    }
    let sites = site_table(circuit, model);
    if sites.is_empty() || circuit.rounds == 0 {
        return Ok(LogicalErrorEstimate::new(0, shots));
    }
    let decoder = PreparedDecoder::new(decoder, circuit, model);
    let chunks = shots.div_ceil(CHUNK);
    let failures: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(shots - c * CHUNK);
            (0..n)
                .filter(|_| {
                    shot_fails(circuit, &decoder, |s| {
                        let (q, rate) = &sites[s % sites.len()];
                        mask_of(q, draw(&mut rng, q.len(), *rate, model.reading))
                    })
                })
                .count() as u64
        })
        .sum();
    Ok(LogicalErrorEstimate::new(failures, shots))
}

/// Exact logical error rate by enumerating every X pattern of every site over all rounds.
pub fn exhaustive_logical_error(circuit: &NoisyCircuit, model: &ChannelModel, decoder: DecoderKind) -> Result<f64> {
    let sites = site_table(circuit, model);
    let decoder = PreparedDecoder::new(decoder, circuit, model);
    let total_sites = sites.len() * circuit.rounds;
    // per site: probability of each X pattern over its slots
    let dists: Vec<Vec<(u32, f64)>> = sites
        .iter()
        .map(|(q, rate)| {
            let k = q.len();
            let total = 1u32 << (2 * k);
            let (first, per) = match model.reading {
                DepolarizingReading::NonIdentity => (1, rate / (total - 1) as f64),
                DepolarizingReading::IncludeIdentity => (0, rate / total as f64),
            };
            let mut p = vec![0.0; 1 << k];
            p[0] = 1.0 - rate;
            for idx in first..total {
                let pat = (0..k).filter(|j| matches!(idx >> (2 * j) & 3, 1 | 2)).fold(0u32, |m, j| m | 1 << j);
                p[pat as usize] += per;
            }
            p.into_iter().enumerate().filter(|(_, v)| *v > 0.0).map(|(m, v)| (m as u32, v)).collect()
        })
        .collect();
    let combos: f64 = (0..total_sites).map(|s| dists[s % sites.len()].len() as f64).product();
    if combos > 5e7 {
        return Err(Error::Unsupported(format!("{combos:.0} error configurations are too many to enumerate")));
    }
    let mut choice = vec![0usize; total_sites];
    let mut p_fail = 0.0;
    loop {
        let prob: f64 = choice.iter().enumerate().map(|(s, &c)| dists[s % sites.len()][c].1).product();
        if prob > 0.0 && shot_fails(circuit, &decoder, |s| mask_of(&sites[s % sites.len()].0, dists[s % sites.len()][choice[s]].0)) {
            p_fail += prob;
        }
        let mut s = 0;
        loop {
            if s == total_sites {
                return Ok(p_fail);
            }
            choice[s] += 1;
            if choice[s] < dists[s % sites.len()].len() {
                break;
            }
            choice[s] = 0;
            s += 1;
        }
    }
}
