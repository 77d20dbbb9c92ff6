use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuits::{BrickStream, CircuitPolicy};
use crate::error::{Error, Result};
use crate::sim::{apply_gate, sample_indices, NativeGate, Register, StateVector};

/// Largest register simulated as a dense statevector.
pub const MAX_QUBITS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XebMode {
    /// 2^N Σ p² − 1 over the simulated distribution.
    Exact,
    /// 2^N · mean p(x_i) − 1 over sampled strings.
    Sampled,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct XebResult {
    pub value: f64,
    pub stderr: f64,
    pub mode: XebMode,
    pub shots: u64,
    pub circuits: usize,
}

pub fn simulate(reg: &Register, circuit: &[NativeGate]) -> Result<StateVector> {
    if reg.num_qubits() > MAX_QUBITS {
        return Err(Error::Param(format!("{} qubits exceed the statevector limit of {MAX_QUBITS}", reg.num_qubits())));
    }
    for g in circuit {
        g.validate(reg)?;
    }
    let mut psi = StateVector::zero(reg);
    psi.apply_all(reg, circuit);
    Ok(psi)
}

pub fn xeb_exact(probs: &[f64]) -> f64 {
    probs.len() as f64 * probs.iter().map(|p| p * p).sum::<f64>() - 1.0
}

/// 2^{2N}·var(p) over all 2^N strings, from the two-pass variance.
pub fn second_moment(probs: &[f64]) -> f64 {
    let n = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / n;
    let var = probs.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    n * n * var
}

pub fn estimate_xeb(reg: &Register, circuit: &[NativeGate], mode: XebMode, shots: u64, seed: u64) -> Result<XebResult> {
    let probs = simulate(reg, circuit)?.probabilities();
    match mode {
        XebMode::Exact => Ok(XebResult { value: xeb_exact(&probs), stderr: 0.0, mode, shots: 0, circuits: 1 }),
        XebMode::Sampled => {
            if shots == 0 {
                return Err(Error::Param("zero shots".into()));
            }
            let dim = probs.len() as f64;
            let counts = sample_indices(&probs, shots, seed);
            let (mut s1, mut s2) = (0.0, 0.0);
            for (&idx, &c) in &counts {
                let v = dim * probs[idx];
                s1 += v * c as f64;
                s2 += v * v * c as f64;
            }
            let m = s1 / shots as f64;
            let var = (s2 / shots as f64 - m * m).max(0.0);
            Ok(XebResult { value: m - 1.0, stderr: (var / shots as f64).sqrt(), mode, shots, circuits: 1 })
        }
    }
}

pub fn estimate_second_moment(reg: &Register, circuit: &[NativeGate]) -> Result<f64> {
    Ok(second_moment(&simulate(reg, circuit)?.probabilities()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Xeb,
    Moment,
}

impl Statistic {
    pub fn default_threshold(self) -> f64 {
        match self {
            Statistic::Xeb => 2.0,
            Statistic::Moment => 4.0,
        }
    }
}

/// How the crossing gate count is read off an ensemble of circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// First gate at which the statistic averaged over circuits is at or below threshold.
    #[default]
    EnsembleMean,
    /// First crossing of each circuit, averaged over circuits.
    PerCircuit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdStats {
    pub rule: CrossingRule,
    pub mean: f64,
    pub stderr: f64,
    /// Per-circuit first crossings (per-circuit rule only).
    pub counts: Vec<usize>,
    /// Circuits that did not cross within the gate budget (per-circuit rule only).
    pub unreached: usize,
}

fn statistic_of(statistic: Statistic, psi: &StateVector) -> f64 {
    match statistic {
        Statistic::Xeb => xeb_exact(&psi.probabilities()),
        Statistic::Moment => second_moment(&psi.probabilities()),
    }
}

fn circuit_seed(seed: u64, c: usize) -> u64 {
    seed.wrapping_add((c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Grow `circuits` random circuits gate by gate and report the total gate count at which the
/// exact statistic first reaches `threshold` or below.
///
/// Under the ensemble rule the standard error is propagated from the spread of the statistic at
/// the crossing through the local slope of the mean curve, taken over one brickwork layer.
pub fn gates_to_threshold(
    policy: &CircuitPolicy,
    threshold: f64,
    statistic: Statistic,
    rule: CrossingRule,
    circuits: usize,
    seed: u64,
    max_gates: usize,
) -> Result<ThresholdStats> {
    let reg = policy.register()?;
    if reg.num_qubits() > MAX_QUBITS {
        return Err(Error::Param(format!("{} qubits exceed the statevector limit", reg.num_qubits())));
    }
    if circuits == 0 {
        return Err(Error::Param("zero circuits".into()));
    }
    match rule {
        CrossingRule::PerCircuit => per_circuit(policy, &reg, threshold, statistic, circuits, seed, max_gates),
        CrossingRule::EnsembleMean => ensemble(policy, &reg, threshold, statistic, circuits, seed, max_gates),
    }
}

fn per_circuit(
    policy: &CircuitPolicy,
    reg: &Register,
    threshold: f64,
    statistic: Statistic,
    circuits: usize,
    seed: u64,
    max_gates: usize,
) -> Result<ThresholdStats> {
    let outcomes: Vec<Option<usize>> = (0..circuits)
        .into_par_iter()
        .map(|c| {
            let mut psi = StateVector::zero(reg);
            for (k, g) in BrickStream::new(*policy, circuit_seed(seed, c)).take(max_gates).enumerate() {
                apply_gate(reg, &g, psi.amplitudes_mut());
                if statistic_of(statistic, &psi) <= threshold {
                    return Some(k + 1);
                }
            }
            None
        })
        .collect();
    let counts: Vec<usize> = outcomes.iter().flatten().copied().collect();
    let unreached = outcomes.len() - counts.len();
    if counts.is_empty() {
        return Err(Error::Unsupported(format!("no circuit reached {threshold} within {max_gates} gates")));
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = if counts.len() > 1 { counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(ThresholdStats { rule: CrossingRule::PerCircuit, mean, stderr: (var / n).sqrt(), counts, unreached })
}

fn ensemble(
    policy: &CircuitPolicy,
    reg: &Register,
    threshold: f64,
    statistic: Statistic,
    circuits: usize,
    seed: u64,
    max_gates: usize,
) -> Result<ThresholdStats> {
    let mut runs: Vec<(BrickStream, StateVector, Vec<f64>)> =
        (0..circuits).map(|c| (BrickStream::new(*policy, circuit_seed(seed, c)), StateVector::zero(reg), Vec::new())).collect();
    let window = 3 * policy.layer_pairs().len();
    let mut means = Vec::new();
    for g in 0..max_gates {
        runs.par_iter_mut().for_each(|(stream, psi, hist)| {
            let gate = stream.next().expect("gate streams are endless");
            apply_gate(reg, &gate, psi.amplitudes_mut());
            hist.push(statistic_of(statistic, psi));
        });
        let m = runs.iter().map(|r| r.2[g]).sum::<f64>() / circuits as f64;
        means.push(m);
        if m <= threshold {
            let n = circuits as f64;
            let at: Vec<f64> = runs.iter().map(|r| r.2[g]).collect();
            let var = if circuits > 1 { at.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            let back = g.saturating_sub(window);
            let slope = if g > back { (means[back] - m) / (g - back) as f64 } else { 0.0 };
            let stderr = if slope > 0.0 { (var / n).sqrt() / slope } else { f64::INFINITY };
            return Ok(ThresholdStats { rule: CrossingRule::EnsembleMean, mean: (g + 1) as f64, stderr, counts: vec![], unreached: 0 });
        }
    }
    Err(Error::Unsupported(format!("ensemble mean did not reach {threshold} within {max_gates} gates")))
}

/// Least-squares slope a of count ≈ a·N·ln N.
pub fn fit_n_log_n(points: &[(usize, f64)]) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(n, y) in points {
        let x = n as f64 * (n as f64).ln();
        sxy += x * y;
        sxx += x * x;
    }
    sxy / sxx
}
