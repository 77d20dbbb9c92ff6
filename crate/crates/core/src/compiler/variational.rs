//! Layered-ansatz synthesis by coordinate-wise trigonometric line search.
//!
//! Every free angle enters a native gate as e^{±ix}, so along one coordinate
//! Tr(M·G(x)) = c0 + c1 e^{ix} + c2 e^{−ix}. Three evaluations fix the
//! coefficients and the 1-D maximum of |·| is found by a grid and Newton steps.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{phase_distance, unitarity_defect, CMat, C64, I};
use crate::sim::{circuit_unitary, NativeGate, Pair, Register};

/// Cost floor on ((1/dim)|Tr U†V| − 1)².
pub const COST_FLOOR: f64 = 1e-8;
const POLISH_DISTANCE: f64 = 1e-12;

/// A gate position with free angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlotSpec {
    /// Free θ and φ.
    R { ion: usize, a: usize, b: usize },
    /// Free J.
    Ms { ion_i: usize, ion_j: usize, pair_i: Pair, pair_j: Pair },
}

impl SlotSpec {
    pub fn n_params(&self) -> usize {
        match self {
            SlotSpec::R { .. } => 2,
            SlotSpec::Ms { .. } => 1,
        }
    }

    pub fn gate(&self, p: &[f64]) -> NativeGate {
        match *self {
            SlotSpec::R { ion, a, b } => NativeGate::r(ion, a, b, p[0], p[1]),
            SlotSpec::Ms { ion_i, ion_j, pair_i, pair_j } => NativeGate::ms(ion_i, ion_j, pair_i, pair_j, p[0]),
        }
    }

    /// Slot and parameters of a concrete gate. Multi-pair gates have no slot form.
    pub fn from_gate(g: &NativeGate) -> Option<(SlotSpec, Vec<f64>)> {
        match *g {
            NativeGate::R { ion, a, b, theta, phi } => Some((SlotSpec::R { ion, a, b }, vec![theta, phi])),
            NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, coupling } => {
                Some((SlotSpec::Ms { ion_i, ion_j, pair_i, pair_j }, vec![coupling]))
            }
            _ => None,
        }
    }

    fn validate(&self, reg: &Register) -> Result<()> {
        self.gate(&[0.0, 0.0]).validate(reg)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Budget {
    pub layers_max: usize,
    pub restarts: usize,
    /// Coordinate sweeps per restart.
    pub sweeps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { layers_max: 4, restarts: 8, sweeps: 400 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    pub gates: Vec<NativeGate>,
    pub cost: f64,
    pub distance: f64,
    pub layers: usize,
    pub converged: bool,
    pub ms_count: usize,
    pub gate_count: usize,
    /// Best cost reached at each layer count tried.
    pub layer_costs: Vec<f64>,
}

fn dense(reg: &Register, g: &NativeGate) -> CMat {
    circuit_unitary(reg, std::slice::from_ref(g))
}

/// Tr(M·G) = Σ M[i,j]·G[j,i].
fn trace_prod(m: &CMat, g: &CMat) -> C64 {
    let n = m.nrows();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            s += m[(i, j)] * g[(j, i)];
        }
    }
    s
}

/// argmax over x of |c0 + c1 e^{ix} + c2 e^{−ix}|.
fn maximize_trig(c: [C64; 3]) -> f64 {
    let h = |x: f64| c[0] + c[1] * C64::from_polar(1.0, x) + c[2] * C64::from_polar(1.0, -x);
    let f = |x: f64| h(x).norm_sqr();
    let grid = 32;
    let mut best = 0.0;
    let mut fbest = f(0.0);
    for k in 1..grid {
        let x = 2.0 * PI * k as f64 / grid as f64;
        let v = f(x);
        if v > fbest {
            fbest = v;
            best = x;
        }
    }
    let mut x = best;
    for _ in 0..30 {
        let e = C64::from_polar(1.0, x);
        let hv = h(x);
        let h1 = I * c[1] * e - I * c[2] * e.conj();
        let h2 = -(c[1] * e + c[2] * e.conj());
        let d1 = 2.0 * (h1 * hv.conj()).re;
        let d2 = 2.0 * ((h2 * hv.conj()).re + h1.norm_sqr());
        if d2 >= 0.0 {
            break;
        }
        let step = (-d1 / d2).clamp(-0.2, 0.2);
        let xn = x + step;
        if f(xn) < f(x) {
            break;
        }
        x = xn;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

fn coefficients(m: &CMat, reg: &Register, slot: &SlotSpec, params: &mut [f64], k: usize) -> [C64; 3] {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut hs = [C64::new(0.0, 0.0); 3];
    for (s, h) in hs.iter_mut().enumerate() {
        params[k] = 2.0 * PI * s as f64 / 3.0;
        *h = trace_prod(m, &dense(reg, &slot.gate(params)));
    }
    let third = 1.0 / 3.0;
    [
        (hs[0] + hs[1] + hs[2]) * third,
        (hs[0] + hs[1] * w.conj() + hs[2] * w.conj() * w.conj()) * third,
        (hs[0] + hs[1] * w + hs[2] * w * w) * third,
    ]
}

/// Distance 1 − |Tr(T†V)|/dim after local optimisation from `params`.
fn descend(reg: &Register, target_adj: &CMat, slots: &[SlotSpec], params: &mut [f64], sweeps: usize) -> f64 {
    let dim = reg.dim();
    let offsets: Vec<usize> = slots
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.n_params();
            Some(o)
        })
        .collect();
    let n = slots.len();
    let gate_mats = |params: &[f64]| -> Vec<CMat> {
        slots.iter().zip(&offsets).map(|(s, &o)| dense(reg, &s.gate(&params[o..o + s.n_params()]))).collect()
    };
    let distance_of = |params: &[f64]| {
        let mut v = CMat::identity(dim, dim);
        for g in gate_mats(params) {
            v = g * v;
        }
        (1.0 - trace_prod(target_adj, &v).norm() / dim as f64).max(0.0)
    };
    let mut last = distance_of(params);
    let mut stall = 0;
    for _ in 0..sweeps {
        let mats = gate_mats(params);
        // suffix[k] = G_{n-1} ⋯ G_{k+1}
        let mut suffix = vec![CMat::identity(dim, dim); n];
        for k in (0..n.saturating_sub(1)).rev() {
            suffix[k] = &suffix[k + 1] * &mats[k + 1];
        }
        let mut pre = CMat::identity(dim, dim);
        for k in 0..n {
            let m = &pre * target_adj * &suffix[k];
            let o = offsets[k];
            let np = slots[k].n_params();
            for j in 0..np {
                let local = &mut params[o..o + np];
                let c = coefficients(&m, reg, &slots[k], local, j);
                local[j] = maximize_trig(c);
            }
            pre = dense(reg, &slots[k].gate(&params[o..o + np])) * pre;
        }
        let now = distance_of(params);
        if now < POLISH_DISTANCE {
            return now;
        }
        if last - now < 1e-15 * (1.0 + last) {
            stall += 1;
            if stall >= 3 {
                return now;
            }
        } else {
            stall = 0;
        }
        last = now;
    }
    last
}

fn check_inputs(reg: &Register, target: &CMat, slots: &[SlotSpec]) -> Result<()> {
    if target.nrows() != reg.dim() || target.ncols() != reg.dim() {
        return Err(Error::Param(format!("target is {}x{}, register dim is {}", target.nrows(), target.ncols(), reg.dim())));
    }
    let defect = unitarity_defect(target);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    for s in slots {
        s.validate(reg)?;
    }
    Ok(())
}

/// Optimise the free angles of a fixed slot list. Restart 0 starts from `init` when given.
/// Returns the best parameters and their distance; deterministic per seed.
pub fn optimize_slots(
    reg: &Register,
    target: &CMat,
    slots: &[SlotSpec],
    init: Option<&[f64]>,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    check_inputs(reg, target, slots)?;
    let np: usize = slots.iter().map(SlotSpec::n_params).sum();
    if let Some(p) = init {
        if p.len() != np {
            return Err(Error::Param(format!("expected {np} initial parameters, got {}", p.len())));
        }
    }
    let target_adj = target.adjoint();
    let runs: Vec<(usize, Vec<f64>, f64)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut params = match (r, init) {
                (0, Some(p)) => p.to_vec(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(r as u64);
                    (0..np).map(|_| rng.random_range(0.0..2.0 * PI)).collect()
                }
            };
            let d = descend(reg, &target_adj, slots, &mut params, sweeps);
            (r, params, d)
        })
        .collect();
    let best = runs.into_iter().min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0))).expect("at least one restart");
    Ok((best.1, best.2))
}

fn instantiate(slots: &[SlotSpec], params: &[f64]) -> Vec<NativeGate> {
    let mut o = 0;
    slots
        .iter()
        .map(|s| {
            let g = s.gate(&params[o..o + s.n_params()]);
            o += s.n_params();
            g
        })
        .collect()
}

/// Shortest single-ion pulse list of at most `max_len` gates reaching the target,
/// trying every sequence of allowed pairs in order of length.
pub fn pulse_search(
    reg: &Register,
    target: &CMat,
    max_len: usize,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<Option<Vec<NativeGate>>> {
    if reg.len() != 1 {
        return Err(Error::Unsupported("pulse search works on a single ion".into()));
    }
    if phase_distance(target, &CMat::identity(reg.dim(), reg.dim())) <= 1e-9 {
        return Ok(Some(Vec::new()));
    }
    let pairs = reg.ion(0).allowed_r.clone();
    for k in 1..=max_len {
        let mut idx = vec![0usize; k];
        loop {
            // adjacent pulses on one pair only pay off as a pair of them
            let redundant = idx.windows(3).any(|w| w[0] == w[1] && w[1] == w[2]);
            if !redundant {
                let tpl: Vec<SlotSpec> = idx.iter().map(|&i| SlotSpec::R { ion: 0, a: pairs[i].0, b: pairs[i].1 }).collect();
                let (p, d) = optimize_slots(reg, target, &tpl, None, restarts, sweeps, seed)?;
                if d <= 1e-9 {
                    return Ok(Some(instantiate(&tpl, &p)));
                }
            }
            let mut pos = 0;
            while pos < k {
                idx[pos] += 1;
                if idx[pos] < pairs.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
    }
    Ok(None)
}

/// Greedily drop gates whose removal keeps the distance within `tol`.
pub fn prune_identities(reg: &Register, target: &CMat, gates: &[NativeGate], tol: f64) -> Vec<NativeGate> {
    let mut cur = gates.to_vec();
    // entangling gates first, then single-ion pulses
    for want_ms in [true, false] {
        let mut k = 0;
        while k < cur.len() {
            if cur[k].is_entangling() == want_ms {
                let mut trial = cur.clone();
                trial.remove(k);
                if phase_distance(target, &circuit_unitary(reg, &trial)) <= tol {
                    cur = trial;
                    continue;
                }
            }
            k += 1;
        }
    }
    cur
}

/// Repeat `template` as layers until the cost floor is met or `layers_max` is reached.
pub fn synthesize_variational(
    reg: &Register,
    target: &CMat,
    template: &[SlotSpec],
    budget: Budget,
    seed: u64,
) -> Result<VariationalReport> {
    if template.is_empty() {
        return Err(Error::Param("empty template".into()));
    }
    check_inputs(reg, target, template)?;
    let mut layer_costs = Vec::new();
    let mut best: Option<VariationalReport> = None;
    for layers in 1..=budget.layers_max.max(1) {
        let slots: Vec<SlotSpec> = template.iter().cloned().cycle().take(template.len() * layers).collect();
        let (params, dist) = optimize_slots(reg, target, &slots, None, budget.restarts, budget.sweeps, seed ^ (layers as u64) << 32)?;
        let cost = dist * dist;
        layer_costs.push(cost);
        let converged = cost <= COST_FLOOR;
        let mut gates = instantiate(&slots, &params);
        if converged {
            gates = prune_identities(reg, target, &gates, dist.max(1e-12) * 1.000001);
        }
        let distance = phase_distance(target, &circuit_unitary(reg, &gates));
        let rep = VariationalReport {
            ms_count: gates.iter().filter(|g| g.is_entangling()).count(),
            gate_count: gates.len(),
            gates,
            cost: distance * distance,
            distance,
            layers,
            converged,
            layer_costs: Vec::new(),
        };
        let better = match &best {
            None => true,
            Some(b) => rep.cost < b.cost,
        };
        if better {
            best = Some(rep);
        }
        if converged {
            break;
        }
    }
    let mut rep = best.expect("at least one layer");
    rep.layer_costs = layer_costs;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, kron, pauli};
    use crate::sim::{embed_standard, EncodingMap, IonSpec};

    fn reg_42() -> Register {
        Register::build(vec![IonSpec::all_to_all(4, EncodingMap::m1(4).unwrap()).unwrap(), IonSpec::qudit(2).unwrap()]).unwrap()
    }

    #[test]
    fn trig_maximum_is_exact() {
        let c = [C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.05, -0.4)];
        let x = maximize_trig(c);
        let h = |x: f64| (c[0] + c[1] * C64::from_polar(1.0, x) + c[2] * C64::from_polar(1.0, -x)).norm();
        let brute = (0..200_000).map(|k| h(2.0 * PI * k as f64 / 200_000.0)).fold(0.0, f64::max);
        assert!(h(x) >= brute - 1e-12);
    }

    #[test]
    fn realizable_target_is_recovered() {
        let reg = reg_42();
        let slots = vec![
            SlotSpec::R { ion: 0, a: 0, b: 2 },
            SlotSpec::Ms { ion_i: 0, ion_j: 1, pair_i: (1, 3), pair_j: (0, 1) },
            SlotSpec::R { ion: 1, a: 0, b: 1 },
        ];
        let truth = [0.7, 1.9, 0.4, 2.2, 0.3];
        let target = circuit_unitary(&reg, &instantiate(&slots, &truth));
        let (_, d) = optimize_slots(&reg, &target, &slots, None, 6, 400, 3).unwrap();
        assert!(d * d < 1e-10, "cost {}", d * d);
    }

    #[test]
    fn cnot_two_gate_solution_verifies() {
        let reg = reg_42();
        let mut cnot = CMat::identity(4, 4);
        cnot.swap_rows(2, 3);
        let target = embed_standard(&cnot, &[0, 2], &reg).unwrap();
        let slots = vec![SlotSpec::R { ion: 0, a: 2, b: 3 }, SlotSpec::Ms { ion_i: 0, ion_j: 1, pair_i: (2, 3), pair_j: (0, 1) }];
        let (_, d) = optimize_slots(&reg, &target, &slots, None, 8, 400, 11).unwrap();
        assert!(d < 1e-9, "distance {d}");
    }

    #[test]
    fn deterministic_per_seed() {
        let reg = reg_42();
        let target = embed_standard(&expm_hermitian(&kron(&pauli('X'), &pauli('Z')), 0.3), &[1, 2], &reg).unwrap();
        let tpl = vec![SlotSpec::R { ion: 0, a: 0, b: 1 }, SlotSpec::Ms { ion_i: 0, ion_j: 1, pair_i: (0, 1), pair_j: (0, 1) }];
        let b = Budget { layers_max: 2, restarts: 3, sweeps: 50 };
        let a = synthesize_variational(&reg, &target, &tpl, b, 5).unwrap();
        let c = synthesize_variational(&reg, &target, &tpl, b, 5).unwrap();
        assert_eq!(a.gates, c.gates);
        assert_eq!(a.cost, c.cost);
    }
}
