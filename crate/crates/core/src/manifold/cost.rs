use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::elements::{normalized, CouplingOperator, Mechanism, Polarization};
use super::level::{diagonalize_level, LevelModel, LevelState, StateLabel};
use crate::error::{Error, Result};

pub const GAUSS: f64 = 1e-4;

/// Which state pairs enter the memory-error sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryPairs {
    /// Allowed transitions of the manifold.
    Allowed,
    /// Every pair of manifold states.
    #[default]
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub mechanism: Mechanism,
    /// Rabi frequency (Hz) per unit matrix element.
    pub d: f64,
    pub e1: Polarization,
    pub e2: Polarization,
    /// Quantisation field, T.
    pub field_t: f64,
    /// RMS field noise, T.
    pub db_rms_t: f64,
    pub kappa: f64,
    /// Lamb–Dicke parameter.
    pub eta: f64,
    /// Motional frequency, rad/s.
    pub omega_m: f64,
    /// Rabi frequency (Hz) at the smallest allowed matrix element.
    pub threshold_rabi_hz: f64,
    /// Largest tolerated off-resonant excitation of any other transition.
    pub resolution: f64,
    /// Detuning floor, rad/s.
    pub delta_min: f64,
    /// Finite-difference step for sensitivities, T.
    pub sensitivity_step_t: f64,
    /// Optional drivable band for manifold transitions, Hz.
    pub bandwidth_hz: Option<(f64, f64)>,
    pub memory_pairs: MemoryPairs,
}

impl Default for CostParams {
    fn default() -> Self {
        let iso = 1.0 / 3f64.sqrt();
        Self {
            mechanism: Mechanism::Raman,
            d: 1.018e64,
            e1: [iso; 3],
            e2: [iso; 3],
            field_t: 20.0 * GAUSS,
            db_rms_t: 50e-6 * GAUSS,
            kappa: 0.5,
            eta: 0.1,
            omega_m: TAU * 1e6,
            threshold_rabi_hz: 10e3,
            resolution: 0.05,
            delta_min: TAU * 1e3,
            sensitivity_step_t: 1e-3 * GAUSS,
            bandwidth_hz: None,
            memory_pairs: MemoryPairs::All,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::Param(format!("kappa = {} outside [0, 1]", self.kappa)));
        }
        if self.field_t.is_nan()
            || self.field_t < 0.0
            || self.db_rms_t.is_nan()
            || self.db_rms_t < 0.0
            || self.d.is_nan()
            || self.d <= 0.0
            || self.sensitivity_step_t.is_nan()
            || self.sensitivity_step_t <= 0.0
        {
            return Err(Error::Param("field, noise, D and step must be non-negative (D, step positive)".into()));
        }
        normalized(self.e1)?;
        normalized(self.e2)?;
        Ok(())
    }

    pub fn matrix_threshold(&self) -> f64 {
        self.threshold_rabi_hz / self.d
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Transition {
    /// State indices, lower energy first.
    pub lower: usize,
    pub upper: usize,
    pub lower_label: StateLabel,
    pub upper_label: StateLabel,
    /// ω_T / 2π, Hz.
    pub freq_hz: f64,
    /// ∂(ω_T/2π)/∂B, Hz/T.
    pub sensitivity_hz_per_t: f64,
    /// Signed matrix element, mechanism units.
    pub matrix_element: f64,
    /// D·|M|, Hz.
    pub rabi_hz: f64,
    /// An eigenstate changed character within the finite-difference step.
    pub ambiguous: bool,
}

impl Transition {
    pub fn omega(&self) -> f64 {
        TAU * self.freq_hz
    }

    pub fn rabi(&self) -> f64 {
        TAU * self.rabi_hz
    }
}

/// All transitions of a level at one field, plus the admission data needed by the search.
#[derive(Clone, Debug)]
pub struct TransitionTable {
    pub field_t: f64,
    pub states: Vec<LevelState>,
    pub transitions: Vec<Transition>,
    /// |M| above threshold.
    pub above_threshold: Vec<bool>,
    /// Above threshold and inside the band.
    pub eligible: Vec<bool>,
    /// Transitions excited by more than the resolution bound when this one is driven.
    pub blockers: Vec<Vec<usize>>,
    pair_index: Vec<usize>,
}

impl TransitionTable {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn pair(&self, a: usize, b: usize) -> usize {
        self.pair_index[a * self.states.len() + b]
    }

    pub fn find(&self, label: StateLabel) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    pub fn transition(&self, a: StateLabel, b: StateLabel) -> Option<&Transition> {
        Some(&self.transitions[self.pair(self.find(a)?, self.find(b)?)])
    }
}

fn overlap(a: &LevelState, b: &LevelState) -> f64 {
    a.vector.dot(&b.vector).abs()
}

pub fn transition_table(model: &LevelModel, params: &CostParams) -> Result<TransitionTable> {
    params.validate()?;
    let b = params.field_t;
    let lo = (b - params.sensitivity_step_t).max(0.0);
    let hi = b + params.sensitivity_step_t;
    let states = diagonalize_level(model, b)?;
    let minus = diagonalize_level(model, lo)?;
    let plus = diagonalize_level(model, hi)?;
    let ambiguous: Vec<bool> =
        (0..states.len()).map(|k| b > 0.0 && (overlap(&states[k], &minus[k]) < 0.9 || overlap(&states[k], &plus[k]) < 0.9)).collect();
    let op = CouplingOperator::new(model, params.mechanism, params.e1, params.e2)?;
    let n = states.len();
    let mut transitions = Vec::with_capacity(n * (n - 1) / 2);
    let mut pair_index = vec![usize::MAX; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (lower, upper) = if states[i].energy_hz <= states[j].energy_hz { (i, j) } else { (j, i) };
            let m = op.element(&states[lower], &states[upper]);
            let slope = ((plus[upper].energy_hz - plus[lower].energy_hz) - (minus[upper].energy_hz - minus[lower].energy_hz)) / (hi - lo);
            pair_index[i * n + j] = transitions.len();
            pair_index[j * n + i] = transitions.len();
            transitions.push(Transition {
                lower,
                upper,
                lower_label: states[lower].label,
                upper_label: states[upper].label,
                freq_hz: states[upper].energy_hz - states[lower].energy_hz,
                sensitivity_hz_per_t: slope,
                matrix_element: m,
                rabi_hz: params.d * m.abs(),
                ambiguous: ambiguous[lower] || ambiguous[upper],
            });
        }
    }
    let thr = params.matrix_threshold();
    let above_threshold: Vec<bool> = transitions.iter().map(|t| t.matrix_element.abs() >= thr).collect();
    let floor = params.delta_min * params.delta_min;
    let eligible: Vec<bool> = transitions
        .iter()
        .zip(&above_threshold)
        .map(|(t, &above)| above && params.bandwidth_hz.is_none_or(|(f0, f1)| t.freq_hz >= f0 && t.freq_hz <= f1))
        .collect();
    let blockers = transitions
        .iter()
        .enumerate()
        .map(|(k, t)| {
            if !eligible[k] {
                return Vec::new();
            }
            (0..transitions.len())
                .filter(|&q| {
                    q != k && transitions[q].rabi().powi(2) / (t.omega() - transitions[q].omega()).powi(2).max(floor) > params.resolution
                })
                .collect()
        })
        .collect();
    Ok(TransitionTable { field_t: b, states, transitions, above_threshold, eligible, blockers, pair_index })
}

/// Allowed transitions among `set` (state indices): eligible, and no transition touching the set
/// is excited above the resolution bound.
pub fn allowed_graph(table: &TransitionTable, set: &[usize]) -> Vec<usize> {
    let mut edges = Vec::new();
    let touches = |o: usize| {
        let t = &table.transitions[o];
        set.contains(&t.lower) || set.contains(&t.upper)
    };
    for (x, &a) in set.iter().enumerate() {
        for &b in &set[x + 1..] {
            let t = table.pair(a, b);
            if table.eligible[t] && !table.blockers[t].iter().any(|&o| touches(o)) {
                edges.push(t);
            }
        }
    }
    edges
}

fn connected(table: &TransitionTable, set: &[usize], edges: &[usize]) -> bool {
    let pos = |s: usize| set.iter().position(|&x| x == s).unwrap();
    let mut parent: Vec<usize> = (0..set.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parts = set.len();
    for &e in edges {
        let t = &table.transitions[e];
        let (a, b) = (root(&mut parent, pos(t.lower)), root(&mut parent, pos(t.upper)));
        if a != b {
            parent[a] = b;
            parts -= 1;
        }
    }
    parts == 1
}

#[derive(Clone, Debug, Serialize)]
pub struct CostBreakdown {
    pub memory: f64,
    pub internal: f64,
    pub spectator: f64,
    pub kappa: f64,
    pub total: f64,
    /// Mean two-state rotation time, s.
    pub t_r: f64,
    /// Mean gate time d^{2−x}·t_R, s.
    pub t_g: f64,
    pub x: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldCandidate {
    pub states: Vec<usize>,
    pub labels: Vec<StateLabel>,
    pub edges: Vec<usize>,
    pub spectators: usize,
    pub mean_abs_element: f64,
    pub cost: CostBreakdown,
}

/// Off-resonant excitation of `other` while driving `driven`.
fn crosstalk(params: &CostParams, driven: &Transition, other: &Transition) -> f64 {
    let floor = params.delta_min * params.delta_min;
    let dw = driven.omega() - other.omega();
    let o2 = other.rabi().powi(2);
    o2 / (dw * dw).max(floor) + params.eta * params.eta * o2 / (dw.abs() - params.omega_m).powi(2).max(floor)
}

/// Cost of a state set; `None` if its allowed graph is disconnected.
pub fn manifold_cost(table: &TransitionTable, set: &[usize], params: &CostParams) -> Result<Option<ManifoldCandidate>> {
    let n = table.n_states();
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() || sorted.iter().any(|&s| s >= n) || set.len() < 2 {
        return Err(Error::Param(format!("invalid state set {set:?}")));
    }
    let edges = allowed_graph(table, &sorted);
    if !connected(table, &sorted, &edges) {
        return Ok(None);
    }
    let spect: Vec<usize> = sorted
        .iter()
        .flat_map(|&a| (0..n).filter(|b| !sorted.contains(b)).map(move |b| (a, b)))
        .map(|(a, b)| table.pair(a, b))
        .filter(|&t| table.above_threshold[t])
        .collect();
    Ok(Some(evaluate(table, &sorted, edges, &spect, params)))
}

fn evaluate(table: &TransitionTable, set: &[usize], edges: Vec<usize>, spect: &[usize], params: &CostParams) -> ManifoldCandidate {
    let tr = &table.transitions;
    let d = set.len() as f64;
    let a = edges.len() as f64;
    let a_max = d * (d - 1.0) / 2.0;
    let a_min = d - 1.0;
    let x = if a_max > a_min { (a_max - a) / (a_max - a_min) } else { 0.0 };
    let scale = d.powf(2.0 - x);
    let nt = a;
    let mut internal = 0.0;
    let mut spectator = 0.0;
    for &t in &edges {
        for &o in &edges {
            if o != t {
                internal += crosstalk(params, &tr[t], &tr[o]);
            }
        }
        for &o in spect {
            spectator += crosstalk(params, &tr[t], &tr[o]);
        }
    }
    internal *= scale / nt;
    spectator *= scale / nt;
    let t_r = PI / nt * edges.iter().map(|&t| 1.0 / tr[t].rabi()).sum::<f64>();
    let t_g = scale * t_r;
    let sens: f64 = match params.memory_pairs {
        MemoryPairs::Allowed => edges.iter().map(|&t| (TAU * tr[t].sensitivity_hz_per_t).powi(2)).sum(),
        MemoryPairs::All => {
            let mut s = 0.0;
            for (k, &p) in set.iter().enumerate() {
                for &q in &set[k + 1..] {
                    s += (TAU * tr[table.pair(p, q)].sensitivity_hz_per_t).powi(2);
                }
            }
            s
        }
    };
    let memory = t_g * t_g * params.db_rms_t.powi(2) * sens / (4.0 * d * (d + 2.0));
    let total = memory + internal + params.kappa * spectator;
    let mean_abs_element = edges.iter().map(|&t| tr[t].matrix_element.abs()).sum::<f64>() / nt;
    ManifoldCandidate {
        states: set.to_vec(),
        labels: set.iter().map(|&s| table.states[s].label).collect(),
        edges,
        spectators: spect.len(),
        mean_abs_element,
        cost: CostBreakdown { memory, internal, spectator, kappa: params.kappa, total, t_r, t_g, x },
    }
}

/// All k-subsets of 0..n as bit masks, in lexicographic order of the sorted index lists.
fn subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u64, |m, &i| m | 1 << i));
        let mut p = k;
        while p > 0 && idx[p - 1] == n - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return out;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Cost of a subset through precomputed per-state sums, without building the candidate.
struct FastCost<'a> {
    table: &'a TransitionTable,
    params: &'a CostParams,
    /// crosstalk[t][o] for every eligible t.
    cross: Vec<Vec<f64>>,
    /// Σ_b above-threshold crosstalk[t][(a,b)] for every eligible t and state a.
    row: Vec<Vec<f64>>,
}

impl<'a> FastCost<'a> {
    fn new(table: &'a TransitionTable, params: &'a CostParams) -> Self {
        let n = table.n_states();
        let tr = &table.transitions;
        let (cross, row) = tr
            .par_iter()
            .enumerate()
            .map(|(t, driven)| {
                if !table.eligible[t] {
                    return (Vec::new(), Vec::new());
                }
                let c: Vec<f64> = tr.iter().map(|o| crosstalk(params, driven, o)).collect();
                let r: Vec<f64> = (0..n)
                    .map(|a| (0..n).filter(|&b| b != a).map(|b| table.pair(a, b)).filter(|&o| table.above_threshold[o]).map(|o| c[o]).sum())
                    .collect();
                (c, r)
            })
            .unzip();
        Self { table, params, cross, row }
    }

    fn total(&self, set: &[usize]) -> Option<f64> {
        let table = self.table;
        let edges = allowed_graph(table, set);
        if edges.len() + 1 < set.len() || !connected(table, set, &edges) {
            return None;
        }
        let tr = &table.transitions;
        let p = self.params;
        let d = set.len() as f64;
        let nt = edges.len() as f64;
        let a_max = d * (d - 1.0) / 2.0;
        let x = if a_max > d - 1.0 { (a_max - nt) / (a_max - (d - 1.0)) } else { 0.0 };
        let scale = d.powf(2.0 - x);
        let mut internal = 0.0;
        let mut spectator = 0.0;
        for &t in &edges {
            let c = &self.cross[t];
            for &o in &edges {
                if o != t {
                    internal += c[o];
                }
            }
            let mut inside = 0.0;
            for (k, &a) in set.iter().enumerate() {
                spectator += self.row[t][a];
                for &b in &set[k + 1..] {
                    let o = table.pair(a, b);
                    if table.above_threshold[o] {
                        inside += c[o];
                    }
                }
            }
            spectator -= 2.0 * inside;
        }
        let t_r = PI / nt * edges.iter().map(|&t| 1.0 / tr[t].rabi()).sum::<f64>();
        let sens: f64 = match p.memory_pairs {
            MemoryPairs::Allowed => edges.iter().map(|&t| (TAU * tr[t].sensitivity_hz_per_t).powi(2)).sum(),
            MemoryPairs::All => {
                let mut s = 0.0;
                for (k, &a) in set.iter().enumerate() {
                    for &b in &set[k + 1..] {
                        s += (TAU * tr[table.pair(a, b)].sensitivity_hz_per_t).powi(2);
                    }
                }
                s
            }
        };
        let t_g = scale * t_r;
        let memory = t_g * t_g * p.db_rms_t.powi(2) * sens / (4.0 * d * (d + 2.0));
        Some(memory + scale / nt * (internal + p.kappa * spectator))
    }
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub field_t: f64,
    pub n: usize,
    /// Connected candidates examined.
    pub connected: usize,
    /// Ascending in total cost, ties broken by the sorted state list.
    pub top: Vec<ManifoldCandidate>,
}

/// The k cheapest connected manifolds of 2^n states.
pub fn search_top_k(model: &LevelModel, n: usize, params: &CostParams, k: usize) -> Result<SearchResult> {
    if !(2..=3).contains(&n) {
        return Err(Error::Param(format!("n = {n}: search supports 2 or 3 qubits per ion")));
    }
    let table = transition_table(model, params)?;
    let size = 1usize << n;
    if table.n_states() > 64 || size > table.n_states() {
        return Err(Error::Param(format!("level with {} states cannot host {size}", table.n_states())));
    }
    let fast = FastCost::new(&table, params);
    let mut scored: Vec<(f64, u64)> =
        subsets(table.n_states(), size).into_par_iter().filter_map(|m| fast.total(&members(m)).map(|c| (c, m))).collect();
    let connected = scored.len();
    scored.par_sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| members(a.1).cmp(&members(b.1))));
    scored.truncate(4 * k + 8);
    let mut top = scored
        .iter()
        .map(|&(_, m)| manifold_cost(&table, &members(m), params).map(|c| c.expect("connected subset stays connected")))
        .collect::<Result<Vec<_>>>()?;
    top.sort_by(|a, b| a.cost.total.total_cmp(&b.cost.total).then_with(|| a.states.cmp(&b.states)));
    top.truncate(k);
    Ok(SearchResult { field_t: params.field_t, n, connected, top })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub field_g: f64,
    pub candidates: usize,
    pub median_cost: f64,
    pub min_cost: f64,
    pub max_cost: f64,
    pub median_t_g: f64,
    pub min_t_g: f64,
    pub max_t_g: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Top-k statistics on a uniform field grid (gauss, inclusive, `steps` points).
pub fn field_sweep(
    model: &LevelModel,
    n: usize,
    params: &CostParams,
    k: usize,
    lo_g: f64,
    hi_g: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    if steps == 0 || lo_g.is_nan() || lo_g < 0.0 || hi_g.is_nan() || hi_g < lo_g {
        return Err(Error::Param(format!("bad sweep {lo_g}:{hi_g}:{steps}")));
    }
    (0..steps)
        .map(|s| {
            let field_g = if steps == 1 { lo_g } else { lo_g + (hi_g - lo_g) * s as f64 / (steps - 1) as f64 };
            let p = CostParams { field_t: field_g * GAUSS, ..params.clone() };
            let r = search_top_k(model, n, &p, k)?;
            let mut c: Vec<f64> = r.top.iter().map(|m| m.cost.total).collect();
            let mut t: Vec<f64> = r.top.iter().map(|m| m.cost.t_g).collect();
            let ext = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| if v.is_empty() { f64::NAN } else { v.iter().copied().fold(init, f) };
            Ok(SweepRow {
                field_g,
                candidates: r.top.len(),
                min_cost: ext(&c, f64::min, f64::INFINITY),
                max_cost: ext(&c, f64::max, f64::NEG_INFINITY),
                min_t_g: ext(&t, f64::min, f64::INFINITY),
                max_t_g: ext(&t, f64::max, f64::NEG_INFINITY),
                median_cost: median(&mut c),
                median_t_g: median(&mut t),
            })
        })
        .collect()
}

/// The four-state manifold {|1,0⟩, |1,−1⟩, |2,−2⟩, |3,−3⟩}.
pub fn reference_manifold() -> [StateLabel; 4] {
    [StateLabel::new(1.0, 0.0), StateLabel::new(1.0, -1.0), StateLabel::new(2.0, -2.0), StateLabel::new(3.0, -3.0)]
}

pub fn indices_of(table: &TransitionTable, labels: &[StateLabel]) -> Result<Vec<usize>> {
    labels.iter().map(|&l| table.find(l).ok_or_else(|| Error::Param(format!("no state {l}")))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> (LevelModel, CostParams, TransitionTable) {
        let m = LevelModel::ba137_d52();
        let p = CostParams::default();
        let t = transition_table(&m, &p).unwrap();
        (m, p, t)
    }

    #[test]
    fn reference_transitions() {
        let (_, _, t) = table();
        let s = reference_manifold();
        // (pair, MHz, kHz/mG, kHz)
        let rows = [
            ((0, 1), 56.8, 2.468, 94.99),
            ((0, 2), 137.1, 3.263, 48.80),
            ((1, 2), 80.3, 0.795, 88.35),
            ((2, 3), 63.1, 0.618, 71.36),
            ((1, 3), 143.4, 1.413, 29.72),
        ];
        for ((a, b), f, sens, rabi) in rows {
            let tr = t.transition(s[a], s[b]).unwrap();
            assert!((tr.freq_hz / 1e6 / f - 1.0).abs() < 0.01, "{} {}", tr.freq_hz, f);
            let kmg = tr.sensitivity_hz_per_t.abs() * 1e-3 * GAUSS / 1e3;
            assert!((kmg / sens - 1.0).abs() < 0.01, "{kmg} vs {sens}");
            assert!((tr.rabi_hz / 1e3 / rabi - 1.0).abs() < 0.01, "{} vs {rabi}", tr.rabi_hz);
            assert!(!tr.ambiguous);
        }
    }

    #[test]
    fn sensitivity_matches_hellmann_feynman() {
        let (m, _, t) = table();
        let z = m.zeeman();
        for tr in t.transitions.iter().step_by(7) {
            let hf = |k: usize| t.states[k].vector.dot(&(&z * &t.states[k].vector));
            let want = hf(tr.upper) - hf(tr.lower);
            assert!((tr.sensitivity_hz_per_t - want).abs() <= 1e-3 * want.abs().max(1e6), "{} vs {want}", tr.sensitivity_hz_per_t);
        }
    }

    #[test]
    fn frequencies_positive() {
        let (_, _, t) = table();
        assert!(t.transitions.iter().all(|tr| tr.freq_hz > 0.0));
        assert_eq!(t.transitions.len(), 24 * 23 / 2);
    }

    #[test]
    fn total_recombines() {
        let (_, p, t) = table();
        let set = indices_of(&t, &reference_manifold()).unwrap();
        let c = manifold_cost(&t, &set, &p).unwrap().unwrap();
        assert_eq!(c.edges.len(), 5);
        assert_eq!(c.cost.total, c.cost.memory + c.cost.internal + c.cost.kappa * c.cost.spectator);
        assert!((c.cost.t_g - 4f64.powf(2.0 - c.cost.x) * c.cost.t_r).abs() < 1e-18);
        let fast = FastCost::new(&t, &p).total(&set).unwrap();
        assert!((fast / c.cost.total - 1.0).abs() < 1e-7, "{fast} vs {:?}", c.cost);
    }

    #[test]
    fn permutation_invariant() {
        let (_, p, t) = table();
        let mut set = indices_of(&t, &reference_manifold()).unwrap();
        let a = manifold_cost(&t, &set, &p).unwrap().unwrap().cost.total;
        set.reverse();
        let b = manifold_cost(&t, &set, &p).unwrap().unwrap().cost.total;
        assert_eq!(a, b);
    }

    #[test]
    fn memory_scaling_and_limits() {
        let (m, p, t) = table();
        let set = indices_of(&t, &reference_manifold()).unwrap();
        let base = manifold_cost(&t, &set, &p).unwrap().unwrap().cost;
        let noisy = CostParams { db_rms_t: 3.0 * p.db_rms_t, ..p.clone() };
        let c = manifold_cost(&t, &set, &noisy).unwrap().unwrap().cost;
        assert!((c.memory / base.memory - 9.0).abs() < 1e-9);
        let quiet = CostParams { db_rms_t: 0.0, ..p.clone() };
        assert_eq!(manifold_cost(&t, &set, &quiet).unwrap().unwrap().cost.memory, 0.0);
        let no_spect = CostParams { kappa: 0.0, ..p.clone() };
        let c = manifold_cost(&t, &set, &no_spect).unwrap().unwrap().cost;
        assert_eq!(c.total, c.memory + c.internal);
        // Halving D doubles t_R and quadruples ε_M.
        let slow = CostParams { d: p.d / 2.0, threshold_rabi_hz: p.threshold_rabi_hz / 2.0, ..p.clone() };
        let ts = transition_table(&m, &slow).unwrap();
        let c = manifold_cost(&ts, &set, &slow).unwrap().unwrap().cost;
        assert!((c.t_r / base.t_r - 2.0).abs() < 1e-9);
        assert!((c.memory / base.memory - 4.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_and_resolution_reject() {
        let (m, p, _) = table();
        let strict = CostParams { threshold_rabi_hz: 1e9, ..p.clone() };
        let t = transition_table(&m, &strict).unwrap();
        assert!(t.eligible.iter().all(|&a| !a));
        // At zero field every transition is degenerate with others.
        let zero = CostParams { field_t: 0.0, ..p.clone() };
        let t = transition_table(&m, &zero).unwrap();
        assert!(t.eligible.iter().zip(&t.blockers).all(|(&e, b)| !e || !b.is_empty()));
        let set = indices_of(&t, &reference_manifold()).unwrap();
        assert!(manifold_cost(&t, &set, &zero).unwrap().is_none());
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets(6, 3);
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| members(w[0]) < members(w[1])));
    }

    #[test]
    fn search_is_sorted_and_matches_direct_cost() {
        let (m, p, t) = table();
        let r = search_top_k(&m, 2, &p, 10).unwrap();
        assert_eq!(r.top.len(), 10);
        assert!(r.top.windows(2).all(|w| w[0].cost.total <= w[1].cost.total));
        for c in &r.top {
            let direct = manifold_cost(&t, &c.states, &p).unwrap().unwrap();
            assert_eq!(direct.cost.total, c.cost.total);
            assert!(direct.edges.len() >= 3);
        }
    }

    #[test]
    fn reference_graph_has_five_edges() {
        let (_, p, t) = table();
        let set = indices_of(&t, &reference_manifold()).unwrap();
        let c = manifold_cost(&t, &set, &p).unwrap().unwrap();
        let s = reference_manifold();
        let missing = t.transition(s[0], s[3]).unwrap();
        assert!(c.edges.iter().all(|&e| !std::ptr::eq(&t.transitions[e], missing)));
    }

    #[test]
    fn bad_inputs() {
        let (m, p, t) = table();
        assert!(search_top_k(&m, 1, &p, 3).is_err());
        assert!(manifold_cost(&t, &[0, 0, 1, 2], &p).is_err());
        assert!(transition_table(&m, &CostParams { kappa: 2.0, ..p }).is_err());
    }
}
