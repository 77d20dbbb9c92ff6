use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gate::{NativeGate, Pair};
use super::register::Register;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

const SHOT_CHUNK: u64 = 4096;

/// Amplitudes over the mixed-radix level basis (ion 0 fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(reg: &Register) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); reg.dim()];
        amps[0] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn basis(reg: &Register, levels: &[usize]) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); reg.dim()];
        amps[reg.index_of(levels)?] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn from_amplitudes(reg: &Register, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != reg.dim() {
            return Err(Error::Register(format!("expected {} amplitudes, got {}", reg.dim(), amps.len())));
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, reg: &Register, gate: &NativeGate) {
        apply_gate(reg, gate, &mut self.amps);
    }

    pub fn apply_all<'a>(&mut self, reg: &Register, gates: impl IntoIterator<Item = &'a NativeGate>) {
        for g in gates {
            self.apply(reg, g);
        }
    }
}

/// Apply a native gate in place to an amplitude slice of length `reg.dim()`.
pub fn apply_gate(reg: &Register, gate: &NativeGate, amps: &mut [C64]) {
    match gate {
        NativeGate::R { ion, a, b, theta, phi } => apply_r(reg, *ion, *a, *b, *theta, *phi, amps),
        NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, coupling } => apply_ms(reg, *ion_i, *ion_j, *pair_i, *pair_j, *coupling, amps),
        NativeGate::MultiPairMs { ion_i, ion_j, pairs_i, pairs_j, coupling } => {
            let parts = [(*ion_i, pairs_i.as_slice()), (*ion_j, pairs_j.as_slice())];
            apply_pairing(reg, &parts, *coupling, amps)
        }
        NativeGate::GlobalMs { pairs, coupling } => {
            let parts: Vec<(usize, &[Pair])> = pairs.iter().enumerate().map(|(i, p)| (i, p.as_slice())).collect();
            apply_pairing(reg, &parts, *coupling, amps)
        }
    }
}

fn apply_r(reg: &Register, ion: usize, a: usize, b: usize, theta: f64, phi: f64, amps: &mut [C64]) {
    let (lo_lvl, hi_lvl, phi) = if a < b { (a, b, phi) } else { (b, a, -phi) };
    let s = reg.stride(ion);
    let d = reg.ion(ion).d;
    let (ct, st) = (theta.cos(), theta.sin());
    let m00 = C64::new(ct, 0.0);
    // −i e^{∓iφ} sin θ
    let m01 = C64::new(0.0, -st) * C64::from_polar(1.0, -phi);
    let m10 = C64::new(0.0, -st) * C64::from_polar(1.0, phi);
    let block = s * d;
    let (oa, ob) = (lo_lvl * s, hi_lvl * s);
    let mut hi = 0;
    while hi < amps.len() {
        for lo in 0..s {
            let ia = hi + lo + oa;
            let ib = hi + lo + ob;
            let (x, y) = (amps[ia], amps[ib]);
            amps[ia] = m00 * x + m01 * y;
            amps[ib] = m10 * x + m00 * y;
        }
        hi += block;
    }
}

fn apply_ms(reg: &Register, i: usize, j: usize, pi: Pair, pj: Pair, coupling: f64, amps: &mut [C64]) {
    let (si, sj) = (reg.stride(i), reg.stride(j));
    let (di, dj) = (reg.ion(i).d, reg.ion(j).d);
    let (c, s) = (coupling.cos(), coupling.sin());
    let ms = C64::new(0.0, -s);
    let (ai, bi) = pi;
    let (aj, bj) = pj;
    let di_off = (bi as isize - ai as isize) * si as isize;
    let dj_off = (bj as isize - aj as isize) * sj as isize;
    for idx in 0..amps.len() {
        if (idx / si) % di != ai || (idx / sj) % dj != aj {
            continue;
        }
        let base = idx as isize;
        // |a a> <-> |b b>
        let p_aa = idx;
        let p_bb = (base + di_off + dj_off) as usize;
        // |a b> <-> |b a>
        let p_ab = (base + dj_off) as usize;
        let p_ba = (base + di_off) as usize;
        let (u, v) = (amps[p_aa], amps[p_bb]);
        amps[p_aa] = c * u + ms * v;
        amps[p_bb] = ms * u + c * v;
        let (u, v) = (amps[p_ab], amps[p_ba]);
        amps[p_ab] = c * u + ms * v;
        amps[p_ba] = ms * u + c * v;
    }
}

/// exp(−iJ G) with G = ⊗ (Σ_pairs X); G maps every fully paired basis state to its partner.
fn apply_pairing(reg: &Register, parts: &[(usize, &[Pair])], coupling: f64, amps: &mut [C64]) {
    let (c, s) = (coupling.cos(), coupling.sin());
    let ms = C64::new(0.0, -s);
    let partner: Vec<(usize, usize, Vec<Option<usize>>)> = parts
        .iter()
        .map(|&(ion, pairs)| {
            let d = reg.ion(ion).d;
            let mut p = vec![None; d];
            for &(a, b) in pairs {
                p[a] = Some(b);
                p[b] = Some(a);
            }
            (reg.stride(ion), d, p)
        })
        .collect();
    'outer: for idx in 0..amps.len() {
        let mut other = idx as isize;
        for (stride, d, p) in &partner {
            let digit = (idx / stride) % d;
            match p[digit] {
                Some(q) => other += (q as isize - digit as isize) * *stride as isize,
                None => continue 'outer,
            }
        }
        let other = other as usize;
        if other <= idx {
            continue;
        }
        let (u, v) = (amps[idx], amps[other]);
        amps[idx] = c * u + ms * v;
        amps[other] = ms * u + c * v;
    }
}

/// Full unitary of a gate list, first element applied first.
pub fn circuit_unitary(reg: &Register, gates: &[NativeGate]) -> CMat {
    let dim = reg.dim();
    let mut m = CMat::identity(dim, dim);
    for col in 0..dim {
        let mut column = m.column_mut(col);
        let slice = column.as_mut_slice();
        for g in gates {
            apply_gate(reg, g, slice);
        }
    }
    m
}

/// Lift a 2^k-dimensional qubit unitary on `targets` to the level space of `reg`.
/// `targets[0]` is the most significant qubit of `u`.
pub fn embed_standard(u: &CMat, targets: &[usize], reg: &Register) -> Result<CMat> {
    let k = targets.len();
    if u.nrows() != 1 << k || u.ncols() != 1 << k {
        return Err(Error::Param(format!("unitary is {}x{}, targets need {}", u.nrows(), u.ncols(), 1 << k)));
    }
    let n = reg.num_qubits();
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(Error::Param(format!("bad target list {targets:?}")));
        }
    }
    let defect = crate::linalg::unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let dim = reg.dim();
    let table = reg.word_table();
    let shifts: Vec<usize> = targets.iter().map(|&q| n - 1 - q).collect();
    let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let sub = |w: usize| shifts.iter().fold(0, |acc, &s| (acc << 1) | ((w >> s) & 1));
    let spread = |t: usize| shifts.iter().enumerate().fold(0, |acc, (m, &s)| acc | (((t >> (k - 1 - m)) & 1) << s));
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let w = reg.qubit_word(col);
        let rest = w & !mask;
        let tc = sub(w);
        for tr in 0..(1usize << k) {
            let row = table[rest | spread(tr)];
            out[(row, col)] = u[(tr, tc)];
        }
    }
    Ok(out)
}

/// Sample computational-basis outcomes; labels follow the register's encoding maps.
pub fn sample_measurement(state: &StateVector, reg: &Register, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
    if shots == 0 {
        return Err(Error::Param("zero shots".into()));
    }
    let indices = sample_indices(&state.probabilities(), shots, seed);
    let mut counts = BTreeMap::new();
    for (idx, n) in indices {
        *counts.entry(reg.label(idx)).or_insert(0) += n;
    }
    Ok(counts)
}

/// Draw `shots` basis indices. Chunked streams keep parallel results identical to serial ones.
pub fn sample_indices(probs: &[f64], shots: u64, seed: u64) -> BTreeMap<usize, u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let chunks = shots.div_ceil(SHOT_CHUNK);
    let partial: Vec<BTreeMap<usize, u64>> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ch);
            let n = SHOT_CHUNK.min(shots - ch * SHOT_CHUNK);
            let mut m = BTreeMap::new();
            for _ in 0..n {
                let r: f64 = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
                *m.entry(idx).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut out = BTreeMap::new();
    for m in partial {
        for (k, v) in m {
            *out.entry(k).or_insert(0) += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, kron, pauli};
    use crate::sim::register::{EncodingMap, IonSpec};
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_is_identity() {
        let reg = Register::uniform(2, 4).unwrap();
        let u = circuit_unitary(&reg, &[NativeGate::r(1, 0, 1, 0.0, 1.3)]);
        assert!((u - CMat::identity(16, 16)).norm() < 1e-15);
    }

    #[test]
    fn ghz_from_single_pulse() {
        let ion = IonSpec::all_to_all(4, EncodingMap::m2()).unwrap();
        let reg = Register::build(vec![ion]).unwrap();
        let mut psi = StateVector::zero(&reg);
        psi.apply(&reg, &NativeGate::r(0, 0, 1, PI / 4.0, -PI / 2.0));
        let counts = sample_measurement(&psi, &reg, 10_000, 5).unwrap();
        assert_eq!(counts.keys().cloned().collect::<Vec<_>>(), vec!["00".to_string(), "11".to_string()]);
        let p = psi.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        // the rotation law fixes the relative sign: (|00> - |11>)/sqrt2
        assert!((psi.amplitudes()[0] + psi.amplitudes()[1]).norm() < 1e-12);
    }

    #[test]
    fn ms_leaves_uncoupled_levels() {
        let reg = Register::uniform(2, 4).unwrap();
        let mut psi = StateVector::basis(&reg, &[2, 0]).unwrap();
        let before = psi.clone();
        psi.apply(&reg, &NativeGate::ms(0, 1, (0, 1), (0, 1), 0.9));
        assert_eq!(psi, before);
    }

    #[test]
    fn embed_x_under_binary_map() {
        let reg = Register::uniform(1, 4).unwrap();
        let u = embed_standard(&pauli('X'), &[0], &reg).unwrap();
        let perm = [2, 3, 0, 1];
        for col in 0..4 {
            for row in 0..4 {
                let e = if row == perm[col] { 1.0 } else { 0.0 };
                assert!((u[(row, col)].re - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn embed_cnot_on_two_qubit_ions() {
        let reg = Register::uniform(2, 2).unwrap();
        let x = pauli('X');
        let p0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        let p1 = CMat::identity(2, 2) - &p0;
        let cnot = kron(&p0, &CMat::identity(2, 2)) + kron(&p1, &x);
        let u = embed_standard(&cnot, &[0, 1], &reg).unwrap();
        // qubit 0 is ion 0, which is the fastest digit: level index = q0 + 2 q1
        let word_to_idx = |w: usize| ((w >> 1) & 1) + 2 * (w & 1);
        for w in 0..4 {
            for v in 0..4 {
                assert_eq!(u[(word_to_idx(w), word_to_idx(v))], cnot[(w, v)]);
            }
        }
        assert!(embed_standard(&hadamard(), &[0, 0], &reg).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_complete() {
        let reg = Register::uniform(3, 2).unwrap();
        let mut psi = StateVector::zero(&reg);
        for i in 0..3 {
            psi.apply(&reg, &NativeGate::r(i, 0, 1, PI / 4.0, 0.0));
        }
        let a = sample_measurement(&psi, &reg, 9000, 11).unwrap();
        let b = sample_measurement(&psi, &reg, 9000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().sum::<u64>(), 9000);
        assert!(sample_measurement(&psi, &reg, 0, 1).is_err());
        let z = sample_measurement(&StateVector::zero(&reg), &reg, 100, 1).unwrap();
        assert_eq!(z.get("000"), Some(&100));
    }
}
