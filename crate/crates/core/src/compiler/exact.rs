//! Exact single-ion synthesis: block-structured shortcut and Givens elimination.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{pulse_bound, PulseSequence, SynthesisReport};
use crate::error::{Error, Result};
use crate::linalg::{phase_distance, unitarity_defect, CMat, C64, I};
use crate::sim::{IonSpec, NativeGate, Register};

const ZERO_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    /// Try block-diagonal shortcuts before elimination.
    pub shortcuts: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { shortcuts: true }
    }
}

/// Synthesize a d×d unitary on a single ion. Gates are emitted on ion 0.
pub fn synthesize_exact(u: &CMat, ion: &IonSpec, opts: ExactOptions) -> Result<SynthesisReport> {
    let d = ion.d;
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Param(format!("target is {}x{}, ion has {d} levels", u.nrows(), u.ncols())));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    if !ion.is_connected() {
        return Err(Error::Disconnected);
    }
    let reg = Register::build(vec![ion.clone()])?;
    let mut candidates: Vec<(Vec<NativeGate>, &'static str)> = Vec::new();
    if opts.shortcuts {
        if let Some(g) = block_path(u, ion) {
            candidates.push((g, "block"));
        }
    }
    candidates.push((givens_path(u, ion), "givens"));
    let mut best: Option<SynthesisReport> = None;
    for (gates, method) in candidates {
        let seq = PulseSequence::new(gates);
        let distance = phase_distance(u, &seq.unitary(&reg));
        if distance > 1e-9 {
            continue;
        }
        let n = seq.len();
        if best.as_ref().is_none_or(|b| n < b.pulse_count) {
            best = Some(SynthesisReport {
                distance,
                pulse_count: n,
                bound: pulse_bound(d),
                within_bound: n <= pulse_bound(d),
                method: method.to_string(),
                sequence: seq,
            });
        }
    }
    best.ok_or_else(|| Error::Unsupported("exact synthesis did not reconstruct the target".into()))
}

fn r_matrix(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (c, s) = (theta.cos(), theta.sin());
    [[C64::new(c, 0.0), -I * C64::from_polar(s, -phi)], [-I * C64::from_polar(s, phi), C64::new(c, 0.0)]]
}

fn rotate_rows(w: &mut CMat, a: usize, b: usize, theta: f64, phi: f64) {
    let m = r_matrix(theta, phi);
    for col in 0..w.ncols() {
        let (x, y) = (w[(a, col)], w[(b, col)]);
        w[(a, col)] = m[0][0] * x + m[0][1] * y;
        w[(b, col)] = m[1][0] * x + m[1][1] * y;
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Breadth-first tree over `alive` nodes: (order, parent).
fn bfs_tree(root: usize, alive: &[bool], edges: &[(usize, usize)]) -> (Vec<usize>, Vec<Option<usize>>) {
    let d = alive.len();
    let mut parent = vec![None; d];
    let mut seen = vec![false; d];
    let mut order = vec![root];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if alive[w] && !seen[w] {
                seen[w] = true;
                parent[w] = Some(v);
                order.push(w);
            }
        }
    }
    (order, parent)
}

/// Column elimination along spanning trees, then pairwise phase equalisation.
/// At most d(d−1)/2 + 2(d−1) pulses.
pub fn givens_path(u: &CMat, ion: &IonSpec) -> Vec<NativeGate> {
    let d = ion.d;
    let edges = &ion.allowed_r;
    let mut w = u.clone();
    let mut alive = vec![true; d];
    let mut rotations: Vec<(usize, usize, f64, f64)> = Vec::new();
    for _ in 0..d - 1 {
        let root = alive.iter().position(|&x| x).expect("alive node");
        let (order, _) = bfs_tree(root, &alive, edges);
        let leaf = *order.last().expect("nonempty tree");
        let (order, parent) = bfs_tree(leaf, &alive, edges);
        for &v in order.iter().skip(1).rev() {
            let p = parent[v].expect("tree parent");
            let (alpha, beta) = (v.min(p), v.max(p));
            let (a, b) = (w[(alpha, leaf)], w[(beta, leaf)]);
            let target = if v == beta { b } else { a };
            if target.norm() < ZERO_TOL {
                continue;
            }
            let (theta, phi) = if v == beta {
                (b.norm().atan2(a.norm()), b.arg() - a.arg() - FRAC_PI_2)
            } else {
                (a.norm().atan2(b.norm()), b.arg() - a.arg() + FRAC_PI_2)
            };
            rotate_rows(&mut w, alpha, beta, theta, phi);
            rotations.push((alpha, beta, theta, phi));
        }
        alive[leaf] = false;
    }
    let mut gates = phase_pulses(&w, ion);
    for &(a, b, theta, phi) in rotations.iter().rev() {
        gates.push(NativeGate::r(0, a, b, -theta, phi));
    }
    gates
}

/// Pulses realising the diagonal of `w` up to a global phase, two per tree edge.
fn phase_pulses(w: &CMat, ion: &IonSpec) -> Vec<NativeGate> {
    let d = ion.d;
    let delta: Vec<f64> = (0..d).map(|k| w[(k, k)].arg()).collect();
    // unwrap against the first entry so the mean is well defined
    let base = delta[0];
    let rel: Vec<f64> = delta.iter().map(|x| base + wrap(x - base)).collect();
    let gamma = rel.iter().sum::<f64>() / d as f64;
    let mut t: Vec<f64> = rel.iter().map(|x| x - gamma).collect();
    let alive = vec![true; d];
    let (order, parent) = bfs_tree(0, &alive, &ion.allowed_r);
    let mut gates = Vec::new();
    for &v in order.iter().skip(1).rev() {
        let p = parent[v].expect("tree parent");
        let tv = t[v];
        t[p] += tv;
        t[v] = 0.0;
        let (alpha, beta) = (v.min(p), v.max(p));
        let big_gamma = wrap(if v == alpha { -tv } else { tv });
        if big_gamma.abs() < 1e-12 {
            continue;
        }
        gates.push(NativeGate::r(0, alpha, beta, FRAC_PI_2, 0.0));
        gates.push(NativeGate::r(0, alpha, beta, FRAC_PI_2, big_gamma + PI));
    }
    gates
}

/// V ∈ SU(2) (up to sign) as two equatorial rotations, listed in acting order.
pub fn su2_as_two_pulses(v: [[C64; 2]; 2]) -> [(f64, f64); 2] {
    let alpha = v[0][0];
    let beta = v[1][0];
    let phi1 = if beta.norm() > ZERO_TOL { beta.arg() } else { 0.0 };
    let theta1 = (-alpha.im).atan2(beta.norm());
    // W = R(−θ1, φ1)·V has a real diagonal and is itself a rotation
    let r = r_matrix(-theta1, phi1);
    let w00 = r[0][0] * v[0][0] + r[0][1] * v[1][0];
    let w10 = r[1][0] * v[0][0] + r[1][1] * v[1][0];
    let s2 = w10.norm();
    let phi2 = if s2 > ZERO_TOL { (I * w10).arg() } else { 0.0 };
    let theta2 = s2.atan2(w00.re);
    [(theta2, phi2), (theta1, phi1)]
}

/// Perfect matchings of the allowed graph.
fn matchings(d: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<bool>, edges: &[(usize, usize)], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(first) = free.iter().position(|&f| f) else {
            out.push(cur.clone());
            return;
        };
        for &(a, b) in edges {
            let other = if a == first {
                b
            } else if b == first {
                a
            } else {
                continue;
            };
            if !free[other] {
                continue;
            }
            free[first] = false;
            free[other] = false;
            cur.push((first.min(other), first.max(other)));
            rec(free, edges, cur, out);
            cur.pop();
            free[first] = true;
            free[other] = true;
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![true; d], edges, &mut Vec::new(), &mut out);
    out
}

/// Targets that are block diagonal over a perfect matching of allowed pairs:
/// one pulse per rotation-shaped block, two per general block.
pub fn block_path(u: &CMat, ion: &IonSpec) -> Option<Vec<NativeGate>> {
    let d = ion.d;
    let tol = 1e-10;
    let mut best: Option<Vec<NativeGate>> = None;
    let closed: Vec<(usize, usize)> = ion
        .allowed_r
        .iter()
        .copied()
        .filter(|&(a, b)| {
            (0..d).filter(|&k| k != a && k != b).all(|k| [a, b].iter().all(|&r| u[(r, k)].norm() < tol && u[(k, r)].norm() < tol))
        })
        .collect();
    for m in matchings(d, &closed) {
        let mut in_block = vec![usize::MAX; d];
        for (k, &(a, b)) in m.iter().enumerate() {
            in_block[a] = k;
            in_block[b] = k;
        }
        let outside_zero = (0..d).all(|r| (0..d).all(|c| in_block[r] == in_block[c] || u[(r, c)].norm() < tol));
        if !outside_zero {
            continue;
        }
        let blocks: Vec<[[C64; 2]; 2]> = m.iter().map(|&(a, b)| [[u[(a, a)], u[(a, b)]], [u[(b, a)], u[(b, b)]]]).collect();
        let det = |x: &[[C64; 2]; 2]| x[0][0] * x[1][1] - x[0][1] * x[1][0];
        let g2 = det(&blocks[0]);
        if blocks.iter().any(|b| (det(b) - g2).norm() > tol) {
            continue;
        }
        let g0 = g2.sqrt();
        for g in [g0, -g0] {
            let mut gates = Vec::new();
            for (&(a, b), blk) in m.iter().zip(&blocks) {
                let v = [[blk[0][0] / g, blk[0][1] / g], [blk[1][0] / g, blk[1][1] / g]];
                let is_identity = (v[0][0] - 1.0).norm() < tol && (v[1][1] - 1.0).norm() < tol && v[1][0].norm() < tol;
                if is_identity {
                    continue;
                }
                let real_diag = v[0][0].im.abs() < tol && (v[0][0] - v[1][1]).norm() < tol;
                if real_diag {
                    let s = v[1][0].norm();
                    let theta = s.atan2(v[0][0].re);
                    let phi = if s > tol { (I * v[1][0]).arg() } else { 0.0 };
                    gates.push(NativeGate::r(0, a, b, theta, phi));
                } else {
                    for (theta, phi) in su2_as_two_pulses(v) {
                        gates.push(NativeGate::r(0, a, b, theta, phi));
                    }
                }
            }
            if best.as_ref().is_none_or(|b| gates.len() < b.len()) {
                best = Some(gates);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, kron, pauli, random_special_unitary, random_unitary};
    use crate::sim::{embed_standard, EncodingMap};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_ion(d: usize) -> (IonSpec, Register) {
        let ion = IonSpec::qudit(d).unwrap();
        let reg = Register::build(vec![ion.clone()]).unwrap();
        (ion, reg)
    }

    #[test]
    fn identity_needs_nothing() {
        let (ion, _) = one_ion(4);
        let rep = synthesize_exact(&CMat::identity(4, 4), &ion, ExactOptions::default()).unwrap();
        assert_eq!(rep.pulse_count, 0);
        assert_eq!(rep.distance, 0.0);
    }

    #[test]
    fn phase_pair_identity() {
        // R(π/2, Γ+π)·R(π/2, 0) = diag(e^{−iΓ}, e^{iΓ})
        let gamma = 0.83;
        let a = r_matrix(FRAC_PI_2, gamma + PI);
        let b = r_matrix(FRAC_PI_2, 0.0);
        let p00 = a[0][0] * b[0][0] + a[0][1] * b[1][0];
        let p11 = a[1][0] * b[0][1] + a[1][1] * b[1][1];
        let p01 = a[0][0] * b[0][1] + a[0][1] * b[1][1];
        assert!((p00 - C64::from_polar(1.0, -gamma)).norm() < 1e-15);
        assert!((p11 - C64::from_polar(1.0, gamma)).norm() < 1e-15);
        assert!(p01.norm() < 1e-15);
    }

    #[test]
    fn random_targets_all_to_all_and_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2, 4, 8] {
            let chain = IonSpec::new(d, (0..d - 1).map(|k| (k, k + 1)).collect(), EncodingMap::identity(d).unwrap()).unwrap();
            for ion in [IonSpec::qudit(d).unwrap(), chain] {
                for _ in 0..10 {
                    let u = random_unitary(d, &mut rng);
                    let rep = synthesize_exact(&u, &ion, ExactOptions::default()).unwrap();
                    assert!(rep.distance < 1e-9, "distance {}", rep.distance);
                    assert!(rep.pulse_count <= pulse_bound(d));
                    assert!(rep.sequence.gates.iter().all(|g| match g {
                        NativeGate::R { a, b, .. } => ion.allows(*a, *b),
                        _ => false,
                    }));
                }
            }
        }
    }

    #[test]
    fn single_qubit_rotation_takes_d_over_2() {
        let (ion, reg) = one_ion(4);
        let u = embed_standard(&expm_hermitian(&kron(&pauli('X'), &pauli('I')), 0.37), &[0, 1], &reg).unwrap();
        let rep = synthesize_exact(&u, &ion, ExactOptions::default()).unwrap();
        assert_eq!(rep.pulse_count, 2);
        let (ion8, reg8) = one_ion(8);
        let u = embed_standard(&expm_hermitian(&pauli('Y'), 1.1), &[1], &reg8).unwrap();
        let rep = synthesize_exact(&u, &ion8, ExactOptions::default()).unwrap();
        assert_eq!(rep.pulse_count, 4);
    }

    #[test]
    fn two_pulse_su2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let v = random_special_unitary(2, &mut rng);
            let m = [[v[(0, 0)], v[(0, 1)]], [v[(1, 0)], v[(1, 1)]]];
            let [(t2, p2), (t1, p1)] = su2_as_two_pulses(m);
            let a = r_matrix(t1, p1);
            let b = r_matrix(t2, p2);
            let mut prod = CMat::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    prod[(i, j)] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            assert!(phase_distance(&v, &prod) < 1e-12);
        }
    }
}
