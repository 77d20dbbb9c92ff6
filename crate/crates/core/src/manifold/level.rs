use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanData {
    /// Angular momentum of the intermediate level.
    pub intermediate_j: f64,
    /// m² per unit of the angular Raman element.
    pub element_scale_m2: f64,
}

/// Hyperfine level with nuclear spin I and electronic angular momentum J.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelModel {
    #[serde(default)]
    pub name: String,
    pub i: f64,
    pub j: f64,
    pub a_hfs_hz: f64,
    pub b_hfs_hz: f64,
    pub g_j: f64,
    pub g_i: f64,
    pub mu_b_hz_per_t: f64,
    pub mu_n_hz_per_t: f64,
    pub raman: Option<RamanData>,
}

fn doubled(x: f64, what: &str) -> Result<i32> {
    let t = (2.0 * x).round();
    if (2.0 * x - t).abs() > 1e-9 || t < 0.0 {
        return Err(Error::Data(format!("{what} = {x} is not a non-negative half integer")));
    }
    Ok(t as i32)
}

impl LevelModel {
    pub fn from_json(src: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(src).map_err(|e| Error::Data(format!("level file: {e}")))?;
        m.check()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        Self::from_json(&src)
    }

    /// ¹³⁷Ba⁺ D₅/₂ as shipped in `data/ba137_d52.json`.
    pub fn ba137_d52() -> Self {
        Self::from_json(include_str!("../../../../data/ba137_d52.json")).expect("bundled level file parses")
    }

    fn check(&self) -> Result<()> {
        doubled(self.i, "I")?;
        doubled(self.j, "J")?;
        if let Some(r) = &self.raman {
            doubled(r.intermediate_j, "intermediate J")?;
        }
        Ok(())
    }

    pub fn two_i(&self) -> i32 {
        (2.0 * self.i).round() as i32
    }

    pub fn two_j(&self) -> i32 {
        (2.0 * self.j).round() as i32
    }

    pub fn dim(&self) -> usize {
        ((self.two_i() + 1) * (self.two_j() + 1)) as usize
    }

    /// Doubled (m_I, m_J) of basis index k; m_J varies fastest, both from +j down.
    pub fn basis(&self, k: usize) -> (i32, i32) {
        let dj = (self.two_j() + 1) as usize;
        (self.two_i() - 2 * (k / dj) as i32, self.two_j() - 2 * (k % dj) as i32)
    }

    /// Zero-field energy of hyperfine level F (doubled), Hz.
    pub fn zero_field_energy(&self, two_f: i32) -> f64 {
        let (i, j) = (self.i, self.j);
        let f = two_f as f64 / 2.0;
        let k = f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0);
        let mut e = self.a_hfs_hz * k / 2.0;
        if let Some(den) = self.quadrupole_denominator() {
            e += self.b_hfs_hz * (1.5 * k * (k + 1.0) - 2.0 * i * (i + 1.0) * j * (j + 1.0)) / (2.0 * den);
        }
        e
    }

    fn quadrupole_denominator(&self) -> Option<f64> {
        let den = 2.0 * self.i * (2.0 * self.i - 1.0) * self.j * (2.0 * self.j - 1.0);
        (den.abs() > 1e-12).then_some(den)
    }

    /// Allowed doubled F values, lowest zero-field energy first.
    pub fn f_values(&self) -> Vec<i32> {
        let mut fs: Vec<i32> = ((self.two_i() - self.two_j()).abs()..=self.two_i() + self.two_j()).step_by(2).collect();
        fs.sort_by(|a, b| self.zero_field_energy(*a).total_cmp(&self.zero_field_energy(*b)).then(a.cmp(b)));
        fs
    }

    /// I·J, Hz-free.
    fn i_dot_j(&self) -> DMatrix<f64> {
        let n = self.dim();
        let (ti, tj) = (self.two_i() as f64 / 2.0, self.two_j() as f64 / 2.0);
        let ladder = |j: f64, m: f64, up: bool| {
            let mm = if up { m + 1.0 } else { m - 1.0 };
            if mm.abs() > j + 1e-9 {
                0.0
            } else if up {
                (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
            } else {
                (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
            }
        };
        let index = |two_mi: i32, two_mj: i32| -> usize {
            let dj = (self.two_j() + 1) as usize;
            ((self.two_i() - two_mi) / 2) as usize * dj + ((self.two_j() - two_mj) / 2) as usize
        };
        let mut h = DMatrix::zeros(n, n);
        for k in 0..n {
            let (a, b) = self.basis(k);
            let (mi, mj) = (a as f64 / 2.0, b as f64 / 2.0);
            h[(k, k)] += mi * mj;
            // ½(I₊J₋ + I₋J₊)
            if a + 2 <= self.two_i() && b - 2 >= -self.two_j() {
                h[(index(a + 2, b - 2), k)] += 0.5 * ladder(ti, mi, true) * ladder(tj, mj, false);
            }
            if a - 2 >= -self.two_i() && b + 2 <= self.two_j() {
                h[(index(a - 2, b + 2), k)] += 0.5 * ladder(ti, mi, false) * ladder(tj, mj, true);
            }
        }
        h
    }

    /// Hyperfine part of the Hamiltonian, Hz.
    pub fn hyperfine(&self) -> DMatrix<f64> {
        let n = self.dim();
        let k = self.i_dot_j();
        let mut h = &k * self.a_hfs_hz;
        if let Some(den) = self.quadrupole_denominator() {
            let (i, j) = (self.i, self.j);
            let c = i * (i + 1.0) * j * (j + 1.0);
            let q = (&k * &k) * 3.0 + &k * 1.5 - DMatrix::identity(n, n) * c;
            h += q * (self.b_hfs_hz / den);
        }
        h
    }

    /// ∂H/∂B, Hz/T.
    pub fn zeeman(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| {
            if r != c {
                return 0.0;
            }
            let (a, b) = self.basis(r);
            self.mu_b_hz_per_t * self.g_j * b as f64 / 2.0 - self.mu_n_hz_per_t * self.g_i * a as f64 / 2.0
        })
    }

    pub fn hamiltonian(&self, field_t: f64) -> DMatrix<f64> {
        let h = self.hyperfine() + self.zeeman() * field_t;
        debug_assert!((&h - h.transpose()).amax() <= 1e-6 * h.amax().max(1.0), "Hamiltonian is not Hermitian");
        h
    }
}

/// Zero-field quantum numbers, doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub two_f: i32,
    pub two_m: i32,
}

impl StateLabel {
    pub fn new(f: f64, m: f64) -> Self {
        Self { two_f: (2.0 * f).round() as i32, two_m: (2.0 * m).round() as i32 }
    }
}

fn half(t: i32) -> String {
    if t % 2 == 0 {
        format!("{}", t / 2)
    } else {
        format!("{t}/2")
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", half(self.two_f), half(self.two_m))
    }
}

#[derive(Clone, Debug)]
pub struct LevelState {
    pub label: StateLabel,
    pub energy_hz: f64,
    /// Amplitudes in the |m_I, m_J⟩ basis.
    pub vector: DVector<f64>,
}

/// Eigenstates at `field_t` (T), ordered by label: F ascending, then m_F descending.
///
/// H conserves m_F, and levels sharing m_F never cross, so the k-th lowest state of an m_F
/// block connects to the k-th lowest zero-field F of that block.
pub fn diagonalize_level(model: &LevelModel, field_t: f64) -> Result<Vec<LevelState>> {
    if field_t.is_nan() || field_t < 0.0 {
        return Err(Error::Param(format!("field must be non-negative, got {field_t}")));
    }
    let h = model.hamiltonian(field_t);
    let n = model.dim();
    let fs = model.f_values();
    let mut out = Vec::with_capacity(n);
    let two_max = model.two_i() + model.two_j();
    let mut two_m = two_max;
    while two_m >= -two_max {
        let idx: Vec<usize> = (0..n)
            .filter(|&k| {
                let (a, b) = model.basis(k);
                a + b == two_m
            })
            .collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        let eig = SymmetricEigen::new(block);
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let block_fs: Vec<i32> = fs.iter().copied().filter(|&f| f >= two_m.abs()).collect();
        if block_fs.len() != idx.len() {
            return Err(Error::Data(format!("m_F block {} has {} states but {} F values", half(two_m), idx.len(), block_fs.len())));
        }
        for (rank, &col) in order.iter().enumerate() {
            let mut v = DVector::zeros(n);
            for (r, &k) in idx.iter().enumerate() {
                v[k] = eig.eigenvectors[(r, col)];
            }
            out.push(LevelState { label: StateLabel { two_f: block_fs[rank], two_m }, energy_hz: eig.eigenvalues[col], vector: v });
        }
        two_m -= 2;
    }
    out.sort_by(|a, b| a.label.two_f.cmp(&b.label.two_f).then(b.label.two_m.cmp(&a.label.two_m)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAUSS: f64 = 1e-4;

    fn toy(i: f64, j: f64) -> LevelModel {
        LevelModel {
            name: "toy".into(),
            i,
            j,
            a_hfs_hz: 100e6,
            b_hfs_hz: 20e6,
            g_j: 2.0,
            g_i: 0.5,
            mu_b_hz_per_t: 1.4e10,
            mu_n_hz_per_t: 7.6e6,
            raman: None,
        }
    }

    #[test]
    fn zero_field_multiplets() {
        let m = LevelModel::ba137_d52();
        assert_eq!(m.dim(), 24);
        let states = diagonalize_level(&m, 0.0).unwrap();
        for f in m.f_values() {
            let e: Vec<f64> = states.iter().filter(|s| s.label.two_f == f).map(|s| s.energy_hz).collect();
            assert_eq!(e.len() as i32, f + 1);
            for x in &e {
                assert!((x - m.zero_field_energy(f)).abs() < 1.0, "F = {f}");
            }
        }
    }

    #[test]
    fn no_nuclear_spin_is_linear_zeeman() {
        let m = toy(0.0, 2.5);
        let b = 3.0 * GAUSS;
        for s in diagonalize_level(&m, b).unwrap() {
            let want = m.g_j * m.mu_b_hz_per_t * b * s.label.two_m as f64 / 2.0;
            assert!((s.energy_hz - want).abs() < 1e-6);
        }
    }

    #[test]
    fn trace_is_field_independent_up_to_zeeman() {
        let m = LevelModel::ba137_d52();
        let t0: f64 = diagonalize_level(&m, 0.0).unwrap().iter().map(|s| s.energy_hz).sum();
        for b in [1.0, 20.0, 70.0] {
            let t: f64 = diagonalize_level(&m, b * GAUSS).unwrap().iter().map(|s| s.energy_hz).sum();
            assert!((t - t0).abs() < 1e-3 * m.a_hfs_hz.abs(), "{b} G");
            assert!(m.zeeman().trace().abs() < 1e-9 * m.mu_b_hz_per_t);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        for m in [LevelModel::ba137_d52(), toy(1.5, 0.5), toy(2.5, 1.5)] {
            let h = m.hamiltonian(5.0 * GAUSS);
            assert!((&h - h.transpose()).amax() < 1e-6);
        }
    }

    #[test]
    fn labels_follow_adiabatic_path() {
        // Overlap tracking from near zero field in small steps reproduces the block-rank labels.
        let m = LevelModel::ba137_d52();
        let mut prev = diagonalize_level(&m, 1e-9).unwrap();
        let mut b = 0.0;
        while b < 70.0 {
            b += 0.05;
            let next = diagonalize_level(&m, b * GAUSS).unwrap();
            for (p, q) in prev.iter().zip(&next) {
                assert_eq!(p.label, q.label);
                let best = next.iter().max_by(|x, y| x.vector.dot(&p.vector).abs().total_cmp(&y.vector.dot(&p.vector).abs())).unwrap();
                assert_eq!(best.label, p.label, "at {b} G");
            }
            prev = next;
        }
    }

    #[test]
    fn mixing_onset() {
        // F=3 and F=4 share m_F = ±3 blocks; their states are well mixed near 0.35 G.
        let m = LevelModel::ba137_d52();
        let gap = (m.zero_field_energy(6) - m.zero_field_energy(8)).abs();
        let onset = gap / m.mu_b_hz_per_t / GAUSS;
        assert!((onset - 0.35).abs() < 0.05, "{onset}");
    }

    #[test]
    fn rejects_negative_field() {
        assert!(diagonalize_level(&LevelModel::ba137_d52(), -1.0).is_err());
        assert!(LevelModel::from_json(r#"{"i":0.3,"j":1,"a_hfs_hz":0,"b_hfs_hz":0,"g_j":1,"g_i":0,"mu_b_hz_per_t":1,"mu_n_hz_per_t":1}"#)
            .is_err());
    }
}
