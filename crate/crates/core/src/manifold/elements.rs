use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::level::{LevelModel, LevelState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Two-photon Raman via the intermediate level of the model; element in m².
    Raman,
    /// Magnetic dipole; element in Bohr magnetons.
    M1,
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raman" => Ok(Self::Raman),
            "m1" => Ok(Self::M1),
            _ => Err(Error::Param(format!("unknown mechanism {s:?} (raman, m1)"))),
        }
    }
}

/// Spherical components (σ−, π, σ+).
pub type Polarization = [f64; 3];

pub fn normalized(e: Polarization) -> Result<Polarization> {
    let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-12 {
        return Err(Error::Param("zero polarization vector".into()));
    }
    Ok(e.map(|x| x / n))
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Wigner 3j symbol from doubled arguments (Racah formula).
pub fn wigner_3j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    if tm1 + tm2 + tm3 != 0 || tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0 {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let (a, b, c) = (h(tj1 + tj2 - tj3), h(tj1 - tj2 + tj3), h(-tj1 + tj2 + tj3));
    let tri = factorial(a) * factorial(b) * factorial(c) / factorial(h(tj1 + tj2 + tj3) + 1);
    let pre = (tri
        * factorial(h(tj1 + tm1))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj2 + tm2))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj3 + tm3))
        * factorial(h(tj3 - tm3)))
    .sqrt();
    let terms = [a, h(tj1 - tm1), h(tj2 + tm2), h(tj3 - tj2 + tm1), h(tj3 - tj1 - tm2)];
    let k_min = 0.max(-terms[3]).max(-terms[4]);
    let k_max = terms[0].min(terms[1]).min(terms[2]);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(terms[0] - k)
            * factorial(terms[1] - k)
            * factorial(terms[2] - k)
            * factorial(terms[3] + k)
            * factorial(terms[4] + k);
        sum += if k % 2 == 0 { 1.0 / den } else { -1.0 / den };
    }
    let phase = h(tj1 - tj2 - tm3);
    let sign = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * pre * sum
}

/// Rank-1 operator component q from the level into an intermediate level of doubled J',
/// reduced element 1: rows |m_I, m'⟩, columns the level basis.
fn dipole_to_intermediate(model: &LevelModel, two_jp: i32, q: i32) -> DMatrix<f64> {
    let n = model.dim();
    let dp = (two_jp + 1) as usize;
    let di = (model.two_i() + 1) as usize;
    let mut t = DMatrix::zeros(di * dp, n);
    for k in 0..n {
        let (mi, mj) = model.basis(k);
        let ii = ((model.two_i() - mi) / 2) as usize;
        for c in 0..dp {
            let mp = two_jp - 2 * c as i32;
            let w = wigner_3j(two_jp, 2, model.two_j(), -mp, 2 * q, mj);
            if w != 0.0 {
                let sign = if ((two_jp - mp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                t[(ii * dp + c, k)] = sign * w;
            }
        }
    }
    t
}

/// Angular-momentum operator in the level basis: spherical component q of J (electronic) or I.
fn spherical_component(model: &LevelModel, electronic: bool, q: i32) -> DMatrix<f64> {
    let n = model.dim();
    DMatrix::from_fn(n, n, |r, c| {
        let (ar, br) = model.basis(r);
        let (ac, bc) = model.basis(c);
        let (two_j, mr, mc, same) = if electronic { (model.two_j(), br, bc, ar == ac) } else { (model.two_i(), ar, ac, br == bc) };
        if !same || mr != mc + 2 * q {
            return 0.0;
        }
        let (j, m) = (two_j as f64 / 2.0, mc as f64 / 2.0);
        match q {
            0 => m,
            1 => -(j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt() / SQRT_2,
            _ => (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt() / SQRT_2,
        }
    })
}

/// Coupling operator of a mechanism in the level basis, in its physical units.
#[derive(Clone, Debug)]
pub struct CouplingOperator {
    pub mechanism: Mechanism,
    op: DMatrix<f64>,
}

impl CouplingOperator {
    /// Raman: Σ_k ⟨j|r·e1|k⟩⟨k|r·e2|i⟩ over the intermediate level. M1: ⟨j|μ·e1|i⟩ with
    /// μ = −g_J J + (μ_N/μ_B) g_I I; e2 is ignored.
    pub fn new(model: &LevelModel, mechanism: Mechanism, e1: Polarization, e2: Polarization) -> Result<Self> {
        let e1 = normalized(e1)?;
        let e2 = normalized(e2)?;
        let op = match mechanism {
            Mechanism::Raman => {
                let r = model.raman.as_ref().ok_or_else(|| Error::Data(format!("{}: no Raman data", model.name)))?;
                let two_jp = (2.0 * r.intermediate_j).round() as i32;
                let leg = |e: Polarization| {
                    (-1..=1).map(|q| dipole_to_intermediate(model, two_jp, q) * e[(q + 1) as usize]).fold(
                        None,
                        |acc: Option<DMatrix<f64>>, m| {
                            Some(match acc {
                                Some(a) => a + m,
                                None => m,
                            })
                        },
                    )
                };
                let o1 = leg(e1).unwrap();
                let o2 = leg(e2).unwrap();
                o1.transpose() * o2 * r.element_scale_m2
            }
            Mechanism::M1 => {
                let ratio = model.mu_n_hz_per_t / model.mu_b_hz_per_t;
                let n = model.dim();
                let mut op = DMatrix::zeros(n, n);
                for q in -1..=1 {
                    let w = e1[(q + 1) as usize];
                    op += (spherical_component(model, true, q) * (-model.g_j) + spherical_component(model, false, q) * (ratio * model.g_i))
                        * w;
                }
                op
            }
        };
        Ok(Self { mechanism, op })
    }

    /// Signed element of the energy-raising component, ⟨upper|O|lower⟩, in either argument order.
    pub fn element(&self, i: &LevelState, j: &LevelState) -> f64 {
        let (lo, hi) = if i.energy_hz <= j.energy_hz { (i, j) } else { (j, i) };
        hi.vector.dot(&(&self.op * &lo.vector))
    }
}

/// Matrix element between two eigenstates of the level.
pub fn matrix_element(
    model: &LevelModel,
    i: &LevelState,
    j: &LevelState,
    mechanism: Mechanism,
    e1: Polarization,
    e2: Polarization,
) -> Result<f64> {
    Ok(CouplingOperator::new(model, mechanism, e1, e2)?.element(i, j))
}
