//! Dense complex matrix helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entry of |U†U − I|.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - e).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

/// Tr(A†B) without forming the product.
pub fn trace_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// 1 − |Tr(U†V)|/dim, insensitive to a global phase on either side.
pub fn phase_distance(u: &CMat, v: &CMat) -> f64 {
    let dim = u.nrows() as f64;
    (1.0 - trace_inner(u, v).norm() / dim).max(0.0)
}

/// exp(−i t H) for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let n = h.nrows();
    let mut d = CMat::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = (-I * t * eig.eigenvalues[k]).exp();
    }
    v * d * v.adjoint()
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, k)] *= ph;
        }
    }
    u
}

/// Haar-random element of SU(d).
pub fn random_special_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let u = random_unitary(d, rng);
    let det = u.determinant();
    let fix = C64::from_polar(1.0, -det.arg() / d as f64);
    u * fix
}

pub fn pauli(name: char) -> CMat {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    match name {
        'I' => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -I, I, z]),
        'Z' => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("unknown Pauli {name}"),
    }
}

pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}
