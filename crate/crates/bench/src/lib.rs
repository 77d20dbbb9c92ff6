//! Fixtures shared by the benchmarks.

use ionqv_core::sim::{NativeGate, Register};
use ionqv_core::CMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` random native gates on a register of `ions` ququarts.
pub fn random_gates(ions: usize, count: usize, seed: u64) -> (Register, Vec<NativeGate>) {
    let reg = Register::uniform(ions, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..count)
        .map(|_| {
            let i = rng.random_range(0..ions);
            let a = rng.random_range(0..3);
            let b = rng.random_range(a + 1..4);
            if ions > 1 && rng.random_bool(0.3) {
                let j = (i + 1 + rng.random_range(0..ions - 1)) % ions;
                NativeGate::ms(i, j, (a, b), (0, 1), rng.random_range(0.0..6.3))
            } else {
                NativeGate::r(i, a, b, rng.random_range(0.0..6.3), rng.random_range(0.0..6.3))
            }
        })
        .collect();
    (reg, gates)
}

pub fn random_target(d: usize, seed: u64) -> CMat {
    ionqv_core::linalg::random_unitary(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let (reg, gates) = random_gates(3, 50, 1);
        assert_eq!(gates.len(), 50);
        let mut psi = ionqv_core::StateVector::zero(&reg);
        psi.apply_all(&reg, &gates);
        assert!((psi.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert_eq!(random_target(4, 2).nrows(), 4);
    }
}
