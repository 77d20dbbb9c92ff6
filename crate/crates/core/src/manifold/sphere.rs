use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// ∫₀^{π/2} sinⁿθ dθ.
pub fn sine_power_integral(n: usize) -> f64 {
    let mut v = if n.is_multiple_of(2) { FRAC_PI_2 } else { 1.0 };
    let mut k = n;
    while k >= 2 {
        v *= (k - 1) as f64 / k as f64;
        k -= 2;
    }
    v
}

/// Measure of the positive orthant of the unit sphere in d real dimensions, in hyperspherical angles.
pub fn orthant_surface(d: usize) -> f64 {
    (1..d).map(|k| sine_power_integral(d - k - 1)).product()
}

/// Exact orthant averages of |c_i|²|c_j|²: (i ≠ j, i = j).
pub fn sphere_moments(d: usize) -> (f64, f64) {
    let base = 1.0 / (d * (d + 2)) as f64;
    (base, 3.0 * base)
}

/// Monte Carlo estimate of the orthant averages of |c_i|²|c_j|² for uniformly random real unit vectors.
pub fn sphere_moment_oracle(d: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::Param(format!("dimension {d} has no off-diagonal moment")));
    }
    if samples < 10_000 {
        return Err(Error::Param(format!("{samples} samples is below the 10^4 minimum")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; d];
    let (mut off, mut diag) = (0.0, 0.0);
    for _ in 0..samples {
        for v in x.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v = g * g;
        }
        let norm: f64 = x.iter().sum();
        let p: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let s1: f64 = p.iter().sum();
        let s2: f64 = p.iter().map(|v| v * v).sum();
        diag += s2 / d as f64;
        off += (s1 * s1 - s2) / (d * (d - 1)) as f64;
    }
    Ok((off / samples as f64, diag / samples as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn surface_matches_quadrature() {
        for d in 2..=6 {
            let numeric: f64 = (1..d).map(|k| simpson(|t| t.sin().powi((d - k - 1) as i32), 0.0, FRAC_PI_2, 2000)).product();
            assert!((orthant_surface(d) - numeric).abs() < 1e-6, "d = {d}");
        }
    }

    #[test]
    fn surface_ratio() {
        for d in 2..=8 {
            let r = orthant_surface(d + 4) / orthant_surface(d);
            assert!((r - FRAC_PI_2.powi(2) / (d * (d + 2)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn four_level_moments() {
        let (off, diag) = sphere_moment_oracle(4, 1_000_000, 11).unwrap();
        assert!((off * 24.0 - 1.0).abs() < 0.01, "{off}");
        assert!((diag * 8.0 - 1.0).abs() < 0.01, "{diag}");
    }

    #[test]
    fn two_level_and_ratio() {
        let (off, _) = sphere_moment_oracle(2, 400_000, 3).unwrap();
        assert!((off * 8.0 - 1.0).abs() < 0.01);
        for d in [2, 3, 5] {
            let (o, g) = sphere_moment_oracle(d, 200_000, d as u64).unwrap();
            assert!((g / o - 3.0).abs() < 0.05, "d = {d}");
            assert_eq!(sphere_moments(d).1 / sphere_moments(d).0, 3.0);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(sphere_moment_oracle(4, 100, 0).is_err());
    }
}
