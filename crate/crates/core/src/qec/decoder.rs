/// Data-qubit flips as a bit mask (bit q = data qubit q).
pub type Correction = u128;

/// Minimum-weight matching of one round's defects on a chain of `d` data qubits.
///
/// Check k sits between data qubits k and k+1. Pairing checks a < b flips data a+1..=b,
/// the left boundary flips 0..=a and the right boundary flips a+1..d. An optimal matching
/// never crosses, so it is a prefix sent left, consecutive pairs, and a suffix sent right;
/// the dynamic programme walks the sorted defects through those three phases.
pub fn decode_round(d: usize, defects: u128) -> (Correction, usize) {
    let xs: Vec<usize> = (0..d.saturating_sub(1)).filter(|k| defects >> k & 1 == 1).collect();
    let n = xs.len();
    if n == 0 {
        return (0, 0);
    }
    const INF: usize = usize::MAX / 4;
    // cost[i][phase], phase 0 = left boundary, 1 = pairing, 2 = right boundary
    let mut cost = vec![[INF; 3]; n + 1];
    let mut back = vec![[(0usize, 0usize, 0u8); 3]; n + 1];
    cost[0][0] = 0;
    for i in 0..n {
        for p in 0..3 {
            let c = cost[i][p];
            if c >= INF {
                continue;
            }
            if p == 0 && c + xs[i] + 1 < cost[i + 1][0] {
                cost[i + 1][0] = c + xs[i] + 1;
                back[i + 1][0] = (i, p, 0);
            }
            if p <= 1 && i + 1 < n {
                let v = c + xs[i + 1] - xs[i];
                if v < cost[i + 2][1] {
                    cost[i + 2][1] = v;
                    back[i + 2][1] = (i, p, 1);
                }
            }
            let v = c + d - 1 - xs[i];
            if v < cost[i + 1][2] {
                cost[i + 1][2] = v;
                back[i + 1][2] = (i, p, 2);
            }
        }
    }
    let (mut p, weight) = (0..3).map(|p| (p, cost[n][p])).min_by_key(|&(_, c)| c).unwrap();
    let range = |lo: usize, hi: usize| -> u128 { (lo..hi).fold(0, |m, q| m | 1u128 << q) };
    let mut corr = 0u128;
    let mut i = n;
    while i > 0 {
        let (j, q, kind) = back[i][p];
        corr ^= match kind {
            0 => range(0, xs[j] + 1),
            1 => range(xs[j] + 1, xs[j + 1] + 1),
            _ => range(xs[j] + 1, d),
        };
        i = j;
        p = q;
    }
    (corr, weight)
}

/// Decode every differenced round and return the total correction and the predicted flip
/// of the logical observable (data qubit 0).
pub fn decode(d: usize, rounds: &[u128]) -> (Correction, bool) {
    let corr = rounds.iter().fold(0u128, |acc, &r| acc ^ decode_round(d, r).0);
    (corr, corr & 1 == 1)
}

/// Exhaustive minimum-weight matching, including any number of boundary matches.
pub fn brute_force_weight(d: usize, defects: u128) -> usize {
    let xs: Vec<usize> = (0..d.saturating_sub(1)).filter(|k| defects >> k & 1 == 1).collect();
    fn go(xs: &[usize], used: &mut Vec<bool>, d: usize) -> usize {
        let Some(i) = used.iter().position(|u| !u) else { return 0 };
        used[i] = true;
        let mut best = (xs[i] + 1).min(d - 1 - xs[i]) + go(xs, used, d);
        for j in i + 1..xs.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(xs[j].abs_diff(xs[i]) + go(xs, used, d));
                used[j] = false;
            }
        }
        used[i] = false;
        best
    }
    go(&xs, &mut vec![false; xs.len()], d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syndrome(d: usize, flips: u128) -> u128 {
        (0..d - 1).filter(|k| (flips >> k & 1) != (flips >> (k + 1) & 1)).fold(0, |m, k| m | 1 << k)
    }

    #[test]
    fn worked_cases() {
        assert_eq!(decode_round(7, 0), (0, 0));
        assert_eq!(decode_round(7, 0b001_1000), (1 << 4, 1));
        assert_eq!(decode_round(7, 1), (1, 1));
        assert_eq!(decode_round(7, 1 << 5), (1 << 6, 1));
    }

    #[test]
    fn correction_clears_syndrome() {
        for d in [3usize, 5, 9] {
            for s in 0u128..1 << (d - 1) {
                let (c, w) = decode_round(d, s);
                assert_eq!(syndrome(d, c), s);
                assert_eq!(c.count_ones() as usize, w);
            }
        }
    }
}
