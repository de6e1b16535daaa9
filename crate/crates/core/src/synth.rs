//! Seeded synthetic edge lists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RMAT_A: f64 = 0.57;
const RMAT_B: f64 = 0.19;
const RMAT_C: f64 = 0.19;

/// Power-law edge list on exactly `n` vertices.
///
/// The first `n` edges each touch a distinct vertex so that no id goes
/// missing; the rest follow the recursive-matrix model. Needs `m ≥ n`.
pub fn rmat(n: u64, m: u64, seed: u64) -> Vec<(u64, u64)> {
    assert!(n >= 2 && m >= n, "rmat needs n ≥ 2 and m ≥ n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m as usize);
    for v in 0..n {
        let t = rng.random_range(0..n);
        if rng.random_bool(0.5) {
            edges.push((v, t));
        } else {
            edges.push((t, v));
        }
    }
    let scale = 64 - (n - 1).leading_zeros();
    while (edges.len() as u64) < m {
        let (mut s, mut d) = (0u64, 0u64);
        for _ in 0..scale {
            let r: f64 = rng.random();
            let (bs, bd) = if r < RMAT_A {
                (0, 0)
            } else if r < RMAT_A + RMAT_B {
                (0, 1)
            } else if r < RMAT_A + RMAT_B + RMAT_C {
                (1, 0)
            } else {
                (1, 1)
            };
            s = s << 1 | bs;
            d = d << 1 | bd;
        }
        if s < n && d < n {
            edges.push((s, d));
        }
    }
    edges
}

/// The directed path `0 → 1 → … → n−1`.
pub fn path(n: u64) -> Vec<(u64, u64)> {
    (1..n).map(|v| (v - 1, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn rmat_is_seeded_and_covers_every_vertex() {
        let a = rmat(1000, 5000, 7);
        assert_eq!(a, rmat(1000, 5000, 7));
        assert_ne!(a, rmat(1000, 5000, 8));
        assert_eq!(a.len(), 5000);
        let seen: BTreeSet<u64> = a.iter().flat_map(|&(s, d)| [s, d]).collect();
        assert_eq!(seen.len(), 1000);
        assert!(seen.iter().all(|&v| v < 1000));
    }

    #[test]
    fn rmat_is_skewed() {
        let e = rmat(1024, 20_000, 1);
        let mut deg = vec![0u32; 1024];
        e.iter().for_each(|&(s, _)| deg[s as usize] += 1);
        let max = *deg.iter().max().unwrap();
        assert!(max as f64 > 10.0 * 20_000.0 / 1024.0);
    }

    #[test]
    fn path_edges() {
        assert_eq!(path(4), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(path(1).is_empty());
    }
}
