//! Brute-force reference implementations.
//!
//! These deliberately share no code with the modules they validate: counts
//! walk pairs and tuples directly, and the proof oracle enumerates subsets
//! by bitmask. Hard caps keep everything desk-feasible.

use crate::bits::{BitVector, VectorFamily};
use crate::{Error, Result};

/// Exact #OV: pairs (x, y) in A x B with <x, y> = 0.
pub fn brute_count_ov(a: &VectorFamily, b: &VectorFamily) -> u64 {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    let mut count = 0u64;
    for x in a.iter() {
        for y in b.iter() {
            if x.words().iter().zip(y.words()).all(|(p, q)| p & q == 0) {
                count += 1;
            }
        }
    }
    count
}

/// Exact #k-OV: tuples whose coordinatewise AND is the zero vector.
pub fn brute_count_kov(families: &[&VectorFamily]) -> u64 {
    assert!(families.len() >= 2);
    let dim = families[0].dim();
    assert!(families.iter().all(|f| f.dim() == dim));
    fn rec(families: &[&VectorFamily], level: usize, acc: &BitVector) -> u64 {
        if level == families.len() {
            return u64::from(acc.is_zero());
        }
        let mut total = 0;
        for v in families[level].iter() {
            if level + 1 == families.len() {
                // Leaf: no need to materialize the AND.
                if acc.words().iter().zip(v.words()).all(|(p, q)| p & q == 0) {
                    total += 1;
                }
            } else {
                total += rec(families, level + 1, &acc.and(v));
            }
        }
        total
    }
    let ones = BitVector::ones(dim);
    rec(families, 0, &ones)
}

/// Exact Max(A, B) = max |x AND y|.
pub fn brute_max_ip(a: &VectorFamily, b: &VectorFamily) -> usize {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    let mut best = 0;
    for x in a.iter() {
        for y in b.iter() {
            best = best.max(x.dot(y));
        }
    }
    best
}

/// Does some pair satisfy the predicate?
pub fn brute_satisfying_pair<F>(a: &VectorFamily, b: &VectorFamily, predicate: F) -> bool
where
    F: Fn(&BitVector, &BitVector) -> bool,
{
    a.iter().any(|x| b.iter().any(|y| predicate(x, y)))
}

/// All inclusion-minimal subsets S of the positive-weight support with
/// 5 * sum_{i in S} w_i >= threshold_times5, by exhaustive bitmask
/// enumeration. Coordinate lists are sorted; the collection is ordered
/// lexicographically by coordinate list.
pub fn brute_min_proofs(weights: &[u64], threshold_times5: u64) -> Result<Vec<Vec<usize>>> {
    let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0).collect();
    if support.len() > 20 {
        return Err(Error::ResourceLimit(format!(
            "proof oracle supports at most 20 positive weights, got {}",
            support.len()
        )));
    }
    let n = support.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let sum: u64 = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| weights[support[i]])
            .sum();
        if 5 * sum < threshold_times5 {
            continue;
        }
        // Minimal: removing any single element drops below the threshold.
        let minimal = (0..n).filter(|&i| mask >> i & 1 == 1).all(|i| {
            5 * (sum - weights[support[i]]) < threshold_times5
        });
        if minimal {
            out.push(
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| support[i])
                    .collect(),
            );
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    fn random_family(n: usize, d: usize, p: f64, rng: &mut SeededRng) -> VectorFamily {
        let mut fam = VectorFamily::new(d, None).unwrap();
        for _ in 0..n {
            let mut v = BitVector::zeros(d);
            for i in 0..d {
                if rng.bernoulli(p) {
                    v.set(i, true);
                }
            }
            fam.push(v).unwrap();
        }
        fam
    }

    #[test]
    fn count_ov_edges() {
        let zeros =
            VectorFamily::from_vectors(4, None, vec![BitVector::zeros(4); 3]).unwrap();
        assert_eq!(brute_count_ov(&zeros, &zeros), 9);
        let ones = VectorFamily::from_vectors(4, None, vec![BitVector::ones(4)]).unwrap();
        assert_eq!(brute_count_ov(&ones, &ones), 0);
    }

    #[test]
    fn count_ov_agrees_with_independent_popcount() {
        let mut rng = SeededRng::new(3);
        for _ in 0..10 {
            let a = random_family(12, 9, 0.4, &mut rng);
            let b = random_family(15, 9, 0.4, &mut rng);
            let direct: u64 = a
                .iter()
                .flat_map(|x| b.iter().map(move |y| u64::from(x.dot(y) == 0)))
                .sum();
            assert_eq!(brute_count_ov(&a, &b), direct);
        }
    }

    #[test]
    fn kov_reduces_and_permutes() {
        let mut rng = SeededRng::new(4);
        let a = random_family(8, 6, 0.4, &mut rng);
        let b = random_family(8, 6, 0.4, &mut rng);
        let c = random_family(8, 6, 0.4, &mut rng);
        assert_eq!(brute_count_kov(&[&a, &b]), brute_count_ov(&a, &b));
        assert_eq!(
            brute_count_kov(&[&a, &b, &c]),
            brute_count_kov(&[&c, &a, &b])
        );
    }

    #[test]
    fn kov_zero_vector_contribution() {
        // A zero vector in the first family pairs with everything.
        let mut rng = SeededRng::new(5);
        let mut a = random_family(4, 6, 0.9, &mut rng);
        let b = random_family(5, 6, 0.9, &mut rng);
        let c = random_family(5, 6, 0.9, &mut rng);
        let without = brute_count_kov(&[&a, &b, &c]);
        a.push(BitVector::zeros(6)).unwrap();
        let with = brute_count_kov(&[&a, &b, &c]);
        assert_eq!(with, without + 25);
    }

    #[test]
    fn max_ip_basics() {
        let x = BitVector::from_support(8, &[0, 2, 4]).unwrap();
        let fam = VectorFamily::from_vectors(8, None, vec![x]).unwrap();
        assert_eq!(brute_max_ip(&fam, &fam), 3);
        let mut rng = SeededRng::new(6);
        let a = random_family(10, 8, 0.5, &mut rng);
        let b = random_family(10, 8, 0.5, &mut rng);
        assert_eq!(brute_max_ip(&a, &b), brute_max_ip(&b, &a));
    }

    #[test]
    fn satisfying_pair_matches_ov() {
        let mut rng = SeededRng::new(7);
        for _ in 0..10 {
            let a = random_family(8, 8, 0.5, &mut rng);
            let b = random_family(8, 8, 0.5, &mut rng);
            assert_eq!(
                brute_satisfying_pair(&a, &b, |x, y| x.is_disjoint(y)),
                brute_count_ov(&a, &b) > 0
            );
        }
    }

    #[test]
    fn min_proofs_edges() {
        // All weights zero: threshold unreachable, empty collection.
        assert!(brute_min_proofs(&[0, 0, 0], 5 * 8).unwrap().is_empty());
        // Single heavy coordinate: exactly one singleton proof.
        let proofs = brute_min_proofs(&[0, 8, 0], 5 * 8).unwrap();
        assert_eq!(proofs, vec![vec![1]]);
        // Three weight-3 coordinates, threshold 8: only the full triple
        // qualifies (pairs reach 6 < 8) and it is minimal.
        let proofs = brute_min_proofs(&[3, 3, 3], 5 * 8).unwrap();
        assert_eq!(proofs, vec![vec![0, 1, 2]]);
    }
}
