//! Combinatorics tables and size-major colexicographic subset indexing.
//!
//! Subsets S of [d] with |S| <= D are addressed by (size, colex rank within
//! the size class); the flattened rank sum_{i<size} C(d,i) + colex_rank is a
//! bijection onto [0, C(d,<=D)), which lets dense sketches be plain arrays.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// C(d, j) for j = 0..=cap, exact. Values fit u128 for every d used by this
/// crate (d <= 127).
pub fn binomial_table(d: usize, cap: usize) -> Vec<u128> {
    assert!(d < 128, "binomial_table supports d < 128");
    let mut row = Vec::with_capacity(cap + 1);
    let mut c: u128 = 1;
    for j in 0..=cap {
        row.push(c);
        if j < cap {
            if j >= d {
                c = 0;
            } else {
                c = c * (d - j) as u128 / (j + 1) as u128;
            }
        }
    }
    row
}

/// C(n, k) as a single value.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// C(d, <= cap) = sum of the binomial row.
pub fn binomial_le(d: usize, cap: usize) -> u128 {
    binomial_table(d, cap.min(d)).iter().sum()
}

/// Stirling numbers of the second kind S2(k, j) for 0 <= j <= k <= cap,
/// by the recurrence S2(k,j) = j*S2(k-1,j) + S2(k-1,j-1).
pub fn stirling2_table(cap: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(cap + 1);
    for k in 0..=cap {
        let mut row = vec![BigUint::zero(); k + 1];
        if k == 0 {
            row[0] = BigUint::one();
        } else {
            for j in 1..=k {
                let mut v = BigUint::zero();
                if j <= k - 1 {
                    v = &table[k - 1][j] * BigUint::from(j);
                }
                v += &table[k - 1][j - 1];
                row[j] = v;
            }
        }
        table.push(row);
    }
    table
}

/// Index of a subset S of [d]: its size and colexicographic rank within the
/// size class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    pub size: usize,
    pub colex_rank: u128,
}

impl SubsetIndex {
    /// Flattened rank: sum_{i < size} C(d, i) + colex_rank.
    pub fn flat_rank(&self, d: usize) -> u128 {
        let mut offset: u128 = 0;
        let mut c: u128 = 1;
        for i in 0..self.size {
            offset += c;
            c = if i >= d { 0 } else { c * (d - i) as u128 / (i + 1) as u128 };
        }
        offset + self.colex_rank
    }
}

/// Colexicographic rank of a sorted subset: rank(S) = sum_i C(S_i, i+1).
pub fn subset_rank(coords: &[usize], d: usize) -> Result<SubsetIndex> {
    let mut rank: u128 = 0;
    let mut prev: Option<usize> = None;
    for (i, &c) in coords.iter().enumerate() {
        if c >= d {
            return Err(Error::InvalidArgument(format!(
                "coordinate {c} out of range for d={d}"
            )));
        }
        if let Some(p) = prev {
            if c <= p {
                return Err(Error::InvalidArgument(
                    "coordinates must be strictly increasing".into(),
                ));
            }
        }
        rank += binomial(c, i + 1);
        prev = Some(c);
    }
    Ok(SubsetIndex {
        size: coords.len(),
        colex_rank: rank,
    })
}

/// Inverse of [`subset_rank`]: the sorted coordinate list of the subset with
/// the given size and colex rank.
pub fn subset_unrank(index: SubsetIndex, d: usize) -> Result<Vec<usize>> {
    if index.colex_rank >= binomial(d, index.size).max(1) {
        return Err(Error::InvalidArgument(format!(
            "rank {} out of range for C({d},{})",
            index.colex_rank, index.size
        )));
    }
    let mut coords = vec![0usize; index.size];
    let mut rank = index.colex_rank;
    let mut hi = d;
    for i in (0..index.size).rev() {
        // Largest c with C(c, i+1) <= rank.
        let mut c = hi - 1;
        while binomial(c, i + 1) > rank {
            c -= 1;
        }
        coords[i] = c;
        rank -= binomial(c, i + 1);
        hi = c;
    }
    Ok(coords)
}

/// Visit every subset of `support` with size at most `max_size`, in
/// size-agnostic DFS order. The callback receives the subset's size and its
/// colexicographic rank (computed incrementally).
///
/// `support` must be sorted ascending.
pub fn for_each_subset_le<F: FnMut(usize, u128)>(support: &[usize], max_size: usize, f: &mut F) {
    fn rec<F: FnMut(usize, u128)>(
        support: &[usize],
        start: usize,
        size: usize,
        rank: u128,
        max_size: usize,
        f: &mut F,
    ) {
        f(size, rank);
        if size == max_size {
            return;
        }
        for pos in start..support.len() {
            let c = support[pos];
            rec(
                support,
                pos + 1,
                size + 1,
                rank + binomial(c, size + 1),
                max_size,
                f,
            );
        }
    }
    rec(support, 0, 0, 0, max_size, f);
}
