//! Randomized OV decision: grouping, sampled DISJ polynomials, random GF(2)
//! sign vectors, low-rank products, repetition, and a majority threshold.
//!
//! Per repetition, with groups A_1..A_g and B_1..B_g of size m and a sampled
//! polynomial M plus uniform u, v in GF(2)^m, the tested bit is
//! U_i . V_j where U_i = sum_k phi_x((A_i)_k) u_k and V_j likewise. On a
//! group pair with no orthogonal member pair the bit is 1 with probability
//! at most eps*m^2/4 (every contribution is a polynomial error, masked by
//! u_k v_l = 1 a quarter of the time); with an orthogonal pair present the
//! bilinear form is nonzero, so the bit is 1 with probability at least 1/4.
//! Counting over T repetitions and thresholding separates the two.

use num_bigint::BigInt;

use crate::bits::{BitVector, VectorFamily};
use crate::combin::binomial_le;
use crate::f2poly::{f2_matmul, phi_x, phi_y, DisjProbPoly, F2Matrix, MONOMIAL_CAP};
use crate::rat::{rat_frac, Rat};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Parameters of the decision procedure; eps = 2^{-eps_exponent}.
#[derive(Debug, Clone, PartialEq)]
pub struct OvDecideParams {
    pub eps_exponent: usize,
    pub group_size: usize,
    pub repetitions: usize,
    /// Accept when max counter exceeds this fraction of the repetitions.
    pub accept_fraction: Rat,
    /// Cap on the monomial rank (expanded path) and on the number of
    /// contributing monomials visited (implicit path).
    pub rank_cap: usize,
}

impl OvDecideParams {
    /// The union-bound regime: the per-group-pair false-positive
    /// probability is at most eps * m^2 / 4, which must stay below the
    /// 0.01 the threshold analysis assumes.
    pub fn validate(&self) -> Result<()> {
        if self.eps_exponent == 0 || self.group_size == 0 || self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "eps exponent, group size and repetitions must be positive".into(),
            ));
        }
        if self.eps_exponent > 63 {
            return Err(Error::InvalidArgument("eps exponent too large".into()));
        }
        if self.accept_fraction <= Rat::from_integer(BigInt::from(0))
            || self.accept_fraction >= Rat::from_integer(BigInt::from(1))
        {
            return Err(Error::InvalidArgument(
                "accept fraction must lie in (0, 1)".into(),
            ));
        }
        let m = self.group_size as i64;
        let false_positive_bound =
            rat_frac(m * m, 4) / Rat::from_integer(BigInt::from(1u64 << self.eps_exponent));
        if false_positive_bound > rat_frac(1, 100) {
            return Err(Error::InvalidArgument(format!(
                "union bound violated: eps*m^2/4 = {false_positive_bound} > 1/100"
            )));
        }
        Ok(())
    }

    /// Raise the error exponent to the smallest value satisfying the union
    /// bound at the current group size.
    pub fn with_union_bound(mut self) -> Self {
        while self.eps_exponent < 63 && self.validate().is_err() {
            self.eps_exponent += 1;
        }
        self
    }
}

/// Paper defaults: L is the largest level with C(d, <=L) <= n^{0.1}
/// (clamped to [1, 20], so the rank target is met whenever possible),
/// m = floor(sqrt(1/eps)/10) clamped to >= 1, T = ceil(1000 ln n).
///
/// At small n the derived L is too coarse for the union bound; callers
/// (including the CLI) tighten it with [`OvDecideParams::with_union_bound`].
pub fn derive_ov_params(n: usize, d: usize) -> OvDecideParams {
    assert!(n >= 2 && d >= 1);
    let target = (n as f64).powf(0.1);
    let mut level = 1usize;
    for l in 1..=20usize.min(d) {
        if binomial_le(d, l) as f64 <= target {
            level = l;
        } else {
            break;
        }
    }
    let group_size = (((1u64 << level) as f64).sqrt() / 10.0).floor().max(1.0) as usize;
    let repetitions = (1000.0 * (n as f64).ln()).ceil() as usize;
    OvDecideParams {
        eps_exponent: level,
        group_size,
        repetitions,
        accept_fraction: rat_frac(3, 20),
        rank_cap: MONOMIAL_CAP,
    }
}

/// Full outcome: the decision plus the per-group-pair counters T_{i,j}.
#[derive(Debug, Clone, PartialEq)]
pub struct DecideReport {
    pub answer: bool,
    pub max_counter: u32,
    /// Row-major groups_a x groups_b counter matrix.
    pub counters: Vec<u32>,
    pub groups_a: usize,
    pub groups_b: usize,
    pub repetitions: usize,
}

/// Decision only; see [`ov_decide_with_stats`].
pub fn ov_decide(
    a: &VectorFamily,
    b: &VectorFamily,
    params: &OvDecideParams,
    rng: &SeededRng,
) -> Result<bool> {
    Ok(ov_decide_with_stats(a, b, params, rng)?.answer)
}

/// Run the full procedure and report counters. Deterministic in
/// (instance, params, seed); repetition r draws from `rng.derive(r)`.
pub fn ov_decide_with_stats(
    a: &VectorFamily,
    b: &VectorFamily,
    params: &OvDecideParams,
    rng: &SeededRng,
) -> Result<DecideReport> {
    decide_impl(a, b, params, rng, false)
}

pub(crate) fn decide_impl(
    a: &VectorFamily,
    b: &VectorFamily,
    params: &OvDecideParams,
    rng: &SeededRng,
    force_general: bool,
) -> Result<DecideReport> {
    params.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("families must be non-empty".into()));
    }
    if a.dim() > 64 {
        return Err(Error::InvalidArgument(
            "decision procedure supports dimension at most 64".into(),
        ));
    }
    let counters = if params.group_size == 1 && !force_general {
        rep_counters_fast_m1(a, b, params, rng)?
    } else {
        rep_counters_general(a, b, params, rng)?
    };
    let groups_a = a.len().div_ceil(params.group_size);
    let groups_b = b.len().div_ceil(params.group_size);
    let max_counter = counters.iter().copied().max().unwrap_or(0);
    let answer = Rat::from_integer(BigInt::from(max_counter))
        > &params.accept_fraction * Rat::from_integer(BigInt::from(params.repetitions as u64));
    Ok(DecideReport {
        answer,
        max_counter,
        counters,
        groups_a,
        groups_b,
        repetitions: params.repetitions,
    })
}

/// The per-repetition draws, in a fixed order shared by both execution
/// paths: the L factor subsets as bitmasks, then u, then v.
fn sample_rep(
    d: usize,
    params: &OvDecideParams,
    rng: &mut SeededRng,
) -> (Vec<u64>, Vec<bool>, Vec<bool>) {
    let masks = (0..params.eps_exponent)
        .map(|_| {
            let mut m = 0u64;
            for c in 0..d {
                if rng.next_bool() {
                    m |= 1 << c;
                }
            }
            m
        })
        .collect();
    let u = (0..params.group_size).map(|_| rng.next_bool()).collect();
    let v = (0..params.group_size).map(|_| rng.next_bool()).collect();
    (masks, u, v)
}

/// Reference path, any group size: expand the polynomial, build the
/// feature rows, stack the masked group sums into g x r matrices and
/// multiply over GF(2). Ragged final groups are padded with the all-ones
/// vector, which is orthogonal to nothing and cannot create positives.
fn rep_counters_general(
    a: &VectorFamily,
    b: &VectorFamily,
    params: &OvDecideParams,
    rng: &SeededRng,
) -> Result<Vec<u32>> {
    let d = a.dim();
    let m = params.group_size;
    let groups_a = a.len().div_ceil(m);
    let groups_b = b.len().div_ceil(m);
    let mut counters = vec![0u32; groups_a * groups_b];
    let pad = BitVector::ones(d);
    let member = |fam: &VectorFamily, g: usize, k: usize| -> BitVector {
        fam.vectors().get(g * m + k).unwrap_or(&pad).clone()
    };
    for rep in 0..params.repetitions {
        let mut r = rng.derive(rep as u64);
        let (masks, u, v) = sample_rep(d, params, &mut r);
        let subsets = masks
            .iter()
            .map(|&t| (0..d).filter(|&c| t >> c & 1 == 1).collect())
            .collect();
        let poly = DisjProbPoly::from_subsets(d, subsets)?;
        if poly.rank() > params.rank_cap {
            return Err(Error::ResourceLimit(format!(
                "sampled rank {} exceeds cap {}",
                poly.rank(),
                params.rank_cap
            )));
        }
        let masked_rows = |fam: &VectorFamily,
                           groups: usize,
                           mask: &[bool],
                           phi: fn(&DisjProbPoly, &BitVector) -> BitVector| {
            (0..groups)
                .map(|g| {
                    let mut row = BitVector::zeros(poly.rank());
                    for (k, &on) in mask.iter().enumerate() {
                        if on {
                            row.xor_with(&phi(&poly, &member(fam, g, k)));
                        }
                    }
                    row
                })
                .collect::<Vec<_>>()
        };
        let u_mat = F2Matrix::from_rows(&masked_rows(a, groups_a, &u, phi_x))?;
        let v_mat = F2Matrix::from_rows(&masked_rows(b, groups_b, &v, phi_y))?;
        let bits = f2_matmul(&u_mat, &v_mat.transpose())?;
        for i in 0..groups_a {
            for j in 0..groups_b {
                if bits.get(i, j) {
                    counters[i * groups_b + j] += 1;
                }
            }
        }
    }
    Ok(counters)
}

/// Fast path for m = 1 (the default whenever eps >= 2^{-12}). The bit for
/// pair (i, j) is the polynomial value at a_i AND b_j, which expands to
/// xor over monomials S of [S in a_i][S in b_j]. A monomial of the factor
/// matrix survives GF(2) cancellation exactly when its columns (as vectors
/// in GF(2)^L) are linearly independent, so the sum is accumulated by a
/// DFS over independent coordinate subsets, carrying the AND of
/// per-coordinate membership columns for both families and pruning any
/// branch whose A- or B-column is already zero. This touches only
/// monomials contained in some member on both sides and never
/// materializes the rank-r feature matrices; equality with the reference
/// path is asserted in tests.
fn rep_counters_fast_m1(
    a: &VectorFamily,
    b: &VectorFamily,
    params: &OvDecideParams,
    rng: &SeededRng,
) -> Result<Vec<u32>> {
    let d = a.dim();
    let n_a = a.len();
    let n_b = b.len();
    let wa = n_a.div_ceil(64);
    let wb = n_b.div_ceil(64);
    // Membership columns: coord_a[c] marks the members of A containing c.
    let membership = |fam: &VectorFamily, words: usize| -> Vec<Vec<u64>> {
        let mut cols = vec![vec![0u64; words]; d];
        for (i, x) in fam.iter().enumerate() {
            for c in x.support() {
                cols[c][i / 64] |= 1 << (i % 64);
            }
        }
        cols
    };
    let coord_a = membership(a, wa);
    let coord_b = membership(b, wb);
    let full = |n: usize, words: usize| -> Vec<u64> {
        let mut v = vec![u64::MAX; words];
        if n % 64 != 0 {
            v[words - 1] = (1u64 << (n % 64)) - 1;
        }
        v
    };
    let mut counters = vec![0u32; n_a * n_b];
    let mut pair_rows = vec![0u64; n_a * wb];
    for rep in 0..params.repetitions {
        let mut r = rng.derive(rep as u64);
        let (masks, u, v) = sample_rep(d, params, &mut r);
        if !u[0] || !v[0] {
            // U or V is identically zero; no counter can move.
            continue;
        }
        // Column c of the L x d factor matrix, as an L-bit word.
        let cols: Vec<u64> = (0..d)
            .map(|c| {
                masks
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (l, &t)| acc | (t >> c & 1) << l)
            })
            .collect();
        pair_rows.fill(0);
        let mut state = DfsState {
            cols: &cols,
            coord_a: &coord_a,
            coord_b: &coord_b,
            pair_rows: &mut pair_rows,
            wb,
            pivots: [0u64; 64],
            visited: 0,
            cap: params.rank_cap,
        };
        let root_a = full(n_a, wa);
        let root_b = full(n_b, wb);
        // The empty monomial always survives and toggles every pair.
        state.accumulate(&root_a, &root_b);
        state.extend(0, d, &root_a, &root_b)?;
        for i in 0..n_a {
            for w in 0..wb {
                let mut bits = pair_rows[i * wb + w];
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    counters[i * n_b + j] += 1;
                }
            }
        }
    }
    Ok(counters)
}

struct DfsState<'a> {
    cols: &'a [u64],
    coord_a: &'a [Vec<u64>],
    coord_b: &'a [Vec<u64>],
    pair_rows: &'a mut [u64],
    wb: usize,
    /// XOR basis of the current subset's columns, one slot per leading bit.
    pivots: [u64; 64],
    visited: usize,
    cap: usize,
}

impl DfsState<'_> {
    fn accumulate(&mut self, col_a: &[u64], col_b: &[u64]) {
        for (i, &wa) in col_a.iter().enumerate() {
            let mut bits = wa;
            while bits != 0 {
                let row = i * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for (o, &cb) in self.pair_rows[row * self.wb..(row + 1) * self.wb]
                    .iter_mut()
                    .zip(col_b)
                {
                    *o ^= cb;
                }
            }
        }
    }

    fn extend(&mut self, start: usize, d: usize, col_a: &[u64], col_b: &[u64]) -> Result<()> {
        for c in start..d {
            // Reduce column c against the basis; zero means dependent, and
            // every superset of a dependent set is dependent.
            let mut vcol = self.cols[c];
            while vcol != 0 {
                let lead = 63 - vcol.leading_zeros() as usize;
                if self.pivots[lead] == 0 {
                    break;
                }
                vcol ^= self.pivots[lead];
            }
            if vcol == 0 {
                continue;
            }
            let child_a: Vec<u64> = col_a
                .iter()
                .zip(&self.coord_a[c])
                .map(|(x, y)| x & y)
                .collect();
            if child_a.iter().all(|&w| w == 0) {
                continue;
            }
            let child_b: Vec<u64> = col_b
                .iter()
                .zip(&self.coord_b[c])
                .map(|(x, y)| x & y)
                .collect();
            if child_b.iter().all(|&w| w == 0) {
                continue;
            }
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::ResourceLimit(format!(
                    "contributing monomial count exceeds cap {}",
                    self.cap
                )));
            }
            self.accumulate(&child_a, &child_b);
            let lead = 63 - vcol.leading_zeros() as usize;
            self.pivots[lead] = vcol;
            self.extend(c + 1, d, &child_a, &child_b)?;
            self.pivots[lead] = 0;
        }
        Ok(())
    }
}
