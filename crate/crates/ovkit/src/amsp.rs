//! Arthur-Merlin machinery: the Poisson gap-inner-product protocol, the
//! satisfying-pair engine built on it, and 2-approximate Max-IP.
//!
//! The challenge draws i.i.d. Poisson weights p_i at rate k/tau and asks
//! Merlin for a coordinate set S inside both supports with
//! sum_{i in S} p_i >= 1.6k. The total weight on an intersection of size
//! 2*tau is Pois(2k) and on size tau is Pois(k), so with k a large enough
//! multiple of log(1/eps) the threshold 1.6k separates the two cases with
//! error eps on each side; k comes from Monte-Carlo calibration with the
//! analytic envelope k <= ceil(100 ln(1/eps)).

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::bits::{BitVector, VectorFamily};
use crate::poisson::pois_sample_split;
use crate::rat::{rat_frac, rat_int, Rat};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Poisson draw at a rate known positive (the split sampler only rejects
/// non-positive rates).
fn pois(rate: f64, rng: &mut SeededRng) -> u64 {
    pois_sample_split(rate, rng).expect("rate is positive")
}

/// Default cap on an enumerated proof collection.
pub const PROOF_CAP: usize = 1 << 20;
/// Guard on groups x proof-columns storage in the engine.
const GROUPED_ENTRY_CAP: usize = 1 << 26;

/// A shared random challenge of the gap-inner-product protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapIpChallenge {
    pub dim: usize,
    pub tau: usize,
    pub k: usize,
    /// i.i.d. Pois(k/tau) weights, one per coordinate.
    pub weights: Vec<u64>,
    /// Accept threshold as an exact fraction thr_num/thr_den; the default
    /// gap constant kappa = 2 gives 1.6k = 8k/5.
    pub thr_num: u64,
    pub thr_den: u64,
}

impl GapIpChallenge {
    pub fn threshold(&self) -> Rat {
        rat_frac(self.thr_num as i64, self.thr_den as i64)
    }

    /// Does a weight sum meet the threshold? Exact integer comparison.
    #[inline]
    pub fn qualifies(&self, sum: u64) -> bool {
        sum as u128 * self.thr_den as u128 >= self.thr_num as u128
    }

    /// Total challenge weight inside the intersection of two supports.
    pub fn intersection_weight(&self, x: &BitVector, y: &BitVector) -> u64 {
        x.and(y).support().iter().map(|&i| self.weights[i]).sum()
    }
}

/// Sample a challenge with the default gap constant kappa = 2
/// (threshold 1.6k).
pub fn sample_gap_ip_challenge(
    d: usize,
    tau: usize,
    k: usize,
    rng: &mut SeededRng,
) -> GapIpChallenge {
    sample_gap_ip_challenge_kappa(d, tau, k, &rat_int(2), rng).expect("kappa = 2 is valid")
}

/// The Remark's generalization to an arbitrary gap constant kappa > 1:
/// yes means <x,y> >= kappa*tau, and the threshold becomes
/// 8(1+kappa)k/15 (which is 1.6k at kappa = 2). Only kappa = 2 feeds the
/// 2-approximation pipeline; other values are exposed untuned.
pub fn sample_gap_ip_challenge_kappa(
    d: usize,
    tau: usize,
    k: usize,
    kappa: &Rat,
    rng: &mut SeededRng,
) -> Result<GapIpChallenge> {
    if tau == 0 || k == 0 || d == 0 {
        return Err(Error::InvalidArgument("d, tau, k must be positive".into()));
    }
    if *kappa <= rat_int(1) {
        return Err(Error::InvalidArgument("kappa must exceed 1".into()));
    }
    let threshold = rat_frac(8, 15) * (rat_int(1) + kappa) * rat_int(k as i64);
    let thr_num = threshold
        .numer()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("threshold numerator overflow".into()))?;
    let thr_den = threshold
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("threshold denominator overflow".into()))?;
    let rate = k as f64 / tau as f64;
    let weights = (0..d).map(|_| pois(rate, rng)).collect();
    Ok(GapIpChallenge {
        dim: d,
        tau,
        k,
        weights,
        thr_num,
        thr_den,
    })
}

/// Merlin's restricted proof space: inclusion-minimal qualifying
/// coordinate sets, canonically ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofList {
    /// Sorted coordinate lists, in lexicographic order.
    pub proofs: Vec<Vec<usize>>,
    pub weight_sums: Vec<u64>,
}

impl ProofList {
    pub fn len(&self) -> usize {
        self.proofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proofs.is_empty()
    }
}

/// DFS over `support` (ascending) for the inclusion-minimal subsets whose
/// weight sum qualifies. A branch dies when even the whole remaining
/// suffix cannot reach the threshold; a set is emitted the moment it
/// qualifies (any proper extension would be non-minimal) and kept only if
/// dropping its lightest element falls back below the threshold.
fn minimal_qualifying_subsets(
    c: &GapIpChallenge,
    support: &[usize],
    cap: usize,
    out: &mut Vec<(Vec<usize>, u64)>,
) -> Result<()> {
    let weights: Vec<u64> = support.iter().map(|&i| c.weights[i]).collect();
    // suffix[p] = total weight of support[p..].
    let mut suffix = vec![0u64; support.len() + 1];
    for p in (0..support.len()).rev() {
        suffix[p] = suffix[p + 1] + weights[p];
    }
    fn rec(
        c: &GapIpChallenge,
        support: &[usize],
        weights: &[u64],
        suffix: &[u64],
        start: usize,
        current: &mut Vec<usize>,
        sum: u64,
        min_w: u64,
        cap: usize,
        out: &mut Vec<(Vec<usize>, u64)>,
    ) -> Result<()> {
        for p in start..support.len() {
            if !c.qualifies(sum + suffix[p]) {
                // Even taking the whole suffix cannot qualify.
                return Ok(());
            }
            let w = weights[p];
            if w == 0 {
                continue;
            }
            let new_sum = sum + w;
            current.push(support[p]);
            if c.qualifies(new_sum) {
                // Minimal iff removing the lightest member disqualifies.
                if !c.qualifies(new_sum - min_w.min(w)) {
                    if out.len() == cap {
                        current.pop();
                        return Err(Error::ProofSpaceOverflow(format!(
                            "more than {cap} minimal proofs"
                        )));
                    }
                    out.push((current.clone(), new_sum));
                }
            } else {
                rec(
                    c,
                    support,
                    weights,
                    suffix,
                    p + 1,
                    current,
                    new_sum,
                    min_w.min(w),
                    cap,
                    out,
                )?;
            }
            current.pop();
        }
        Ok(())
    }
    rec(
        c,
        support,
        &weights,
        &suffix,
        0,
        &mut Vec::new(),
        0,
        u64::MAX,
        cap,
        out,
    )
}

/// All inclusion-minimal qualifying sets over the challenge's whole
/// positive-weight support.
pub fn enumerate_min_proofs(c: &GapIpChallenge, cap: usize) -> Result<ProofList> {
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be positive".into()));
    }
    let support: Vec<usize> = (0..c.dim).filter(|&i| c.weights[i] > 0).collect();
    let mut out = Vec::new();
    minimal_qualifying_subsets(c, &support, cap, &mut out)?;
    let (proofs, weight_sums) = out.into_iter().unzip();
    Ok(ProofList { proofs, weight_sums })
}

/// One party's accept indicator per listed proof: bit j iff proofs[j] is
/// contained in the support of x (the weight condition is pre-filtered by
/// the list).
pub fn accept_vector(x: &BitVector, proofs: &ProofList) -> BitVector {
    let n = proofs.len().max(1);
    let mut bits = BitVector::zeros(n);
    for (j, s) in proofs.proofs.iter().enumerate() {
        if s.iter().all(|&i| x.get(i)) {
            bits.set(j, true);
        }
    }
    bits
}

/// Whether the pair (x, y) admits any accepted proof under the challenge.
/// A qualifying set inside the intersection exists iff the full
/// intersection weight qualifies, so this is an exact O(d) test.
pub fn pair_accepts(x: &BitVector, y: &BitVector, c: &GapIpChallenge) -> bool {
    c.qualifies(c.intersection_weight(x, y))
}

/// Smallest k in a doubling-then-binary schedule whose Monte-Carlo
/// completeness error at intersection exactly 2*tau and soundness error at
/// intersection exactly tau are both at most eps/2. Both totals are sums
/// of per-coordinate Pois(k/tau) draws, simulated coordinate-wise.
pub fn calibrate_k(eps: f64, tau: usize, d: usize, trials: usize, rng: &SeededRng) -> usize {
    assert!(trials >= 1000, "calibration needs at least 1000 trials");
    assert!(eps > 0.0 && eps < 1.0 && tau >= 1 && d >= 2 * tau);
    let ok = |k: usize| -> bool {
        let mut r = rng.derive(k as u64);
        let rate = k as f64 / tau as f64;
        let mut incomplete = 0usize;
        let mut unsound = 0usize;
        let thr = |sum: u64| 5 * sum >= 8 * k as u64;
        for _ in 0..trials {
            let yes_total: u64 = (0..2 * tau).map(|_| pois(rate, &mut r)).sum();
            if !thr(yes_total) {
                incomplete += 1;
            }
            let no_total: u64 = (0..tau).map(|_| pois(rate, &mut r)).sum();
            if thr(no_total) {
                unsound += 1;
            }
        }
        let budget = eps / 2.0 * trials as f64;
        (incomplete as f64) <= budget && (unsound as f64) <= budget
    };
    let mut hi = 1usize;
    while !ok(hi) {
        hi *= 2;
        assert!(hi <= 1 << 20, "calibration diverged");
    }
    let mut lo = hi / 2; // ok(lo) failed (or lo = 0); smallest good k in (lo, hi].
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// An AM protocol as the engine sees it: a shared challenge plus, per
/// input vector, the canonical list of proofs that party accepts, as
/// opaque column ids.
pub trait AmProtocol {
    type Challenge;
    /// Claimed two-sided error.
    fn error(&self) -> f64;
    fn sample_challenge(&self, rng: &mut SeededRng) -> Self::Challenge;
    fn accepted_proofs(&self, ch: &Self::Challenge, x: &BitVector) -> Result<Vec<u128>>;
}

/// The gap-inner-product protocol at a calibrated k.
#[derive(Debug, Clone, PartialEq)]
pub struct GapIpProtocol {
    pub dim: usize,
    pub tau: usize,
    pub k: usize,
    pub eps: f64,
    pub proof_cap: usize,
}

impl GapIpProtocol {
    /// Calibrate k for the requested error.
    pub fn new(dim: usize, tau: usize, eps: f64, rng: &SeededRng) -> Self {
        let k = calibrate_k(eps, tau, dim.max(2 * tau), 2000, rng);
        GapIpProtocol {
            dim,
            tau,
            k,
            eps,
            proof_cap: PROOF_CAP,
        }
    }
}

impl AmProtocol for GapIpProtocol {
    type Challenge = GapIpChallenge;

    fn error(&self) -> f64 {
        self.eps
    }

    fn sample_challenge(&self, rng: &mut SeededRng) -> GapIpChallenge {
        sample_gap_ip_challenge(self.dim, self.tau, self.k, rng)
    }

    fn accepted_proofs(&self, ch: &GapIpChallenge, x: &BitVector) -> Result<Vec<u128>> {
        let support: Vec<usize> = x
            .support()
            .into_iter()
            .filter(|&i| ch.weights[i] > 0)
            .collect();
        let mut out = Vec::new();
        minimal_qualifying_subsets(ch, &support, self.proof_cap, &mut out)?;
        Ok(out
            .into_iter()
            .map(|(s, _)| s.iter().fold(0u128, |m, &i| m | 1 << i))
            .collect())
    }
}

/// Per-group column sums of the accept indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedAcceptMatrix {
    pub groups: usize,
    pub proof_count: usize,
    /// Row-major groups x proof_count; entry <= group size.
    pub entries: Vec<u32>,
}

impl GroupedAcceptMatrix {
    pub fn entry(&self, group: usize, proof: usize) -> u32 {
        self.entries[group * self.proof_count + proof]
    }

    fn build(per_vector: &[Vec<usize>], group_size: usize, proof_count: usize) -> Self {
        let groups = per_vector.len().div_ceil(group_size);
        let mut entries = vec![0u32; groups * proof_count];
        for (idx, cols) in per_vector.iter().enumerate() {
            let g = idx / group_size;
            for &s in cols {
                entries[g * proof_count + s] += 1;
            }
        }
        GroupedAcceptMatrix {
            groups,
            proof_count,
            entries,
        }
    }
}

/// Decide whether some pair is a yes instance of the protocol's promise:
/// groups of size m = max(1, floor(1/(10 sqrt(eps)))), one challenge per
/// repetition, grouped accept counts, and a majority vote per group pair
/// on the positivity of the integer product (M_A^T M_B)_{i,j}. Since all
/// entries are non-negative, the positivity bit is read off column by
/// column (groups with a nonzero count in both matrices) rather than by
/// materializing the full product.
pub fn satisfying_pair<P: AmProtocol>(
    a: &VectorFamily,
    b: &VectorFamily,
    protocol: &P,
    eps: f64,
    reps: usize,
    rng: &SeededRng,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("families must be non-empty".into()));
    }
    if !(eps > 0.0 && eps < 1.0) || reps == 0 {
        return Err(Error::InvalidArgument("need eps in (0,1) and reps >= 1".into()));
    }
    if protocol.error() > eps * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "protocol error {} exceeds the requested eps {eps}",
            protocol.error()
        )));
    }
    let m = default_group_size(eps);
    let groups_a = a.len().div_ceil(m);
    let groups_b = b.len().div_ceil(m);
    let mut votes = vec![0u32; groups_a * groups_b];
    let mut hit = vec![false; groups_a * groups_b];
    for rep in 0..reps {
        let mut r = rng.derive(rep as u64);
        let ch = protocol.sample_challenge(&mut r);
        // Shared column ids across both sides, assigned on first sight.
        let mut columns: HashMap<u128, usize> = HashMap::new();
        let mut collect = |fam: &VectorFamily| -> Result<Vec<Vec<usize>>> {
            fam.iter()
                .map(|x| {
                    let next = protocol.accepted_proofs(&ch, x)?;
                    Ok(next
                        .into_iter()
                        .map(|mask| {
                            let fresh = columns.len();
                            *columns.entry(mask).or_insert(fresh)
                        })
                        .collect())
                })
                .collect()
        };
        let cols_a = collect(a)?;
        let cols_b = collect(b)?;
        let proof_count = columns.len();
        if proof_count == 0 {
            continue;
        }
        if groups_a.max(groups_b) * proof_count > GROUPED_ENTRY_CAP {
            return Err(Error::ResourceLimit(format!(
                "grouped accept matrix would exceed {GROUPED_ENTRY_CAP} entries"
            )));
        }
        let mat_a = GroupedAcceptMatrix::build(&cols_a, m, proof_count);
        let mat_b = GroupedAcceptMatrix::build(&cols_b, m, proof_count);
        hit.fill(false);
        for s in 0..proof_count {
            let rows_a: Vec<usize> = (0..groups_a).filter(|&i| mat_a.entry(i, s) > 0).collect();
            if rows_a.is_empty() {
                continue;
            }
            for j in (0..groups_b).filter(|&j| mat_b.entry(j, s) > 0) {
                for &i in &rows_a {
                    hit[i * groups_b + j] = true;
                }
            }
        }
        for (v, &h) in votes.iter_mut().zip(&hit) {
            *v += u32::from(h);
        }
    }
    Ok(votes.iter().any(|&v| 2 * v > reps as u32))
}

/// Group size of the satisfying-pair engine.
pub fn default_group_size(eps: f64) -> usize {
    (1.0 / (10.0 * eps.sqrt())).floor().max(1.0) as usize
}

/// Outcome of the 2-approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxIpReport {
    /// With probability >= 1 - delta, v <= Max(A, B) <= 2v.
    pub v: usize,
    /// Binary-search probes issued.
    pub calls: usize,
    pub reps_per_call: usize,
    /// Calibrated protocol parameter.
    pub k: usize,
    /// True when the exact zero test settled the answer.
    pub exact_zero: bool,
}

/// 2-approximate Max-IP by binary search over tau with per-call error
/// budget delta/(number of calls): a yes at tau certifies Max > tau, a no
/// certifies Max < 2 tau. The Max in {0, 1} edge is exact: the total
/// coordinate-count product sum is zero iff every pair is orthogonal.
pub fn max_ip_approx(
    a: &VectorFamily,
    b: &VectorFamily,
    delta: f64,
    rng: &SeededRng,
) -> Result<MaxIpReport> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("families must be non-empty".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
    }
    let d = a.dim();
    // Sum over pairs of <x, y> equals sum over coordinates of
    // cntA_i * cntB_i; zero iff Max = 0.
    let coord_counts = |fam: &VectorFamily| -> Vec<u64> {
        let mut cnt = vec![0u64; d];
        for x in fam.iter() {
            for i in x.support() {
                cnt[i] += 1;
            }
        }
        cnt
    };
    let cnt_a = coord_counts(a);
    let cnt_b = coord_counts(b);
    let total: u128 = cnt_a
        .iter()
        .zip(&cnt_b)
        .map(|(&x, &y)| x as u128 * y as u128)
        .sum();
    if total == 0 {
        return Ok(MaxIpReport {
            v: 0,
            calls: 0,
            reps_per_call: 0,
            k: 0,
            exact_zero: true,
        });
    }
    let eps = 0.25;
    let max_calls = (d as f64).log2().ceil() as usize + 1;
    let group_pairs = {
        let m = default_group_size(eps);
        (a.len().div_ceil(m) as f64) * (b.len().div_ceil(m) as f64)
    };
    // Per call: majority over reps fails for any single group pair with
    // probability <= exp(-reps/8) (Hoeffding at gap 1/4); union over all
    // group pairs and the witness pair, then over the calls.
    let reps = (8.0 * ((group_pairs + 1.0) * max_calls as f64 / delta).ln()).ceil() as usize;
    let k = calibrate_k(eps, 1, d.max(2), 2000, &rng.derive(u64::MAX));
    let mut calls = 0usize;
    let mut lo = 1usize;
    let mut hi = d;
    let mut best_yes = 0usize;
    while lo <= hi {
        let tau = lo + (hi - lo) / 2;
        let protocol = GapIpProtocol {
            dim: d,
            tau,
            // The calibrated k depends only on eps: both gap totals are
            // Pois(2k) and Pois(k) regardless of tau.
            k,
            eps,
            proof_cap: PROOF_CAP,
        };
        let yes = satisfying_pair(a, b, &protocol, eps, reps, &rng.derive(calls as u64))?;
        calls += 1;
        if yes {
            best_yes = tau;
            lo = tau + 1;
        } else {
            if tau == 1 {
                // Max < 2: combined with the nonzero total, Max = 1.
                best_yes = 0;
                break;
            }
            hi = tau - 1;
        }
    }
    Ok(MaxIpReport {
        v: if best_yes > 0 { best_yes + 1 } else { 1 },
        calls,
        reps_per_call: reps,
        k,
        exact_zero: false,
    })
}
