//! GF(2) probabilistic polynomials for set disjointness and their low-rank
//! feature-map decomposition.
//!
//! A sample is P(z) = prod_{l=1}^{L} (1 xor xor_{i in T_l} z_i) with each
//! T_l containing every coordinate independently with probability 1/2.
//! P(0) = 1 always, and for z != 0 each factor vanishes with probability
//! 1/2 independently, so Pr[P(z) = 1] = 2^{-L}. Expanding multilinearly
//! over GF(2) leaves at most C(d, <=L) monomials z_S, which gives the
//! feature maps phi_x(x)[S] = [S subset supp(x)] with
//! <phi_x(x), phi_y(y)> = P(x and y) over GF(2).

use crate::bits::BitVector;
use crate::combin::binomial_le;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Cap on the intermediate monomial-set size during expansion.
pub const MONOMIAL_CAP: usize = 1 << 22;

/// A sampled GF(2) polynomial for DISJ in both factored and expanded form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjProbPoly {
    dim: usize,
    level: usize,
    /// The L factor subsets T_l.
    subsets: Vec<Vec<usize>>,
    /// Surviving monomials after multilinear reduction, as sorted bitmasks.
    monomials: Vec<u64>,
}

impl DisjProbPoly {
    /// Expand the given factor subsets; the randomness lives entirely in
    /// the caller's choice of `subsets`.
    pub fn from_subsets(dim: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 || dim > 64 {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} out of supported range [1, 64]"
            )));
        }
        if subsets.is_empty() {
            return Err(Error::InvalidArgument("need at least one factor".into()));
        }
        for t in &subsets {
            if t.iter().any(|&i| i >= dim) {
                return Err(Error::InvalidArgument(
                    "factor subset coordinate out of range".into(),
                ));
            }
        }
        // Multiply factors one at a time; each term of the new factor maps
        // monomial S to S (constant 1) or S union {i} (variable z_i, with
        // z_i^2 = z_i), and coefficients cancel mod 2.
        let mut monomials: std::collections::HashSet<u64> = std::collections::HashSet::new();
        monomials.insert(0);
        for t in &subsets {
            let old: Vec<u64> = monomials.iter().copied().collect();
            for m in old {
                for &i in t {
                    let s = m | 1u64 << i;
                    if !monomials.insert(s) {
                        monomials.remove(&s);
                    }
                }
            }
            if monomials.len() > MONOMIAL_CAP {
                return Err(Error::ResourceLimit(format!(
                    "monomial set grew past cap {MONOMIAL_CAP}"
                )));
            }
        }
        let level = subsets.len();
        let mut monomials: Vec<u64> = monomials.into_iter().collect();
        monomials.sort_unstable();
        // The constant term has coefficient exactly 1 (only the all-"1"
        // selection produces it), and no monomial uses more than one
        // variable per factor.
        assert!(monomials.first() == Some(&0), "constant term must survive");
        assert!(monomials.iter().all(|m| (m.count_ones() as usize) <= level));
        assert!(
            monomials.len() as u128 <= binomial_le(dim, level.min(dim)),
            "rank exceeds C(d, <=L)"
        );
        Ok(DisjProbPoly {
            dim,
            level,
            subsets,
            monomials,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Sorted monomial bitmasks.
    pub fn monomials(&self) -> &[u64] {
        &self.monomials
    }

    /// Probabilistic rank of this sample.
    pub fn rank(&self) -> usize {
        self.monomials.len()
    }
}

/// Sample the L factor subsets (each coordinate with probability 1/2) and
/// expand.
pub fn sample_disj_poly(d: usize, level: usize, rng: &mut SeededRng) -> Result<DisjProbPoly> {
    if level == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let subsets = (0..level)
        .map(|_| (0..d).filter(|_| rng.next_bool()).collect())
        .collect();
    DisjProbPoly::from_subsets(d, subsets)
}

fn mask_of(z: &BitVector) -> u64 {
    z.mask64().expect("dimension checked at construction")
}

/// Expanded-form evaluation: xor over monomials S of [S subset supp(z)].
pub fn eval_disj_poly(p: &DisjProbPoly, z: &BitVector) -> bool {
    assert_eq!(z.dim(), p.dim, "dimension mismatch");
    let zm = mask_of(z);
    let mut acc = false;
    for &m in &p.monomials {
        acc ^= m & zm == m;
    }
    acc
}

/// Factored-form evaluation prod_l (1 xor parity(T_l intersect supp(z)));
/// the independent second route for the expansion.
pub fn eval_disj_poly_factored(p: &DisjProbPoly, z: &BitVector) -> bool {
    assert_eq!(z.dim(), p.dim, "dimension mismatch");
    let zm = mask_of(z);
    p.subsets.iter().all(|t| {
        let parity = t.iter().filter(|&&i| zm >> i & 1 == 1).count() % 2;
        parity == 0
    })
}

/// Feature map: bit j is [monomial_j subset supp(x)], as a GF(2) vector of
/// length rank.
pub fn phi_x(p: &DisjProbPoly, x: &BitVector) -> BitVector {
    assert_eq!(x.dim(), p.dim, "dimension mismatch");
    let xm = mask_of(x);
    let mut v = BitVector::zeros(p.rank());
    for (j, &m) in p.monomials.iter().enumerate() {
        if m & xm == m {
            v.set(j, true);
        }
    }
    v
}

/// Bob's side is the same subset-containment indicator.
pub fn phi_y(p: &DisjProbPoly, y: &BitVector) -> BitVector {
    phi_x(p, y)
}

/// Packed row-major GF(2) matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        F2Matrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stack GF(2) vectors of a shared length as rows.
    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = match rows.first() {
            Some(r) => r.dim(),
            None => return Err(Error::InvalidArgument("no rows".into())),
        };
        if rows.iter().any(|r| r.dim() != cols) {
            return Err(Error::InvalidArgument("row length mismatch".into()));
        }
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let start = i * m.words_per_row;
            m.bits[start..start + r.words().len()].copy_from_slice(r.words());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        self.bits[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = r * self.words_per_row + c / 64;
        if value {
            self.bits[w] |= 1 << (c % 64);
        } else {
            self.bits[w] &= !(1 << (c % 64));
        }
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }
}

/// Product over GF(2): for each set bit k of a row of `a`, XOR in row k of
/// `b`. Word-parallel across the output row.
pub fn f2_matmul(a: &F2Matrix, b: &F2Matrix) -> Result<F2Matrix> {
    if a.cols != b.rows {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = F2Matrix::zeros(a.rows, b.cols);
    let wpr = out.words_per_row;
    for i in 0..a.rows {
        let arow = a.row_words(i);
        let orow_start = i * wpr;
        for (wi, &w) in arow.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let k = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let brow = b.row_words(k);
                for (o, &bw) in out.bits[orow_start..orow_start + wpr]
                    .iter_mut()
                    .zip(brow)
                {
                    *o ^= bw;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::binomial_le;

    fn masked_vector(d: usize, mask: u64) -> BitVector {
        let mut v = BitVector::zeros(d);
        for i in 0..d {
            if mask >> i & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    #[test]
    fn single_factor_expansion() {
        let p = DisjProbPoly::from_subsets(4, vec![vec![0]]).unwrap();
        assert_eq!(p.monomials(), &[0, 1]);
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn repeated_factor_cancels() {
        // (1 xor z_0)^2 = 1 xor z_0 over GF(2) with z_0^2 = z_0.
        let p = DisjProbPoly::from_subsets(4, vec![vec![0], vec![0]]).unwrap();
        assert_eq!(p.monomials(), &[0, 1]);
    }

    #[test]
    fn empty_factor_is_constant_one() {
        let p = DisjProbPoly::from_subsets(4, vec![vec![]]).unwrap();
        assert_eq!(p.monomials(), &[0]);
        assert!(eval_disj_poly(&p, &BitVector::ones(4)));
    }

    #[test]
    fn zero_input_always_one() {
        let mut rng = SeededRng::new(31);
        for _ in 0..50 {
            let p = sample_disj_poly(12, 5, &mut rng).unwrap();
            assert!(eval_disj_poly(&p, &BitVector::zeros(12)));
        }
    }

    #[test]
    fn factored_and_expanded_agree_exhaustively() {
        let mut rng = SeededRng::new(32);
        for d in [4usize, 7, 10] {
            for level in [1usize, 3, 6] {
                let p = sample_disj_poly(d, level, &mut rng).unwrap();
                for mask in 0u64..1 << d {
                    let z = masked_vector(d, mask);
                    assert_eq!(
                        eval_disj_poly(&p, &z),
                        eval_disj_poly_factored(&p, &z),
                        "d={d} level={level} mask={mask:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn rank_bounded_by_binomial_sum() {
        let mut rng = SeededRng::new(33);
        for _ in 0..20 {
            let p = sample_disj_poly(16, 4, &mut rng).unwrap();
            assert!(p.rank() as u128 <= binomial_le(16, 4));
            assert!(p.monomials().iter().all(|m| m.count_ones() <= 4));
        }
    }

    #[test]
    fn nonzero_input_error_rate() {
        // z = e_1: per-sample Pr[P(z) = 1] is exactly 2^{-7}; over 1000
        // samples the empirical rate stays below 2^{-7} + 5 sigma.
        let mut rng = SeededRng::new(34);
        let z = BitVector::from_support(16, &[1]).unwrap();
        let level = 7;
        let samples = 1000;
        let mut ones = 0usize;
        for _ in 0..samples {
            let p = sample_disj_poly(16, level, &mut rng).unwrap();
            if eval_disj_poly(&p, &z) {
                ones += 1;
            }
        }
        let rate = ones as f64 / samples as f64;
        let p0 = 2f64.powi(-(level as i32));
        let sigma = (p0 * (1.0 - p0) / samples as f64).sqrt();
        assert!(rate <= p0 + 5.0 * sigma, "rate {rate} too high");
    }

    #[test]
    fn phi_edge_cases() {
        let mut rng = SeededRng::new(35);
        let p = sample_disj_poly(8, 3, &mut rng).unwrap();
        let all = phi_x(&p, &BitVector::ones(8));
        assert_eq!(all.popcount(), p.rank());
        let zero = phi_x(&p, &BitVector::zeros(8));
        // Monomials are sorted, so the empty set sits at index 0.
        assert_eq!(zero.support(), vec![0]);
    }

    #[test]
    fn inner_product_identity_exhaustive_d6() {
        let mut rng = SeededRng::new(36);
        for _ in 0..3 {
            let p = sample_disj_poly(6, 3, &mut rng).unwrap();
            for xm in 0u64..64 {
                let x = masked_vector(6, xm);
                let px = phi_x(&p, &x);
                for ym in 0u64..64 {
                    let y = masked_vector(6, ym);
                    let py = phi_y(&p, &y);
                    let ip = px.dot(&py) % 2 == 1;
                    assert_eq!(ip, eval_disj_poly(&p, &x.and(&y)), "x={xm:b} y={ym:b}");
                }
            }
        }
    }

    #[test]
    fn matmul_identity_and_oracle() {
        let mut rng = SeededRng::new(37);
        let mut a = F2Matrix::zeros(32, 48);
        let mut b = F2Matrix::zeros(48, 32);
        for r in 0..32 {
            for c in 0..48 {
                a.set(r, c, rng.next_bool());
                b.set(c, r, rng.next_bool());
            }
        }
        assert_eq!(f2_matmul(&F2Matrix::identity(32), &a).unwrap(), a);
        let prod = f2_matmul(&a, &b).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let mut acc = false;
                for k in 0..48 {
                    acc ^= a.get(i, k) & b.get(k, j);
                }
                assert_eq!(prod.get(i, j), acc, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn matmul_associativity() {
        let mut rng = SeededRng::new(38);
        for _ in 0..5 {
            let rand = |rows: usize, cols: usize, rng: &mut SeededRng| {
                let mut m = F2Matrix::zeros(rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        m.set(r, c, rng.next_bool());
                    }
                }
                m
            };
            let a = rand(7, 9, &mut rng);
            let b = rand(9, 5, &mut rng);
            let c = rand(5, 11, &mut rng);
            let left = f2_matmul(&f2_matmul(&a, &b).unwrap(), &c).unwrap();
            let right = f2_matmul(&a, &f2_matmul(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn transpose_involution_and_product_rule() {
        let mut rng = SeededRng::new(39);
        let mut a = F2Matrix::zeros(9, 13);
        let mut b = F2Matrix::zeros(13, 6);
        for r in 0..9 {
            for c in 0..13 {
                a.set(r, c, rng.next_bool());
            }
        }
        for r in 0..13 {
            for c in 0..6 {
                b.set(r, c, rng.next_bool());
            }
        }
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(
            f2_matmul(&a, &b).unwrap().transpose(),
            f2_matmul(&b.transpose(), &a.transpose()).unwrap()
        );
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = F2Matrix::zeros(3, 4);
        let b = F2Matrix::zeros(5, 3);
        assert!(f2_matmul(&a, &b).is_err());
    }

    #[test]
    fn from_rows_round_trip() {
        let rows = vec![
            BitVector::from_support(70, &[0, 65]).unwrap(),
            BitVector::from_support(70, &[3]).unwrap(),
        ];
        let m = F2Matrix::from_rows(&rows).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 70));
        assert!(m.get(0, 0) && m.get(0, 65) && !m.get(0, 3));
        assert!(m.get(1, 3) && !m.get(1, 65));
        let short = BitVector::zeros(5);
        assert!(F2Matrix::from_rows(&[rows[0].clone(), short]).is_err());
    }
}
