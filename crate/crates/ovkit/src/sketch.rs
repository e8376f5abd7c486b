//! Additive subset sketches and deterministic additive-error counting.
//!
//! The sketch of a family A stores, for every subset S with |S| <= D, the
//! number of members whose support contains S. Counting then reduces to
//! E = sum_j c_j * sum_{|S|=j} prod_i sketch_i[S], which equals
//! sum over tuples of q(<u_1 .. u_k>) exactly; the additive guarantee
//! |E - exact| <= eps * prod n_i comes entirely from the certified
//! polynomial. All arithmetic on this path is exact.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::bits::{BitVector, VectorFamily};
use crate::combin::{binomial_le, binomial_table, for_each_subset_le, SubsetIndex};
use crate::orpoly::{build_or_polynomial, eval_univariate, OrPolynomial};
use crate::rat::{rat_from_biguint, Rat};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Default cap on dense sketch width C(d, <= D).
pub const DENSE_ENTRY_CAP: u128 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// Flat array indexed by size-major colex rank; offsets[j] is the start
    /// of the size-j block.
    Dense { entries: Vec<u64>, offsets: Vec<usize> },
    Sparse { map: HashMap<(u16, u128), u64> },
}

/// Additive sketch of a vector multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    dim: usize,
    degree: usize,
    count: u64,
    repr: Repr,
}

impl Sketch {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of vectors aggregated.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Width actually stored (dense: C(dim, <= degree); sparse: nonzeros).
    pub fn width(&self) -> u128 {
        match &self.repr {
            Repr::Dense { entries, .. } => entries.len() as u128,
            Repr::Sparse { map } => map.len() as u128,
        }
    }

    pub fn backend(&self) -> Backend {
        match self.repr {
            Repr::Dense { .. } => Backend::Dense,
            Repr::Sparse { .. } => Backend::Sparse,
        }
    }

    pub fn entry(&self, idx: SubsetIndex) -> u64 {
        match &self.repr {
            Repr::Dense { entries, offsets } => {
                entries[offsets[idx.size] + idx.colex_rank as usize]
            }
            Repr::Sparse { map } => *map
                .get(&(idx.size as u16, idx.colex_rank))
                .unwrap_or(&0),
        }
    }

    fn empty(dim: usize, degree: usize, backend: Backend) -> Result<Self> {
        if degree == 0 || degree > dim {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} out of range for dim {dim}"
            )));
        }
        let repr = match backend {
            Backend::Dense => {
                let width = binomial_le(dim, degree);
                if width > DENSE_ENTRY_CAP {
                    return Err(Error::ResourceLimit(format!(
                        "dense sketch width C({dim},<={degree}) = {width} exceeds cap {DENSE_ENTRY_CAP}"
                    )));
                }
                let row = binomial_table(dim, degree);
                let mut offsets = Vec::with_capacity(degree + 1);
                let mut acc = 0usize;
                for c in &row {
                    offsets.push(acc);
                    acc += *c as usize;
                }
                Repr::Dense {
                    entries: vec![0; acc],
                    offsets,
                }
            }
            Backend::Sparse => Repr::Sparse { map: HashMap::new() },
        };
        Ok(Sketch {
            dim,
            degree,
            count: 0,
            repr,
        })
    }

    fn add_vector(&mut self, x: &BitVector) {
        debug_assert_eq!(x.dim(), self.dim);
        let support = x.support();
        match &mut self.repr {
            Repr::Dense { entries, offsets } => {
                for_each_subset_le(&support, self.degree, &mut |size, rank| {
                    entries[offsets[size] + rank as usize] += 1;
                });
            }
            Repr::Sparse { map } => {
                for_each_subset_le(&support, self.degree, &mut |size, rank| {
                    *map.entry((size as u16, rank)).or_insert(0) += 1;
                });
            }
        }
        self.count += 1;
    }
}

/// Sketch of a single vector: entry[S] = 1 iff S is contained in the
/// support of x and |S| <= degree.
pub fn sketch_vector(x: &BitVector, degree: usize, backend: Backend) -> Result<Sketch> {
    let mut sk = Sketch::empty(x.dim(), degree, backend)?;
    sk.add_vector(x);
    Ok(sk)
}

/// Pointwise sum; counts add. Multiset-union semantics.
pub fn merge_sketches(a: &Sketch, b: &Sketch) -> Result<Sketch> {
    if a.dim != b.dim || a.degree != b.degree || a.backend() != b.backend() {
        return Err(Error::InvalidArgument(format!(
            "sketch shape mismatch: ({}, {}, {:?}) vs ({}, {}, {:?})",
            a.dim,
            a.degree,
            a.backend(),
            b.dim,
            b.degree,
            b.backend()
        )));
    }
    let mut out = a.clone();
    out.count += b.count;
    match (&mut out.repr, &b.repr) {
        (Repr::Dense { entries, .. }, Repr::Dense { entries: other, .. }) => {
            for (e, o) in entries.iter_mut().zip(other) {
                *e += o;
            }
        }
        (Repr::Sparse { map }, Repr::Sparse { map: other }) => {
            for (k, v) in other {
                *map.entry(*k).or_insert(0) += v;
            }
        }
        _ => unreachable!("backend equality checked above"),
    }
    Ok(out)
}

/// Sketch of a whole family; equals the fold of `merge_sketches` over the
/// members' single-vector sketches.
pub fn sketch_family(family: &VectorFamily, degree: usize, backend: Backend) -> Result<Sketch> {
    let mut sk = Sketch::empty(family.dim(), degree, backend)?;
    for v in family.iter() {
        sk.add_vector(v);
    }
    Ok(sk)
}

/// The count estimate E with its unconditional error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CountEstimate {
    /// E, exact rational.
    pub value: Rat,
    /// eps * prod n_i.
    pub error_bound: Rat,
    pub eps: Rat,
    /// Number of factors k.
    pub arity: usize,
    /// Polynomial degree used.
    pub degree: usize,
    /// Sketch width C(d, <= sketch degree) actually enumerated.
    pub sketch_width: u128,
}

/// E = sum_{j<=D} c_j * sum_{|S|=j} prod_i sketch_i[S], exact.
pub fn estimate_tuple_count(sketches: &[&Sketch], p: &OrPolynomial) -> Result<CountEstimate> {
    if sketches.len() < 2 {
        return Err(Error::InvalidArgument("need at least two sketches".into()));
    }
    if !p.certified {
        return Err(Error::InvalidArgument(
            "polynomial is not certified; refuse to estimate".into(),
        ));
    }
    let degree = p.sketch_degree();
    let dim = sketches[0].dim;
    for sk in sketches {
        if sk.dim != dim {
            return Err(Error::InvalidArgument("sketch dimension mismatch".into()));
        }
        if sk.degree != degree {
            return Err(Error::InvalidArgument(format!(
                "sketch degree {} does not match polynomial sketch degree {degree}",
                sk.degree
            )));
        }
    }

    // Per-size-class sums of entry products, exact.
    let mut size_sums = vec![BigUint::zero(); degree + 1];
    let all_dense = sketches.iter().all(|s| s.backend() == Backend::Dense);
    if all_dense {
        let dense: Vec<(&[u64], &[usize])> = sketches
            .iter()
            .map(|s| match &s.repr {
                Repr::Dense { entries, offsets } => (entries.as_slice(), offsets.as_slice()),
                Repr::Sparse { .. } => unreachable!(),
            })
            .collect();
        let total = dense[0].0.len();
        let offsets = dense[0].1;
        for size in 0..=degree {
            let start = offsets[size];
            let end = if size == degree { total } else { offsets[size + 1] };
            let mut sum = BigUint::zero();
            for flat in start..end {
                let mut prod: u128 = 1;
                for (entries, _) in &dense {
                    prod *= entries[flat] as u128;
                    if prod == 0 {
                        break;
                    }
                }
                if prod != 0 {
                    sum += BigUint::from(prod);
                }
            }
            size_sums[size] = sum;
        }
    } else {
        // Iterate the support of the sparsest sketch; absent keys multiply
        // to zero anyway.
        let driver = sketches
            .iter()
            .min_by_key(|s| s.width())
            .expect("nonempty");
        let keys: Vec<(u16, u128)> = match &driver.repr {
            Repr::Sparse { map } => map.keys().copied().collect(),
            Repr::Dense { .. } => {
                // All-dense handled above; a dense driver among sparse
                // sketches still works via the entry accessor.
                let mut ks = Vec::new();
                let row = binomial_table(dim, degree);
                for (size, count) in row.iter().enumerate() {
                    for rank in 0..*count {
                        ks.push((size as u16, rank));
                    }
                }
                ks
            }
        };
        for (size, rank) in keys {
            let idx = SubsetIndex {
                size: size as usize,
                colex_rank: rank,
            };
            let mut prod: u128 = 1;
            for sk in sketches {
                prod *= sk.entry(idx) as u128;
                if prod == 0 {
                    break;
                }
            }
            if prod != 0 {
                size_sums[size as usize] += BigUint::from(prod);
            }
        }
    }

    let mut value = Rat::zero();
    for (c, sum) in p.elem_coeffs.iter().zip(&size_sums) {
        if !sum.is_zero() {
            value += c * rat_from_biguint(sum);
        }
    }
    let mut pairs = Rat::from_integer(BigInt::from(1));
    for sk in sketches {
        pairs *= Rat::from_integer(BigInt::from(sk.count));
    }
    Ok(CountEstimate {
        value,
        error_bound: &p.eps * &pairs,
        eps: p.eps.clone(),
        arity: sketches.len(),
        degree: p.degree,
        sketch_width: binomial_le(dim, degree),
    })
}

fn pick_backend(dim: usize, degree: usize) -> Backend {
    if binomial_le(dim, degree) <= DENSE_ENTRY_CAP {
        Backend::Dense
    } else {
        Backend::Sparse
    }
}

/// Deterministic additive-error #OV: |E - #OV| <= eps * n_A * n_B.
pub fn count_ov_approx(a: &VectorFamily, b: &VectorFamily, eps: &Rat) -> Result<CountEstimate> {
    count_kov_approx(&[a, b], eps)
}

/// Deterministic additive-error #k-OV: |E - #k-OV| <= eps * prod n_i.
pub fn count_kov_approx(families: &[&VectorFamily], eps: &Rat) -> Result<CountEstimate> {
    if families.len() < 2 {
        return Err(Error::InvalidArgument("need at least two families".into()));
    }
    let dim = families[0].dim();
    if families.iter().any(|f| f.dim() != dim) {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    let p = build_or_polynomial(dim, eps)?;
    let degree = p.sketch_degree();
    let backend = pick_backend(dim, degree);
    let sketches: Vec<Sketch> = families
        .iter()
        .map(|f| sketch_family(f, degree, backend))
        .collect::<Result<_>>()?;
    let refs: Vec<&Sketch> = sketches.iter().collect();
    estimate_tuple_count(&refs, &p)
}

/// Sparse #OV: the polynomial degree comes from the sparsity bound, not the
/// universe size, and its certificate only needs t in [1, sparse_bound]
/// because inner products cannot exceed the smaller popcount.
pub fn count_sparse_ov_approx(
    a: &VectorFamily,
    b: &VectorFamily,
    eps: &Rat,
) -> Result<CountEstimate> {
    let bound = match (a.sparse_bound(), b.sparse_bound()) {
        (Some(x), Some(y)) if x == y => x,
        _ => {
            return Err(Error::InvalidArgument(
                "both families must be in sparse mode with equal bounds".into(),
            ))
        }
    };
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    let p = build_or_polynomial(bound, eps)?;
    let degree = p.sketch_degree();
    let ska = sketch_family(a, degree, Backend::Sparse)?;
    let skb = sketch_family(b, degree, Backend::Sparse)?;
    estimate_tuple_count(&[&ska, &skb], &p)
}

/// Per-pair evaluation sum_{(x,y)} q(<x,y>). Quadratic; exists as the
/// independent second route for the sketch identity and must equal
/// `estimate_tuple_count` exactly.
pub fn direct_poly_count(a: &VectorFamily, b: &VectorFamily, p: &OrPolynomial) -> Result<Rat> {
    if !p.certified {
        return Err(Error::InvalidArgument(
            "polynomial is not certified; refuse to count".into(),
        ));
    }
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("family dimension mismatch".into()));
    }
    // Inner products repeat heavily; memoize q at the few distinct values.
    let mut cache: HashMap<usize, Rat> = HashMap::new();
    let mut total = Rat::zero();
    for x in a.iter() {
        for y in b.iter() {
            let t = x.dot(y);
            let v = cache
                .entry(t)
                .or_insert_with(|| eval_univariate(&p.power_coeffs, t));
            total += &*v;
        }
    }
    Ok(total)
}

/// Randomized sampling baseline: fraction of orthogonal pairs among
/// `trials` uniform random pairs, scaled to a count. Probabilistic
/// (Hoeffding) guarantee only; for benchmark comparison.
pub fn sample_count_estimate(
    a: &VectorFamily,
    b: &VectorFamily,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() || trials == 0 {
        return Err(Error::InvalidArgument("empty family or zero trials".into()));
    }
    let mut hits = 0usize;
    for _ in 0..trials {
        let x = &a.vectors()[rng.below(a.len() as u64) as usize];
        let y = &b.vectors()[rng.below(b.len() as u64) as usize];
        if x.is_disjoint(y) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64 * a.len() as f64 * b.len() as f64)
}
