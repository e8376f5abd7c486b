//! Packed binary vectors in {0,1}^d and ordered families of them.

use crate::{Error, Result};

const WORD: usize = 64;

/// A binary vector of fixed dimension, packed into 64-bit words.
/// Bits beyond position `dim - 1` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    dim: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        BitVector {
            dim,
            words: vec![0; dim.div_ceil(WORD)],
        }
    }

    pub fn ones(dim: usize) -> Self {
        let mut v = Self::zeros(dim);
        for i in 0..dim {
            v.set(i, true);
        }
        v
    }

    pub fn from_support(dim: usize, support: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(dim);
        for &i in support {
            if i >= dim {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i} out of range for dim {dim}"
                )));
            }
            v.set(i, true);
        }
        Ok(v)
    }

    /// Parse a line of `dim` characters from {0,1}.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty bit string".into()));
        }
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => return Err(Error::Parse(format!("invalid character {c:?} in bit string"))),
            }
        }
        Ok(v)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.dim).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.dim);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.dim);
        let (w, b) = (i / WORD, i % WORD);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    #[inline]
    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.popcount());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(wi * WORD + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Coordinatewise AND; panics on dimension mismatch (callers validate).
    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        BitVector {
            dim: self.dim,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// Inner product over the integers: |support(x) AND support(y)|.
    pub fn dot(&self, other: &BitVector) -> usize {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Coordinatewise XOR in place (addition over GF(2)).
    pub fn xor_with(&mut self, other: &BitVector) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_disjoint(&self, other: &BitVector) -> bool {
        self.dot(other) == 0
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// The vector as a single word mask, when `dim <= 64`.
    pub fn mask64(&self) -> Option<u64> {
        if self.dim <= 64 {
            Some(self.words[0])
        } else {
            None
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// An ordered multiset of `BitVector`s of a shared dimension.
///
/// In sparse mode (`sparse_bound = Some(d)`), every member must have
/// popcount at most `d`; the dimension then plays the role of the
/// universe size m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFamily {
    dim: usize,
    sparse_bound: Option<usize>,
    vectors: Vec<BitVector>,
}

impl VectorFamily {
    pub fn new(dim: usize, sparse_bound: Option<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if let Some(b) = sparse_bound {
            if b == 0 || b > dim {
                return Err(Error::InvalidArgument(format!(
                    "sparse bound {b} out of range for dim {dim}"
                )));
            }
        }
        Ok(VectorFamily {
            dim,
            sparse_bound,
            vectors: Vec::new(),
        })
    }

    pub fn push(&mut self, v: BitVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "vector dim {} does not match family dim {}",
                v.dim(),
                self.dim
            )));
        }
        if let Some(b) = self.sparse_bound {
            if v.popcount() > b {
                return Err(Error::InvalidArgument(format!(
                    "vector popcount {} exceeds sparse bound {b}",
                    v.popcount()
                )));
            }
        }
        self.vectors.push(v);
        Ok(())
    }

    pub fn from_vectors(
        dim: usize,
        sparse_bound: Option<usize>,
        vectors: Vec<BitVector>,
    ) -> Result<Self> {
        let mut fam = Self::new(dim, sparse_bound)?;
        for v in vectors {
            fam.push(v)?;
        }
        Ok(fam)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sparse_bound(&self) -> Option<usize> {
        self.sparse_bound
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[BitVector] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BitVector> {
        self.vectors.iter()
    }
}
