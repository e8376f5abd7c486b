//! Dataset text format and reproducible instance generators.
//!
//! A file holds one vector family: a header line "d n" (or "d n b" in
//! sparse mode, b the popcount bound), then n lines of d characters from
//! {0,1}. Planted generators also produce a JSON witness naming the
//! planted indices.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{BitVector, VectorFamily};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Parse the text format; rejects malformed headers, wrong line counts and
/// lines of the wrong length.
pub fn from_text(text: &str) -> Result<VectorFamily> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(Error::Parse(format!(
            "header must be \"d n [sparse_bound]\", got {header:?}"
        )));
    }
    let parse = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Parse(format!("invalid integer {s:?} in header")))
    };
    let d = parse(fields[0])?;
    let n = parse(fields[1])?;
    let bound = if fields.len() == 3 {
        Some(parse(fields[2])?)
    } else {
        None
    };
    let mut fam = VectorFamily::new(d, bound)?;
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, found {i}")))?;
        if line.len() != d {
            return Err(Error::Parse(format!(
                "row {i} has length {}, expected {d}",
                line.len()
            )));
        }
        fam.push(BitVector::from_bitstring(line)?)?;
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Parse(format!("trailing content after {n} rows")));
    }
    Ok(fam)
}

pub fn to_text(fam: &VectorFamily) -> String {
    let mut out = String::new();
    match fam.sparse_bound() {
        Some(b) => writeln!(out, "{} {} {b}", fam.dim(), fam.len()).unwrap(),
        None => writeln!(out, "{} {}", fam.dim(), fam.len()).unwrap(),
    }
    for v in fam.iter() {
        out.push_str(&v.to_bitstring());
        out.push('\n');
    }
    out
}

pub fn read_file(path: &Path) -> Result<VectorFamily> {
    from_text(&std::fs::read_to_string(path)?)
}

pub fn write_file(path: &Path, fam: &VectorFamily) -> Result<()> {
    Ok(std::fs::write(path, to_text(fam))?)
}

/// Instance distributions the generator supports.
#[derive(Debug, Clone, PartialEq)]
pub enum GenModel {
    /// Each bit set independently with probability p.
    Uniform { d: usize, p: f64 },
    /// Uniform(p) background with two members overwritten by vectors on
    /// disjoint coordinate halves, so the family contains an orthogonal
    /// pair by construction.
    PlantedOrthogonal { d: usize, p: f64 },
    /// Uniform(p) background with two members sharing exactly w
    /// coordinates.
    PlantedIp { d: usize, p: f64, w: usize },
    /// Sparse mode: universe m, each member's popcount uniform in [0, d].
    Sparse { m: usize, d: usize },
}

/// Certificate accompanying planted datasets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub model: String,
    pub seed: u64,
    /// Indices of the planted pair, when one exists.
    pub indices: Option<(usize, usize)>,
    /// The planted inner product, for planted-ip.
    pub planted_ip: Option<usize>,
}

fn bernoulli_vector(d: usize, p: f64, rng: &mut SeededRng) -> BitVector {
    let mut v = BitVector::zeros(d);
    for i in 0..d {
        if rng.bernoulli(p) {
            v.set(i, true);
        }
    }
    v
}

/// Draw exactly `weight` distinct coordinates out of `m`.
fn fixed_weight_vector(m: usize, weight: usize, rng: &mut SeededRng) -> BitVector {
    let mut v = BitVector::zeros(m);
    let mut left = weight;
    while left > 0 {
        let c = rng.below(m as u64) as usize;
        if !v.get(c) {
            v.set(c, true);
            left -= 1;
        }
    }
    v
}

/// Generate a family of n vectors; deterministic in (n, model, seed).
pub fn generate(n: usize, model: &GenModel, seed: u64) -> Result<(VectorFamily, Witness)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let check_p = |p: f64| -> Result<()> {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")))
        }
    };
    let mut rng = SeededRng::new(seed);
    match *model {
        GenModel::Uniform { d, p } => {
            check_p(p)?;
            let mut fam = VectorFamily::new(d, None)?;
            for _ in 0..n {
                fam.push(bernoulli_vector(d, p, &mut rng))?;
            }
            Ok((
                fam,
                Witness {
                    model: format!("uniform(p={p})"),
                    seed,
                    indices: None,
                    planted_ip: None,
                },
            ))
        }
        GenModel::PlantedOrthogonal { d, p } => {
            check_p(p)?;
            if n < 2 || d < 2 {
                return Err(Error::InvalidArgument(
                    "planted-orthogonal needs n >= 2 and d >= 2".into(),
                ));
            }
            let mut fam = VectorFamily::new(d, None)?;
            for _ in 0..n {
                fam.push(bernoulli_vector(d, p, &mut rng))?;
            }
            let i = rng.below(n as u64) as usize;
            let j = loop {
                let j = rng.below(n as u64) as usize;
                if j != i {
                    break j;
                }
            };
            let half = d / 2;
            let mut vectors = fam.vectors().to_vec();
            let mut x = BitVector::zeros(d);
            let mut y = BitVector::zeros(d);
            for c in 0..half {
                if rng.bernoulli(p) {
                    x.set(c, true);
                }
            }
            for c in half..d {
                if rng.bernoulli(p) {
                    y.set(c, true);
                }
            }
            vectors[i] = x;
            vectors[j] = y;
            let fam = VectorFamily::from_vectors(d, None, vectors)?;
            debug_assert!(fam.vectors()[i].is_disjoint(&fam.vectors()[j]));
            Ok((
                fam,
                Witness {
                    model: format!("planted-orthogonal(p={p})"),
                    seed,
                    indices: Some((i, j)),
                    planted_ip: Some(0),
                },
            ))
        }
        GenModel::PlantedIp { d, p, w } => {
            check_p(p)?;
            if n < 2 || w > d / 2 {
                return Err(Error::InvalidArgument(
                    "planted-ip needs n >= 2 and w <= d/2".into(),
                ));
            }
            let mut fam = VectorFamily::new(d, None)?;
            for _ in 0..n {
                fam.push(bernoulli_vector(d, p, &mut rng))?;
            }
            let i = rng.below(n as u64) as usize;
            let j = loop {
                let j = rng.below(n as u64) as usize;
                if j != i {
                    break j;
                }
            };
            // Shared block of exactly w coordinates, private remainders on
            // disjoint ranges so the inner product is exactly w.
            let mut vectors = fam.vectors().to_vec();
            let mut x = BitVector::zeros(d);
            let mut y = BitVector::zeros(d);
            for c in 0..w {
                x.set(c, true);
                y.set(c, true);
            }
            let free = d - w;
            for c in w..w + free / 2 {
                if rng.bernoulli(p) {
                    x.set(c, true);
                }
            }
            for c in w + free / 2..d {
                if rng.bernoulli(p) {
                    y.set(c, true);
                }
            }
            vectors[i] = x;
            vectors[j] = y;
            let fam = VectorFamily::from_vectors(d, None, vectors)?;
            debug_assert_eq!(fam.vectors()[i].dot(&fam.vectors()[j]), w);
            Ok((
                fam,
                Witness {
                    model: format!("planted-ip(p={p},w={w})"),
                    seed,
                    indices: Some((i, j)),
                    planted_ip: Some(w),
                },
            ))
        }
        GenModel::Sparse { m, d } => {
            let mut fam = VectorFamily::new(m, Some(d))?;
            for _ in 0..n {
                let weight = rng.below(d as u64 + 1) as usize;
                fam.push(fixed_weight_vector(m, weight, &mut rng))?;
            }
            Ok((
                fam,
                Witness {
                    model: format!("sparse(m={m},d={d})"),
                    seed,
                    indices: None,
                    planted_ip: None,
                },
            ))
        }
    }
}
