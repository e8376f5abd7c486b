//! Deterministic approximate counting and randomized satisfying-pair
//! algorithms for orthogonal-vector problems on binary vectors.
//!
//! Three algorithm families share the primitives in this crate:
//!
//! * additive-error counting for #OV, #k-OV and #Sparse-OV through an
//!   exactly-certified univariate approximant to OR, evaluated on additive
//!   subset sketches ([`orpoly`], [`sketch`]);
//! * a randomized OV decision procedure built on sampled GF(2) polynomials
//!   for set disjointness and their low-rank feature maps ([`f2poly`],
//!   [`ovdecide`]);
//! * an Arthur-Merlin engine with a Poisson-weight gap-inner-product
//!   protocol, yielding 2-approximate maximum inner product ([`amsp`]).
//!
//! Brute-force reference implementations live in [`oracle`]; every
//! randomized or approximate path is validated against them in tests.

pub mod amsp;
pub mod bits;
pub mod combin;
pub mod dataset;
pub mod error;
pub mod f2poly;
pub mod oracle;
pub mod orpoly;
pub mod ovdecide;
pub mod poisson;
pub mod rat;
pub mod rng;
pub mod sketch;

pub use bits::{BitVector, VectorFamily};
pub use error::{Error, Result};
pub use rat::Rat;
pub use rng::SeededRng;
