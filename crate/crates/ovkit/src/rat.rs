//! Exact rational arithmetic used by the polynomial and sketch paths.
//!
//! Floating point is deliberately absent here: the additive-error guarantee
//! of the counting algorithms is attributable solely to the polynomial, so
//! every coefficient and every estimate is carried as an exact rational.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator (enforced by `BigRational` itself).
pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_from_biguint(n: &BigUint) -> Rat {
    Rat::from_integer(BigInt::from(n.clone()))
}

pub fn rat_from_u128(n: u128) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact string form `p/q` (or just `p` when the value is an integer).
/// Used wherever JSON output would otherwise lose precision.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse the format produced by [`rat_to_string`].
pub fn rat_from_string(s: &str) -> crate::Result<Rat> {
    let parse_int = |t: &str| {
        t.parse::<BigInt>()
            .map_err(|e| crate::Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(crate::Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(parse_int(n)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Decimal approximation for human-readable reporting only.
pub fn rat_to_f64(r: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}
