//! Exact-inversion Poisson sampling for the small rates used by the
//! Arthur-Merlin challenge generator.

use crate::{Error, Result, SeededRng};

/// Largest rate accepted by [`pois_sample`]. Inversion walks the CDF term by
/// term, which is exact and fast only for small rates.
pub const MAX_LAMBDA: f64 = 30.0;

/// One draw from Pois(lambda) by CDF inversion: walk the cumulative product
/// of lambda/i terms until the uniform variate is covered.
pub fn pois_sample(lambda: f64, rng: &mut SeededRng) -> Result<u64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Poisson rate must be positive, got {lambda}"
        )));
    }
    if lambda > MAX_LAMBDA {
        return Err(Error::InvalidArgument(format!(
            "Poisson rate {lambda} exceeds the inversion cap {MAX_LAMBDA}; \
             split the rate with pois_sample_split"
        )));
    }
    let u = rng.next_f64();
    let mut term = (-lambda).exp();
    let mut cum = term;
    let mut k: u64 = 0;
    // P[K > lambda + 40*sqrt(lambda) + 64] is far below 2^-64; the cap only
    // guards against float pathologies.
    let cap = (lambda + 40.0 * lambda.sqrt() + 64.0) as u64;
    while u >= cum && k < cap {
        k += 1;
        term *= lambda / k as f64;
        cum += term;
    }
    Ok(k)
}

/// Pois(lambda) for arbitrary positive rates, via the closure of Poisson
/// under addition: the rate is split into chunks of at most [`MAX_LAMBDA`]
/// and independent draws are summed. Distribution-exact.
pub fn pois_sample_split(lambda: f64, rng: &mut SeededRng) -> Result<u64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Poisson rate must be positive, got {lambda}"
        )));
    }
    let chunks = (lambda / MAX_LAMBDA).ceil().max(1.0) as u64;
    let part = lambda / chunks as f64;
    let mut total = 0u64;
    for _ in 0..chunks {
        total += pois_sample(part, rng)?;
    }
    Ok(total)
}
