//! Certified univariate approximants to OR on {0,1}^d.
//!
//! `build_or_polynomial(d, eps)` produces q with q(0) = 1 and |q(t)| <= eps
//! for every integer t in [1, d], as a scaled Chebyshev quotient
//! q(t) = T_D(m(t)) / T_D(m(0)) with m(t) = (d+1-2t)/(d-1). The affine map
//! sends [1, d] into [-1, 1] where |T_D| <= 1, so the certificate follows
//! from T_D(m(0)) >= 1/eps. All coefficients are exact rationals and the
//! certificate is checked by exact evaluation at every integer point.
//!
//! The power-basis coefficients are also converted to the elementary
//! symmetric basis: on z in {0,1}^d with s = sum z_i,
//! s^k = sum_j S2(k,j) * j! * e_j(z), so
//! q(sum z_i) = sum_j c_j e_j(z) with c_j = sum_{k>=j} a_k S2(k,j) j!.
//! These c_j are the subset-size-indexed coefficients the sketch module
//! contracts against.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::stirling2_table;
use crate::rat::{rat_from_string, rat_int, rat_to_string, Rat};
use crate::{Error, Result};

/// Hard cap on the constructed degree; C(d, <= D) must stay enumerable.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct OrPolynomial {
    pub dim: usize,
    pub eps: Rat,
    /// Degree of q in the power basis.
    pub degree: usize,
    /// a_0..a_D with q(t) = sum a_k t^k.
    pub power_coeffs: Vec<Rat>,
    /// c_0..c_J with J = min(D, d); q(sum z) = sum_j c_j e_j(z) on {0,1}^d.
    pub elem_coeffs: Vec<Rat>,
    pub certified: bool,
}

impl OrPolynomial {
    /// Largest subset size carrying a nonzero sketch term: min(degree, dim).
    pub fn sketch_degree(&self) -> usize {
        self.elem_coeffs.len() - 1
    }
}

/// Report of the exact certification sweep over t = 0..=d.
#[derive(Debug, Clone)]
pub struct CertReport {
    pub value_at_zero: Rat,
    pub max_abs_deviation: Rat,
    /// Integer point attaining the maximum deviation on [1, d].
    pub argmax: usize,
    pub certified: bool,
}

/// Chebyshev value T_n(x) by the three-term recurrence, exact.
#[cfg(test)]
fn chebyshev_value(x: &Rat, n: usize) -> Rat {
    let mut prev = rat_int(1);
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..n {
        let next = Rat::from_integer(BigInt::from(2)) * x * &cur - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The smallest D with T_D((d+1)/(d-1)) >= 1/eps (d >= 2); 1 for d = 1.
pub fn choose_degree(d: usize, eps: &Rat) -> Result<usize> {
    validate_inputs(d, eps)?;
    if d == 1 {
        return Ok(1);
    }
    let x = Rat::new(BigInt::from(d as i64 + 1), BigInt::from(d as i64 - 1));
    let target = eps.recip();
    let mut prev = rat_int(1);
    let mut cur = x.clone();
    let two_x = Rat::from_integer(BigInt::from(2)) * &x;
    for deg in 1..=MAX_DEGREE {
        if cur >= target {
            return Ok(deg);
        }
        let next = &two_x * &cur - &prev;
        prev = cur;
        cur = next;
    }
    Err(Error::ResourceLimit(format!(
        "degree cap {MAX_DEGREE} reached for d={d}, eps={}",
        rat_to_string(eps)
    )))
}

fn validate_inputs(d: usize, eps: &Rat) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if !(eps > &Rat::zero() && eps < &Rat::one()) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0,1), got {}",
            rat_to_string(eps)
        )));
    }
    Ok(())
}

/// Multiply two dense power-basis polynomials.
fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Construct q for (d, eps): power coefficients, elementary-basis
/// coefficients, and an exact certificate.
pub fn build_or_polynomial(d: usize, eps: &Rat) -> Result<OrPolynomial> {
    validate_inputs(d, eps)?;
    let (degree, power_coeffs) = if d == 1 {
        (1, vec![rat_int(1), rat_int(-1)])
    } else {
        let degree = choose_degree(d, eps)?;
        // m(t) = (d+1-2t)/(d-1) as a degree-1 polynomial in t.
        let den = BigInt::from(d as i64 - 1);
        let m = vec![
            Rat::new(BigInt::from(d as i64 + 1), den.clone()),
            Rat::new(BigInt::from(-2), den),
        ];
        // T_degree composed with m, by the recurrence on polynomials.
        let mut prev = vec![rat_int(1)];
        let mut cur = m.clone();
        for _ in 1..degree {
            let mut next = poly_mul(&m, &cur);
            for c in next.iter_mut() {
                *c *= rat_int(2);
            }
            for (i, p) in prev.iter().enumerate() {
                next[i] -= p;
            }
            prev = cur;
            cur = next;
        }
        // Normalize so q(0) = 1 exactly.
        let at_zero = cur[0].clone();
        debug_assert!(!at_zero.is_zero());
        for c in cur.iter_mut() {
            *c /= &at_zero;
        }
        (degree, cur)
    };

    let elem_coeffs = power_to_elementary(&power_coeffs, d);
    let mut poly = OrPolynomial {
        dim: d,
        eps: eps.clone(),
        degree,
        power_coeffs,
        elem_coeffs,
        certified: false,
    };
    let report = verify_or_polynomial(&poly);
    if !report.certified {
        return Err(Error::Certification(format!(
            "constructed polynomial violates its bound at t={} (|q| = {})",
            report.argmax,
            rat_to_string(&report.max_abs_deviation)
        )));
    }
    poly.certified = true;
    Ok(poly)
}

/// Exact Horner evaluation of the power-basis form at integer t.
pub fn eval_univariate(power_coeffs: &[Rat], t: usize) -> Rat {
    let t = rat_int(t as i64);
    let mut acc = Rat::zero();
    for c in power_coeffs.iter().rev() {
        acc = acc * &t + c;
    }
    acc
}

/// Evaluate q exactly at every integer t in [0, d] and report whether
/// q(0) = 1 and max_{1<=t<=d} |q(t)| <= eps.
pub fn verify_or_polynomial(p: &OrPolynomial) -> CertReport {
    let value_at_zero = eval_univariate(&p.power_coeffs, 0);
    let mut max_abs = Rat::zero();
    let mut argmax = 1;
    for t in 1..=p.dim {
        let v = eval_univariate(&p.power_coeffs, t).abs();
        if v > max_abs {
            max_abs = v;
            argmax = t;
        }
    }
    let certified = value_at_zero.is_one() && max_abs <= p.eps;
    CertReport {
        value_at_zero,
        max_abs_deviation: max_abs,
        argmax,
        certified,
    }
}

/// Change of basis: c_j = sum_{k=j}^{D} a_k * S2(k,j) * j!, for
/// j = 0..=min(D, d). Terms with j > d are dropped because e_j vanishes on
/// d variables.
pub fn power_to_elementary(power_coeffs: &[Rat], d: usize) -> Vec<Rat> {
    let degree = power_coeffs.len() - 1;
    let top = degree.min(d);
    let s2 = stirling2_table(degree);
    let mut out = Vec::with_capacity(top + 1);
    let mut factorial = BigInt::one();
    for j in 0..=top {
        if j > 0 {
            factorial *= BigInt::from(j as u64);
        }
        let mut c = Rat::zero();
        for (k, a_k) in power_coeffs.iter().enumerate().skip(j) {
            if a_k.is_zero() {
                continue;
            }
            if j == 0 && k > 0 {
                continue; // S2(k, 0) = 0 for k >= 1
            }
            let s = BigInt::from(s2[k][j].clone());
            c += a_k * Rat::from_integer(s * &factorial);
        }
        out.push(c);
    }
    out
}

/// JSON document form: exact decimal-string rationals, reusable across CLI
/// invocations.
#[derive(Serialize, Deserialize)]
struct PolyDoc {
    d: usize,
    eps: String,
    degree: usize,
    power_coeffs: Vec<String>,
    elem_coeffs: Vec<String>,
    certified: bool,
}

pub fn to_json(p: &OrPolynomial) -> String {
    let doc = PolyDoc {
        d: p.dim,
        eps: rat_to_string(&p.eps),
        degree: p.degree,
        power_coeffs: p.power_coeffs.iter().map(rat_to_string).collect(),
        elem_coeffs: p.elem_coeffs.iter().map(rat_to_string).collect(),
        certified: p.certified,
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn from_json(s: &str) -> Result<OrPolynomial> {
    let doc: PolyDoc =
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("polynomial JSON: {e}")))?;
    let parse_all = |v: &[String]| -> Result<Vec<Rat>> { v.iter().map(|s| rat_from_string(s)).collect() };
    let mut p = OrPolynomial {
        dim: doc.d,
        eps: rat_from_string(&doc.eps)?,
        degree: doc.degree,
        power_coeffs: parse_all(&doc.power_coeffs)?,
        elem_coeffs: parse_all(&doc.elem_coeffs)?,
        certified: false,
    };
    // Never trust a stored certificate; re-verify.
    p.certified = verify_or_polynomial(&p).certified;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    #[test]
    fn degree_one_for_d1() {
        assert_eq!(choose_degree(1, &rat_frac(1, 2)).unwrap(), 1);
        let p = build_or_polynomial(1, &rat_frac(1, 2)).unwrap();
        assert_eq!(p.power_coeffs, vec![rat_int(1), rat_int(-1)]);
        assert_eq!(p.elem_coeffs, vec![rat_int(1), rat_int(-1)]);
        assert!(p.certified);
    }

    #[test]
    fn chosen_degree_is_tight_for_d16() {
        // T_D(17/15) >= 10 and T_{D-1}(17/15) < 10.
        let eps = rat_frac(1, 10);
        let deg = choose_degree(16, &eps).unwrap();
        let x = rat_frac(17, 15);
        assert!(chebyshev_value(&x, deg) >= rat_int(10));
        assert!(chebyshev_value(&x, deg - 1) < rat_int(10));
    }

    #[test]
    fn degree_monotonicity_grid() {
        for &d in &[2usize, 4, 8, 16, 32] {
            for &(num, den) in &[(1i64, 2i64), (1, 8), (1, 32)] {
                let eps = rat_frac(num, den);
                let half = &eps / rat_int(2);
                assert!(choose_degree(d, &half).unwrap() >= choose_degree(d, &eps).unwrap());
                assert!(choose_degree(4 * d, &eps).unwrap() >= choose_degree(d, &eps).unwrap());
            }
        }
    }

    #[test]
    fn degree_envelope() {
        // D <= ceil(sqrt(d) * ln(2/eps)) + 1 over the test grid.
        for &d in &[2usize, 4, 8, 16, 32, 64] {
            for &(num, den) in &[(1i64, 2i64), (1, 10), (1, 100)] {
                let eps = rat_frac(num, den);
                let d_chosen = choose_degree(d, &eps).unwrap();
                let envelope =
                    ((d as f64).sqrt() * (2.0 * den as f64 / num as f64).ln()).ceil() as usize + 1;
                assert!(d_chosen <= envelope, "d={d} eps={num}/{den}: {d_chosen} > {envelope}");
            }
        }
    }

    #[test]
    fn build_certifies_d8() {
        let p = build_or_polynomial(8, &rat_frac(1, 10)).unwrap();
        assert!(p.certified);
        assert_eq!(eval_univariate(&p.power_coeffs, 0), rat_int(1));
        for t in 1..=8 {
            assert!(eval_univariate(&p.power_coeffs, t).abs() <= rat_frac(1, 10));
        }
    }

    #[test]
    fn d2_maps_endpoints() {
        // m maps t=1 -> 1 and t=2 -> -1; both |q| <= 1/4.
        let p = build_or_polynomial(2, &rat_frac(1, 4)).unwrap();
        let q1 = eval_univariate(&p.power_coeffs, 1).abs();
        let q2 = eval_univariate(&p.power_coeffs, 2).abs();
        assert!(q1 <= rat_frac(1, 4) && q2 <= rat_frac(1, 4));
        // |T_D(+-1)| = 1, so both deviations equal 1/T_D(m(0)).
        assert_eq!(q1, q2);
    }

    #[test]
    fn tampering_decertifies() {
        let mut p = build_or_polynomial(8, &rat_frac(1, 10)).unwrap();
        p.power_coeffs[1] += rat_int(1);
        let report = verify_or_polynomial(&p);
        assert!(!report.certified);
        assert_eq!(report.value_at_zero, rat_int(1));
    }

    #[test]
    fn verify_certifies_one_minus_t_for_every_eps() {
        for &(num, den) in &[(1i64, 2i64), (1, 100), (99, 100)] {
            let p = OrPolynomial {
                dim: 1,
                eps: rat_frac(num, den),
                degree: 1,
                power_coeffs: vec![rat_int(1), rat_int(-1)],
                elem_coeffs: vec![rat_int(1), rat_int(-1)],
                certified: false,
            };
            assert!(verify_or_polynomial(&p).certified);
        }
    }

    #[test]
    fn elementary_basis_examples() {
        // q(s) = 1 -> c = (1, 0, ...).
        let c = power_to_elementary(&[rat_int(1), rat_int(0)], 4);
        assert_eq!(c, vec![rat_int(1), rat_int(0)]);

        // q(s) = s^2 -> c = (0, 1, 2); s^2 = e_1 + 2 e_2 over {0,1}^3.
        let c = power_to_elementary(&[rat_int(0), rat_int(0), rat_int(1)], 3);
        assert_eq!(c, vec![rat_int(0), rat_int(1), rat_int(2)]);
        check_identity_exhaustive(&[rat_int(0), rat_int(0), rat_int(1)], 3);

        // q(s) = s^3 -> c = (0, 1, 6, 6) over {0,1}^4.
        let c = power_to_elementary(&[rat_int(0), rat_int(0), rat_int(0), rat_int(1)], 4);
        assert_eq!(c, vec![rat_int(0), rat_int(1), rat_int(6), rat_int(6)]);
        check_identity_exhaustive(&[rat_int(0), rat_int(0), rat_int(0), rat_int(1)], 4);
    }

    /// e_j evaluated on an assignment with s ones is C(s, j).
    fn check_identity_exhaustive(power: &[Rat], d: usize) {
        let elems = power_to_elementary(power, d);
        for mask in 0u32..(1 << d) {
            let s = mask.count_ones() as usize;
            let lhs = eval_univariate(power, s);
            let mut rhs = Rat::zero();
            for (j, c) in elems.iter().enumerate() {
                rhs += c * Rat::from_integer(BigInt::from(crate::combin::binomial(s, j)));
            }
            assert_eq!(lhs, rhs, "mask {mask:b}");
        }
    }

    #[test]
    fn basis_identity_for_built_polynomials() {
        for &d in &[3usize, 6, 9, 12] {
            let p = build_or_polynomial(d, &rat_frac(1, 8)).unwrap();
            check_identity_exhaustive(&p.power_coeffs, d);
        }
    }

    #[test]
    fn approximation_invariant_exhaustive() {
        // |q(sum z) - [OR(z)=0]| <= eps for all z, d <= 12 spot set.
        for &d in &[2usize, 5, 12] {
            let eps = rat_frac(1, 10);
            let p = build_or_polynomial(d, &eps).unwrap();
            for s in 0..=d {
                let v = eval_univariate(&p.power_coeffs, s);
                let indicator = if s == 0 { rat_int(1) } else { rat_int(0) };
                assert!((v - indicator).abs() <= eps, "d={d} s={s}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let p = build_or_polynomial(8, &rat_frac(1, 10)).unwrap();
        let back = from_json(&to_json(&p)).unwrap();
        assert_eq!(back, p);
        assert!(back.certified);
    }
}
