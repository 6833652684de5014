//! Exact degrees [Q(zeta_m, a^{1/n}) : Q(zeta_m)] for n | m, and an
//! independent statistical oracle counting completely split primes.
//!
//! The degree equals n / t where t is the largest divisor of n with a an
//! t-th power in Q(zeta_m). Odd part: a is an odd ell-th power in a
//! cyclotomic field iff it is one in Q (abelian radical extensions of odd
//! degree are rational), so the odd part of t is gcd(odd part of n, D).
//! Two-part: a 2^j-th root of a lies in a cyclotomic field only for
//! j <= d+1, and the candidate roots have the explicit shape
//! zeta_{2^{d+2}}^g * b * sqrt(2^delta |T|); membership of such an element
//! in Q(zeta_m) is decided by enumerating Galois characters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd_u64, kronecker, lcm_u64, powmod, valuation_u64};
use crate::primes::PrimeEngine;
use crate::ratmul::{canonical_decompose, CanonicalDecomposition, FactoredRational, RatmulError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KummerError {
    #[error("query requires n | m and positive n, m")]
    MalformedQuery,
    #[error(transparent)]
    Ratmul(#[from] RatmulError),
    #[error("too few split primes below the bound for a stable estimate")]
    TooFewSamples,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KummerQuery {
    pub a: FactoredRational,
    pub n: u64,
    pub m: u64,
}

impl KummerQuery {
    pub fn new(a: FactoredRational, n: u64, m: u64) -> Result<Self, KummerError> {
        if n == 0 || m == 0 || m % n != 0 {
            return Err(KummerError::MalformedQuery);
        }
        Ok(KummerQuery { a, n, m })
    }
}

/// Q(zeta_m) = Q(zeta_{2m}) for odd m; normalize before 2-power checks.
fn m_tilde(m: u64) -> u64 {
    if m % 2 == 1 {
        2 * m
    } else {
        m
    }
}

/// zeta of exact order k lies in Q(zeta_m).
fn zeta_in(k: u64, m: u64) -> bool {
    m_tilde(m) % k == 0
}

/// Does zeta_{2^c}^g * sqrt(s) lie in Q(zeta_m)? s is a squarefree integer
/// (possibly negative, possibly 1); decided by checking that every Galois
/// automorphism of Q(zeta_L) fixing Q(zeta_{gcd(L, m~)}) fixes the element.
pub fn root_in_cyclotomic(c: u32, g: u64, s: i128, m: u64) -> bool {
    debug_assert!(c >= 1);
    let two_c = 1u64 << c;
    let g = g % two_c;
    if s == 1 {
        return zeta_in(two_c / gcd_u64(g, two_c), m);
    }
    // discriminant of Q(sqrt s): s itself when s = 1 mod 4, else 4s
    let disc: i128 = if s.rem_euclid(4) == 1 { s } else { 4 * s };
    let l = lcm_u64(two_c, disc.unsigned_abs() as u64);
    let fixed_mod = gcd_u64(l, m_tilde(m));
    let half = 1u64 << (c - 1);
    for t in (1..=l).filter(|&t| gcd_u64(t, l) == 1 && t % fixed_mod == 1 % fixed_mod) {
        let w = (g as u128 * (t as u128 - 1) % two_c as u128) as u64;
        let k = kronecker(disc, t as i128);
        let fixed = (w == 0 && k == 1) || (w == half && k == -1);
        if !fixed {
            return false;
        }
    }
    true
}

/// a in (Q(zeta_m)^x)^(2^j), from the canonical decomposition.
fn two_power_in_cyclotomic(dec: &CanonicalDecomposition, j: u32, m: u64) -> bool {
    if j == 0 {
        return true;
    }
    if j <= dec.d {
        // a = +-(rational)^(2^j); only the sign can obstruct
        return dec.epsilon == 0 || zeta_in(1 << (j + 1), m);
    }
    if j > dec.d + 1 {
        // the rational part b^2 2^delta T is not a square, so the tower of
        // cyclotomic 2-power roots stops at depth d+1
        return false;
    }
    let u = (1u128 << dec.delta) * dec.abs_t();
    let u = i128::try_from(u).expect("squarefree kernel fits i128");
    let c = dec.d + 2;
    let parity = (dec.epsilon as u64 + u64::from(dec.d == 0 && dec.t < 0)) % 2;
    (0..(1u64 << c))
        .filter(|g| g % 2 == parity)
        .any(|g| root_in_cyclotomic(c, g, u, m))
}

/// Largest divisor t of n with a in (Q(zeta_m)^x)^t.
fn power_content(dec: &CanonicalDecomposition, n: u64, m: u64) -> u64 {
    let mut t = 1u64;
    // odd part: rational power content only
    for (q, v) in crate::arith::factor_u64(n) {
        if q == 2 {
            continue;
        }
        let jq = v.min(valuation_u64(dec.cap_d, q));
        t *= q.pow(jq);
    }
    let v2n = if n % 2 == 0 { valuation_u64(n, 2) } else { 0 };
    let mut j2 = 0;
    while j2 < v2n && two_power_in_cyclotomic(dec, j2 + 1, m) {
        j2 += 1;
    }
    t << j2
}

/// [Q(zeta_m, a^{1/n}) : Q(zeta_m)] for n | m.
pub fn degree(q: &KummerQuery) -> Result<u64, KummerError> {
    if q.a.is_unit() {
        return Err(KummerError::Ratmul(RatmulError::UnitInput));
    }
    let dec = canonical_decompose(&q.a)?;
    Ok(q.n / power_content(&dec, q.n, q.m))
}

/// Full degree [Q(zeta_m, a^{1/n}) : Q] = phi(m) * relative degree.
pub fn full_degree(q: &KummerQuery) -> Result<u64, KummerError> {
    let phi: u128 = crate::arith::euler_phi_u128(&crate::arith::factor_u128(q.m as u128));
    Ok(phi as u64 * degree(q)?)
}

/// Statistical estimate of the full degree from the density of primes that
/// split completely in Q(zeta_m, a^{1/n}): p = 1 (mod m) and a an n-th
/// power residue. Returns the reciprocal estimate with a three-standard-
/// deviation interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatReport {
    pub hits: u64,
    pub primes: u64,
    pub degree_estimate: f64,
    pub degree_low: f64,
    pub degree_high: f64,
}

impl StatReport {
    pub fn contains(&self, degree: u64) -> bool {
        self.degree_low <= degree as f64 && degree as f64 <= self.degree_high
    }
}

pub fn degree_statistical(q: &KummerQuery, bound: u64) -> Result<StatReport, KummerError> {
    Ok(degree_statistical_batch(std::slice::from_ref(q), bound)?
        .pop()
        .unwrap())
}

/// One shared prime scan serving many queries.
pub fn degree_statistical_batch(
    queries: &[KummerQuery],
    bound: u64,
) -> Result<Vec<StatReport>, KummerError> {
    struct Prep {
        m: u64,
        n: u64,
        num: u128,
        den: u128,
    }
    let preps: Vec<Prep> = queries
        .iter()
        .map(|q| {
            let v = q.a.reconstruct();
            use num_traits::{Signed, ToPrimitive};
            Prep {
                m: q.m,
                n: q.n,
                num: v.numer().abs().to_u128().expect("query numerator in range"),
                den: v.denom().to_u128().expect("query denominator in range"),
            }
        })
        .collect();
    let signs: Vec<bool> = queries.iter().map(|q| q.a.sign() == -1).collect();
    let engine = PrimeEngine::new(bound);
    let (hits, total) = engine.par_scan(
        |seg| {
            let mut hits = vec![0u64; preps.len()];
            let mut total = 0u64;
            for fp in seg {
                let p = fp.p;
                total += 1;
                for (i, pr) in preps.iter().enumerate() {
                    if (p - 1) % pr.m != 0 {
                        continue;
                    }
                    let num = (pr.num % p as u128) as u64;
                    let den = (pr.den % p as u128) as u64;
                    if num == 0 || den == 0 {
                        continue;
                    }
                    let mut a = crate::arith::mulmod(num, crate::arith::invmod_prime(den, p), p);
                    if signs[i] {
                        a = p - a;
                    }
                    if powmod(a, (p - 1) / pr.n, p) == 1 {
                        hits[i] += 1;
                    }
                }
            }
            (hits, total)
        },
        (vec![0u64; preps.len()], 1u64), // p = 2 counts into the domain
        |(mut ha, ta), (hb, tb)| {
            for (x, y) in ha.iter_mut().zip(hb) {
                *x += y;
            }
            (ha, ta + tb)
        },
    );
    let mut out = Vec::with_capacity(queries.len());
    for &h in &hits {
        if h < 30 {
            return Err(KummerError::TooFewSamples);
        }
        let total_f = total as f64;
        let p_hat = h as f64 / total_f;
        let sigma = (p_hat * (1.0 - p_hat) / total_f).sqrt();
        let low = p_hat - 3.0 * sigma;
        let high = p_hat + 3.0 * sigma;
        out.push(StatReport {
            hits: h,
            primes: total,
            degree_estimate: 1.0 / p_hat,
            degree_low: 1.0 / high,
            degree_high: if low > 0.0 { 1.0 / low } else { f64::INFINITY },
        });
    }
    Ok(out)
}
