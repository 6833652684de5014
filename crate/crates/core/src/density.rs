//! Truncated density products for the preimages of the index map, empirical
//! densities from prime scans, and the sum rule over disjoint index values.
//!
//! For a rank-1 group <a> and target index h the truncated density at cut t
//! is the inclusion-exclusion sum over subsets S of the primes q <= t of
//! (-1)^|S| / [Q(zeta_{Q_S h}, a^{1/Q_S h}) : Q], evaluated with exact
//! cyclotomic-Kummer degrees. Primes outside the entanglement support
//! (q not dividing 6 |T| D h) contribute the clean factor 1 - 1/(q(q-1)),
//! so the subset sum runs only over the finitely many entangled primes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kummerdeg::{full_degree, KummerError, KummerQuery};
use crate::ratmul::{canonical_decompose, FactoredRational, RatmulError, SubgroupLattice};
use crate::resindex::{scan_fold, CongruenceFilter, ScanError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DensityError {
    #[error(transparent)]
    Ratmul(#[from] RatmulError),
    #[error(transparent)]
    Kummer(#[from] KummerError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error("family is not certified maximal")]
    NotCertified,
}

/// Exact truncated density of {p : Ind_p(a) = h} at cut t.
pub fn truncated_density(
    a: &FactoredRational,
    h: u64,
    t: u64,
) -> Result<BigRational, DensityError> {
    let dec = canonical_decompose(a)?;
    let primes = crate::primes::small_primes(t);
    // entangled primes: 2 and 3 always (square and cube collapses), the
    // primes of T and D, and the primes of h
    let entangled: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&q| q <= 3 || dec.abs_t() % q as u128 == 0 || dec.cap_d % q == 0 || h % q == 0)
        .collect();
    let clean: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|q| !entangled.contains(q))
        .collect();

    // subset sum over entangled primes with exact degrees
    let mut entangled_part = BigRational::zero();
    for mask in 0u32..(1 << entangled.len()) {
        let mut k = h;
        let mut sign_negative = false;
        for (i, &q) in entangled.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                k *= q;
                sign_negative = !sign_negative;
            }
        }
        let deg = full_degree(&KummerQuery::new(a.clone(), k, k)?)?;
        let term = BigRational::new(BigInt::one(), BigInt::from(deg));
        if sign_negative {
            entangled_part -= term;
        } else {
            entangled_part += term;
        }
    }

    let mut density = entangled_part;
    for q in clean {
        let qq = BigInt::from(q) * BigInt::from(q - 1);
        density *= BigRational::one() - BigRational::new(BigInt::one(), qq);
    }
    Ok(density)
}

/// Truncated density of the all-ones tuple for a certified-maximal family
/// described by its subset rank function: product over q <= t of
/// 1 + sum_{nonempty S} (-1)^|S| / ((q-1) q^{rank S}).
pub fn truncated_density_family(fam: &crate::psidecide::MaximalFamily, t: u64) -> BigRational {
    let n = fam.len();
    let mut density = BigRational::one();
    for q in crate::primes::small_primes(t) {
        let mut factor = BigRational::one();
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&i| (mask >> i) & 1 == 1).collect();
            let rank = fam.rank_of_subset(&subset);
            let den = BigInt::from(q - 1) * BigInt::from(q).pow(rank as u32);
            let term = BigRational::new(BigInt::one(), den);
            if subset.len() % 2 == 1 {
                factor -= term;
            } else {
                factor += term;
            }
        }
        density *= factor;
    }
    density
}

/// Which index tuples count as hits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// Exact tuple match.
    Tuple(Vec<u64>),
    /// Any tuple in the set.
    Set(std::collections::BTreeSet<Vec<u64>>),
    /// First coordinate at most the cap (rank-1 tail studies).
    UpTo(u64),
    /// Any tuple.
    All,
}

impl Target {
    fn matches(&self, indices: &[u64]) -> bool {
        match self {
            Target::Tuple(t) => indices == t.as_slice(),
            Target::Set(set) => set.contains(indices),
            Target::UpTo(cap) => indices[0] <= *cap,
            Target::All => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub matched: u64,
    /// Non-excluded primes passing the filter.
    pub domain: u64,
    pub excluded: u64,
    pub ratio: f64,
}

/// Empirical density of {p <= bound : Psi(p) in target} among the primes of
/// the index map's domain (non-excluded, passing the filter); the full
/// target then has density exactly 1.
pub fn empirical_density(
    groups: &[SubgroupLattice],
    target: &Target,
    bound: u64,
    filter: Option<CongruenceFilter>,
) -> Result<EmpiricalDensity, DensityError> {
    let (matched, domain, excluded) = scan_fold(
        groups,
        bound,
        filter,
        || (0u64, 0u64, 0u64),
        |acc, rec| {
            if rec.excluded.is_some() {
                acc.2 += 1;
            } else {
                acc.1 += 1;
                if target.matches(&rec.indices) {
                    acc.0 += 1;
                }
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
    )?;
    Ok(EmpiricalDensity {
        matched,
        domain,
        excluded,
        ratio: if domain == 0 {
            0.0
        } else {
            matched as f64 / domain as f64
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub h_cap: u64,
    pub bound: u64,
    /// Count of p with Ind_p(a) = h for each h <= cap.
    pub per_value: Vec<(u64, u64)>,
    pub total_primes: u64,
    /// Sum over h <= cap of the per-value counts.
    pub sum_matched: u64,
    /// Count of p with Ind_p(a) <= cap from the same scan.
    pub combined_matched: u64,
    pub sum_ratio: f64,
}

/// The counts of disjoint values partition the combined count exactly, and
/// their ratio sum approaches 1 as the cap grows.
pub fn sum_rule_check(
    a: &FactoredRational,
    h_cap: u64,
    bound: u64,
) -> Result<SumRuleReport, DensityError> {
    let group = SubgroupLattice::new(vec![a.clone()]);
    let (counts, total) = scan_fold(
        std::slice::from_ref(&group),
        bound,
        None,
        || (vec![0u64; h_cap as usize + 1], 0u64),
        |acc, rec| {
            if rec.excluded.is_none() {
                acc.1 += 1;
                let h = rec.indices[0];
                if h <= h_cap {
                    acc.0[h as usize] += 1;
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                *x += y;
            }
            (a.0, a.1 + b.1)
        },
    )?;
    let per_value: Vec<(u64, u64)> = (1..=h_cap).map(|h| (h, counts[h as usize])).collect();
    let sum_matched: u64 = per_value.iter().map(|&(_, c)| c).sum();
    let combined = empirical_density(
        std::slice::from_ref(&group),
        &Target::UpTo(h_cap),
        bound,
        None,
    )?;
    Ok(SumRuleReport {
        h_cap,
        bound,
        per_value,
        total_primes: total,
        sum_matched,
        combined_matched: combined.matched,
        sum_ratio: sum_matched as f64 / total as f64,
    })
}

/// Decimal rendering of an exact rational for reports.
pub fn to_decimal(x: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x * BigRational::from(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let abs = scaled.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    format!(
        "{}{}.{:0width$}",
        if negative { "-" } else { "" },
        int_part,
        frac_part,
        width = digits as usize
    )
}

pub fn to_f64(x: &BigRational) -> f64 {
    // shift both parts into f64 range before dividing
    let bits = x.numer().bits().max(x.denom().bits());
    let shift = bits.saturating_sub(64);
    let num = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    num / den
}

/// CLI report shape.
#[derive(Debug, Serialize, Deserialize)]
pub struct DensityReport {
    pub a: String,
    pub h: u64,
    pub t: u64,
    pub truncated_exact: String,
    pub truncated_decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalDensity>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank1image;
    use crate::ratmul::factor_rational;

    fn fr(n: i128) -> FactoredRational {
        factor_rational(n, 1).unwrap()
    }

    /// Independent oracle for the clean product: multiply the literal
    /// factors 1 - 1/(q(q-1)) without any of the degree machinery.
    fn naive_artin_truncation(t: u64) -> BigRational {
        let mut acc = BigRational::one();
        for q in crate::primes::small_primes(t) {
            let den = BigInt::from(q) * BigInt::from(q - 1);
            acc *= BigRational::one() - BigRational::new(BigInt::one(), den);
        }
        acc
    }

    #[test]
    fn artin_truncation_matches_naive_product() {
        // for a = 2, h = 1 every inclusion-exclusion degree is maximal, so
        // the exact route must reproduce the naive product
        let exact = truncated_density(&fr(2), 1, 50).unwrap();
        assert_eq!(exact, naive_artin_truncation(50));
        let dec = to_f64(&exact);
        assert!((dec - 0.375424341).abs() < 1e-8, "got {}", dec);
    }

    #[test]
    fn family_formula_matches_rank1_for_independent_generator() {
        let fam = crate::psidecide::MaximalFamily::independent(1);
        assert_eq!(
            truncated_density_family(&fam, 50),
            naive_artin_truncation(50)
        );
    }

    #[test]
    fn empty_truncation_is_one() {
        assert_eq!(truncated_density(&fr(2), 1, 1).unwrap(), BigRational::one());
    }

    #[test]
    fn square_kills_odd_targets() {
        let d = truncated_density(&fr(4), 1, 20).unwrap();
        assert!(d.is_zero());
        let d3 = truncated_density(&fr(4), 3, 20).unwrap();
        assert!(d3.is_zero());
        let d2 = truncated_density(&fr(4), 2, 20).unwrap();
        assert!(d2.is_positive());
    }

    #[test]
    fn zero_exactly_when_outside_image() {
        for a in [2i128, 4, -100, -3, -27, 5, 8] {
            let af = fr(a);
            let sets = rank1image::exceptional_sets(&af).unwrap();
            for h in 1..=24u64 {
                let d = truncated_density(&af, h, 20).unwrap();
                assert_eq!(
                    d.is_zero(),
                    !rank1image::in_image(&sets, h as u128),
                    "a = {} h = {}",
                    a,
                    h
                );
            }
        }
    }

    #[test]
    fn truncation_is_monotone_nonincreasing() {
        let mut last: Option<BigRational> = None;
        for t in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            let d = truncated_density(&fr(2), 1, t).unwrap();
            if let Some(prev) = last {
                assert!(d <= prev, "t = {}", t);
            }
            last = Some(d);
        }
    }

    #[test]
    fn truncation_stays_positive_for_two() {
        // the infinite product is bounded below; check well past the knee
        let d = truncated_density(&fr(2), 1, 1000).unwrap();
        let v = to_f64(&d);
        assert!(v > 0.37, "got {}", v);
        assert!(v < 0.376);
    }

    #[test]
    fn empirical_small_scan() {
        let g = [SubgroupLattice::new(vec![fr(2)])];
        // direct count: primes <= 100 (25 of them), p = 2 excluded;
        // Ind_p(2) = 1 exactly when 2 generates mod p
        let d = empirical_density(&g, &Target::Tuple(vec![1]), 100, None).unwrap();
        assert_eq!(d.domain, 24);
        assert_eq!(d.excluded, 1);
        // 2 is a primitive root mod 3, 5, 11, 13, 19, 29, 37, 53, 59, 61, 67, 83
        assert_eq!(d.matched, 12);
        assert!((d.ratio - 0.5).abs() < 1e-12);
        // the full target has density exactly 1 over the domain
        let all = empirical_density(&g, &Target::All, 100, None).unwrap();
        assert_eq!(all.matched, 24);
        assert_eq!(all.ratio, 1.0);
    }

    #[test]
    fn empirical_zero_for_excluded_values() {
        let g = [SubgroupLattice::new(vec![fr(4)])];
        let d = empirical_density(&g, &Target::Tuple(vec![3]), 20_000, None).unwrap();
        assert_eq!(d.matched, 0);
        // set targets add up over disjoint members
        let set: std::collections::BTreeSet<Vec<u64>> = [vec![2u64], vec![4]].into_iter().collect();
        let ds = empirical_density(&g, &Target::Set(set), 20_000, None).unwrap();
        let d2 = empirical_density(&g, &Target::Tuple(vec![2]), 20_000, None).unwrap();
        let d4 = empirical_density(&g, &Target::Tuple(vec![4]), 20_000, None).unwrap();
        assert_eq!(ds.matched, d2.matched + d4.matched);
    }

    #[test]
    fn sum_rule_exact_additivity() {
        let report = sum_rule_check(&fr(2), 10, 20_000).unwrap();
        assert_eq!(report.sum_matched, report.combined_matched);
        let single = sum_rule_check(&fr(2), 1, 20_000).unwrap();
        assert_eq!(single.per_value.len(), 1);
        assert_eq!(single.sum_matched, single.per_value[0].1);
        assert!(report.sum_ratio > 0.5 && report.sum_ratio <= 1.0);
    }

    #[test]
    fn decimal_rendering() {
        let x = BigRational::new(BigInt::from(5), BigInt::from(12));
        assert_eq!(to_decimal(&x, 6), "0.416667");
        let neg = BigRational::new(BigInt::from(-1), BigInt::from(4));
        assert_eq!(to_decimal(&neg, 3), "-0.250");
    }
}
