//! Decisions about the image of the valuation maps Psi_ell in the
//! maximal-degree regime, gcd reduction of membership queries against the
//! separation bound Z, and separation data (h_min, e_ell) for rank-1
//! groups over the rationals.
//!
//! A membership query e_I for a certified-maximal family translates into
//! systems of linear (in)congruences on the coordinates (x_0, x_1, ..., x_r)
//! of an automorphism of the cyclotomic-Kummer level ell^(max e + 1): the
//! cyclotomic coordinate must satisfy x_0 = 1 mod ell^{e_i} and the Kummer
//! coordinates <A_i, x> = 0 mod ell^{e_i}, while for each i at least one of
//! the two conditions must fail at level e_i + 1. The disjunctions are
//! expanded into 2^n strict-row systems handed to the congruence solver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor_u128, gcd_u128};
use crate::consolve::{self, CongruenceSystem, Row, SolveConfig, Structured};
use crate::intmat;
use crate::ratmul::{canonical_decompose, CanonicalDecomposition, FactoredRational, RatmulError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PsiError {
    #[error("family is not certified maximal at ell = {0}")]
    NotCertified(u64),
    #[error("tuple length {0} does not match the family size {1}")]
    TupleLength(usize, usize),
    #[error("ell must be prime, got {0}")]
    NotPrime(u64),
    #[error(transparent)]
    Ratmul(#[from] RatmulError),
    #[error("solver failed: {0}")]
    Solver(String),
}

/// Which primes ell carry the maximality certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EllSupport {
    AllPrimes,
    OddPrimes,
}

/// A family W_1, ..., W_n of rank-1 groups written over r multiplicatively
/// independent base generators with certified-maximal cyclotomic-Kummer
/// degrees; rows[i] are the exponents of the generator of W_i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalFamily {
    pub base: usize,
    pub rows: Vec<Vec<i64>>,
    pub support: EllSupport,
    pub label: String,
}

impl MaximalFamily {
    /// n independent generators (identity exponent matrix).
    pub fn independent(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        MaximalFamily {
            base: n,
            rows,
            support: EllSupport::AllPrimes,
            label: format!("independent-{}", n),
        }
    }

    /// Distinct odd rational primes generate towers of maximal degree at
    /// every ell: odd parts by multiplicative independence, the 2-part
    /// because the fields Q(sqrt of products) all have odd conductor part.
    pub fn from_distinct_odd_primes(primes: &[u64]) -> Result<Self, PsiError> {
        let mut seen = std::collections::BTreeSet::new();
        for &p in primes {
            if p == 2 || !crate::arith::is_prime_u64(p) || !seen.insert(p) {
                return Err(PsiError::NotCertified(p));
            }
        }
        let mut fam = MaximalFamily::independent(primes.len());
        fam.label = format!(
            "odd-primes-{}",
            primes
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(fam)
    }

    /// The four groups <a>, <b>, <ab>, <a^2 b> over Q(i) generated by the
    /// Gaussian primes a = 2+i and b = 3+2i, whose Kummer degrees over the
    /// full cyclotomic tower are maximal; certified for odd ell only.
    pub fn gaussian_four_group() -> Self {
        MaximalFamily {
            base: 2,
            rows: vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]],
            support: EllSupport::OddPrimes,
            label: "gaussian-4-group".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rank of the subgroup generated by a subset of the family.
    pub fn rank_of_subset(&self, subset: &[usize]) -> usize {
        let rows: Vec<Vec<i64>> = subset.iter().map(|&i| self.rows[i].clone()).collect();
        intmat::rank(&intmat::to_big_rows(&rows))
    }

    fn supports(&self, ell: u64) -> bool {
        match self.support {
            EllSupport::AllPrimes => true,
            EllSupport::OddPrimes => ell % 2 == 1,
        }
    }
}

/// The audited outcome together with the generated systems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipReport {
    pub member: bool,
    pub ell: u64,
    pub tuple: Vec<u32>,
    pub systems: Vec<SystemAudit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemAudit {
    /// Bit i set = the strict condition for W_i was placed on the Kummer
    /// coordinate row rather than the cyclotomic one.
    pub form_strict_mask: u64,
    pub system: CongruenceSystem,
    pub solvable: bool,
    pub structured: Structured,
}

/// Build the congruence rows for one choice of strict conditions.
/// `strict_needed[i] = false` drops the strict condition for W_i entirely
/// (the separated-regime query planner: conditions at pairs (q, i) with
/// q*y_i not dividing x_i are automatically satisfiable).
fn build_system(
    fam: &MaximalFamily,
    e_tuple: &[u32],
    ell: u64,
    form_mask: u64,
    strict_needed: &[bool],
) -> CongruenceSystem {
    let dim = fam.base + 1;
    let mut rows: Vec<Row> = Vec::new();
    let mut x0_congruence = 0u32; // strongest plain x_0 congruence level
    for (i, &e) in e_tuple.iter().enumerate() {
        let mut form_v = vec![0i64; dim];
        form_v[1..].copy_from_slice(&fam.rows[i]);
        let strict_here = strict_needed[i];
        let form_strict = strict_here && (form_mask >> i) & 1 == 1;
        let x0_strict = strict_here && !form_strict;
        // congruences at level e (the strict row subsumes its congruence)
        if x0_strict {
            let mut v = vec![0i64; dim];
            v[0] = 1;
            rows.push(Row {
                v,
                c: 1,
                e,
                strict: true,
            });
        } else {
            x0_congruence = x0_congruence.max(e);
        }
        rows.push(Row {
            v: form_v,
            c: 0,
            e,
            strict: form_strict,
        });
    }
    if x0_congruence > 0 {
        let mut v = vec![0i64; dim];
        v[0] = 1;
        rows.push(Row {
            v,
            c: 1,
            e: x0_congruence,
            strict: false,
        });
    }
    // the automorphism must act invertibly on roots of unity
    let max_e = e_tuple.iter().copied().max().unwrap_or(0);
    if max_e == 0 {
        let mut v = vec![0i64; dim];
        v[0] = 1;
        rows.push(Row {
            v,
            c: 0,
            e: 0,
            strict: true,
        });
    }
    // drop duplicate rows (identical congruence content)
    rows.sort_by(|a, b| (&a.v, a.c, a.e, a.strict).cmp(&(&b.v, b.c, b.e, b.strict)));
    rows.dedup();
    CongruenceSystem {
        q: ell,
        dim,
        rows,
        residue_constraint: None,
    }
}

fn solve_with_fallback(
    sys: &CongruenceSystem,
    cfg: &SolveConfig,
) -> Result<(bool, Structured), PsiError> {
    let structured = consolve::solvable_structured(sys);
    let solvable = match &structured {
        Structured::Solvable => true,
        Structured::Unsolvable => false,
        Structured::NotApplicable(_) => consolve::solvable_bruteforce(sys, cfg)
            .map_err(|e| PsiError::Solver(e.to_string()))?
            .is_some(),
    };
    Ok((solvable, structured))
}

/// Is e_I attained by Psi_ell for the certified family? Decided through the
/// expanded strict-row systems.
pub fn psi_ell_membership_maximal(
    fam: &MaximalFamily,
    e_tuple: &[u32],
    ell: u64,
) -> Result<MembershipReport, PsiError> {
    psi_ell_membership_planned(fam, e_tuple, ell, None)
}

/// Same decision with the separated-regime planner: when a cap tuple x_I is
/// supplied, the strict condition for W_i is required only if
/// e_i < v_ell(x_i); other coordinates are freed by separatedness.
pub fn psi_ell_membership_planned(
    fam: &MaximalFamily,
    e_tuple: &[u32],
    ell: u64,
    cap_valuations: Option<&[u32]>,
) -> Result<MembershipReport, PsiError> {
    if !crate::arith::is_prime_u64(ell) {
        return Err(PsiError::NotPrime(ell));
    }
    if !fam.supports(ell) {
        return Err(PsiError::NotCertified(ell));
    }
    if e_tuple.len() != fam.len() {
        return Err(PsiError::TupleLength(e_tuple.len(), fam.len()));
    }
    let strict_needed: Vec<bool> = match cap_valuations {
        None => vec![true; fam.len()],
        Some(caps) => e_tuple.iter().zip(caps).map(|(&e, &cap)| e < cap).collect(),
    };
    let cfg = SolveConfig::default();
    let mut systems = Vec::new();
    let mut member = false;
    let strict_positions: Vec<usize> = (0..fam.len()).filter(|&i| strict_needed[i]).collect();
    for combo in 0..(1u64 << strict_positions.len()) {
        let mut form_mask = 0u64;
        for (bit, &pos) in strict_positions.iter().enumerate() {
            if (combo >> bit) & 1 == 1 {
                form_mask |= 1 << pos;
            }
        }
        let sys = build_system(fam, e_tuple, ell, form_mask, &strict_needed);
        let (solvable, structured) = solve_with_fallback(&sys, &cfg)?;
        member |= solvable;
        systems.push(SystemAudit {
            form_strict_mask: form_mask,
            system: sys,
            solvable,
            structured,
        });
        if member {
            break;
        }
    }
    Ok(MembershipReport {
        member,
        ell,
        tuple: e_tuple.to_vec(),
        systems,
    })
}

/// gcd reduction against the separation bound: membership of h in the image
/// of p -> Ind_p(a) is equivalent to membership of gcd(h, Z).
pub fn gcd_reduce(a: &FactoredRational, h: u128) -> Result<u128, RatmulError> {
    Ok(gcd_reduce_with(&canonical_decompose(a)?, h))
}

pub fn gcd_reduce_with(dec: &CanonicalDecomposition, h: u128) -> u128 {
    gcd_u128(h, dec.z)
}

/// Separation data for a rank-1 group over the rationals:
/// Sep = multiples of h_min, Sep_ell = exponents >= e_ell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationData {
    pub h_min: u64,
    /// Nonzero entries of ell -> e_ell.
    pub e_ell: BTreeMap<u64, u32>,
    pub z_bound: u128,
}

impl SeparationData {
    pub fn e_at(&self, ell: u64) -> u32 {
        self.e_ell.get(&ell).copied().unwrap_or(0)
    }
}

/// Closed-form separation data from the canonical decomposition.
///
/// Adelic part: for odd ell the tower collapses exactly v_ell(D) times; at
/// ell = 2 it collapses d+1 times (a = +-m^(2^d) has sqrt(m) and the
/// intermediate roots inside the full cyclotomic tower, while a 2^(d+2)-th
/// root would force the fourth root of the squarefree kernel 2^delta |T| > 1
/// into a cyclotomic field). Hence h_min = 2^(d+1) * D.
/// ell-adic part: e_2 = d + 1 when T = 1 (then sqrt(2) appears at level
/// 2^(d+3)), else d; e_ell = v_ell(D) for odd ell.
pub fn separation_data(a: &FactoredRational) -> Result<SeparationData, RatmulError> {
    let dec = canonical_decompose(a)?;
    let mut e_ell = BTreeMap::new();
    let e2 = dec.d + u32::from(dec.t == 1);
    if e2 > 0 {
        e_ell.insert(2, e2);
    }
    for (ell, v) in crate::arith::factor_u64(dec.cap_d) {
        e_ell.insert(ell, v);
    }
    let h_min = (1u64 << (dec.d + 1)) * dec.cap_d;
    Ok(SeparationData {
        h_min,
        e_ell,
        z_bound: dec.z,
    })
}

/// Evidence gathered by a scan: per divisor class of Z, whether the image
/// admits it and how often it was observed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationEvidence {
    pub bound: u64,
    /// (divisor y of Z, admitted by the closed form, observed count,
    /// first witness prime if any)
    pub classes: Vec<(u128, bool, u64, Option<u64>)>,
    /// Observed indices contradicting the closed form (soundness) or the
    /// gcd-reduction identity; must be empty.
    pub violations: Vec<(u64, u64)>,
}

/// Closed-form separation data plus empirical confirmation: observed index
/// values h are bucketed by gcd(h, Z), and each observation is checked for
/// consistency with the exceptional-set image and the gcd-reduction rule.
pub fn estimate_separation(
    a: &FactoredRational,
    bound: u64,
) -> Result<(SeparationData, SeparationEvidence), PsiError> {
    let data = separation_data(a)?;
    let dec = canonical_decompose(a)?;
    let sets = crate::rank1image::exceptional_sets_from(a, &dec);
    let group = crate::ratmul::SubgroupLattice::new(vec![a.clone()]);
    let per_class = crate::resindex::scan_fold(
        std::slice::from_ref(&group),
        bound,
        None,
        BTreeMap::<u128, (u64, u64)>::new,
        |acc, rec| {
            if rec.excluded.is_none() {
                let h = rec.indices[0];
                let class = gcd_u128(h as u128, dec.z);
                let entry = acc.entry(class).or_insert((0, rec.p));
                entry.0 += 1;
                entry.1 = entry.1.min(rec.p);
            }
        },
        |mut a, b| {
            for (k, (c, p)) in b {
                let entry = a.entry(k).or_insert((0, p));
                entry.0 += c;
                entry.1 = entry.1.min(p);
            }
            a
        },
    )
    .map_err(|e| PsiError::Solver(e.to_string()))?;
    let mut violations = Vec::new();
    // soundness of the closed form on every observed class
    for (&class, &(_, first_p)) in &per_class {
        if !crate::rank1image::in_image(&sets, class) {
            violations.push((first_p, class as u64));
        }
    }
    let z_divisors = crate::arith::divisors_u128(&factor_u128(dec.z));
    let classes: Vec<(u128, bool, u64, Option<u64>)> = z_divisors
        .into_iter()
        .map(|y| {
            let admitted = crate::rank1image::in_image(&sets, y);
            let (count, first) = per_class
                .get(&y)
                .map(|&(c, p)| (c, Some(p)))
                .unwrap_or((0, None));
            (y, admitted, count, first)
        })
        .collect();
    Ok((
        data,
        SeparationEvidence {
            bound,
            classes,
            violations,
        },
    ))
}
