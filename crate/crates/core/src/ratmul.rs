//! Exact arithmetic on nonzero rationals represented as sign plus sparse
//! prime-exponent vectors, finitely generated multiplicative subgroups of
//! the rationals, and the canonical two-power decomposition
//! a = (-1)^eps * (b^2 * 2^delta * T)^(2^d) with its derived data D, E, Z.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor_u128, gcd_u64, lcm_u128, v2_u64};
use crate::intmat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatmulError {
    #[error("zero is not a unit of the multiplicative group")]
    ZeroInput,
    #[error("input exceeds the {0}-bit factorization bound")]
    BitBound(u32),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("canonical decomposition requires a outside {{0, 1, -1}}")]
    UnitInput,
    #[error("derived quantity overflows 128 bits")]
    Overflow,
    #[error("group of rank zero where positive rank is required")]
    RankZero,
}

/// Default cap on numerator/denominator size accepted by factorization.
pub const DEFAULT_BIT_BOUND: u32 = 127;

/// A nonzero rational as sign and sparse prime -> exponent map; the empty
/// map is +-1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredRational {
    sign: i8,
    exponents: BTreeMap<u128, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        FactoredRational {
            sign: 1,
            exponents: BTreeMap::new(),
        }
    }

    pub fn minus_one() -> Self {
        FactoredRational {
            sign: -1,
            exponents: BTreeMap::new(),
        }
    }

    pub fn from_parts(sign: i8, exponents: BTreeMap<u128, i64>) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        debug_assert!(exponents.values().all(|&e| e != 0));
        FactoredRational { sign, exponents }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn exponents(&self) -> &BTreeMap<u128, i64> {
        &self.exponents
    }

    pub fn is_one(&self) -> bool {
        self.sign == 1 && self.exponents.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Exact value as a big rational.
    pub fn reconstruct(&self) -> BigRational {
        let mut num = BigInt::from(self.sign);
        let mut den = BigInt::one();
        for (&p, &e) in &self.exponents {
            let pb = BigInt::from(p);
            if e > 0 {
                num *= pb.pow(e as u32);
            } else {
                den *= pb.pow((-e) as u32);
            }
        }
        BigRational::new(num, den)
    }

    /// gcd of the absolute exponents; 0 for +-1.
    pub fn exponent_gcd(&self) -> u64 {
        self.exponents
            .values()
            .fold(0u64, |g, &e| gcd_u64(g, e.unsigned_abs()))
    }

    /// True when the value is a cube of a rational (sign is never an
    /// obstruction for odd powers).
    pub fn is_cube(&self) -> bool {
        self.exponents.values().all(|&e| e % 3 == 0)
    }

    pub fn pow(&self, k: u32) -> FactoredRational {
        if k == 0 {
            return FactoredRational::one();
        }
        let sign = if self.sign == -1 && k % 2 == 1 { -1 } else { 1 };
        let exponents = self
            .exponents
            .iter()
            .map(|(&p, &e)| (p, e * k as i64))
            .collect();
        FactoredRational { sign, exponents }
    }

    pub fn mul(&self, other: &FactoredRational) -> FactoredRational {
        let mut exps = self.exponents.clone();
        for (&p, &e) in &other.exponents {
            let entry = exps.entry(p).or_insert(0);
            *entry += e;
            if *entry == 0 {
                exps.remove(&p);
            }
        }
        FactoredRational {
            sign: self.sign * other.sign,
            exponents: exps,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = u128> + '_ {
        self.exponents.keys().copied()
    }
}

impl fmt::Display for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.reconstruct();
        if v.denom().is_one() {
            write!(f, "{}", v.numer())
        } else {
            write!(f, "{}/{}", v.numer(), v.denom())
        }
    }
}

/// Factor a nonzero rational given as numerator and denominator.
pub fn factor_rational(num: i128, den: i128) -> Result<FactoredRational, RatmulError> {
    if num == 0 {
        return Err(RatmulError::ZeroInput);
    }
    if den == 0 {
        return Err(RatmulError::Parse("zero denominator".into()));
    }
    let sign = if (num < 0) ^ (den < 0) { -1i8 } else { 1 };
    let (n, d) = (num.unsigned_abs(), den.unsigned_abs());
    let mut exponents: BTreeMap<u128, i64> = BTreeMap::new();
    for (p, v) in factor_u128(n) {
        *exponents.entry(p).or_insert(0) += v as i64;
    }
    for (p, v) in factor_u128(d) {
        let entry = exponents.entry(p).or_insert(0);
        *entry -= v as i64;
        if *entry == 0 {
            exponents.remove(&p);
        }
    }
    Ok(FactoredRational { sign, exponents })
}

/// Parse "n" or "n/d" with the default bit bound.
pub fn parse_rational(s: &str) -> Result<FactoredRational, RatmulError> {
    let s = s.trim();
    let (ns, ds) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: i128 = ns.parse().map_err(|_| parse_failure(ns))?;
    let den: i128 = ds.parse().map_err(|_| parse_failure(ds))?;
    factor_rational(num, den)
}

// integers that overflow i128 exceed the factorization bound rather than
// being malformed
fn parse_failure(s: &str) -> RatmulError {
    let digits = s.trim_start_matches('-');
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        RatmulError::BitBound(DEFAULT_BIT_BOUND)
    } else {
        RatmulError::Parse(s.to_string())
    }
}

/// Finitely generated subgroup of the nonzero rationals: generator list
/// plus a flag recording whether -1 is adjoined as torsion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupLattice {
    generators: Vec<FactoredRational>,
    torsion_flag: bool,
}

impl SubgroupLattice {
    pub fn new(generators: Vec<FactoredRational>) -> Self {
        SubgroupLattice {
            generators,
            torsion_flag: false,
        }
    }

    pub fn with_torsion(generators: Vec<FactoredRational>) -> Self {
        SubgroupLattice {
            generators,
            torsion_flag: true,
        }
    }

    pub fn generators(&self) -> &[FactoredRational] {
        &self.generators
    }

    pub fn torsion_flag(&self) -> bool {
        self.torsion_flag
    }

    /// Primes occurring in any generator, sorted.
    pub fn prime_support(&self) -> Vec<u128> {
        let mut set = BTreeSet::new();
        for g in &self.generators {
            set.extend(g.support());
        }
        set.into_iter().collect()
    }

    /// Rows = generators, columns = `support` order.
    pub fn exponent_matrix(&self, support: &[u128]) -> Vec<Vec<BigInt>> {
        self.generators
            .iter()
            .map(|g| {
                support
                    .iter()
                    .map(|p| BigInt::from(g.exponents().get(p).copied().unwrap_or(0)))
                    .collect()
            })
            .collect()
    }

    /// Rank of the group modulo torsion.
    pub fn rank(&self) -> usize {
        let support = self.prime_support();
        intmat::rank(&self.exponent_matrix(&support))
    }
}

/// Join of several groups (generators concatenated, torsion flags or-ed).
pub fn join(groups: &[&SubgroupLattice]) -> SubgroupLattice {
    let mut gens = Vec::new();
    let mut torsion = false;
    for g in groups {
        gens.extend(g.generators.iter().cloned());
        torsion |= g.torsion_flag;
    }
    SubgroupLattice {
        generators: gens,
        torsion_flag: torsion,
    }
}

/// Outcome of a minimal-power membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerMembership {
    Finite(u64),
    Infinite,
}

impl PowerMembership {
    pub fn as_finite(self) -> Option<u64> {
        match self {
            PowerMembership::Finite(z) => Some(z),
            PowerMembership::Infinite => None,
        }
    }
}

/// Smallest positive z with w^z in the target group, or Infinite.
pub fn power_membership(target: &SubgroupLattice, w: &FactoredRational) -> PowerMembership {
    let mut support: BTreeSet<u128> = target.prime_support().into_iter().collect();
    support.extend(w.support());
    let support: Vec<u128> = support.into_iter().collect();
    let a = target.exponent_matrix(&support);
    let v: Vec<BigInt> = support
        .iter()
        .map(|p| BigInt::from(w.exponents().get(p).copied().unwrap_or(0)))
        .collect();

    // kernel rows of the transform give the sign relations attainable with
    // exponent vector zero
    let (h, u, rank) = intmat::hermite_with_transform(&a);
    let mut kernel_signs_negative = false;
    for krow in &u[rank..] {
        let mut s = 1i8;
        for (i, g) in target.generators.iter().enumerate() {
            if g.sign() == -1 && num_integer::Integer::is_odd(&krow[i]) {
                s = -s;
            }
        }
        if s == -1 {
            kernel_signs_negative = true;
        }
    }
    let sign_reachable = |want: i8, particular: i8| -> bool {
        want == particular || (kernel_signs_negative && want == -particular)
    };

    if v.iter().all(|x| x.is_zero()) {
        // w = +-1
        if w.sign() == 1 {
            return PowerMembership::Finite(1);
        }
        if target.torsion_flag() || kernel_signs_negative {
            return PowerMembership::Finite(1);
        }
        return PowerMembership::Finite(2);
    }

    let basis: Vec<Vec<BigInt>> = h[..rank].to_vec();
    let Some(coords) = intmat::solve_rational(&basis, &v) else {
        return PowerMembership::Infinite;
    };
    // minimal z clearing all denominators of the coordinates over the
    // Hermite basis of the row lattice
    let mut z = BigInt::one();
    for c in &coords {
        let den = c.denom().clone();
        let g = num_integer::Integer::gcd(&z, &den);
        z = z / g * den;
    }
    let z_u64: u64 = {
        use num_traits::ToPrimitive;
        match z.to_u64() {
            Some(x) => x,
            None => return PowerMembership::Infinite,
        }
    };
    if target.torsion_flag() {
        return PowerMembership::Finite(z_u64);
    }
    // sign of a particular representation of w^z over the original generators
    let mut particular = 1i8;
    for (i, g) in target.generators.iter().enumerate() {
        if g.sign() != -1 {
            continue;
        }
        // coefficient of generator i: sum over basis rows of coord_j * U[j][i]
        let mut coeff = BigRational::zero();
        for (j, c) in coords.iter().enumerate() {
            coeff += c * BigRational::from(u[j][i].clone());
        }
        let scaled = coeff * BigRational::from(z.clone());
        debug_assert!(scaled.denom().is_one());
        if num_integer::Integer::is_odd(&scaled.to_integer()) {
            particular = -particular;
        }
    }
    let want = if w.sign() == -1 && z_u64 % 2 == 1 {
        -1
    } else {
        1
    };
    if sign_reachable(want, particular) {
        PowerMembership::Finite(z_u64)
    } else {
        // doubling kills all signs
        PowerMembership::Finite(z_u64 * 2)
    }
}

/// Separatedness of a family: removing any one group must strictly drop the
/// joint rank. Errors when some group has rank zero.
pub fn is_separated(groups: &[SubgroupLattice]) -> Result<bool, RatmulError> {
    for g in groups {
        if g.rank() == 0 {
            return Err(RatmulError::RankZero);
        }
    }
    let refs: Vec<&SubgroupLattice> = groups.iter().collect();
    let full = join(&refs).rank();
    for i in 0..groups.len() {
        let others: Vec<&SubgroupLattice> = groups
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g)
            .collect();
        if join(&others).rank() >= full {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Matrix-level variant used for groups over other base fields: rows are
/// exponent vectors of one generator per group.
pub fn is_separated_rows(rows: &[Vec<i64>]) -> Result<bool, RatmulError> {
    let big = intmat::to_big_rows(rows);
    for r in &big {
        if r.iter().all(|x| x.is_zero()) {
            return Err(RatmulError::RankZero);
        }
    }
    let full = intmat::rank(&big);
    for i in 0..big.len() {
        let others: Vec<Vec<BigInt>> = big
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        if intmat::rank(&others) >= full {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The unique representation a = (-1)^eps * (b^2 * 2^delta * T)^(2^d)
/// with T a signed squarefree integer built from +p for p = 1 mod 4 and
/// -q for q = 3 mod 4, plus the derived quantities D, E, Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalDecomposition {
    pub epsilon: u8,
    pub b: FactoredRational,
    pub delta: u8,
    pub t: i128,
    pub d: u32,
    /// Largest odd D with a in (Q^x)^D.
    pub cap_d: u64,
    /// max(3*delta, d+2).
    pub e: u32,
    /// 2^E * lcm(|T|, D), a separation bound for <a>.
    pub z: u128,
}

impl CanonicalDecomposition {
    pub fn abs_t(&self) -> u128 {
        self.t.unsigned_abs()
    }

    /// Exact value of (-1)^eps (b^2 2^delta T)^(2^d).
    pub fn reconstruct(&self) -> BigRational {
        let bb = self.b.reconstruct();
        let base = bb.clone()
            * bb
            * BigRational::from(BigInt::from(2).pow(self.delta as u32))
            * BigRational::from(BigInt::from(self.t));
        let mut acc = base;
        for _ in 0..self.d {
            acc = acc.clone() * acc;
        }
        if self.epsilon == 1 {
            -acc
        } else {
            acc
        }
    }
}

/// Decompose a rational outside {0, 1, -1}.
pub fn canonical_decompose(a: &FactoredRational) -> Result<CanonicalDecomposition, RatmulError> {
    if a.is_unit() {
        return Err(RatmulError::UnitInput);
    }
    let g = a.exponent_gcd();
    debug_assert!(g >= 1);
    let d = v2_u64(g);
    let cap_d = g >> d;

    // m = |a|^(1/2^d), componentwise exact
    let m_exponents: BTreeMap<u128, i64> =
        a.exponents().iter().map(|(&p, &e)| (p, e >> d)).collect();

    let mut delta = 0u8;
    let mut t: i128 = 1;
    let mut b_exponents: BTreeMap<u128, i64> = BTreeMap::new();
    for (&p, &e) in &m_exponents {
        if p == 2 {
            delta = (e.rem_euclid(2)) as u8;
            let rest = e - delta as i64;
            debug_assert!(rest % 2 == 0);
            if rest != 0 {
                b_exponents.insert(2, rest / 2);
            }
        } else {
            let odd = e.rem_euclid(2) == 1;
            if odd {
                let pi = i128::try_from(p).map_err(|_| RatmulError::Overflow)?;
                let signed = if p % 4 == 1 { pi } else { -pi };
                t = t.checked_mul(signed).ok_or(RatmulError::Overflow)?;
            }
            let rest = e - if odd { 1 } else { 0 };
            if rest != 0 {
                b_exponents.insert(p, rest / 2);
            }
        }
    }
    let b = FactoredRational::from_parts(1, b_exponents);

    // at least one of delta = 1 and T != 1 must hold, else d was not maximal
    debug_assert!(delta == 1 || t != 1);

    let t_sign: i8 = if t < 0 { -1 } else { 1 };
    let epsilon = if d >= 1 {
        u8::from(a.sign() == -1)
    } else {
        u8::from(a.sign() != t_sign)
    };

    let e = std::cmp::max(3 * delta as u32, d + 2);
    let lcm_td = lcm_u128(t.unsigned_abs(), cap_d as u128);
    let z = (1u128.checked_shl(e).ok_or(RatmulError::Overflow)?)
        .checked_mul(lcm_td)
        .ok_or(RatmulError::Overflow)?;

    Ok(CanonicalDecomposition {
        epsilon,
        b,
        delta,
        t,
        d,
        cap_d,
        e,
        z,
    })
}

/// Serialization shape used by the CLI.
#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub epsilon: u8,
    pub b_num: String,
    pub b_den: String,
    pub delta: u8,
    #[serde(rename = "T")]
    pub t: i128,
    pub d: u32,
    #[serde(rename = "D")]
    pub cap_d: u64,
    #[serde(rename = "E")]
    pub e: u32,
    #[serde(rename = "Z")]
    pub z: u128,
}

impl From<&CanonicalDecomposition> for DecompositionJson {
    fn from(dec: &CanonicalDecomposition) -> Self {
        let b = dec.b.reconstruct();
        DecompositionJson {
            epsilon: dec.epsilon,
            b_num: b.numer().to_string(),
            b_den: b.denom().to_string(),
            delta: dec.delta,
            t: dec.t,
            d: dec.d,
            cap_d: dec.cap_d,
            e: dec.e,
            z: dec.z,
        }
    }
}
