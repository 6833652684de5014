//! Multiplicative orders and index tuples over rational primes. For a
//! family W_1, ..., W_n and a prime p outside the excluded set, the record
//! carries Ind_p(W_i) = (p-1) / ord(W_i mod p); excluded primes (p = 2, or
//! p dividing a numerator or denominator of some generator) are reported
//! with a reason instead of being dropped.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd_u64, lcm_u64, powmod};
use crate::primes::{FactoredPrime, PrimeEngine};
use crate::ratmul::SubgroupLattice;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    #[error("filter modulus must be >= 1 and residue coprime to it")]
    InvalidFilter,
    #[error("cannot parse filter {0:?}, expected \"c mod f\"")]
    FilterParse(String),
    #[error("scan requires at least one group")]
    EmptyFamily,
}

/// Congruence restriction p = residue (mod modulus) on scanned primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceFilter {
    pub residue: u64,
    pub modulus: u64,
}

impl CongruenceFilter {
    pub fn new(residue: u64, modulus: u64) -> Result<Self, ScanError> {
        if modulus == 0 || gcd_u64(residue, modulus) != 1 {
            return Err(ScanError::InvalidFilter);
        }
        Ok(CongruenceFilter {
            residue: residue % modulus,
            modulus,
        })
    }

    /// Parse "c mod f".
    pub fn parse(s: &str) -> Result<Self, ScanError> {
        let parts: Vec<&str> = s.split(" mod ").collect();
        if parts.len() != 2 {
            return Err(ScanError::FilterParse(s.to_string()));
        }
        let c: u64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| ScanError::FilterParse(s.into()))?;
        let f: u64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| ScanError::FilterParse(s.into()))?;
        CongruenceFilter::new(c, f)
    }

    pub fn accepts(&self, p: u64) -> bool {
        p % self.modulus == self.residue % self.modulus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exclusion {
    /// p divides the torsion order (p = 2 over the rationals).
    DividesTau,
    /// p divides a numerator or denominator of some generator.
    DividesGenerator,
}

impl Exclusion {
    pub fn label(self) -> &'static str {
        match self {
            Exclusion::DividesTau => "tau",
            Exclusion::DividesGenerator => "generator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub p: u64,
    /// Ind_p(W_i) for each group; empty when excluded.
    pub indices: Vec<u64>,
    pub excluded: Option<Exclusion>,
}

/// Exact order of g modulo p given the factorization of p - 1: start from
/// p - 1 and strip prime factors while the power stays 1.
pub fn multiplicative_order(g: u64, p: u64, pm1_factors: &[(u64, u32)]) -> u64 {
    assert!(g % p != 0, "g must be a unit modulo p");
    let mut order = p - 1;
    for &(q, _) in pm1_factors {
        while order % q == 0 && powmod(g, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

/// Generators preprocessed for fast reduction modulo scanned primes.
#[derive(Debug, Clone)]
pub struct PreparedFamily {
    /// Per group: list of generators as (prime, exponent) with sign dropped
    /// (sign is torsion, invisible to the index once -1 has order dividing 2).
    groups: Vec<Vec<Vec<(u64, i64)>>>,
    signs: Vec<Vec<bool>>,
    /// Scan-range primes dividing some generator.
    excluded_primes: Vec<u64>,
    pub n: usize,
}

pub fn prepare_family(groups: &[SubgroupLattice], bound: u64) -> Result<PreparedFamily, ScanError> {
    if groups.is_empty() {
        return Err(ScanError::EmptyFamily);
    }
    let mut excluded = Vec::new();
    let mut prepared = Vec::new();
    let mut signs = Vec::new();
    for g in groups {
        for p in g.prime_support() {
            if p <= bound as u128 {
                excluded.push(p as u64);
            }
        }
        prepared.push(
            g.generators()
                .iter()
                .map(|gen| {
                    gen.exponents()
                        .iter()
                        .filter(|(&p, _)| p <= u64::MAX as u128)
                        .map(|(&p, &e)| (p as u64, e))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        );
        signs.push(g.generators().iter().map(|gen| gen.sign() == -1).collect());
    }
    excluded.sort_unstable();
    excluded.dedup();
    Ok(PreparedFamily {
        groups: prepared,
        signs,
        excluded_primes: excluded,
        n: groups.len(),
    })
}

impl PreparedFamily {
    fn is_excluded(&self, p: u64) -> Option<Exclusion> {
        if p == 2 {
            return Some(Exclusion::DividesTau);
        }
        if self.excluded_primes.binary_search(&p).is_ok() {
            return Some(Exclusion::DividesGenerator);
        }
        None
    }

    /// Reduce generator modulo p; p must not be excluded.
    fn reduce(&self, gi: usize, gen: usize, p: u64) -> u64 {
        let mut acc = if self.signs[gi][gen] { p - 1 } else { 1 };
        for &(q, e) in &self.groups[gi][gen] {
            let em = e.rem_euclid(p as i64 - 1) as u64;
            let val = powmod(q % p, em, p);
            acc = crate::arith::mulmod(acc, val, p);
        }
        acc
    }

    /// Index tuple at p with the factorization of p - 1 supplied.
    pub fn index_record(&self, fp: &FactoredPrime) -> IndexRecord {
        let p = fp.p;
        if let Some(reason) = self.is_excluded(p) {
            return IndexRecord {
                p,
                indices: Vec::new(),
                excluded: Some(reason),
            };
        }
        let mut indices = Vec::with_capacity(self.n);
        for gi in 0..self.n {
            // a subgroup of a cyclic group is cyclic of order lcm of the
            // generator orders
            let mut ord = 1u64;
            for gen in 0..self.groups[gi].len() {
                let r = self.reduce(gi, gen, p);
                ord = lcm_u64(ord, multiplicative_order(r, p, &fp.pm1));
            }
            indices.push((p - 1) / ord);
        }
        IndexRecord {
            p,
            indices,
            excluded: None,
        }
    }
}

/// Single-prime convenience used by fixtures and the CLI.
pub fn index_tuple(groups: &[SubgroupLattice], p: u64) -> Result<IndexRecord, ScanError> {
    let fam = prepare_family(groups, p)?;
    if p == 2 {
        return Ok(IndexRecord {
            p,
            indices: vec![],
            excluded: Some(Exclusion::DividesTau),
        });
    }
    let fp = FactoredPrime {
        p,
        pm1: crate::arith::factor_u64(p - 1),
    };
    Ok(fam.index_record(&fp))
}

/// Generic parallel scan: fold every record (excluded ones included) into a
/// per-segment accumulator, merging segments in order.
pub fn scan_fold<T, FInit, FFold, FMerge>(
    groups: &[SubgroupLattice],
    bound: u64,
    filter: Option<CongruenceFilter>,
    init: FInit,
    fold: FFold,
    merge: FMerge,
) -> Result<T, ScanError>
where
    T: Send,
    FInit: Fn() -> T + Sync,
    FFold: Fn(&mut T, &IndexRecord) + Sync,
    FMerge: Fn(T, T) -> T + Sync,
{
    let fam = prepare_family(groups, bound)?;
    let engine = PrimeEngine::new(bound);
    let mut acc = init();
    if bound >= 2 && filter.map_or(true, |f| f.accepts(2)) {
        fold(
            &mut acc,
            &IndexRecord {
                p: 2,
                indices: vec![],
                excluded: Some(Exclusion::DividesTau),
            },
        );
    }
    let scanned = engine.par_scan(
        |seg| {
            let mut t = init();
            for fp in seg {
                if filter.map_or(true, |f| f.accepts(fp.p)) {
                    fold(&mut t, &fam.index_record(fp));
                }
            }
            t
        },
        init(),
        &merge,
    );
    acc = merge(acc, scanned);
    Ok(acc)
}

/// Scan collecting all records; intended for small bounds and CSV export.
pub fn scan_records(
    groups: &[SubgroupLattice],
    bound: u64,
    filter: Option<CongruenceFilter>,
) -> Result<Vec<IndexRecord>, ScanError> {
    scan_fold(
        groups,
        bound,
        filter,
        Vec::new,
        |v, r| v.push(r.clone()),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}

/// Histogram key entry: exact value up to the cap, binned above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Binned {
    Exact(u64),
    Large,
}

impl std::fmt::Display for Binned {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Binned::Exact(v) => write!(f, "{}", v),
            Binned::Large => write!(f, "large"),
        }
    }
}

pub const DEFAULT_HISTOGRAM_CAP: u64 = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TupleHistogram {
    pub counts: BTreeMap<Vec<Binned>, u64>,
    pub excluded: u64,
    pub scanned: u64,
}

impl TupleHistogram {
    fn add(&mut self, rec: &IndexRecord, cap: u64) {
        self.scanned += 1;
        if rec.excluded.is_some() {
            self.excluded += 1;
            return;
        }
        let key: Vec<Binned> = rec
            .indices
            .iter()
            .map(|&h| {
                if h <= cap {
                    Binned::Exact(h)
                } else {
                    Binned::Large
                }
            })
            .collect();
        *self.counts.entry(key).or_insert(0) += 1;
    }

    fn merge(mut self, other: TupleHistogram) -> TupleHistogram {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.excluded += other.excluded;
        self.scanned += other.scanned;
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .counts
            .iter()
            .map(|(k, &v)| {
                let key = format!(
                    "({})",
                    k.iter()
                        .map(|b| b.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                );
                (key, serde_json::Value::from(v))
            })
            .collect();
        serde_json::json!({
            "scanned": self.scanned,
            "excluded": self.excluded,
            "tuples": map,
        })
    }
}

pub fn scan_histogram(
    groups: &[SubgroupLattice],
    bound: u64,
    filter: Option<CongruenceFilter>,
    cap: u64,
) -> Result<TupleHistogram, ScanError> {
    scan_fold(
        groups,
        bound,
        filter,
        TupleHistogram::default,
        |h, r| h.add(r, cap),
        TupleHistogram::merge,
    )
}

/// Per-group value statistics: count and first witness prime for every
/// index value up to `cap`.
#[derive(Debug, Clone, Default)]
pub struct ValueWitnesses {
    pub per_group: Vec<BTreeMap<u64, (u64, u64)>>, // value -> (count, first p)
    pub domain: u64,
    pub excluded: u64,
}

impl ValueWitnesses {
    fn new(n: usize) -> Self {
        ValueWitnesses {
            per_group: vec![BTreeMap::new(); n],
            domain: 0,
            excluded: 0,
        }
    }

    fn add(&mut self, rec: &IndexRecord, cap: u64) {
        if rec.excluded.is_some() {
            self.excluded += 1;
            return;
        }
        self.domain += 1;
        for (gi, &h) in rec.indices.iter().enumerate() {
            if h <= cap {
                let entry = self.per_group[gi].entry(h).or_insert((0, rec.p));
                entry.0 += 1;
                entry.1 = entry.1.min(rec.p);
            }
        }
    }

    fn merge(mut self, other: ValueWitnesses) -> ValueWitnesses {
        for (gi, m) in other.per_group.into_iter().enumerate() {
            for (h, (c, p)) in m {
                let entry = self.per_group[gi].entry(h).or_insert((0, p));
                entry.0 += c;
                entry.1 = entry.1.min(p);
            }
        }
        self.domain += other.domain;
        self.excluded += other.excluded;
        self
    }
}

pub fn scan_value_witnesses(
    groups: &[SubgroupLattice],
    bound: u64,
    filter: Option<CongruenceFilter>,
    cap: u64,
) -> Result<ValueWitnesses, ScanError> {
    let n = groups.len();
    scan_fold(
        groups,
        bound,
        filter,
        || ValueWitnesses::new(n),
        |w, r| w.add(r, cap),
        ValueWitnesses::merge,
    )
}

/// CSV export: `p,ind_1,...,ind_n,excluded_reason`.
pub fn write_csv<W: Write>(mut w: W, n: usize, records: &[IndexRecord]) -> std::io::Result<()> {
    write!(w, "p")?;
    for i in 1..=n {
        write!(w, ",ind_{}", i)?;
    }
    writeln!(w, ",excluded_reason")?;
    for r in records {
        write!(w, "{}", r.p)?;
        if r.excluded.is_some() {
            for _ in 0..n {
                write!(w, ",")?;
            }
        } else {
            for h in &r.indices {
                write!(w, ",{}", h)?;
            }
        }
        writeln!(w, ",{}", r.excluded.map(|e| e.label()).unwrap_or(""))?;
    }
    Ok(())
}
