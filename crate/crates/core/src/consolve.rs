//! Solvability of systems of linear congruences with incongruence side
//! conditions modulo powers of a prime q: rows <y, v> = c (mod q^e), with
//! strict rows additionally demanding <y, v> != c (mod q^{e+1}), plus an
//! optional residue-set constraint on the transformed values (z mod M).
//!
//! Two deciders are provided. `solvable_bruteforce` enumerates candidate
//! vectors over one full period and is the ground truth. `solvable_structured`
//! expresses all rows over a maximal independent row subset and decides by
//! counting: strict rows each exclude at most a 1/q fraction of the
//! candidates, so fewer strict rows than q leaves a solution, while a strict
//! row whose expression touches only rows of strictly larger exponent is
//! pinned and unsatisfiable. Where its regime checks fail it reports
//! NotApplicable and callers fall back to enumeration.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::SplitMix64;
use crate::intmat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("row exponent {0} exceeds the configured cap {1}")]
    ExponentCap(u32, u32),
    #[error("row vector length differs from the declared dimension")]
    DimensionMismatch,
    #[error("modulus is not prime")]
    NotPrime,
    #[error("enumeration space of {0} candidates exceeds the budget {1}")]
    BudgetExceeded(u128, u64),
    #[error("residue constraint tuples must have one entry per row")]
    MalformedConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub v: Vec<i64>,
    pub c: i64,
    pub e: u32,
    pub strict: bool,
}

/// Optional side condition: the tuple (<y, v_i> mod modulus) over all rows
/// must land in `allowed`. The attainable tuples are computed verbatim by
/// letting y range over {0, ..., modulus-1}^dim (see `residue_image`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueConstraint {
    pub modulus: u64,
    pub allowed: BTreeSet<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceSystem {
    pub q: u64,
    pub dim: usize,
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_constraint: Option<ResidueConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub exponent_cap: u32,
    pub budget: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            exponent_cap: 12,
            budget: 100_000_000,
        }
    }
}

impl CongruenceSystem {
    pub fn validate(&self, cfg: &SolveConfig) -> Result<(), SolveError> {
        if !crate::arith::is_prime_u64(self.q) {
            return Err(SolveError::NotPrime);
        }
        for row in &self.rows {
            if row.v.len() != self.dim {
                return Err(SolveError::DimensionMismatch);
            }
            if row.e > cfg.exponent_cap {
                return Err(SolveError::ExponentCap(row.e, cfg.exponent_cap));
            }
        }
        if let Some(rc) = &self.residue_constraint {
            if rc.modulus == 0 || rc.allowed.iter().any(|t| t.len() != self.rows.len()) {
                return Err(SolveError::MalformedConstraint);
            }
        }
        Ok(())
    }

    fn max_e(&self) -> u32 {
        self.rows.iter().map(|r| r.e).max().unwrap_or(0)
    }

    fn row_satisfied(&self, row: &Row, y: &[u64]) -> bool {
        let dot: i128 = row
            .v
            .iter()
            .zip(y)
            .map(|(&vi, &yi)| vi as i128 * yi as i128)
            .sum();
        let diff = dot - row.c as i128;
        // a modulus beyond i128 range exceeds any attainable |diff|, so the
        // congruence degenerates to equality
        let divides = |e: u32| -> bool {
            match (self.q as i128).checked_pow(e) {
                Some(qe) => diff.rem_euclid(qe) == 0,
                None => diff == 0,
            }
        };
        divides(row.e) && !(row.strict && divides(row.e + 1))
    }

    fn constraint_satisfied(&self, y: &[u64]) -> bool {
        let Some(rc) = &self.residue_constraint else {
            return true;
        };
        let tuple: Vec<u64> = self
            .rows
            .iter()
            .map(|row| {
                let dot: i128 = row
                    .v
                    .iter()
                    .zip(y)
                    .map(|(&vi, &yi)| vi as i128 * yi as i128)
                    .sum();
                dot.rem_euclid(rc.modulus as i128) as u64
            })
            .collect();
        rc.allowed.contains(&tuple)
    }

    pub fn check_witness(&self, y: &[u64]) -> bool {
        y.len() == self.dim
            && self.rows.iter().all(|r| self.row_satisfied(r, y))
            && self.constraint_satisfied(y)
    }
}

/// Attainable tuples (<y, v_i> mod modulus) as y ranges over one period,
/// exactly as constructed in the underlying procedure.
pub fn residue_image(vectors: &[Vec<i64>], modulus: u64, dim: usize) -> BTreeSet<Vec<u64>> {
    let mut image = BTreeSet::new();
    let total = (modulus as u128).pow(dim as u32);
    let mut y = vec![0u64; dim];
    for counter in 0..total {
        let mut c = counter;
        for slot in y.iter_mut() {
            *slot = (c % modulus as u128) as u64;
            c /= modulus as u128;
        }
        let tuple: Vec<u64> = vectors
            .iter()
            .map(|v| {
                let dot: i128 = v
                    .iter()
                    .zip(&y)
                    .map(|(&vi, &yi)| vi as i128 * yi as i128)
                    .sum();
                dot.rem_euclid(modulus as i128) as u64
            })
            .collect();
        image.insert(tuple);
    }
    image
}

/// Per-coordinate search period and total candidate count, with every power
/// checked against the budget (overflow means over budget).
fn enumeration_size(sys: &CongruenceSystem, cfg: &SolveConfig) -> Result<(u64, u128), SolveError> {
    let over = || SolveError::BudgetExceeded(u128::MAX, cfg.budget);
    let mut period: u128 = (sys.q as u128)
        .checked_pow(sys.max_e() + 1)
        .ok_or_else(over)?;
    if let Some(rc) = &sys.residue_constraint {
        let g = crate::arith::gcd_u128(period, rc.modulus as u128);
        period = (period / g)
            .checked_mul(rc.modulus as u128)
            .ok_or_else(over)?;
    }
    let total = period.checked_pow(sys.dim as u32).ok_or_else(over)?;
    if total > cfg.budget as u128 {
        return Err(SolveError::BudgetExceeded(total, cfg.budget));
    }
    Ok((period as u64, total))
}

/// Exhaustive decision over one period; `Some(witness)` iff solvable.
/// Every predicate in the system is periodic in each coordinate with period
/// lcm(q^{max e + 1}, constraint modulus), so searching one period is exact.
pub fn solvable_bruteforce(
    sys: &CongruenceSystem,
    cfg: &SolveConfig,
) -> Result<Option<Vec<u64>>, SolveError> {
    sys.validate(cfg)?;
    let (period, total) = enumeration_size(sys, cfg)?;
    let mut y = vec![0u64; sys.dim];
    for counter in 0..total {
        let mut c = counter;
        for slot in y.iter_mut() {
            *slot = (c % period as u128) as u64;
            c /= period as u128;
        }
        if sys.check_witness(&y) {
            return Ok(Some(y));
        }
    }
    Ok(None)
}

/// All solutions in one period; intended for tiny systems in tests.
pub fn enumerate_solutions(
    sys: &CongruenceSystem,
    cfg: &SolveConfig,
) -> Result<Vec<Vec<u64>>, SolveError> {
    sys.validate(cfg)?;
    let (period, total) = enumeration_size(sys, cfg)?;
    let mut out = Vec::new();
    let mut y = vec![0u64; sys.dim];
    for counter in 0..total {
        let mut c = counter;
        for slot in y.iter_mut() {
            *slot = (c % period as u128) as u64;
            c /= period as u128;
        }
        if sys.check_witness(&y) {
            out.push(y.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structured {
    Solvable,
    Unsolvable,
    NotApplicable(String),
}

fn vq_big(n: &BigInt, q: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let qb = BigInt::from(q);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &qb).is_zero() {
        n /= &qb;
        v += 1;
    }
    v
}

/// q-adic valuation of a rational (numerator minus denominator valuation).
fn vq_rational(x: &BigRational, q: u64) -> i64 {
    vq_big(x.numer(), q) as i64 - vq_big(x.denom(), q) as i64
}

/// One structured pass over a fixed basis selection order. `ascending`
/// chooses the minimal-sum basis (the primary selection); the
/// descending pass catches pinned strict rows.
fn structured_pass(sys: &CongruenceSystem, ascending: bool) -> Structured {
    let q = sys.q;
    let rows = &sys.rows;
    let strict_count = rows.iter().filter(|r| r.strict).count() as u64;

    // greedy maximal independent subset minimizing (or maximizing) the
    // exponent sum; ties broken by row content so the selection does not
    // depend on the order rows were supplied in
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| {
        let e_key = if ascending {
            rows[i].e as i64
        } else {
            -(rows[i].e as i64)
        };
        (e_key, rows[i].v.clone(), rows[i].c, rows[i].strict)
    });
    let mut basis_idx: Vec<usize> = Vec::new();
    let mut basis_rows: Vec<Vec<BigInt>> = Vec::new();
    for &i in &order {
        if rows[i].v.iter().all(|&x| x == 0) {
            continue;
        }
        let cand: Vec<BigInt> = rows[i].v.iter().map(|&x| BigInt::from(x)).collect();
        let mut trial = basis_rows.clone();
        trial.push(cand.clone());
        if intmat::rank(&trial) == basis_rows.len() + 1 {
            basis_rows.push(cand);
            basis_idx.push(i);
        }
    }
    let k = basis_idx.len();

    // residue constraint: an empty intersection with the attainable image
    // is a sound refutation; otherwise the constraint must be prime to q
    if let Some(rc) = &sys.residue_constraint {
        let vectors: Vec<Vec<i64>> = rows.iter().map(|r| r.v.clone()).collect();
        let image = residue_image(&vectors, rc.modulus, sys.dim);
        if rc.allowed.intersection(&image).next().is_none() {
            return Structured::Unsolvable;
        }
        if rc.modulus % q == 0 {
            return Structured::NotApplicable("residue constraint modulus shares the prime".into());
        }
    }

    if q <= strict_count {
        return Structured::NotApplicable(format!("{} strict rows with q = {}", strict_count, q));
    }

    // the candidate block is parametrized by z_j = c_j + q^{e_j} t_j over
    // the basis; achieving arbitrary q-power residues for z requires the
    // image lattice of the basis map to have exponent prime to q
    if k > 0 {
        match intmat::image_lattice_exponent(&basis_rows) {
            Some(m) => {
                if vq_big(&m, q) > 0 {
                    return Structured::NotApplicable("basis image lattice not q-saturated".into());
                }
            }
            None => return Structured::NotApplicable("basis image lattice degenerate".into()),
        }
    }

    // A sound refutation from any single row decides the system, so verdicts
    // are collected across all rows before an inconclusive one is reported.
    let mut inconclusive: Option<String> = None;
    for (i, row) in rows.iter().enumerate() {
        let is_basis = basis_idx.contains(&i);
        if is_basis {
            // z_i = c_i + q^{e_i} t_i; strictness frees exactly the t_i != 0
            // (mod q) fraction
            continue;
        }
        let v_big: Vec<BigInt> = row.v.iter().map(|&x| BigInt::from(x)).collect();
        let Some(u) = intmat::solve_rational(&basis_rows, &v_big) else {
            inconclusive.get_or_insert_with(|| "row outside basis span".into());
            continue;
        };
        // regime: nonzero expressing coefficients must be q-adic units
        if u.iter().any(|c| !c.is_zero() && vq_rational(c, q) != 0) {
            inconclusive.get_or_insert_with(|| "expressing coefficient not a q-unit".into());
            continue;
        }
        // m_i = min exponent over the support of u
        let support: Vec<usize> = (0..k).filter(|&j| !u[j].is_zero()).collect();
        let m_i = support.iter().map(|&j| rows[basis_idx[j]].e).min();
        // r_i = c_i - <c_basis, u>
        let mut r = BigRational::from(BigInt::from(row.c));
        for &j in &support {
            r -= &u[j] * BigRational::from(BigInt::from(rows[basis_idx[j]].c));
        }
        debug_assert!(r.is_zero() || vq_big(r.denom(), q) == 0);
        let r_int_vq = |modulus_pow: u32| -> bool {
            // r = 0 (mod q^modulus_pow) as a q-adic statement
            if r.is_zero() {
                return true;
            }
            vq_rational(&r, q) >= modulus_pow as i64
        };
        match m_i {
            None => {
                // zero row: value pinned to 0
                if !r_int_vq(row.e) {
                    return Structured::Unsolvable;
                }
                if row.strict && r_int_vq(row.e + 1) {
                    return Structured::Unsolvable;
                }
            }
            Some(m_i) => {
                if m_i >= row.e {
                    // congruence implied or contradictory
                    if !r_int_vq(row.e) {
                        return Structured::Unsolvable;
                    }
                    if row.strict && m_i >= row.e + 1 && r_int_vq(row.e + 1) {
                        // pinned strict row: every candidate hits the
                        // forbidden congruence class
                        return Structured::Unsolvable;
                    }
                } else {
                    // the congruence pins a combination of the t's
                    if !r_int_vq(m_i.min(row.e)) {
                        return Structured::Unsolvable;
                    }
                    inconclusive.get_or_insert_with(|| {
                        "dependent congruence couples candidate block".into()
                    });
                }
            }
        }
    }
    if let Some(reason) = inconclusive {
        return Structured::NotApplicable(reason);
    }
    // every congruence holds on the whole candidate block of q^k vectors;
    // each strict row excludes at most q^{k-1} of them and there are fewer
    // than q strict rows
    Structured::Solvable
}

/// Structured decision. Tries the minimal-exponent-sum basis first and the
/// maximal one second; both passes are individually sound, so the first
/// decisive answer is returned.
pub fn solvable_structured(sys: &CongruenceSystem) -> Structured {
    let cfg = SolveConfig::default();
    if let Err(e) = sys.validate(&cfg) {
        return Structured::NotApplicable(e.to_string());
    }
    match structured_pass(sys, true) {
        Structured::NotApplicable(first) => match structured_pass(sys, false) {
            Structured::NotApplicable(_) => Structured::NotApplicable(first),
            decided => decided,
        },
        decided => decided,
    }
}

/// Structured first, enumeration as fallback.
pub fn solve(sys: &CongruenceSystem, cfg: &SolveConfig) -> Result<bool, SolveError> {
    match solvable_structured(sys) {
        Structured::Solvable => Ok(true),
        Structured::Unsolvable => Ok(false),
        Structured::NotApplicable(_) => Ok(solvable_bruteforce(sys, cfg)?.is_some()),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub checked: u64,
    pub agreements: u64,
    pub not_applicable: u64,
    pub skipped_budget: u64,
    pub discrepancies: Vec<CongruenceSystem>,
}

/// Seeded randomized comparison of the two deciders; discrepancies must be
/// empty wherever the structured path applies.
pub fn differential_check(seed: u64, count: u64, cfg: &SolveConfig) -> DifferentialReport {
    let mut rng = SplitMix64::new(seed);
    let qs = [2u64, 3, 5, 7, 11, 101];
    let mut report = DifferentialReport::default();
    for _ in 0..count {
        let q = qs[rng.below(qs.len() as u64) as usize];
        let dim = 1 + rng.below(3) as usize;
        let nrows = 1 + rng.below(4) as usize;
        // keep the enumeration period within budget so the oracle always runs
        let mut e_cap = 0u32;
        while e_cap < 3 && ((q as u128).pow(e_cap + 2)).pow(dim as u32) <= cfg.budget as u128 {
            e_cap += 1;
        }
        let rows: Vec<Row> = (0..nrows)
            .map(|_| Row {
                v: (0..dim).map(|_| rng.range_i64(-3, 3)).collect(),
                c: rng.range_i64(-10, 10),
                e: rng.below(e_cap as u64 + 1) as u32,
                strict: rng.below(3) == 0,
            })
            .collect();
        let sys = CongruenceSystem {
            q,
            dim,
            rows,
            residue_constraint: None,
        };
        report.checked += 1;
        let brute = match solvable_bruteforce(&sys, cfg) {
            Ok(w) => w.is_some(),
            Err(SolveError::BudgetExceeded(..)) => {
                report.skipped_budget += 1;
                continue;
            }
            Err(_) => unreachable!("generated systems are well-formed"),
        };
        match solvable_structured(&sys) {
            Structured::NotApplicable(_) => report.not_applicable += 1,
            Structured::Solvable => {
                if brute {
                    report.agreements += 1;
                } else {
                    report.discrepancies.push(sys);
                }
            }
            Structured::Unsolvable => {
                if !brute {
                    report.agreements += 1;
                } else {
                    report.discrepancies.push(sys);
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[i64], c: i64, e: u32, strict: bool) -> Row {
        Row {
            v: v.to_vec(),
            c,
            e,
            strict,
        }
    }

    fn sys(q: u64, dim: usize, rows: Vec<Row>) -> CongruenceSystem {
        CongruenceSystem {
            q,
            dim,
            rows,
            residue_constraint: None,
        }
    }

    #[test]
    fn empty_system_trivially_solvable() {
        let s = sys(5, 2, vec![]);
        let w = solvable_bruteforce(&s, &SolveConfig::default()).unwrap();
        assert_eq!(w, Some(vec![0, 0]));
        assert_eq!(solvable_structured(&s), Structured::Solvable);
    }

    #[test]
    fn single_strict_row_witness() {
        // y = 0 (mod q^2), y != 0 (mod q^3): first witness is q^2
        let s = sys(2, 1, vec![row(&[1], 0, 2, true)]);
        let w = solvable_bruteforce(&s, &SolveConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(w, vec![4]);
        assert!(s.check_witness(&w));
        assert_eq!(solvable_structured(&s), Structured::Solvable);
    }

    #[test]
    fn forced_contradiction() {
        // y = 0 (mod q^2) and y != 0 (mod q^2) via the strict e=1 row
        let s = sys(3, 1, vec![row(&[1], 0, 2, false), row(&[1], 0, 1, true)]);
        assert_eq!(
            solvable_bruteforce(&s, &SolveConfig::default()).unwrap(),
            None
        );
        assert_eq!(solvable_structured(&s), Structured::Unsolvable);
    }

    #[test]
    fn structured_duplicate_strict_row() {
        // one strict row equal to the first congruence row, e = (1, 1)
        let s = sys(
            101,
            2,
            vec![
                row(&[1, 0], 0, 1, false),
                row(&[0, 1], 0, 1, false),
                row(&[1, 0], 0, 1, true),
            ],
        );
        assert_eq!(solvable_structured(&s), Structured::Solvable);
        // brute-force confirmation at a tractable prime
        let small = sys(
            11,
            2,
            vec![
                row(&[1, 0], 0, 1, false),
                row(&[0, 1], 0, 1, false),
                row(&[1, 0], 0, 1, true),
            ],
        );
        assert!(solvable_bruteforce(&small, &SolveConfig::default())
            .unwrap()
            .is_some());
    }

    #[test]
    fn structured_pinned_strict_row() {
        // strict row expressed over a basis row of strictly larger exponent:
        // y = 0 (mod q^2) pins y (mod q) and kills y != 0 (mod q)
        let s = sys(101, 1, vec![row(&[1], 0, 2, false), row(&[1], 0, 0, true)]);
        assert_eq!(solvable_structured(&s), Structured::Unsolvable);
        let small = sys(5, 1, vec![row(&[1], 0, 2, false), row(&[1], 0, 0, true)]);
        assert_eq!(
            solvable_bruteforce(&small, &SolveConfig::default()).unwrap(),
            None
        );
        assert_eq!(solvable_structured(&small), Structured::Unsolvable);
    }

    #[test]
    fn no_strict_rows_crt() {
        let s = sys(
            7,
            2,
            vec![row(&[1, 0], 3, 2, false), row(&[0, 1], 5, 1, false)],
        );
        let w = solvable_bruteforce(&s, &SolveConfig::default())
            .unwrap()
            .unwrap();
        assert!(s.check_witness(&w));
        assert_eq!(solvable_structured(&s), Structured::Solvable);
    }

    #[test]
    fn single_variable_specialization() {
        // x = 1 (mod q^e), x != 1 (mod q^{e+1}) is always solvable for
        // q >= 3, and for q = 2 with e >= 1
        for q in [3u64, 5, 7, 11] {
            for e in 0..=3 {
                let s = sys(q, 1, vec![row(&[1], 1, e, true)]);
                assert!(solvable_bruteforce(&s, &SolveConfig::default())
                    .unwrap()
                    .is_some());
            }
        }
        for e in 1..=3 {
            let s = sys(2, 1, vec![row(&[1], 1, e, true)]);
            assert!(solvable_bruteforce(&s, &SolveConfig::default())
                .unwrap()
                .is_some());
        }
        // q = 2, e = 0 with a unit condition x != 0 (mod 2) is unsolvable
        let s = sys(2, 1, vec![row(&[1], 1, 0, true), row(&[1], 0, 0, true)]);
        assert_eq!(
            solvable_bruteforce(&s, &SolveConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn monotone_under_added_rows() {
        let cfg = SolveConfig::default();
        let mut rng = SplitMix64::new(77);
        for _ in 0..120 {
            let q = [2u64, 3, 5][rng.below(3) as usize];
            let dim = 1 + rng.below(2) as usize;
            let mut rows: Vec<Row> = (0..2)
                .map(|_| Row {
                    v: (0..dim).map(|_| rng.range_i64(-2, 2)).collect(),
                    c: rng.range_i64(-4, 4),
                    e: rng.below(2) as u32,
                    strict: rng.below(4) == 0,
                })
                .collect();
            let base = sys(q, dim, rows.clone());
            let sol_base: BTreeSet<Vec<u64>> = enumerate_solutions(&base, &cfg)
                .unwrap()
                .into_iter()
                .collect();
            rows.push(Row {
                v: (0..dim).map(|_| rng.range_i64(-2, 2)).collect(),
                c: rng.range_i64(-4, 4),
                e: rng.below(2) as u32,
                strict: rng.below(2) == 0,
            });
            let extended = sys(q, dim, rows);
            // compare on the common period
            if extended.max_e() != base.max_e() {
                continue;
            }
            let sol_ext: BTreeSet<Vec<u64>> = enumerate_solutions(&extended, &cfg)
                .unwrap()
                .into_iter()
                .collect();
            assert!(sol_ext.is_subset(&sol_base));
        }
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..200 {
            let q = [3u64, 5, 101][rng.below(3) as usize];
            let dim = 1 + rng.below(3) as usize;
            let nrows = 2 + rng.below(3) as usize;
            let rows: Vec<Row> = (0..nrows)
                .map(|_| Row {
                    v: (0..dim).map(|_| rng.range_i64(-3, 3)).collect(),
                    c: rng.range_i64(-6, 6),
                    e: rng.below(3) as u32,
                    strict: rng.below(3) == 0,
                })
                .collect();
            let s1 = sys(q, dim, rows.clone());
            let mut rev = rows.clone();
            rev.reverse();
            let s2 = sys(q, dim, rev);
            // the decision class is permutation invariant (diagnostic text
            // may mention different rows)
            assert_eq!(
                std::mem::discriminant(&solvable_structured(&s1)),
                std::mem::discriminant(&solvable_structured(&s2))
            );
        }
    }

    #[test]
    fn residue_image_by_hand() {
        // y -> (y1 + y2, 2 y1) mod 2: parity of second entry is free only
        // through y1, image = {(0,0),(1,0),(0,0)...} computed directly
        let image = residue_image(&[vec![1, 1], vec![2, 0]], 2, 2);
        let expect: BTreeSet<Vec<u64>> = [vec![0, 0], vec![1, 0]].into_iter().collect();
        assert_eq!(image, expect);
    }

    #[test]
    fn residue_constraint_paths() {
        let cfg = SolveConfig::default();
        // constraint not attainable: unsolvable via both deciders
        let mut s = sys(5, 1, vec![row(&[2], 0, 1, false)]);
        s.residue_constraint = Some(ResidueConstraint {
            modulus: 2,
            allowed: [vec![1]].into_iter().collect(),
        });
        // <y, 2> is always even
        assert_eq!(solvable_bruteforce(&s, &cfg).unwrap(), None);
        assert_eq!(solvable_structured(&s), Structured::Unsolvable);

        // attainable constraint with modulus prime to q
        let mut s2 = sys(5, 1, vec![row(&[1], 0, 1, true)]);
        s2.residue_constraint = Some(ResidueConstraint {
            modulus: 3,
            allowed: [vec![1]].into_iter().collect(),
        });
        let w = solvable_bruteforce(&s2, &cfg).unwrap().unwrap();
        assert!(s2.check_witness(&w));
        assert_eq!(solvable_structured(&s2), Structured::Solvable);

        // modulus sharing q: structured declines
        let mut s3 = sys(5, 1, vec![row(&[1], 0, 1, true)]);
        s3.residue_constraint = Some(ResidueConstraint {
            modulus: 5,
            allowed: [vec![0]].into_iter().collect(),
        });
        assert!(matches!(
            solvable_structured(&s3),
            Structured::NotApplicable(_)
        ));
    }

    #[test]
    fn witness_validity_random() {
        let cfg = SolveConfig::default();
        let mut rng = SplitMix64::new(5);
        for _ in 0..300 {
            let q = [2u64, 3, 5][rng.below(3) as usize];
            let dim = 1 + rng.below(2) as usize;
            let rows: Vec<Row> = (0..1 + rng.below(3) as usize)
                .map(|_| Row {
                    v: (0..dim).map(|_| rng.range_i64(-3, 3)).collect(),
                    c: rng.range_i64(-5, 5),
                    e: rng.below(3) as u32,
                    strict: rng.below(3) == 0,
                })
                .collect();
            let s = sys(q, dim, rows);
            if let Ok(Some(w)) = solvable_bruteforce(&s, &cfg) {
                assert!(s.check_witness(&w));
            }
        }
    }

    #[test]
    fn budget_and_cap_errors() {
        let cfg = SolveConfig {
            exponent_cap: 12,
            budget: 100,
        };
        let s = sys(101, 2, vec![row(&[1, 0], 0, 1, false)]);
        assert!(matches!(
            solvable_bruteforce(&s, &cfg),
            Err(SolveError::BudgetExceeded(..))
        ));
        // periods past the integer range degrade to budget errors, not panics
        let huge = sys(101, 3, vec![row(&[1, 0, 0], 0, 12, true)]);
        assert!(matches!(
            solvable_bruteforce(&huge, &SolveConfig::default()),
            Err(SolveError::BudgetExceeded(..))
        ));
        // y = 0 hits the strict congruence at level e+1, hence no witness
        assert!(!huge.check_witness(&[0, 0, 0]));
        let cfg2 = SolveConfig {
            exponent_cap: 2,
            budget: 1000,
        };
        let s2 = sys(3, 1, vec![row(&[1], 0, 3, false)]);
        assert!(matches!(
            solvable_bruteforce(&s2, &cfg2),
            Err(SolveError::ExponentCap(3, 2))
        ));
        let s3 = sys(4, 1, vec![]);
        assert!(matches!(
            solvable_bruteforce(&s3, &SolveConfig::default()),
            Err(SolveError::NotPrime)
        ));
    }

    #[test]
    fn differential_thousand_systems() {
        let report = differential_check(1, 1000, &SolveConfig::default());
        assert_eq!(report.checked, 1000);
        assert!(
            report.discrepancies.is_empty(),
            "{:?}",
            report.discrepancies
        );
        assert!(report.agreements > 0);
        // empty run
        let empty = differential_check(1, 0, &SolveConfig::default());
        assert_eq!(empty.checked, 0);
        assert!(empty.discrepancies.is_empty());
    }

    #[test]
    fn json_roundtrip() {
        let mut s = sys(5, 2, vec![row(&[1, -2], 3, 2, true)]);
        s.residue_constraint = Some(ResidueConstraint {
            modulus: 3,
            allowed: [vec![0]].into_iter().collect(),
        });
        let text = serde_json::to_string(&s).unwrap();
        let back: CongruenceSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
