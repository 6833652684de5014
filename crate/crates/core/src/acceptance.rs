//! The acceptance suite: eleven verification criteria runnable from the CLI
//! (`indexmap reproduce`) and from the integration tests. Every tolerance is
//! pinned here as a constant.

use serde::{Deserialize, Serialize};

use crate::consolve::{differential_check, SolveConfig};
use crate::density::{empirical_density, sum_rule_check, to_f64, truncated_density, Target};
use crate::gaussidx::psi_q_scan;
use crate::kummerdeg::{degree_statistical_batch, full_degree, KummerQuery};
use crate::psidecide::{gcd_reduce_with, separation_data};
use crate::rank1image::{exceptional_sets_from, in_image};
use crate::ratmul::{canonical_decompose, factor_rational, FactoredRational, SubgroupLattice};
use crate::resindex::{index_tuple, scan_fold, scan_value_witnesses};

/// Bounds used by the suite; the full-scale values are the defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    /// X for the 1e6-scale scans.
    pub scan_bound: u64,
    /// X for the 1e7-scale scans.
    pub deep_bound: u64,
    /// Norm bound for the Gaussian scan.
    pub gauss_bound: u64,
    /// Number of random systems in the solver differential.
    pub solver_systems: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            scan_bound: 1_000_000,
            deep_bound: 10_000_000,
            gauss_bound: 1_000_000,
            solver_systems: 1000,
        }
    }
}

impl AcceptanceConfig {
    /// Cap both scan scales, used by `reproduce --bound`.
    pub fn capped(bound: u64) -> Self {
        let d = AcceptanceConfig::default();
        AcceptanceConfig {
            scan_bound: d.scan_bound.min(bound),
            deep_bound: d.deep_bound.min(bound),
            gauss_bound: d.gauss_bound.min(bound),
            solver_systems: d.solver_systems,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:<28} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.details
        )
    }
}

// Pinned tolerances.
const SURJECTIVITY_VALUE_CAP: u64 = 20;
const COMPLETENESS_VALUE_CAP: u64 = 30;
const DESCRIPTOR_VALUE_CAP: u64 = 40;
const DENSITY_CONVERGENCE_TOL: f64 = 0.005;
const DENSITY_TRUNCATED_LOW: f64 = 0.3739;
const DENSITY_TRUNCATED_HIGH: f64 = 0.3741;
const DENSITY_CUT: u64 = 50;
const SUM_RULE_LOW: f64 = 0.95;
const SUM_RULE_CAP: u64 = 100;
const SEPARATION_QUERY_CAP: u128 = 200;
const ZERO_DENSITY_VALUE_CAP: u64 = 24;

const SOUNDNESS_FIXTURES: [i128; 10] = [2, 3, 4, 5, 8, -3, -4, -27, -100, 12];
const ZERO_DENSITY_FIXTURES: [i128; 7] = [2, 4, -100, -3, -27, 5, 8];

fn fr(n: i128) -> FactoredRational {
    factor_rational(n, 1).unwrap()
}

fn group(n: i128) -> SubgroupLattice {
    SubgroupLattice::new(vec![fr(n)])
}

/// 1: the divisor-of-8 witnesses for a = 2 and realization of every value
/// up to 20 below the small bound.
pub fn criterion_1(cfg: &AcceptanceConfig) -> CriterionResult {
    let witnesses = [(3u64, 1u64), (7, 2), (113, 4), (73, 8)];
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, expect) in witnesses {
        let rec = index_tuple(&[group(2)], p).unwrap();
        if rec.indices != vec![expect] {
            ok = false;
            notes.push(format!(
                "Ind_{}(2) = {:?}, expected {}",
                p, rec.indices, expect
            ));
        }
    }
    let wit =
        scan_value_witnesses(&[group(2)], cfg.scan_bound, None, SURJECTIVITY_VALUE_CAP).unwrap();
    let missing: Vec<u64> = (1..=SURJECTIVITY_VALUE_CAP)
        .filter(|h| !wit.per_group[0].contains_key(h))
        .collect();
    if !missing.is_empty() {
        ok = false;
        notes.push(format!(
            "values without witness below {}: {:?}",
            cfg.scan_bound, missing
        ));
    }
    if notes.is_empty() {
        notes.push(format!(
            "witnesses 3,7,113,73 verified; all h <= {} realized below {}",
            SURJECTIVITY_VALUE_CAP, cfg.scan_bound
        ));
    }
    CriterionResult {
        id: 1,
        name: "surjectivity witnesses",
        passed: ok,
        details: notes.join("; "),
    }
}

/// 2: no scanned index value lies in a computed exceptional family.
pub fn criterion_2(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut violations: Vec<(i128, u64, u64)> = Vec::new();
    let mut scanned = 0u64;
    for a in SOUNDNESS_FIXTURES {
        let af = fr(a);
        let dec = canonical_decompose(&af).unwrap();
        let sets = exceptional_sets_from(&af, &dec);
        let bad = scan_fold(
            &[SubgroupLattice::new(vec![af.clone()])],
            cfg.scan_bound,
            None,
            || (Vec::new(), 0u64),
            |acc, rec| {
                if rec.excluded.is_none() {
                    acc.1 += 1;
                    if !in_image(&sets, rec.indices[0] as u128) {
                        acc.0.push((rec.p, rec.indices[0]));
                    }
                }
            },
            |mut x, mut y| {
                x.0.append(&mut y.0);
                (x.0, x.1 + y.1)
            },
        )
        .unwrap();
        scanned += bad.1;
        violations.extend(bad.0.into_iter().map(|(p, h)| (a, p, h)));
    }
    CriterionResult {
        id: 2,
        name: "exceptional-set soundness",
        passed: violations.is_empty(),
        details: if violations.is_empty() {
            format!(
                "{} non-excluded primes checked across 10 fixtures, 0 violations",
                scanned
            )
        } else {
            format!("violations: {:?}", violations)
        },
    }
}

/// 3: every admissible value up to 30 is realized below the deep bound.
pub fn criterion_3(cfg: &AcceptanceConfig) -> CriterionResult {
    let groups: Vec<SubgroupLattice> = SOUNDNESS_FIXTURES.iter().map(|&a| group(a)).collect();
    let wit = scan_value_witnesses(&groups, cfg.deep_bound, None, COMPLETENESS_VALUE_CAP).unwrap();
    let mut missing: Vec<(i128, u64)> = Vec::new();
    for (gi, &a) in SOUNDNESS_FIXTURES.iter().enumerate() {
        let af = fr(a);
        let sets = exceptional_sets_from(&af, &canonical_decompose(&af).unwrap());
        for h in 1..=COMPLETENESS_VALUE_CAP {
            if in_image(&sets, h as u128) && !wit.per_group[gi].contains_key(&h) {
                missing.push((a, h));
            }
        }
    }
    CriterionResult {
        id: 3,
        name: "exceptional-set completeness",
        passed: missing.is_empty(),
        details: if missing.is_empty() {
            format!(
                "every admissible h <= {} realized below {} for all 10 fixtures",
                COMPLETENESS_VALUE_CAP, cfg.deep_bound
            )
        } else {
            format!("unrealized admissible values: {:?}", missing)
        },
    }
}

/// 4: the -100 descriptor: residue 10 mod 20 never occurs, all other
/// classes occur among values <= 40 below the deep bound.
pub fn criterion_4(cfg: &AcceptanceConfig) -> CriterionResult {
    let g = [group(-100)];
    let forbidden = scan_fold(
        &g,
        cfg.scan_bound,
        None,
        Vec::new,
        |acc, rec| {
            if rec.excluded.is_none() && rec.indices[0] % 20 == 10 {
                acc.push((rec.p, rec.indices[0]));
            }
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
    .unwrap();
    let wit = scan_value_witnesses(&g, cfg.deep_bound, None, DESCRIPTOR_VALUE_CAP).unwrap();
    let mut missing_classes: Vec<u64> = Vec::new();
    for r in 0..20u64 {
        if r == 10 {
            continue;
        }
        let hit = wit.per_group[0]
            .keys()
            .any(|&h| h % 20 == r && h <= DESCRIPTOR_VALUE_CAP);
        if !hit {
            missing_classes.push(r);
        }
    }
    let passed = forbidden.is_empty() && missing_classes.is_empty();
    CriterionResult {
        id: 4,
        name: "descriptor of -100",
        passed,
        details: if passed {
            format!(
                "no index = 10 mod 20 below {}; every other class mod 20 hit among values <= {}",
                cfg.scan_bound, DESCRIPTOR_VALUE_CAP
            )
        } else {
            format!(
                "forbidden hits: {:?}; classes without witness: {:?}",
                forbidden, missing_classes
            )
        },
    }
}

/// 5: the Gaussian four-group valuation pattern at q = 5.
pub fn criterion_5(cfg: &AcceptanceConfig) -> CriterionResult {
    let scan = psi_q_scan(5, cfg.gauss_bound, false).unwrap();
    let has = |t: &[u32]| scan.histogram.get(&t.to_vec()).copied().unwrap_or(0) > 0;
    let ones = has(&[1, 1, 1, 1]);
    let two_ones = has(&[2, 1, 1, 1]);
    let passed = scan.violations.is_empty() && ones && two_ones;
    CriterionResult {
        id: 5,
        name: "gaussian 4-group pattern",
        passed,
        details: if passed {
            format!(
                "{} sites, 0 pattern violations; (1,1,1,1) and (2,1,1,1) observed",
                scan.sites
            )
        } else {
            format!(
                "violations: {:?}; (1,1,1,1) observed: {}; (2,1,1,1) observed: {}",
                scan.violations, ones, two_ones
            )
        },
    }
}

/// 6: density convergence for a = 2, h = 1: the empirical ratio at the deep
/// bound stays within 0.005 of the cut-50 truncation, and the truncation is
/// asserted to lie in [0.3739, 0.3741].
pub fn criterion_6(cfg: &AcceptanceConfig) -> CriterionResult {
    let trunc = truncated_density(&fr(2), 1, DENSITY_CUT).unwrap();
    let trunc_f = to_f64(&trunc);
    let emp =
        empirical_density(&[group(2)], &Target::Tuple(vec![1]), cfg.deep_bound, None).unwrap();
    let gap = (emp.ratio - trunc_f).abs();
    let gap_ok = gap <= DENSITY_CONVERGENCE_TOL;
    let window_ok = (DENSITY_TRUNCATED_LOW..=DENSITY_TRUNCATED_HIGH).contains(&trunc_f);
    CriterionResult {
        id: 6,
        name: "density convergence",
        passed: gap_ok && window_ok,
        details: format!(
            "truncated(t={}) = {:.7} (window [{}, {}]: {}); empirical = {:.7}; |gap| = {:.5} (tol {}: {})",
            DENSITY_CUT,
            trunc_f,
            DENSITY_TRUNCATED_LOW,
            DENSITY_TRUNCATED_HIGH,
            if window_ok { "ok" } else { "violated" },
            emp.ratio,
            gap,
            DENSITY_CONVERGENCE_TOL,
            if gap_ok { "ok" } else { "violated" },
        ),
    }
}

/// 7: zero truncated density exactly for the values outside the image, and
/// zero empirical count for them.
pub fn criterion_7(cfg: &AcceptanceConfig) -> CriterionResult {
    use num_traits::Zero;
    let mut failures = Vec::new();
    for a in ZERO_DENSITY_FIXTURES {
        let af = fr(a);
        let sets = exceptional_sets_from(&af, &canonical_decompose(&af).unwrap());
        let counts = scan_fold(
            &[SubgroupLattice::new(vec![af.clone()])],
            cfg.scan_bound,
            None,
            || vec![0u64; ZERO_DENSITY_VALUE_CAP as usize + 1],
            |acc, rec| {
                if rec.excluded.is_none() {
                    let h = rec.indices[0];
                    if h <= ZERO_DENSITY_VALUE_CAP {
                        acc[h as usize] += 1;
                    }
                }
            },
            |mut x, y| {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
                x
            },
        )
        .unwrap();
        for h in 1..=ZERO_DENSITY_VALUE_CAP {
            if in_image(&sets, h as u128) {
                continue;
            }
            let trunc = truncated_density(&af, h, 20).unwrap();
            if !trunc.is_zero() {
                failures.push(format!("truncated(a={}, h={}) nonzero", a, h));
            }
            if counts[h as usize] != 0 {
                failures.push(format!(
                    "empirical count(a={}, h={}) = {}",
                    a, h, counts[h as usize]
                ));
            }
        }
    }
    CriterionResult {
        id: 7,
        name: "zero density iff empty",
        passed: failures.is_empty(),
        details: if failures.is_empty() {
            "every out-of-image fixture value has truncated = 0 exactly and empirical count 0"
                .into()
        } else {
            failures.join("; ")
        },
    }
}

/// 8: solver differential, seeded.
pub fn criterion_8(cfg: &AcceptanceConfig) -> CriterionResult {
    let report = differential_check(1, cfg.solver_systems, &SolveConfig::default());
    CriterionResult {
        id: 8,
        name: "solver differential",
        passed: report.discrepancies.is_empty(),
        details: format!(
            "{} systems: {} decided in agreement, {} not applicable, {} over budget, {} discrepancies",
            report.checked,
            report.agreements,
            report.not_applicable,
            report.skipped_budget,
            report.discrepancies.len()
        ),
    }
}

/// 9: sum rule for a = 2 at cap 100.
pub fn criterion_9(cfg: &AcceptanceConfig) -> CriterionResult {
    let report = sum_rule_check(&fr(2), SUM_RULE_CAP, cfg.deep_bound).unwrap();
    let additive = report.sum_matched == report.combined_matched;
    let in_range = report.sum_ratio >= SUM_RULE_LOW && report.sum_ratio <= 1.0;
    CriterionResult {
        id: 9,
        name: "density sum rule",
        passed: additive && in_range,
        details: format!(
            "sum over h <= {} of empirical densities = {:.5} (additivity exact: {})",
            SUM_RULE_CAP, report.sum_ratio, additive
        ),
    }
}

/// 10: closed-form Kummer degrees against the statistical oracle.
pub fn criterion_10(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut queries = Vec::new();
    let mut expected = Vec::new();
    for a in [2i128, 4, 5, -3] {
        for n in [2u64, 4, 8] {
            for m in [8u64, 24, 40] {
                let q = KummerQuery::new(fr(a), n, m).unwrap();
                expected.push(full_degree(&q).unwrap());
                queries.push(q);
            }
        }
    }
    let stats = degree_statistical_batch(&queries, cfg.scan_bound).unwrap();
    let mut misses = Vec::new();
    for ((q, stat), &deg) in queries.iter().zip(&stats).zip(&expected) {
        if !stat.contains(deg) {
            misses.push(format!(
                "(a={}, n={}, m={}): degree {} outside [{:.2}, {:.2}]",
                q.a, q.n, q.m, deg, stat.degree_low, stat.degree_high
            ));
        }
    }
    CriterionResult {
        id: 10,
        name: "kummer oracle agreement",
        passed: misses.is_empty(),
        details: if misses.is_empty() {
            format!(
                "all {} grid degrees inside the 3-sigma intervals",
                queries.len()
            )
        } else {
            misses.join("; ")
        },
    }
}

/// 11: gcd-reduction identity and the separation fixture for a = 5.
pub fn criterion_11(_cfg: &AcceptanceConfig) -> CriterionResult {
    let mut failures = Vec::new();
    for a in [2i128, 5, -27] {
        let af = fr(a);
        let dec = canonical_decompose(&af).unwrap();
        let sets = exceptional_sets_from(&af, &dec);
        for h in 1..=SEPARATION_QUERY_CAP {
            let reduced = gcd_reduce_with(&dec, h);
            if in_image(&sets, h) != in_image(&sets, reduced) {
                failures.push(format!("a={} h={} reduced={}", a, h, reduced));
            }
        }
    }
    let sep5 = separation_data(&fr(5)).unwrap();
    if sep5.h_min != 2 {
        failures.push(format!("h_min(5) = {}", sep5.h_min));
    }
    if sep5.e_at(2) != 0 {
        failures.push(format!("e_2(5) = {}", sep5.e_at(2)));
    }
    CriterionResult {
        id: 11,
        name: "separation suite",
        passed: failures.is_empty(),
        details: if failures.is_empty() {
            format!(
                "gcd-reduction matches membership for h <= {} on all fixtures; Sep(5) = 2Z, e_2 = 0",
                SEPARATION_QUERY_CAP
            )
        } else {
            failures.join("; ")
        },
    }
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    vec![
        criterion_1(cfg),
        criterion_2(cfg),
        criterion_3(cfg),
        criterion_4(cfg),
        criterion_5(cfg),
        criterion_6(cfg),
        criterion_7(cfg),
        criterion_8(cfg),
        criterion_9(cfg),
        criterion_10(cfg),
        criterion_11(cfg),
    ]
}
