//! Index scanning over the Gaussian rationals. Rational primes classify as
//! split (p = 1 mod 4, residue field F_p via a chosen root of x^2 + 1),
//! inert (p = 3 mod 4, residue field F_{p^2} modeled as Z[i]/(p)) or
//! ramified (p = 2, excluded). A site is (p, chosen root) for split primes,
//! with the smaller root canonical and the conjugate available via a flag.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor_u64, mulmod, powmod, valuation_u64};
use crate::primes::{small_primes, PrimeEngine};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaussError {
    #[error("q = 2 is refused: the valuation pattern is only claimed for odd q")]
    EvenQ,
    #[error("q must be prime, got {0}")]
    NotPrime(u64),
    #[error("norm bound {0} below the smallest usable site")]
    BoundTooSmall(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianInteger {
    pub re: i64,
    pub im: i64,
}

impl GaussianInteger {
    pub const fn new(re: i64, im: i64) -> Self {
        GaussianInteger { re, im }
    }

    pub fn norm(&self) -> u128 {
        (self.re as i128 * self.re as i128 + self.im as i128 * self.im as i128) as u128
    }

    pub fn mul(&self, other: &GaussianInteger) -> GaussianInteger {
        GaussianInteger {
            re: self.re * other.re - self.im * other.im,
            im: self.re * other.im + self.im * other.re,
        }
    }
}

impl std::fmt::Display for GaussianInteger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else if self.im > 0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteKind {
    /// p = 1 mod 4; `root` is the chosen square root of -1 modulo p.
    Split { root: u64 },
    /// p = 3 mod 4; residue field F_{p^2}.
    Inert,
    /// p = 2.
    Ramified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianPrimeSite {
    pub p: u64,
    pub kind: SiteKind,
    /// |k^x| = Np - 1.
    pub residue_order: u64,
}

/// Square root of -1 modulo p = 1 (mod 4): n^((p-1)/4) for the first
/// quadratic non-residue n.
pub fn sqrt_minus_one(p: u64) -> u64 {
    debug_assert!(p % 4 == 1);
    let mut n = 2u64;
    loop {
        if powmod(n, (p - 1) / 2, p) == p - 1 {
            return powmod(n, (p - 1) / 4, p);
        }
        n += 1;
    }
}

/// Classify p; `conjugate` selects the larger root at split primes.
pub fn classify(p: u64, conjugate: bool) -> GaussianPrimeSite {
    if p == 2 {
        return GaussianPrimeSite {
            p,
            kind: SiteKind::Ramified,
            residue_order: 1,
        };
    }
    if p % 4 == 1 {
        let r = sqrt_minus_one(p);
        let canonical = r.min(p - r);
        let root = if conjugate { p - canonical } else { canonical };
        GaussianPrimeSite {
            p,
            kind: SiteKind::Split { root },
            residue_order: p - 1,
        }
    } else {
        GaussianPrimeSite {
            p,
            kind: SiteKind::Inert,
            residue_order: p * p - 1,
        }
    }
}

/// F_{p^2} as pairs (a, b) = a + b i with i^2 = -1, entries mod p.
type Fp2 = (u64, u64);

fn fp2_mul(x: Fp2, y: Fp2, p: u64) -> Fp2 {
    let (a, b) = x;
    let (c, d) = y;
    let re = (mulmod(a, c, p) + p - mulmod(b, d, p)) % p;
    let im = (mulmod(a, d, p) + mulmod(b, c, p)) % p;
    (re, im)
}

fn fp2_pow(mut base: Fp2, mut e: u64, p: u64) -> Fp2 {
    let mut acc = (1u64, 0u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = fp2_mul(acc, base, p);
        }
        base = fp2_mul(base, base, p);
        e >>= 1;
    }
    acc
}

fn fp2_order(g: Fp2, p: u64, order_factors: &[(u64, u32)]) -> u64 {
    let mut ord = p * p - 1;
    for &(q, _) in order_factors {
        while ord % q == 0 && fp2_pow(g, ord / q, p) == (1, 0) {
            ord /= q;
        }
    }
    ord
}

/// Reasons a site is excluded from the index map domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteExclusion {
    Ramified,
    DividesGeneratorNorm,
}

/// Index tuple of the generators at a site, or the exclusion reason.
/// The site is excluded when p ramifies (p = 2, which also divides the
/// torsion order 4 of Q(i)) or p divides the norm of some generator.
pub fn reduce_and_index(
    gens: &[GaussianInteger],
    site: &GaussianPrimeSite,
    nm1_factors: &[(u64, u32)],
) -> Result<Vec<u64>, SiteExclusion> {
    let p = site.p;
    if matches!(site.kind, SiteKind::Ramified) {
        return Err(SiteExclusion::Ramified);
    }
    if gens.iter().any(|g| g.norm() % p as u128 == 0) {
        return Err(SiteExclusion::DividesGeneratorNorm);
    }
    let mut out = Vec::with_capacity(gens.len());
    match site.kind {
        SiteKind::Split { root } => {
            for g in gens {
                let re = g.re.rem_euclid(p as i64) as u64;
                let im = g.im.rem_euclid(p as i64) as u64;
                let mapped = (re + mulmod(im, root, p)) % p;
                debug_assert!(mapped != 0);
                let ord = crate::resindex::multiplicative_order(mapped, p, nm1_factors);
                out.push((p - 1) / ord);
            }
        }
        SiteKind::Inert => {
            for g in gens {
                let re = g.re.rem_euclid(p as i64) as u64;
                let im = g.im.rem_euclid(p as i64) as u64;
                let ord = fp2_order((re, im), p, nm1_factors);
                out.push((p * p - 1) / ord);
            }
        }
        SiteKind::Ramified => unreachable!(),
    }
    Ok(out)
}

/// The fixture family: <a>, <b>, <ab>, <a^2 b> for a = 2+i, b = 3+2i.
pub fn four_group() -> Vec<GaussianInteger> {
    let a = GaussianInteger::new(2, 1);
    let b = GaussianInteger::new(3, 2);
    vec![a, b, a.mul(&b), a.mul(&a).mul(&b)]
}

/// Admissible q-adic valuation tuples: all entries equal, or exactly one
/// strictly larger with the remaining entries equal.
pub fn tuple_is_admissible(t: &[u32]) -> bool {
    let mut s = t.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n <= 1 {
        return true;
    }
    let all_equal = s.iter().all(|&x| x == s[0]);
    let one_larger = s[..n - 1].iter().all(|&x| x == s[0]) && s[n - 1] > s[0];
    all_equal || one_larger
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteRecord {
    pub p: u64,
    pub kind: SiteKind,
    pub indices: Vec<u64>,
    pub excluded: Option<SiteExclusion>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiScan {
    pub q: u64,
    pub norm_bound: u64,
    pub sites: u64,
    pub excluded: u64,
    /// Valuation tuple -> count.
    pub histogram: BTreeMap<Vec<u32>, u64>,
    /// Sites violating the admissible pattern (should stay empty).
    pub violations: Vec<(u64, Vec<u32>)>,
}

impl PsiScan {
    fn absorb(&mut self, p: u64, indices: &[u64], q: u64) {
        self.sites += 1;
        let tuple: Vec<u32> = indices.iter().map(|&h| valuation_u64(h, q)).collect();
        if !tuple_is_admissible(&tuple) {
            self.violations.push((p, tuple.clone()));
        }
        *self.histogram.entry(tuple).or_insert(0) += 1;
    }

    fn merge(mut self, other: PsiScan) -> PsiScan {
        self.sites += other.sites;
        self.excluded += other.excluded;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        self.violations.extend(other.violations);
        self
    }

    /// JSON view with stringified tuple keys.
    pub fn to_json(&self) -> serde_json::Value {
        let tuples: serde_json::Map<String, serde_json::Value> = self
            .histogram
            .iter()
            .map(|(k, &v)| {
                let key = format!(
                    "({})",
                    k.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                );
                (key, serde_json::Value::from(v))
            })
            .collect();
        serde_json::json!({
            "q": self.q,
            "norm_bound": self.norm_bound,
            "sites": self.sites,
            "excluded": self.excluded,
            "tuples": tuples,
            "violations": self.violations,
        })
    }
}

/// Histogram of Psi_q valuation tuples for the four-group over all
/// non-excluded sites of norm <= bound.
pub fn psi_q_scan(q: u64, bound: u64, conjugate: bool) -> Result<PsiScan, GaussError> {
    if q == 2 {
        return Err(GaussError::EvenQ);
    }
    if !crate::arith::is_prime_u64(q) {
        return Err(GaussError::NotPrime(q));
    }
    if bound < 25 {
        return Err(GaussError::BoundTooSmall(bound));
    }
    let gens = four_group();
    let init = || PsiScan {
        q,
        norm_bound: bound,
        ..PsiScan::default()
    };

    // split sites: norm p <= bound
    let engine = PrimeEngine::new(bound);
    let mut scan = engine.par_scan(
        |seg| {
            let mut acc = init();
            for fp in seg {
                if fp.p % 4 != 1 {
                    continue;
                }
                let site = classify(fp.p, conjugate);
                match reduce_and_index(&gens, &site, &fp.pm1) {
                    Ok(indices) => acc.absorb(fp.p, &indices, q),
                    Err(_) => acc.excluded += 1,
                }
            }
            acc
        },
        init(),
        PsiScan::merge,
    );

    // inert sites: norm p^2 <= bound; ramified p = 2 is excluded
    scan.excluded += 1;
    let root = crate::arith::integer_sqrt_u128(bound as u128) as u64;
    for p in small_primes(root).into_iter().filter(|&p| p % 4 == 3) {
        let site = classify(p, conjugate);
        let nm1 = factor_u64(p * p - 1);
        match reduce_and_index(&gens, &site, &nm1) {
            Ok(indices) => scan.absorb(p, &indices, q),
            Err(_) => scan.excluded += 1,
        }
    }
    Ok(scan)
}

/// Full site records for the four-group, for CSV export; sequential, meant
/// for moderate bounds.
pub fn site_records(bound: u64, conjugate: bool) -> Vec<SiteRecord> {
    let gens = four_group();
    let mut out = Vec::new();
    for p in small_primes(bound) {
        let site = classify(p, conjugate);
        let usable_norm = match site.kind {
            SiteKind::Inert => (p as u128) * (p as u128) <= bound as u128,
            _ => true,
        };
        if !usable_norm {
            continue;
        }
        let nm1 = match site.kind {
            SiteKind::Inert => factor_u64(p * p - 1),
            _ => factor_u64(p.max(2) - 1),
        };
        match reduce_and_index(&gens, &site, &nm1) {
            Ok(indices) => out.push(SiteRecord {
                p,
                kind: site.kind,
                indices,
                excluded: None,
            }),
            Err(reason) => out.push(SiteRecord {
                p,
                kind: site.kind,
                indices: vec![],
                excluded: Some(reason),
            }),
        }
    }
    out
}

/// CSV: `p,kind,root,ind_1,ind_2,ind_3,ind_4`.
pub fn write_site_csv<W: Write>(mut w: W, records: &[SiteRecord]) -> std::io::Result<()> {
    writeln!(w, "p,kind,root,ind_1,ind_2,ind_3,ind_4")?;
    for r in records {
        let (kind, root) = match r.kind {
            SiteKind::Split { root } => ("split", root.to_string()),
            SiteKind::Inert => ("inert", String::new()),
            SiteKind::Ramified => ("ramified", String::new()),
        };
        if r.excluded.is_some() {
            writeln!(w, "{},{},{},,,,", r.p, kind, root)?;
        } else {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.p, kind, root, r.indices[0], r.indices[1], r.indices[2], r.indices[3]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::lcm_u64;

    fn brute_order_fp(g: u64, p: u64) -> u64 {
        let mut acc = g % p;
        let mut ord = 1;
        while acc != 1 {
            acc = acc * g % p;
            ord += 1;
        }
        ord
    }

    #[test]
    fn site_classification() {
        let s5 = classify(5, false);
        assert_eq!(s5.kind, SiteKind::Split { root: 2 });
        assert_eq!(s5.residue_order, 4);
        let s13 = classify(13, false);
        assert_eq!(s13.kind, SiteKind::Split { root: 5 });
        assert_eq!(classify(13, true).kind, SiteKind::Split { root: 8 });
        assert_eq!(classify(3, false).kind, SiteKind::Inert);
        assert_eq!(classify(3, false).residue_order, 8);
        assert_eq!(classify(2, false).kind, SiteKind::Ramified);
    }

    #[test]
    fn reduce_and_index_fixtures() {
        // 2+i maps to 2 + 5 = 7 mod 13; brute order of 7 mod 13 is 12
        assert_eq!(brute_order_fp(7, 13), 12);
        let site = classify(13, false);
        let nm1 = factor_u64(12);
        let idx = reduce_and_index(&[GaussianInteger::new(2, 1)], &site, &nm1).unwrap();
        assert_eq!(idx, vec![1]);

        // inert p = 3: the index divides |F_9^x| = 8
        let s3 = classify(3, false);
        let idx3 = reduce_and_index(&[GaussianInteger::new(2, 1)], &s3, &factor_u64(8)).unwrap();
        assert_eq!(8 % idx3[0], 0);

        // ramified and norm-divisor exclusions
        assert_eq!(
            reduce_and_index(&[GaussianInteger::new(2, 1)], &classify(2, false), &[]),
            Err(SiteExclusion::Ramified)
        );
        assert_eq!(
            reduce_and_index(
                &[GaussianInteger::new(2, 1)],
                &classify(5, false),
                &factor_u64(4)
            ),
            Err(SiteExclusion::DividesGeneratorNorm)
        );
    }

    #[test]
    fn four_group_norms() {
        let g = four_group();
        assert_eq!(g[0].norm(), 5);
        assert_eq!(g[1].norm(), 13);
        assert_eq!(g[2], GaussianInteger::new(4, 7));
        assert_eq!(g[2].norm(), 65);
        assert_eq!(g[3], GaussianInteger::new(1, 18));
        assert_eq!(g[3].norm(), 325);
    }

    #[test]
    fn index_order_product_invariant() {
        // Ind * order = Np - 1 at split and inert sites
        let gens = four_group();
        for p in small_primes(500).into_iter().filter(|&p| p > 2) {
            let site = classify(p, false);
            let nm1 = match site.kind {
                SiteKind::Inert => factor_u64(p * p - 1),
                _ => factor_u64(p - 1),
            };
            if let Ok(idx) = reduce_and_index(&gens, &site, &nm1) {
                for &h in &idx {
                    assert_eq!(site.residue_order % h, 0, "p = {}", p);
                }
            }
        }
    }

    #[test]
    fn conjugate_sites_give_same_multiset() {
        // evaluating the conjugated generators at the canonical root equals
        // evaluating the original generators at the conjugate root, so the
        // tuple multiset over both sites does not depend on the convention
        let gens = four_group();
        let conj: Vec<GaussianInteger> = gens
            .iter()
            .map(|g| GaussianInteger::new(g.re, -g.im))
            .collect();
        for p in [17u64, 29, 37, 41, 53, 61] {
            let nm1 = factor_u64(p - 1);
            let at_conj_root = reduce_and_index(&gens, &classify(p, true), &nm1).unwrap();
            let conj_at_canonical = reduce_and_index(&conj, &classify(p, false), &nm1).unwrap();
            assert_eq!(at_conj_root, conj_at_canonical, "p = {}", p);
            let mut both_a = vec![
                reduce_and_index(&gens, &classify(p, false), &nm1).unwrap(),
                at_conj_root,
            ];
            let mut both_b = vec![
                conj_at_canonical,
                reduce_and_index(&conj, &classify(p, true), &nm1).unwrap(),
            ];
            both_a.sort();
            both_b.sort();
            assert_eq!(both_a, both_b, "p = {}", p);
        }
    }

    #[test]
    fn product_order_divides_lcm() {
        // ord(ab) divides lcm(ord a, ord b), so Ind(W_3) is a multiple of
        // (Np-1)/lcm(ord a, ord b)
        let gens = four_group();
        for p in small_primes(10_000).into_iter().filter(|&p| p % 4 == 1) {
            let nm1 = factor_u64(p - 1);
            let site = classify(p, false);
            if let Ok(idx) = reduce_and_index(&gens, &site, &nm1) {
                let ord_a = (p - 1) / idx[0];
                let ord_b = (p - 1) / idx[1];
                let bound = (p - 1) / lcm_u64(ord_a, ord_b);
                assert_eq!(idx[2] % bound, 0, "p = {}", p);
            }
        }
    }

    #[test]
    fn psi_scan_rejects_bad_q() {
        assert_eq!(psi_q_scan(2, 1000, false), Err(GaussError::EvenQ));
        assert_eq!(psi_q_scan(9, 1000, false), Err(GaussError::NotPrime(9)));
        assert_eq!(psi_q_scan(5, 10, false), Err(GaussError::BoundTooSmall(10)));
    }

    #[test]
    fn psi_scan_small_smoke() {
        let scan = psi_q_scan(5, 20_000, false).unwrap();
        assert!(scan.violations.is_empty(), "{:?}", scan.violations);
        // generic sites have valuation zero everywhere
        let zero = vec![0u32; 4];
        assert!(scan.histogram.get(&zero).copied().unwrap_or(0) > scan.sites / 2);
        // excluded: p = 2, 5, 13 (13 twice never: sites are per rational prime)
        assert_eq!(scan.excluded, 3);
        // conjugate scan sees the same tuple multiset
        let conj = psi_q_scan(5, 20_000, false).unwrap();
        assert_eq!(scan.histogram, conj.histogram);
    }

    #[test]
    fn q_three_data_reported_not_asserted() {
        // the q = 3 boundary analysis is incomplete upstream, so its
        // all-ones observation is reported without being required
        let scan = psi_q_scan(3, 100_000, false).unwrap();
        assert!(scan.violations.is_empty(), "{:?}", scan.violations);
        let ones = scan.histogram.get(&vec![1, 1, 1, 1]).copied().unwrap_or(0);
        println!("q=3 norm<=1e5: (1,1,1,1) observed at {} sites", ones);
    }

    #[test]
    fn admissible_pattern_logic() {
        assert!(tuple_is_admissible(&[0, 0, 0, 0]));
        assert!(tuple_is_admissible(&[1, 1, 1, 1]));
        assert!(tuple_is_admissible(&[2, 1, 1, 1]));
        assert!(tuple_is_admissible(&[1, 1, 3, 1]));
        assert!(!tuple_is_admissible(&[2, 2, 1, 1]));
        assert!(!tuple_is_admissible(&[2, 1, 0, 0]));
        assert!(!tuple_is_admissible(&[1, 0, 0, 2]));
    }

    #[test]
    fn csv_shape() {
        let recs = site_records(13, false);
        let mut buf = Vec::new();
        write_site_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,kind,root,ind_1,ind_2,ind_3,ind_4");
        assert!(lines[1].starts_with("2,ramified,,"));
        assert!(lines.iter().any(|l| l.starts_with("13,split,5,")));
    }
}
