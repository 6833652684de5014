//! Segmented prime engine. Each segment of [2, X] is sieved for primality
//! and the values p-1 for the primes p it contains are factored in one
//! interval pass over the base primes, so a scan obtains the full
//! factorization of p-1 in amortized O(log p). Segments are processed by
//! independent rayon workers and merged in segment order, which makes every
//! aggregate independent of the worker count.

use rayon::prelude::*;

use crate::arith::is_prime_u64;

pub const DEFAULT_SEGMENT: u64 = 1 << 20;

/// Simple sieve for the base primes up to `limit` inclusive.
pub fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut is_p = vec![true; n + 1];
    is_p[0] = false;
    if n >= 1 {
        is_p[1] = false;
    }
    let mut i = 2usize;
    while i * i <= n {
        if is_p[i] {
            for j in (i * i..=n).step_by(i) {
                is_p[j] = false;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&i| is_p[i]).map(|i| i as u64).collect()
}

/// One prime of a segment together with the factorization of p - 1.
#[derive(Debug, Clone)]
pub struct FactoredPrime {
    pub p: u64,
    /// (prime, exponent) pairs of p - 1, sorted by prime.
    pub pm1: Vec<(u64, u32)>,
}

pub struct PrimeEngine {
    bound: u64,
    segment: u64,
    base: Vec<u64>,
}

impl PrimeEngine {
    pub fn new(bound: u64) -> Self {
        Self::with_segment(bound, DEFAULT_SEGMENT)
    }

    pub fn with_segment(bound: u64, segment: u64) -> Self {
        let root = (bound as f64).sqrt() as u64 + 2;
        PrimeEngine {
            bound,
            segment: segment.max(1 << 10),
            base: small_primes(root),
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Odd segments of [3, bound]; p = 2 is handled by callers directly.
    fn segments(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut lo = 3u64;
        while lo <= self.bound {
            let hi = (lo + self.segment - 1).min(self.bound);
            out.push((lo, hi));
            lo = hi + 1;
        }
        out
    }

    /// Primes of [lo, hi] with factored p - 1, in increasing order.
    fn factored_segment(&self, lo: u64, hi: u64) -> Vec<FactoredPrime> {
        debug_assert!(lo >= 3);
        let len = (hi - lo + 1) as usize;
        let mut composite = vec![false; len];
        for &q in &self.base {
            if q * q > hi {
                break;
            }
            let mut m = lo.div_ceil(q) * q;
            if m == q {
                m += q;
            }
            while m <= hi {
                composite[(m - lo) as usize] = true;
                m += q;
            }
        }
        let mut primes: Vec<FactoredPrime> = (0..len)
            .filter(|&i| !composite[i])
            .map(|i| FactoredPrime {
                p: lo + i as u64,
                pm1: Vec::with_capacity(8),
            })
            .collect();
        if primes.is_empty() {
            return primes;
        }
        // interval-factor the shifted window [lo-1, hi-1] at the positions
        // p - 1; slot[v - (lo-1)] is the index into `primes`
        let wlo = lo - 1;
        let wlen = len; // window [wlo, wlo + len)
        let mut slot = vec![u32::MAX; wlen];
        let mut rem: Vec<u64> = Vec::with_capacity(primes.len());
        for (idx, fp) in primes.iter().enumerate() {
            slot[(fp.p - 1 - wlo) as usize] = idx as u32;
            rem.push(fp.p - 1);
        }
        for &q in &self.base {
            if q > hi - 1 {
                break;
            }
            let mut m = wlo.div_ceil(q) * q;
            if m == 0 {
                m = q;
            }
            while m < wlo + wlen as u64 {
                let s = slot[(m - wlo) as usize];
                if s != u32::MAX {
                    let idx = s as usize;
                    let mut v = 0u32;
                    while rem[idx] % q == 0 {
                        rem[idx] /= q;
                        v += 1;
                    }
                    if v > 0 {
                        primes[idx].pm1.push((q, v));
                    }
                }
                m += q;
            }
        }
        for (idx, fp) in primes.iter_mut().enumerate() {
            if rem[idx] > 1 {
                debug_assert!(is_prime_u64(rem[idx]));
                fp.pm1.push((rem[idx], 1));
            }
            fp.pm1.sort_unstable_by_key(|&(q, _)| q);
        }
        primes
    }

    /// Parallel map-reduce over segments. `seg_fn` consumes the factored
    /// primes of one segment; partial results are merged in segment order.
    pub fn par_scan<T, F, M>(&self, seg_fn: F, identity: T, merge: M) -> T
    where
        T: Send,
        F: Fn(&[FactoredPrime]) -> T + Sync,
        M: Fn(T, T) -> T,
    {
        let segs = self.segments();
        let parts: Vec<T> = segs
            .par_iter()
            .map(|&(lo, hi)| seg_fn(&self.factored_segment(lo, hi)))
            .collect();
        parts.into_iter().fold(identity, merge)
    }

    /// Sequential visit, mainly for small bounds and tests.
    pub fn for_each(&self, mut f: impl FnMut(&FactoredPrime)) {
        for (lo, hi) in self.segments() {
            for fp in self.factored_segment(lo, hi) {
                f(&fp);
            }
        }
    }
}

/// Number of primes in [2, x] (counting 2), by sieve; small x only.
pub fn prime_count(x: u64) -> u64 {
    small_primes(x).len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor_u64;

    #[test]
    fn small_primes_basic() {
        assert_eq!(small_primes(1), Vec::<u64>::new());
        assert_eq!(small_primes(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(prime_count(100), 25);
    }

    #[test]
    fn factored_segments_match_direct_factorization() {
        let engine = PrimeEngine::with_segment(20_000, 1 << 10);
        let mut seen = Vec::new();
        engine.for_each(|fp| {
            assert_eq!(factor_u64(fp.p - 1), fp.pm1, "p = {}", fp.p);
            seen.push(fp.p);
        });
        let odd_primes: Vec<u64> = small_primes(20_000)
            .into_iter()
            .filter(|&p| p > 2)
            .collect();
        assert_eq!(seen, odd_primes);
    }

    #[test]
    fn par_scan_deterministic_across_segment_sizes() {
        let count = |engine: &PrimeEngine| {
            engine.par_scan(
                |seg| seg.iter().map(|fp| fp.p as u128).sum::<u128>(),
                0u128,
                |a, b| a + b,
            )
        };
        let a = count(&PrimeEngine::with_segment(300_000, 1 << 12));
        let b = count(&PrimeEngine::with_segment(300_000, 1 << 16));
        let c = count(&PrimeEngine::with_segment(300_000, 77_777));
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn segment_boundaries_cover_everything() {
        // segment size forces splits around prime-rich regions
        let engine = PrimeEngine::with_segment(5000, 1 << 10);
        let mut n = 0u64;
        engine.for_each(|_| n += 1);
        assert_eq!(n + 1, prime_count(5000)); // +1 for p = 2
    }
}
