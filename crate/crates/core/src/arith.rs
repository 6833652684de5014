//! Integer primitives shared by the scanning and algebraic layers: gcd/lcm,
//! modular arithmetic, deterministic primality for 64-bit inputs and
//! factorization of inputs up to 128 bits, Kronecker symbols.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    gcd_u64(a.unsigned_abs(), b.unsigned_abs())
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}

pub fn lcm_u128(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u128(a, b) * b
}

/// 2-adic valuation of a nonzero integer.
pub fn v2_u64(n: u64) -> u32 {
    debug_assert!(n != 0);
    n.trailing_zeros()
}

/// p-adic valuation of n (n nonzero).
pub fn valuation_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn valuation_u128(mut n: u128, p: u128) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Modular inverse for prime modulus.
pub fn invmod_prime(a: u64, p: u64) -> u64 {
    powmod(a % p, p - 2, p)
}

/// Deterministic Miller-Rabin for 64-bit inputs (the first twelve prime bases
/// decide primality for everything below 3.3e24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn mulmod_u128(a: u128, b: u128, m: u128) -> u128 {
    if let (Some(a64), Some(b64), Some(m64)) =
        (a.to_u64_checked(), b.to_u64_checked(), m.to_u64_checked())
    {
        return mulmod(a64, b64, m64) as u128;
    }
    let prod = BigUint::from(a) * BigUint::from(b) % BigUint::from(m);
    prod.to_u128().unwrap()
}

trait ToU64Checked {
    fn to_u64_checked(&self) -> Option<u64>;
}

impl ToU64Checked for u128 {
    fn to_u64_checked(&self) -> Option<u64> {
        if *self <= u64::MAX as u128 {
            Some(*self as u64)
        } else {
            None
        }
    }
}

fn powmod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u128(acc, base, m);
        }
        base = mulmod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Strong-probable-prime test to the first twelve prime bases. Exact below
/// 3.3e24; for wider inputs it is a primality check at desk scale.
pub fn is_prime_u128(n: u128) -> bool {
    if n <= u64::MAX as u128 {
        return is_prime_u64(n as u64);
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'base: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u128(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

/// Pollard-Brent rho; expects odd composite n with no factor below 2^16.
fn pollard_rho_u128(n: u128, seed: u64) -> u128 {
    let mut c = 1 + (seed as u128) % (n - 1);
    loop {
        let f = |x: u128| (mulmod_u128(x, x, n) + c) % n;
        let mut x = 2u128;
        let mut y = 2u128;
        let mut d = 1u128;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u128(x.abs_diff(y), n);
            count += 1;
            if count > 1 << 24 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c = (c + 1) % n;
        if c == 0 {
            c = 1;
        }
    }
}

/// Full factorization of a 128-bit integer, sorted by prime.
pub fn factor_u128(mut n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    for p in 2u128..=3 {
        if n % p == 0 {
            let mut v = 0;
            while n % p == 0 {
                n /= p;
                v += 1;
            }
            out.push((p, v));
        }
    }
    let mut p = 5u128;
    let mut step = 2u128;
    while p <= 1 << 16 && p * p <= n {
        if n % p == 0 {
            let mut v = 0;
            while n % p == 0 {
                n /= p;
                v += 1;
            }
            out.push((p, v));
        }
        p += step;
        step = 6 - step;
    }
    // remaining cofactor has no prime factor below 2^16
    let mut stack = vec![n];
    let mut big: Vec<u128> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u128(m) {
            big.push(m);
            continue;
        }
        // perfect squares defeat rho's cycle finding, split them first
        let r = integer_sqrt_u128(m);
        if r * r == m {
            stack.push(r);
            stack.push(r);
            continue;
        }
        let d = pollard_rho_u128(m, 0xd1b5_4a32_d192_ed03);
        stack.push(d);
        stack.push(m / d);
    }
    big.sort_unstable();
    let mut i = 0;
    while i < big.len() {
        let p = big[i];
        let mut v = 0;
        while i < big.len() && big[i] == p {
            v += 1;
            i += 1;
        }
        out.push((p, v));
    }
    out.sort_unstable_by_key(|&(p, _)| p);
    out
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor_u128(n as u128)
        .into_iter()
        .map(|(p, v)| (p as u64, v))
        .collect()
}

pub fn integer_sqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x > 0 && x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

/// Kronecker symbol (a/n), extending the Jacobi symbol to all integers.
pub fn kronecker(mut a: i128, mut n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let v = n.trailing_zeros();
    n >>= v;
    // (a/2)^v
    if v % 2 == 1 {
        let am8 = a.rem_euclid(8);
        if am8 == 3 || am8 == 5 {
            result = -result;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 {
            let nm8 = n.rem_euclid(8);
            if nm8 == 3 || nm8 == 5 {
                result = -result;
            }
        }
        // quadratic reciprocity for odd positives
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            result = -result;
        }
        let tmp = a;
        a = n % tmp;
        n = tmp;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Sorted divisors of n from its factorization.
pub fn divisors_u128(factors: &[(u128, u32)]) -> Vec<u128> {
    let mut divs = vec![1u128];
    for &(p, v) in factors {
        let mut next = Vec::with_capacity(divs.len() * (v as usize + 1));
        for &d in &divs {
            let mut pe = 1u128;
            for _ in 0..=v {
                next.push(d * pe);
                pe = pe.saturating_mul(p);
            }
        }
        divs = next;
    }
    divs.sort_unstable();
    divs
}

/// Euler phi from a factorization.
pub fn euler_phi_u128(factors: &[(u128, u32)]) -> u128 {
    let mut phi = 1u128;
    for &(p, v) in factors {
        phi *= p.pow(v - 1) * (p - 1);
    }
    phi
}

/// Deterministic xorshift-style generator for seeded randomized tests and
/// the differential harness; stable across platforms.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform in [lo, hi] inclusive.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_lcm_basics() {
        assert_eq!(gcd_u64(12, 18), 6);
        assert_eq!(gcd_u64(0, 7), 7);
        assert_eq!(lcm_u64(4, 6), 12);
        assert_eq!(lcm_u128(0, 5), 0);
    }

    #[test]
    fn powmod_matches_naive() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..200 {
            let m = 2 + rng.below(1000);
            let b = rng.below(m);
            let e = rng.below(50);
            let mut naive = 1u64 % m;
            for _ in 0..e {
                naive = naive * b % m;
            }
            assert_eq!(powmod(b, e, m), naive);
        }
    }

    #[test]
    fn primality_small_range() {
        let sieve_primes: Vec<u64> = {
            let n = 2000usize;
            let mut is_p = vec![true; n + 1];
            is_p[0] = false;
            is_p[1] = false;
            for i in 2..=n {
                if is_p[i] {
                    for j in (i * i..=n).step_by(i) {
                        is_p[j] = false;
                    }
                }
            }
            (0..=n).filter(|&i| is_p[i]).map(|i| i as u64).collect()
        };
        for n in 0..=2000u64 {
            assert_eq!(is_prime_u64(n), sieve_primes.contains(&n), "n = {}", n);
        }
    }

    #[test]
    fn factor_roundtrip() {
        let mut rng = SplitMix64::new(42);
        for _ in 0..300 {
            let n = 2 + rng.below(1 << 40) as u128;
            let f = factor_u128(n);
            let back: u128 = f.iter().map(|&(p, v)| p.pow(v)).product();
            assert_eq!(back, n);
            for &(p, _) in &f {
                assert!(is_prime_u128(p));
            }
        }
        assert_eq!(factor_u128(1), vec![]);
        assert_eq!(factor_u128(97 * 97), vec![(97, 2)]);
    }

    #[test]
    fn factor_large_square() {
        let p = 4_294_967_311u128; // prime just above 2^32
        assert_eq!(factor_u128(p * p), vec![(p, 2)]);
    }

    #[test]
    fn kronecker_quadratic_residues() {
        // (a/p) for odd prime p agrees with Euler's criterion
        for p in [3u64, 5, 7, 11, 13, 101] {
            for a in 1..p {
                let euler = powmod(a, (p - 1) / 2, p);
                let expected = if euler == 1 { 1 } else { -1 };
                assert_eq!(kronecker(a as i128, p as i128), expected, "a={} p={}", a, p);
            }
        }
        // conductor-8 character: (8/t) = 1 iff t = ±1 mod 8
        for t in [1i128, 7, 9, 15, 17] {
            assert_eq!(kronecker(8, t), 1);
        }
        for t in [3i128, 5, 11, 13] {
            assert_eq!(kronecker(8, t), -1);
        }
        // discriminant -3 character mod 3
        for t in [1i128, 7, 13] {
            assert_eq!(kronecker(-3, t), 1);
        }
        for t in [5i128, 11, 17] {
            assert_eq!(kronecker(-3, t), -1);
        }
    }

    #[test]
    fn divisors_and_phi() {
        let f = factor_u128(60);
        assert_eq!(
            divisors_u128(&f),
            vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]
        );
        assert_eq!(euler_phi_u128(&f), 16);
    }
}
