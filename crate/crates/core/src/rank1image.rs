//! Closed-form image of the index map p -> Ind_p(a) for a rational
//! a outside {0, 1, -1}, as p ranges over the odd primes with v_p(a) = 0.
//! The complement of the image is the union of up to four residue-structured
//! exceptional families derived from the canonical decomposition of a:
//!
//!   E_square: odd values           (a an even power with positive root)
//!   E_T:      odd multiples of |T| (T-divisibility forces even index)
//!   E_2T:     odd multiples of 2|T|
//!   E_3T:     values n * 2^m |T| / 3 with 3 not dividing n (cube case)

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arith::lcm_u128;
use crate::ratmul::{CanonicalDecomposition, FactoredRational, RatmulError};

/// The exceptional families attached to one rational; `None` marks an
/// absent family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalSets {
    /// Present iff d >= 1 and eps = 0: all odd values.
    pub square: bool,
    /// Present iff d = delta = eps = 0: odd multiples of this value (|T|).
    pub t_multiples: Option<u128>,
    /// Present iff d = delta = eps = 1: odd multiples of this value (2|T|).
    pub two_t_multiples: Option<u128>,
    /// Present iff a is a cube and 3 | |T|: values n*unit with 3 not
    /// dividing n, where unit = 2^m |T| / 3.
    pub cube_unit: Option<u128>,
    /// Exponent m of the five-case table (recorded even when absent).
    pub m: u32,
}

/// The m-table: position of the 2-power in the cube family.
fn m_exponent(dec: &CanonicalDecomposition) -> u32 {
    let (eps, delta, d) = (dec.epsilon, dec.delta, dec.d);
    match (eps, delta) {
        (0, 0) => d + 1,
        (0, 1) => (d + 1).max(3),
        (1, 0) => d + 2,
        (1, 1) => {
            if d == 1 {
                2
            } else {
                (d + 2).max(3)
            }
        }
        _ => unreachable!(),
    }
}

pub fn exceptional_sets_from(
    a: &FactoredRational,
    dec: &CanonicalDecomposition,
) -> ExceptionalSets {
    let abs_t = dec.abs_t();
    let m = m_exponent(dec);
    let square = dec.d >= 1 && dec.epsilon == 0;
    let t_multiples = (dec.d == 0 && dec.delta == 0 && dec.epsilon == 0).then_some(abs_t);
    let two_t_multiples = (dec.d == 1 && dec.delta == 1 && dec.epsilon == 1).then_some(2 * abs_t);
    let cube_unit = (a.is_cube() && abs_t % 3 == 0).then(|| (1u128 << m) * (abs_t / 3));
    ExceptionalSets {
        square,
        t_multiples,
        two_t_multiples,
        cube_unit,
        m,
    }
}

pub fn exceptional_sets(a: &FactoredRational) -> Result<ExceptionalSets, RatmulError> {
    let dec = crate::ratmul::canonical_decompose(a)?;
    Ok(exceptional_sets_from(a, &dec))
}

impl ExceptionalSets {
    /// Membership of h in the union of present families.
    pub fn excludes(&self, h: u128) -> bool {
        if h == 0 {
            return false;
        }
        if self.square && h % 2 == 1 {
            return true;
        }
        if let Some(t) = self.t_multiples {
            if h % t == 0 && (h / t) % 2 == 1 {
                return true;
            }
        }
        if let Some(tt) = self.two_t_multiples {
            if h % tt == 0 && (h / tt) % 2 == 1 {
                return true;
            }
        }
        if let Some(u) = self.cube_unit {
            if h % u == 0 && (h / u) % 3 != 0 {
                return true;
            }
        }
        false
    }

    /// Modulus of one family as a residue-class union.
    fn family_moduli(&self) -> Vec<u128> {
        let mut m = Vec::new();
        if self.square {
            m.push(2);
        }
        if let Some(t) = self.t_multiples {
            m.push(2 * t);
        }
        if let Some(tt) = self.two_t_multiples {
            m.push(2 * tt);
        }
        if let Some(u) = self.cube_unit {
            m.push(3 * u);
        }
        m
    }
}

/// h is attained by the index map iff it avoids every present family.
pub fn in_image(sets: &ExceptionalSets, h: u128) -> bool {
    !sets.excludes(h)
}

/// Periodic description: h in image iff (h mod modulus) is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDescriptor {
    pub modulus: u64,
    pub allowed_residues: Vec<u64>,
    pub sets: ExceptionalSets,
}

/// Least modulus M such that the union of exceptional families is a union
/// of residue classes mod M, together with the allowed classes.
pub fn image_descriptor(sets: &ExceptionalSets) -> ImageDescriptor {
    let m0 = sets.family_moduli().into_iter().fold(1u128, lcm_u128);
    let m0_u64 = u64::try_from(m0).expect("descriptor modulus fits u64 at desk scale");
    // excluded residues modulo m0; class r means the arithmetic progression
    // r + m0 Z intersected with the positive integers
    let excluded: Vec<bool> = (0..m0_u64)
        .map(|r| {
            // representative r + m0 is positive and lies in the class
            sets.excludes(r as u128 + m0)
        })
        .collect();
    // minimal divisor of m0 under which the excluded set is periodic
    let mut best = m0_u64;
    'outer: for div in 1..=m0_u64 {
        if m0_u64 % div != 0 {
            continue;
        }
        for r in 0..m0_u64 {
            if excluded[r as usize] != excluded[((r + div) % m0_u64) as usize] {
                continue 'outer;
            }
        }
        best = div;
        break;
    }
    let allowed_residues: Vec<u64> = (0..best).filter(|&r| !excluded[r as usize]).collect();
    ImageDescriptor {
        modulus: best,
        allowed_residues,
        sets: sets.clone(),
    }
}

impl ImageDescriptor {
    pub fn admits(&self, h: u128) -> bool {
        let r = (h % self.modulus as u128) as u64;
        self.allowed_residues.binary_search(&r).is_ok()
    }
}

/// JSON shape used by the CLI: one entry per present family.
#[derive(Debug, Serialize, Deserialize)]
pub struct ImageJson {
    pub a: String,
    pub decomposition: crate::ratmul::DecompositionJson,
    pub sets: Vec<SetJson>,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub allowed_residues: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SetJson {
    pub kind: String,
    pub modulus: u128,
    pub residue_or_generator: u128,
}

pub fn image_json(
    a: &FactoredRational,
    dec: &crate::ratmul::CanonicalDecomposition,
    desc: &ImageDescriptor,
) -> ImageJson {
    let mut sets = Vec::new();
    if desc.sets.square {
        sets.push(SetJson {
            kind: "square".into(),
            modulus: 2,
            residue_or_generator: 1,
        });
    }
    if let Some(t) = desc.sets.t_multiples {
        sets.push(SetJson {
            kind: "T".into(),
            modulus: 2 * t,
            residue_or_generator: t,
        });
    }
    if let Some(tt) = desc.sets.two_t_multiples {
        sets.push(SetJson {
            kind: "2T".into(),
            modulus: 2 * tt,
            residue_or_generator: tt,
        });
    }
    if let Some(u) = desc.sets.cube_unit {
        sets.push(SetJson {
            kind: "3T".into(),
            modulus: 3 * u,
            residue_or_generator: u,
        });
    }
    ImageJson {
        a: a.to_string(),
        decomposition: dec.into(),
        sets,
        modulus: desc.modulus,
        allowed_residues: desc.allowed_residues.clone(),
    }
}

/// All h <= cap in the image, as a set (test and reporting helper).
pub fn image_up_to(sets: &ExceptionalSets, cap: u128) -> BTreeSet<u128> {
    (1..=cap).filter(|&h| in_image(sets, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psidecide;
    use crate::ratmul::{canonical_decompose, factor_rational};

    fn fr(n: i128) -> FactoredRational {
        factor_rational(n, 1).unwrap()
    }

    fn sets(n: i128) -> ExceptionalSets {
        exceptional_sets(&fr(n)).unwrap()
    }

    #[test]
    fn surjective_for_two() {
        let s = sets(2);
        assert!(!s.square && s.t_multiples.is_none() && s.two_t_multiples.is_none());
        assert!(s.cube_unit.is_none());
        for h in 1..=100u128 {
            assert!(in_image(&s, h));
        }
    }

    #[test]
    fn minus_hundred_misses_ten_mod_twenty() {
        let s = sets(-100);
        assert_eq!(s.two_t_multiples, Some(10));
        assert!(!s.square && s.t_multiples.is_none() && s.cube_unit.is_none());
        assert!(s.excludes(10) && s.excludes(30) && s.excludes(50));
        assert!(!s.excludes(20) && !s.excludes(40) && !s.excludes(2));
        let d = image_descriptor(&s);
        assert_eq!(d.modulus, 20);
        let missing: Vec<u64> = (0..20)
            .filter(|r| !d.allowed_residues.contains(r))
            .collect();
        assert_eq!(missing, vec![10]);
    }

    #[test]
    fn four_has_even_image() {
        let s = sets(4);
        assert!(s.square);
        assert!(s.t_multiples.is_none() && s.two_t_multiples.is_none() && s.cube_unit.is_none());
        let d = image_descriptor(&s);
        assert_eq!(d.modulus, 2);
        assert_eq!(d.allowed_residues, vec![0]);
    }

    #[test]
    fn minus_twentyseven_families() {
        let s = sets(-27);
        assert_eq!(s.t_multiples, Some(3));
        assert_eq!(s.m, 1);
        assert_eq!(s.cube_unit, Some(2));
        assert!(!s.square && s.two_t_multiples.is_none());
        // E_T odd multiples of 3; E_3T = {2n : 3 does not divide n}
        assert!(s.excludes(3) && s.excludes(9) && s.excludes(15));
        assert!(s.excludes(2) && s.excludes(4) && s.excludes(8) && s.excludes(22));
        assert!(!s.excludes(6) && !s.excludes(12) && !s.excludes(1));
        let d = image_descriptor(&s);
        assert_eq!(d.modulus, 6);
        assert_eq!(d.allowed_residues, vec![0, 1, 5]);
    }

    #[test]
    fn fixture_family_presence() {
        // derived case analysis for the soundness fixture list
        assert!(sets(3).family_moduli().is_empty()); // eps=1, d=delta=0
        assert_eq!(sets(5).t_multiples, Some(5));
        assert!(sets(8).family_moduli().is_empty()); // cube but 3 does not divide T=1
        assert_eq!(sets(-3).t_multiples, Some(3));
        assert_eq!(sets(-4).two_t_multiples, Some(2));
        assert!(sets(12).family_moduli().is_empty()); // eps=1 kills E_T
    }

    #[test]
    fn in_image_examples() {
        assert!(!in_image(&sets(-3), 9));
        assert!(in_image(&sets(-3), 6));
        for h in 1..=50 {
            assert!(in_image(&sets(2), h));
        }
    }

    #[test]
    fn descriptor_faithfulness() {
        for a in [2i128, 3, 4, 5, 8, -3, -4, -27, -100, 12] {
            let s = sets(a);
            let d = image_descriptor(&s);
            for h in 1..=(10 * d.modulus as u128).max(60) {
                assert_eq!(in_image(&s, h), d.admits(h), "a = {} h = {}", a, h);
            }
        }
    }

    #[test]
    fn minus_four_descriptor() {
        let d = image_descriptor(&sets(-4));
        assert_eq!(d.modulus, 4);
        assert_eq!(d.allowed_residues, vec![0, 1, 3]);
    }

    #[test]
    fn gcd_reduction_consistency() {
        // membership is invariant under h -> gcd(h, Z)
        for a in [2i128, 4, 5, 8, -3, -4, -27, -100, 12] {
            let af = fr(a);
            let dec = canonical_decompose(&af).unwrap();
            let s = exceptional_sets_from(&af, &dec);
            for h in 1..=10_000u128 {
                let red = psidecide::gcd_reduce_with(&dec, h);
                assert_eq!(in_image(&s, h), in_image(&s, red), "a = {} h = {}", a, h);
            }
        }
    }
}
