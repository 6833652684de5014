//! Cross-validation of the closed-form machinery against scan-based
//! oracles, beyond the fixed acceptance grid: entangled two-power cases
//! (negative squares, cubes, mixed kernels) and image/scan agreement.

use indexmap_core::density::{empirical_density, to_f64, truncated_density, Target};
use indexmap_core::kummerdeg::{degree_statistical_batch, full_degree, KummerQuery};
use indexmap_core::ratmul::{factor_rational, FactoredRational, SubgroupLattice};

fn fr(n: i128) -> FactoredRational {
    factor_rational(n, 1).unwrap()
}

#[test]
fn entangled_degrees_match_split_densities() {
    // each pair (a, n, m) carries a different entanglement mechanism
    let grid: Vec<(i128, u64, u64)> = vec![
        (-4, 4, 4),   // (-4)^{1/4} = 1+i, degree 1 over Q(zeta_4)
        (-4, 8, 8),   // stops at depth d+1 = 2
        (8, 2, 8),    // sqrt 8 = 2 sqrt 2 in Q(zeta_8)
        (8, 8, 24),   // odd cube content D = 3 does not help 2-powers
        (-27, 2, 24), // sqrt(-27) = 3 sqrt(-3) in Q(zeta_3)
        (-27, 2, 8),  // ... but not in the 2-power tower
        (12, 2, 24),  // sqrt 12 = 2 sqrt 3, conductor 12
        (12, 4, 8),
        (-100, 4, 20), // (-100)^{1/4} = sqrt(5)(1+i) in Q(zeta_20)
        (-100, 8, 40),
    ];
    let queries: Vec<KummerQuery> = grid
        .iter()
        .map(|&(a, n, m)| KummerQuery::new(fr(a), n, m).unwrap())
        .collect();
    let expected: Vec<u64> = queries.iter().map(|q| full_degree(q).unwrap()).collect();
    assert_eq!(
        expected,
        vec![2, 8, 4, 32, 8, 8, 8, 16, 8, 32],
        "closed-form degrees drifted"
    );
    let stats = degree_statistical_batch(&queries, 300_000).unwrap();
    for ((q, stat), &deg) in queries.iter().zip(&stats).zip(&expected) {
        assert!(
            stat.contains(deg),
            "(a={}, n={}, m={}): degree {} outside [{:.2}, {:.2}] ({} hits)",
            q.a,
            q.n,
            q.m,
            deg,
            stat.degree_low,
            stat.degree_high,
            stat.hits
        );
    }
}

#[test]
fn truncated_density_tracks_empirical_for_nontrivial_targets() {
    // beyond the all-ones case: h = 2 for a = 2 and h = 4 for a = 4 have
    // positive densities with entangled small-prime factors
    for (a, h) in [(2i128, 2u64), (4, 2), (4, 4), (-3, 2), (5, 2)] {
        let af = fr(a);
        let trunc = to_f64(&truncated_density(&af, h, 50).unwrap());
        let emp = empirical_density(
            &[SubgroupLattice::new(vec![af.clone()])],
            &Target::Tuple(vec![h]),
            400_000,
            None,
        )
        .unwrap();
        assert!(
            (emp.ratio - trunc).abs() < 0.01,
            "a = {} h = {}: truncated {} empirical {}",
            a,
            h,
            trunc,
            emp.ratio
        );
        assert!(trunc > 0.0);
    }
}
