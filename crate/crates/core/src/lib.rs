//! Index-map machinery for finitely generated multiplicative groups of
//! rationals and Gaussian rationals: exact group arithmetic, high-throughput
//! order/index scans over primes, closed-form image descriptions for rank-1
//! groups, cyclotomic-Kummer degrees, solvers for the underlying systems of
//! congruences and incongruences, and truncated density products, each
//! cross-validated against brute-force prime scans.

pub mod acceptance;
pub mod arith;
pub mod consolve;
pub mod density;
pub mod gaussidx;
pub mod intmat;
pub mod kummerdeg;
pub mod primes;
pub mod psidecide;
pub mod rank1image;
pub mod ratmul;
pub mod resindex;

pub use ratmul::{
    canonical_decompose, factor_rational, is_separated, parse_rational, power_membership,
    CanonicalDecomposition, FactoredRational, PowerMembership, SubgroupLattice,
};
