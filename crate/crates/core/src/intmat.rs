//! Exact integer linear algebra on small dense matrices: rational rank,
//! Hermite-style row reduction with unimodular transform, rational solves
//! against an independent row basis, and the exponent of Z^k modulo a
//! full-rank column lattice. Everything runs over BigInt; no floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn to_big_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Rank over the rationals by fraction-free elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let Some(pivot) = (row..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, pivot);
        for i in row + 1..nrows {
            if m[i][col].is_zero() {
                continue;
            }
            let (a, b) = (m[row][col].clone(), m[i][col].clone());
            for j in col..ncols {
                let t = &m[i][j] * &a - &m[row][j] * &b;
                m[i][j] = t;
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

/// Row-style Hermite reduction tracking the unimodular transform:
/// returns (H, U) with U * A = H, H in row-echelon form with positive
/// pivots, and the zero rows of H at the bottom. Rows 0..rank of H form a
/// basis of the row lattice of A; rows rank.. of U span the integer kernel.
pub fn hermite_with_transform(a: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, usize) {
    let nrows = a.len();
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    let mut h: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..nrows)
        .map(|i| {
            (0..nrows)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row >= nrows {
            break;
        }
        // euclidean elimination in this column below pivot_row
        loop {
            let mut idx: Option<usize> = None;
            for i in pivot_row..nrows {
                if !h[i][col].is_zero() {
                    idx = match idx {
                        None => Some(i),
                        Some(j) => {
                            if h[i][col].abs() < h[j][col].abs() {
                                Some(i)
                            } else {
                                Some(j)
                            }
                        }
                    };
                }
            }
            let Some(min_i) = idx else { break };
            h.swap(pivot_row, min_i);
            u.swap(pivot_row, min_i);
            let mut done = true;
            for i in pivot_row + 1..nrows {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = &h[i][col] / &h[pivot_row][col];
                if !q.is_zero() {
                    for j in 0..ncols {
                        let t = &h[i][j] - &q * &h[pivot_row][j];
                        h[i][j] = t;
                    }
                    for j in 0..nrows {
                        let t = &u[i][j] - &q * &u[pivot_row][j];
                        u[i][j] = t;
                    }
                }
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !h[pivot_row][col].is_zero() {
            if h[pivot_row][col].is_negative() {
                for j in 0..ncols {
                    h[pivot_row][j] = -h[pivot_row][j].clone();
                }
                for j in 0..nrows {
                    u[pivot_row][j] = -u[pivot_row][j].clone();
                }
            }
            pivot_row += 1;
        }
    }
    (h, u, pivot_row)
}

/// Coordinates of v over a set of linearly independent rows, if v lies in
/// their rational span. Gaussian elimination over BigRational.
pub fn solve_rational(basis: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<BigRational>> {
    let k = basis.len();
    let n = v.len();
    if k == 0 {
        return if v.iter().all(|x| x.is_zero()) {
            Some(vec![])
        } else {
            None
        };
    }
    // solve c * basis = v: transpose to (n x k) system
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..k)
                .map(|i| BigRational::from(basis[i][j].clone()))
                .collect();
            row.push(BigRational::from(v[j].clone()));
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].clone();
        for j in c..=k {
            let t = &aug[r][j] / &inv;
            aug[r][j] = t;
        }
        for i in 0..n {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=k {
                    let t = &aug[i][j] - &f * &aug[r][j];
                    aug[i][j] = t;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == n {
            break;
        }
    }
    // inconsistent if any remaining row has zero coefficients but nonzero rhs
    for i in r..n {
        if !aug[i][k].is_zero() {
            return None;
        }
    }
    let mut coords = vec![BigRational::zero(); k];
    for &(row, col) in &pivots {
        coords[col] = aug[row][k].clone();
    }
    Some(coords)
}

/// Exponent of Z^k modulo the lattice generated by the columns of the
/// k x n matrix whose rows are `rows` (the image lattice of y -> rows * y).
/// Requires the rows to be linearly independent (full image rank); returns
/// the least M with M*Z^k contained in the image.
pub fn image_lattice_exponent(rows: &[Vec<BigInt>]) -> Option<BigInt> {
    let k = rows.len();
    if k == 0 {
        return Some(BigInt::one());
    }
    let n = rows[0].len();
    // columns of the map generate the image; Hermite-reduce them as rows
    let cols: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..k).map(|i| rows[i][j].clone()).collect())
        .collect();
    let (h, _, rank) = hermite_with_transform(&cols);
    if rank < k {
        return None;
    }
    let basis: Vec<Vec<BigInt>> = h[..k].to_vec();
    // M = lcm over unit vectors e_i of the denominator needed to express e_i
    let mut m = BigInt::one();
    for i in 0..k {
        let e_i: Vec<BigInt> = (0..k)
            .map(|j| {
                if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            })
            .collect();
        let coords = solve_rational(&basis, &e_i)?;
        for c in coords {
            let den = c.denom().clone();
            let g = num_integer::Integer::gcd(&m, &den);
            m = m / g * den;
        }
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        to_big_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&bi(&[&[1, 0], &[0, 1]])), 2);
        assert_eq!(rank(&bi(&[&[1, 0], &[0, 1], &[1, 1]])), 2);
        assert_eq!(rank(&bi(&[&[0, 0]])), 0);
        assert_eq!(rank(&bi(&[&[2, 4], &[1, 2]])), 1);
    }

    #[test]
    fn hermite_transform_invariant() {
        let a = bi(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (h, u, rank) = hermite_with_transform(&a);
        // U * A = H
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = BigInt::zero();
                for l in 0..3 {
                    acc += &u[i][l] * &a[l][j];
                }
                assert_eq!(acc, h[i][j]);
            }
        }
        assert!(rank <= 3);
        for row in &h[rank..] {
            assert!(row.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_rational_coords() {
        let basis = bi(&[&[2, 0], &[0, 3]]);
        let v: Vec<BigInt> = vec![BigInt::from(1), BigInt::from(1)];
        let c = solve_rational(&basis, &v).unwrap();
        assert_eq!(c[0], BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(c[1], BigRational::new(BigInt::from(1), BigInt::from(3)));
        let w: Vec<BigInt> = vec![BigInt::from(1), BigInt::from(0)];
        assert!(solve_rational(&bi(&[&[1, 1]]), &w).is_none());
    }

    #[test]
    fn image_exponent_examples() {
        // identity map: exponent 1
        assert_eq!(
            image_lattice_exponent(&bi(&[&[1, 0], &[0, 1]])).unwrap(),
            BigInt::one()
        );
        // y -> 2y has index-2 image
        assert_eq!(
            image_lattice_exponent(&bi(&[&[2]])).unwrap(),
            BigInt::from(2)
        );
        // rows (1,0) and (1,2): columns (1,1) and (0,2) generate index-2 lattice
        assert_eq!(
            image_lattice_exponent(&bi(&[&[1, 0], &[1, 2]])).unwrap(),
            BigInt::from(2)
        );
        // richer map y -> (y1+y2, y2) is onto
        assert_eq!(
            image_lattice_exponent(&bi(&[&[1, 1], &[0, 1]])).unwrap(),
            BigInt::one()
        );
        // rank-deficient image
        assert!(image_lattice_exponent(&bi(&[&[1, 1], &[2, 2]])).is_none());
    }
}
