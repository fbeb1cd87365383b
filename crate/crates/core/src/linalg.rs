//! Exact rank and determinant by fraction-free (Bareiss) elimination.
//!
//! Rows are scaled to integers first; rank and determinant sign/value are
//! unaffected by positive row scalings (the determinant is rescaled back).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::algebra::Rat;

fn rows_to_integers(rows: &[Vec<Rat>]) -> (Vec<Vec<BigInt>>, Rat) {
    // Returns integer rows and the product of the scalings applied.
    let mut scaled = Vec::with_capacity(rows.len());
    let mut scaling = Rat::one();
    for row in rows {
        let mut lcm = BigInt::one();
        for x in row {
            lcm = lcm.lcm(x.denom());
        }
        scaling *= Rat::from_integer(lcm.clone());
        scaled.push(
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        );
    }
    (scaled, scaling)
}

/// Rank of the matrix whose rows are `rows`, exact over the rationals.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let (mut m, _) = rows_to_integers(rows);
    let nrows = m.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    let mut pivot_col = 0;
    while rank < nrows && pivot_col < ncols {
        // Find a pivot in this column at or below `rank`.
        let Some(pivot_row) = (rank..nrows).find(|&r| !m[r][pivot_col].is_zero()) else {
            pivot_col += 1;
            continue;
        };
        m.swap(rank, pivot_row);
        for r in rank + 1..nrows {
            for c in pivot_col + 1..ncols {
                let num = &m[rank][pivot_col] * &m[r][c] - &m[r][pivot_col] * &m[rank][c];
                m[r][c] = &num / &prev;
            }
            m[r][pivot_col] = BigInt::zero();
        }
        prev = m[rank][pivot_col].clone();
        rank += 1;
        pivot_col += 1;
    }
    rank
}

/// Exact determinant of a square rational matrix given by rows.
pub fn det(rows: &[Vec<Rat>]) -> Rat {
    let n = rows.len();
    if n == 0 {
        return Rat::one();
    }
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let (mut m, scaling) = rows_to_integers(rows);
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Rat::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let num = &m[k][k] * &m[r][c] - &m[r][k] * &m[k][c];
                m[r][c] = &num / &prev;
            }
            m[r][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let d = Rat::from_integer(m[n - 1][n - 1].clone()) / scaling;
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Solve a small square float system by Gaussian elimination with partial
/// pivoting. Returns `None` if the matrix is numerically singular.
pub fn solve_f64(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.clone()).collect();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let (pivot, mag) = (k..n)
            .map(|r| (r, m[r][k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if mag < 1e-300 {
            return None;
        }
        m.swap(k, pivot);
        rhs.swap(k, pivot);
        for r in k + 1..n {
            let f = m[r][k] / m[k][k];
            for c in k..n {
                m[r][c] -= f * m[k][c];
            }
            rhs[r] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for c in k + 1..n {
            s -= m[k][c] * x[c];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}
