//! Gaussian elimination over a [`Field`].

use super::{Elem, Field};

/// Rank of the matrix whose rows are given.
pub fn rank(f: &Field, rows: &[Vec<Elem>]) -> usize {
    let mut m: Vec<Vec<Elem>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = f.inv(m[rank][col]);
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let factor = f.mul(m[r][col], inv);
            for c in col..cols {
                let t = f.mul(factor, m[rank][c]);
                m[r][c] = f.sub(m[r][c], t);
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(f: &Field, m: &[Vec<Elem>]) -> Option<Vec<Vec<Elem>>> {
    let n = m.len();
    let mut a: Vec<Vec<Elem>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = f.inv(a[col][col]);
        for c in 0..2 * n {
            a[col][c] = f.mul(a[col][c], inv);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col];
            for c in 0..2 * n {
                let t = f.mul(factor, a[col][c]);
                a[r][c] = f.sub(a[r][c], t);
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Matrix-vector product.
pub fn apply(f: &Field, m: &[Vec<Elem>], v: &[Elem]) -> Vec<Elem> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
        })
        .collect()
}
