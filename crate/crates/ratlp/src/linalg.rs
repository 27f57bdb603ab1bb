//! Small dense exact linear algebra for the enumeration oracle.

use num_traits::Zero;

use crate::Rational;

/// Reduced row echelon form in place. Returns pivot columns, one per
/// nonzero row, in row order.
pub(crate) fn rref(mat: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][c].recip();
        for a in mat[r].iter_mut() {
            *a *= &inv;
        }
        let pivot_row = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (a, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves the square system `mat · w = rhs`; `None` when singular.
pub(crate) fn solve_square(mat: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = mat.len();
    let mut aug: Vec<Vec<Rational>> = mat
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.last().is_some_and(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// A nonzero vector spanning the kernel of `mat` (k rows, k+1 columns),
/// provided the rows are independent.
pub(crate) fn kernel_direction(mat: &[Vec<Rational>], dim: usize) -> Option<Vec<Rational>> {
    let mut m = mat.to_vec();
    let pivots = rref(&mut m);
    if pivots.len() + 1 != dim {
        return None;
    }
    let free = (0..dim).find(|c| !pivots.contains(c)).unwrap();
    let mut d = vec![Rational::zero(); dim];
    d[free] = Rational::from_integer(1.into());
    for (row, &pc) in pivots.iter().enumerate() {
        d[pc] = -m[row][free].clone();
    }
    Some(d)
}
