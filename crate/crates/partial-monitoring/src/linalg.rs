//! Small exact linear-algebra helpers: nullspace bases and orthogonal
//! projections over rationals. Matrices here never exceed a few dozen rows.

use crate::rational::{dot, rat_zero, Rat};
use num::Zero;

/// Reduced row echelon form in place; returns pivot column per pivot row.
fn rref(matrix: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !matrix[i][c].is_zero()) else {
            continue;
        };
        matrix.swap(r, p);
        let inv = matrix[r][c].clone();
        for v in &mut matrix[r] {
            *v = &*v / &inv;
        }
        for i in 0..rows {
            if i != r && !matrix[i][c].is_zero() {
                let factor = matrix[i][c].clone();
                for j in 0..cols {
                    let delta = &factor * &matrix[r][j];
                    matrix[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : row . x = 0 for every row}` in `dim` variables.
pub fn nullspace(rows: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    let mut matrix: Vec<Vec<Rat>> = rows.to_vec();
    matrix.retain(|row| row.iter().any(|v| !v.is_zero()));
    if matrix.is_empty() {
        return (0..dim)
            .map(|j| {
                let mut e = vec![rat_zero(); dim];
                e[j] = Rat::from_integer(1.into());
                e
            })
            .collect();
    }
    let pivots = rref(&mut matrix);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in (0..dim).filter(|c| !pivot_set.contains(c)) {
        let mut v = vec![rat_zero(); dim];
        v[free] = Rat::from_integer(1.into());
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -matrix[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Orthogonal projection of `target` onto the span of `rows`, exactly.
pub fn project_onto_span(rows: &[Vec<Rat>], target: &[Rat]) -> Vec<Rat> {
    // Unnormalized Gram-Schmidt keeps everything rational.
    let mut ortho: Vec<Vec<Rat>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for b in &ortho {
            let coeff = dot(&v, b) / dot(b, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= &coeff * y;
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            ortho.push(v);
        }
    }
    let mut proj = vec![rat_zero(); target.len()];
    for b in &ortho {
        let coeff = dot(target, b) / dot(b, b);
        for (p, y) in proj.iter_mut().zip(b) {
            *p += &coeff * y;
        }
    }
    proj
}
