use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{q, QMat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("zero vector has no primitive generator")]
    ZeroVector,
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
}

/// gcd of the absolute values of the entries (0 for the zero vector).
pub fn content(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn primitive_vector(v: &[i64]) -> Result<Vec<i64>, LatticeError> {
    let g = content(v);
    if g == 0 {
        return Err(LatticeError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / g).collect())
}

/// Column-style Hermite reduction of a `k × n` matrix `a` (rows given).
///
/// Returns `(h, u)` with `a·u = [h | 0]` where `u` is unimodular `n × n`
/// and `h` is `k × r`, `r` the rank. Only elementary integer column
/// operations are used.
fn column_reduce(a: &[Vec<i64>], n: usize) -> Result<(Vec<Vec<i128>>, Vec<Vec<i128>>, usize), LatticeError> {
    let k = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let mut col = 0;
    for row in 0..k {
        if col == n {
            break;
        }
        // Euclid on columns col..n within this row until only column `col` is nonzero.
        loop {
            let nz: Vec<usize> = (col..n).filter(|&j| m[row][j] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&j| m[row][j].abs()).expect("nonempty");
            swap_cols(&mut m, &mut u, col, piv);
            let mut done = true;
            for j in col + 1..n {
                if m[row][j] == 0 {
                    continue;
                }
                let f = m[row][j] / m[row][col];
                add_col(&mut m, &mut u, j, col, -f)?;
                if m[row][j] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[row][col] != 0 {
            if m[row][col] < 0 {
                for r in m.iter_mut() {
                    r[col] = -r[col];
                }
                for r in u.iter_mut() {
                    r[col] = -r[col];
                }
            }
            col += 1;
        }
    }
    let h = m.iter().map(|r| r[..col].to_vec()).collect();
    Ok((h, u, col))
}

fn swap_cols(m: &mut [Vec<i128>], u: &mut [Vec<i128>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for r in m.iter_mut() {
        r.swap(a, b);
    }
    for r in u.iter_mut() {
        r.swap(a, b);
    }
}

// col[dst] += f * col[src]
fn add_col(m: &mut [Vec<i128>], u: &mut [Vec<i128>], dst: usize, src: usize, f: i128) -> Result<(), LatticeError> {
    for r in m.iter_mut().chain(u.iter_mut()) {
        let t = r[src].checked_mul(f).ok_or(LatticeError::Overflow)?;
        r[dst] = r[dst].checked_add(t).ok_or(LatticeError::Overflow)?;
    }
    Ok(())
}

/// True iff the vectors extend to a Z-basis of `Z^n`.
pub fn is_unimodular(rays: &[Vec<i64>]) -> bool {
    let Some(n) = rays.first().map(Vec::len) else {
        return true;
    };
    let Ok((h, _, r)) = column_reduce(rays, n) else {
        return false;
    };
    if r < rays.len() {
        return false;
    }
    // h is lower triangular with positive diagonal.
    (0..r).all(|i| h[i][i] == 1)
}

/// Z-basis of `{x ∈ Z^n : <row, x> = 0 for every row}`.
pub fn integer_kernel_basis(rows: &[Vec<i64>], n: usize) -> Result<Vec<Vec<i64>>, LatticeError> {
    if rows.is_empty() {
        return Ok((0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect());
    }
    let (_, u, r) = column_reduce(rows, n)?;
    (r..n)
        .map(|j| {
            (0..n)
                .map(|i| i64::try_from(u[i][j]).map_err(|_| LatticeError::Overflow))
                .collect()
        })
        .collect()
}

/// Integer coordinates of `v` in the given basis, if it lies in their Z-span.
pub fn lattice_coordinates(basis: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    if basis.is_empty() {
        return v.iter().all(|&x| x == 0).then(Vec::new);
    }
    // Solve c · B = v over Q.
    let b = QMat::from_i64(basis);
    let mut aug = b.transpose();
    let col: Vec<Vec<Rational>> = v.iter().map(|&x| vec![q(x)]).collect();
    aug = aug.hstack(&QMat::from_rows(1, col));
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&basis.len()) {
        return None;
    }
    let mut c = vec![Rational::zero(); basis.len()];
    for (i, &p) in pivots.iter().enumerate() {
        c[p] = r.get(i, basis.len()).clone();
    }
    c.iter()
        .map(|x| x.is_integer().then(|| x.to_integer().to_i64()).flatten())
        .collect()
}
