use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{q, Rational};

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        QMat { rows: n, cols, data }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: Vec<Rational>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    t.set(c, r, v.clone());
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = QMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] += a * b;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Rational::zero(); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let b = self.get(k, c);
                if !b.is_zero() {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn vstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend(self.row(r).iter().cloned());
            data.extend(other.row(r).iter().cloned());
        }
        QMat { rows: self.rows, cols, data }
    }

    pub fn select_cols(&self, cols: &[usize]) -> QMat {
        let mut out = QMat::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> QMat {
        QMat::from_rows(self.cols, rows.iter().map(|&r| self.row(r).to_vec()).collect())
    }

    /// Reduced row echelon form with the list of pivot columns.
    ///
    /// Zero rows are kept at the bottom so the shape is preserved.
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..self.cols {
            if prow == self.rows {
                break;
            }
            let Some(found) = (prow..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(prow, found);
            let inv = self.get(prow, col).recip();
            if !inv.is_one() {
                for c in col..self.cols {
                    let idx = prow * self.cols + c;
                    if !self.data[idx].is_zero() {
                        self.data[idx] *= &inv;
                    }
                }
            }
            let pivot_row: Vec<(usize, Rational)> = (col..self.cols)
                .filter_map(|c| {
                    let v = self.get(prow, c);
                    (!v.is_zero()).then(|| (c, v.clone()))
                })
                .collect();
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for (c, v) in &pivot_row {
                    let idx = r * self.cols + c;
                    self.data[idx] -= &factor * v;
                }
            }
            pivots.push(col);
            prow += 1;
        }
        pivots
    }

    /// Rank by fraction-free elimination over the integers.
    ///
    /// Each row is scaled to a primitive integer vector; elimination uses
    /// cross-multiplication followed by content removal, so entries stay small.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| integer_row(self.row(r)))
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            if rows.is_empty() {
                break;
            }
            let Some(pi) = rows.iter().position(|r| !r[col].is_zero()) else {
                continue;
            };
            let pivot = rows.swap_remove(pi);
            let a = pivot[col].clone();
            let mut next = Vec::with_capacity(rows.len());
            for mut r in rows.drain(..) {
                if !r[col].is_zero() {
                    let b = r[col].clone();
                    let g = a.gcd(&b);
                    let (fa, fb) = (&a / &g, &b / &g);
                    for (x, p) in r.iter_mut().zip(pivot.iter()) {
                        if p.is_zero() {
                            if !x.is_zero() {
                                *x *= &fa;
                            }
                        } else {
                            *x = &*x * &fa - p * &fb;
                        }
                    }
                    make_primitive(&mut r);
                }
                if r.iter().any(|x| !x.is_zero()) {
                    next.push(r);
                }
            }
            rows = next;
            rank += 1;
        }
        rank
    }

    /// Basis (as rows) of the right kernel `{x : self * x = 0}`.
    pub fn right_kernel(&self) -> QMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = QMat::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, Rational::one());
            for (pr, &pc) in pivots.iter().enumerate() {
                let v = r.get(pr, f);
                if !v.is_zero() {
                    out.set(i, pc, -v.clone());
                }
            }
        }
        out
    }

    /// Basis (as rows) of the left kernel `{y : y * self = 0}`.
    pub fn left_kernel(&self) -> QMat {
        self.transpose().right_kernel()
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = self.hstack(&QMat::identity(n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(r.select_cols(&cols))
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pv = m.get(col, col).clone();
            det *= &pv;
            for r in col + 1..n {
                let f = m.get(r, col) / &pv;
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(col, c).clone();
                    if !v.is_zero() {
                        let idx = r * n + c;
                        m.data[idx] -= &f * v;
                    }
                }
            }
        }
        det
    }
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut out: Vec<BigInt> = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    make_primitive(&mut out);
    out
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return;
    }
    let g = g.abs();
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x /= &g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::q_frac;

    #[test]
    fn rref_of_identity_is_identity() {
        let (r, p) = QMat::identity(2).rref();
        assert_eq!(r, QMat::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_rank_one() {
        let m = QMat::from_i64(&[vec![2, 4], vec![1, 2]]);
        let (r, p) = m.rref();
        assert_eq!(r, QMat::from_i64(&[vec![1, 2], vec![0, 0]]));
        assert_eq!(p, vec![0]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_zero_and_identity() {
        assert_eq!(QMat::zeros(3, 3).right_kernel().rows(), 3);
        assert_eq!(QMat::identity(3).right_kernel().rows(), 0);
    }

    #[test]
    fn kernel_of_all_ones_row() {
        let m = QMat::from_i64(&[vec![1, 1, 1]]);
        let k = m.right_kernel();
        assert_eq!(k.rows(), 2);
        for r in 0..k.rows() {
            let s: Rational = k.row(r).iter().sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn inverse_and_det() {
        let m = QMat::from_rows(
            2,
            vec![vec![q(2), q_frac(1, 2)], vec![q(1), q(3)]],
        );
        assert_eq!(m.det(), q_frac(11, 2));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
        assert!(QMat::from_i64(&[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn rank_with_fractions() {
        let m = QMat::from_rows(
            3,
            vec![
                vec![q_frac(1, 2), q_frac(1, 3), q(1)],
                vec![q(3), q(2), q(6)],
                vec![q(0), q(1), q_frac(-1, 7)],
            ],
        );
        assert_eq!(m.rank(), 2);
    }
}
