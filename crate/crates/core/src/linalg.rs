//! Dense Gaussian elimination over any [`Scalar`] field.

use crate::scalar::Scalar;

/// Incrementally built row basis in reduced echelon form.
///
/// Rows are inserted one by one; each insertion reports whether the row
/// increased the rank. Useful when the rank can be capped early.
#[derive(Clone, Debug)]
pub struct EchelonBasis<T> {
    ncols: usize,
    rows: Vec<Vec<T>>,
    pivots: Vec<usize>,
}

impl<T: Scalar> EchelonBasis<T> {
    pub fn new(ncols: usize) -> Self {
        EchelonBasis {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Reduce `row` against the basis, returning the residual.
    pub fn reduce(&self, mut row: Vec<T>) -> Vec<T> {
        assert_eq!(row.len(), self.ncols, "row length mismatch");
        for (basis_row, &p) in self.rows.iter().zip(&self.pivots) {
            if row[p].is_negligible() {
                continue;
            }
            let f = row[p].clone();
            for (x, b) in row.iter_mut().zip(basis_row) {
                if !b.is_zero() {
                    *x = x.clone() - f.clone() * b.clone();
                }
            }
            row[p] = T::zero();
        }
        row
    }

    /// Insert a row; returns `true` when it was independent of the basis.
    pub fn insert(&mut self, row: Vec<T>) -> bool {
        let row = self.reduce(row);
        let mut best: Option<(usize, f64)> = None;
        for (j, x) in row.iter().enumerate() {
            if x.is_negligible() {
                continue;
            }
            let w = x.pivot_weight();
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        let Some((p, _)) = best else {
            return false;
        };
        let inv = T::one() / row[p].clone();
        let row: Vec<T> = row.into_iter().map(|x| x * inv.clone()).collect();
        // keep the basis fully reduced in the new pivot column
        for basis_row in &mut self.rows {
            if !basis_row[p].is_negligible() {
                let f = basis_row[p].clone();
                for (x, b) in basis_row.iter_mut().zip(&row) {
                    if !b.is_zero() {
                        *x = x.clone() - f.clone() * b.clone();
                    }
                }
                basis_row[p] = T::zero();
            }
        }
        self.rows.push(row);
        self.pivots.push(p);
        true
    }

    pub fn contains(&self, row: &[T]) -> bool {
        self.reduce(row.to_vec()).iter().all(|x| x.is_negligible())
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

/// Rank of a row set.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut basis = EchelonBasis::new(first.len());
    for r in rows {
        basis.insert(r.clone());
        if basis.rank() == basis.ncols() {
            break;
        }
    }
    basis.rank()
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "inverse needs a square matrix");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !m[r][col].is_negligible())
            .max_by(|&x, &y| {
                m[x][col]
                    .pivot_weight()
                    .partial_cmp(&m[y][col].pivot_weight())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        m.swap(col, piv);
        let inv = T::one() / m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solve `a x = b` for square nonsingular `a`.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let inv = inverse(a)?;
    Some(mat_vec(&inv, b))
}

pub fn mat_vec<T: Scalar>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (r, v)| acc + r.clone() * v.clone())
        })
        .collect()
}

/// Basis of `{x : rows · x = 0}`.
pub fn null_space<T: Scalar>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut basis = EchelonBasis::new(ncols);
    for r in rows {
        basis.insert(r.clone());
    }
    let pivots = basis.pivots().to_vec();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![T::zero(); ncols];
            x[f] = T::one();
            for (row, &p) in basis.rows.iter().zip(&pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Fp, Rational};
    use num_traits::Zero;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect()
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m), 2);
        let fm: Vec<Vec<Fp>> = [[1i64, 2, 3], [2, 4, 6], [1, 0, 1]]
            .iter()
            .map(|r| r.iter().map(|&v| Fp::from_i64(v)).collect())
            .collect();
        assert_eq!(rank(&fm), 2);
        let f64m: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![2.0, 4.0 + 1e-13]];
        assert_eq!(rank(&f64m), 1);
    }

    #[test]
    fn inverse_round_trip() {
        let m = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&m).unwrap();
        for i in 0..3 {
            let col: Vec<Rational> = inv.iter().map(|row| row[i].clone()).collect();
            let e = mat_vec(&m, &col);
            for (k, v) in e.iter().enumerate() {
                assert_eq!(*v, rat((k == i) as i64));
            }
        }
        assert!(inverse(&q(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn null_space_is_annihilated() {
        let m = q(&[&[1, 1, 1, 1], &[0, 1, 2, 3]]);
        let ns = null_space(&m, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in mat_vec(&m, v) {
                assert!(r.is_zero());
            }
        }
    }

    #[test]
    fn solve_small_system() {
        let a = q(&[&[1, 1], &[1, -1]]);
        let x = solve(&a, &[rat(3), rat(1)]).unwrap();
        assert_eq!(x, vec![rat(2), rat(1)]);
    }
}
