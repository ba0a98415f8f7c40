//! Compressed sparse row storage for the spatial operators.

use crate::error::{check_dim, Result};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};

/// Square or rectangular matrix in compressed row form.
///
/// Column indices inside each row are sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                match col_idx.last() {
                    Some(&last) if last == c && col_idx.len() > *row_ptr.last().unwrap() => {
                        let end = values.len() - 1;
                        values[end] += v;
                    }
                    _ => {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> T {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => T::zero(),
        }
    }

    /// Lower and upper bandwidths `(kl, ku)` of the stored pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.nrows {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    /// `max |row - col|` over stored entries.
    pub fn band_width(&self) -> usize {
        let (kl, ku) = self.bandwidths();
        kl.max(ku)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc })
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (out, w) in y.iter_mut().zip(self.row_ptr.windows(2)) {
            let (cols, vals) = (&self.col_idx[w[0]..w[1]], &self.values[w[0]..w[1]]);
            *out = cols
                .iter()
                .zip(vals)
                .fold(T::zero(), |acc, (&c, &v)| acc + v * x[c]);
        }
    }

    pub fn mul_vec(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("sparse matvec", self.ncols, x.len())?;
        let mut y = DVector::zeros(self.nrows);
        self.mul_vec_into(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `y = selfᵀ * x`.
    pub fn transpose_mul_vec(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("sparse transpose matvec", self.nrows, x.len())?;
        let mut y = DVector::zeros(self.ncols);
        for r in 0..self.nrows {
            let xr = x[r];
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        Ok(y)
    }

    /// Sparse times dense, column by column.
    pub fn mul_dense(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        check_dim("sparse-dense product", self.ncols, x.nrows())?;
        let mut y = DMatrix::zeros(self.nrows, x.ncols());
        let (xs, ys) = (x.as_slice(), y.as_mut_slice());
        for (xc, yc) in xs.chunks_exact(self.ncols).zip(ys.chunks_exact_mut(self.nrows)) {
            self.mul_vec_into(xc, yc);
        }
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    /// `alpha * I + beta * self` for square matrices.
    pub fn shifted_identity(&self, alpha: T, beta: T) -> Self {
        assert_eq!(self.nrows, self.ncols, "shifted identity needs a square matrix");
        let mut triplets = Vec::with_capacity(self.nnz() + self.nrows);
        for r in 0..self.nrows {
            triplets.push((r, r, alpha));
            for (c, v) in self.row(r) {
                triplets.push((r, c, beta * v));
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[(r, c)] += v;
            }
        }
        d
    }

    /// `max |A - Aᵀ|` over all entries.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                let d = (v - self.get(c, r)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Square matrix stored by its nonzero diagonals. Suited to stencil
/// operators, where a handful of offsets covers every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix<T> {
    n: usize,
    offsets: Vec<isize>,
    /// `values[d][r] = A[r, r + offsets[d]]`, zero outside the matrix.
    values: Vec<Vec<T>>,
}

impl<T: Real> DiagonalMatrix<T> {
    /// `None` unless `a` is square with at most `max_diagonals` occupied
    /// diagonals.
    pub fn from_csr(a: &CsrMatrix<T>, max_diagonals: usize) -> Option<Self> {
        if a.nrows != a.ncols {
            return None;
        }
        let n = a.nrows;
        let mut offsets: Vec<isize> = Vec::new();
        for r in 0..n {
            for (c, _) in a.row(r) {
                let o = c as isize - r as isize;
                if let Err(pos) = offsets.binary_search(&o) {
                    if offsets.len() == max_diagonals {
                        return None;
                    }
                    offsets.insert(pos, o);
                }
            }
        }
        let mut values = vec![vec![T::zero(); n]; offsets.len()];
        for r in 0..n {
            for (c, v) in a.row(r) {
                let d = offsets.binary_search(&(c as isize - r as isize)).unwrap();
                values[d][r] = v;
            }
        }
        Some(Self { n, offsets, values })
    }

    pub fn n_diagonals(&self) -> usize {
        self.offsets.len()
    }

    pub fn mul_dense(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        check_dim("diagonal-dense product", self.n, x.nrows())?;
        let n = self.n;
        let mut y = DMatrix::zeros(n, x.ncols());
        for (xc, yc) in x.as_slice().chunks_exact(n).zip(y.as_mut_slice().chunks_exact_mut(n)) {
            for (&o, v) in self.offsets.iter().zip(&self.values) {
                let lo = (-o).max(0) as usize;
                let hi = n - o.max(0) as usize;
                let xs = &xc[(lo as isize + o) as usize..(hi as isize + o) as usize];
                for ((out, &a), &b) in yc[lo..hi].iter_mut().zip(&v[lo..hi]).zip(xs) {
                    *out += a * b;
                }
            }
        }
        Ok(y)
    }
}
