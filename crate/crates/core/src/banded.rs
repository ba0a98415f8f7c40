//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` holds rows
//! `j - kl - ku ..= j + kl` contiguously, leaving `kl` extra superdiagonals
//! for the fill produced by row interchanges. The five-point stencil in
//! row-major node order is already bandwidth-optimal, so no reordering is
//! applied.

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Upper bandwidth of `U` actually reached after pivoting.
    ku_eff: usize,
    ldab: usize,
    ab: Vec<T>,
    ipiv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    /// Factors a square sparse matrix. A zero pivot yields
    /// [`Error::Factorization`] with `step` set to 0; time-marching callers
    /// rewrite the step index.
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        check_dim("banded LU (square)", a.nrows(), a.ncols())?;
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            ku_eff: ku,
            ldab,
            ab: vec![T::zero(); ldab * n],
            ipiv: vec![0; n],
        };
        for r in 0..n {
            for (c, v) in a.row(r) {
                let id = lu.idx(r, c);
                lu.ab[id] = v;
            }
        }
        lu.factor_in_place()?;
        Ok(lu)
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let mut ju_max = 0usize;
        // Last column touched by row j; fill from earlier swaps carries over.
        let mut ju_run = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = self.ab[self.idx(j, j)].abs();
            for i in j + 1..=j + km {
                let v = self.ab[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.ipiv[j] = p;
            if best == T::zero() {
                return Err(Error::Factorization { step: 0, column: j });
            }
            ju_run = ju_run.max((j + self.ku + (p - j)).min(n - 1));
            let ju = ju_run;
            ju_max = ju_max.max(ju - j);
            if p != j {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            let col0 = self.idx(j + 1, j);
            for v in &mut self.ab[col0..col0 + km] {
                *v /= pivot;
            }
            for c in j + 1..=ju {
                let t = self.ab[self.idx(j, c)];
                if t == T::zero() {
                    continue;
                }
                let dst = self.idx(j + 1, c);
                for r in 0..km {
                    let l = self.ab[col0 + r];
                    self.ab[dst + r] -= l * t;
                }
            }
        }
        self.ku_eff = ju_max;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != T::zero() {
                let col0 = self.idx(j + 1, j);
                for r in 0..km {
                    b[j + 1 + r] -= self.ab[col0 + r] * bj;
                }
            }
        }
        let ub = self.ku_eff;
        for j in (0..n).rev() {
            b[j] /= self.ab[self.idx(j, j)];
            let bj = b[j];
            if bj != T::zero() {
                let i0 = j.saturating_sub(ub);
                let base = self.idx(i0, j);
                for (off, i) in (i0..j).enumerate() {
                    b[i] -= self.ab[base + off] * bj;
                }
            }
        }
    }

    /// Solves `Aᵀ x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let ub = self.ku_eff;
        for j in 0..n {
            let i0 = j.saturating_sub(ub);
            let base = self.idx(i0, j);
            let mut acc = b[j];
            for (off, i) in (i0..j).enumerate() {
                acc -= self.ab[base + off] * b[i];
            }
            b[j] = acc / self.ab[self.idx(j, j)];
        }
        for j in (0..n).rev() {
            let km = self.kl.min(n - 1 - j);
            let col0 = self.idx(j + 1, j);
            let mut acc = b[j];
            for r in 0..km {
                acc -= self.ab[col0 + r] * b[j + 1 + r];
            }
            b[j] = acc;
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
        }
    }
}
