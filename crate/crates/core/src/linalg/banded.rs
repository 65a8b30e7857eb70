// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! LU factorization with partial pivoting for complex band matrices.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::CsrMatrix;

/// Factored band matrix. Row `i` stores columns `i - kl ..= i + kl + ku`; the extra
/// `kl` superdiagonals absorb fill-in from row interchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factors `A - shift·I` where `A` is given in CSR form.
    pub fn factor_shifted(a: &CsrMatrix, shift: f64) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let (kl, ku) = (bw, bw);
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.iter() {
            let k = lu.idx(i, j);
            lu.data[k] += v;
        }
        for i in 0..n {
            let k = lu.idx(i, i);
            lu.data[k] -= shift;
        }
        let scale = a.iter().map(|(_, _, v)| v.norm()).fold(shift.abs(), f64::max);
        lu.factor(scale.max(1.0) * 1e-14)?;
        Ok(lu)
    }

    fn factor(&mut self, tiny: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = 0.0;
            for i in k..=last_row {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Solver {
                    message: format!("shifted matrix is numerically singular at column {k}"),
                    iterations: k,
                    residual: best,
                });
            }
            self.pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(A - shift·I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut Array1<C64>) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }
}
