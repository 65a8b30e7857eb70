// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Hermitian operators with basis metadata and dense or CSR storage.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64 as C64;

use super::params::{SiteIndex, Spin};
use crate::error::{Error, Result};

/// Above this dimension builders switch to sparse storage.
pub const SPARSE_THRESHOLD: usize = 2000;

/// Tolerance of the Hermiticity invariant (absolute, entrywise).
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    Site(SiteIndex),
    /// Row within a ribbon or magnetic cell, used by momentum-space operators.
    Row { n: usize, spin: Spin },
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn matvec(&self, x: ArrayView1<C64>) -> Array1<C64> {
        Array1::from_shape_fn(self.dim, |i| self.row(i).map(|(j, v)| v * x[j]).sum())
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.iter().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for (i, j, v) in self.iter() {
            a[(i, j)] += v;
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(Array2<C64>),
    Sparse(CsrMatrix),
}

/// A Hermitian matrix together with the labels of its basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    storage: Storage,
    basis: Vec<BasisLabel>,
}

impl HermitianOperator {
    /// Assembles an operator from triplets, choosing dense storage up to
    /// [`SPARSE_THRESHOLD`] and CSR above it. The Hermiticity invariant is checked.
    pub fn from_triplets(
        basis: Vec<BasisLabel>,
        triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        let dim = basis.len();
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= dim || j >= dim) {
            return Err(Error::Contract(format!(
                "entry ({i},{j}) outside dimension {dim}"
            )));
        }
        let storage = if dim > SPARSE_THRESHOLD {
            Storage::Sparse(CsrMatrix::from_triplets(dim, triplets))
        } else {
            let mut a = Array2::zeros((dim, dim));
            for (i, j, v) in triplets {
                a[(i, j)] += v;
            }
            Storage::Dense(a)
        };
        let op = HermitianOperator { storage, basis };
        let residual = op.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::Contract(format!(
                "operator is not Hermitian (residual {residual:.3e})"
            )));
        }
        Ok(op)
    }

    /// Wraps a dense matrix, checking Hermiticity.
    pub fn from_dense(basis: Vec<BasisLabel>, matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::Contract(format!(
                "matrix {:?} does not match basis of length {}",
                matrix.shape(),
                basis.len()
            )));
        }
        let op = HermitianOperator {
            storage: Storage::Dense(matrix),
            basis,
        };
        let residual = op.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::Contract(format!(
                "operator is not Hermitian (residual {residual:.3e})"
            )));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(a) => a[(i, j)],
            Storage::Sparse(s) => s.get(i, j),
        }
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(a) => a
                .indexed_iter()
                .filter(|(_, v)| **v != C64::new(0.0, 0.0))
                .map(|((i, j), v)| (i, j, *v))
                .collect(),
            Storage::Sparse(s) => s.iter().collect(),
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        match &self.storage {
            Storage::Dense(a) => a.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    /// Converts to CSR regardless of the current storage.
    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(_) => CsrMatrix::from_triplets(self.dim(), self.entries()),
            Storage::Sparse(s) => s.clone(),
        }
    }

    pub fn matvec(&self, x: ArrayView1<C64>) -> Array1<C64> {
        match &self.storage {
            Storage::Dense(a) => a.dot(&x),
            Storage::Sparse(s) => s.matvec(x),
        }
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        match &self.storage {
            Storage::Dense(a) => {
                let n = a.nrows();
                let mut r: f64 = 0.0;
                for i in 0..n {
                    for j in i..n {
                        r = r.max((a[(i, j)] - a[(j, i)].conj()).norm());
                    }
                }
                r
            }
            Storage::Sparse(s) => s
                .iter()
                .map(|(i, j, v)| (v - s.get(j, i).conj()).norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries()
            .iter()
            .map(|(_, _, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Bound on the spectral radius from the largest absolute row sum.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dim()];
        for (i, _, v) in self.entries() {
            rows[i] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}
