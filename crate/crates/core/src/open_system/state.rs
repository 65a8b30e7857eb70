// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation subspace, density matrices and site populations.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::model::{SiteIndex, Spin};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Largest lattice side accepted by the master-equation solver.
pub const MAX_SIDE: usize = 8;

/// `[|G>] ++ [|spin>_r for every site r and spin]`; index `1 + 2(n·nx + m) + spin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub nx: usize,
    pub ny: usize,
}

impl SubspaceBasis {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nx > MAX_SIDE || ny > MAX_SIDE {
            return Err(Error::param(format!(
                "master-equation lattice must be between 1x1 and {MAX_SIDE}x{MAX_SIDE}, got {nx}x{ny}"
            )));
        }
        Ok(Self { nx, ny })
    }

    pub fn dim(&self) -> usize {
        1 + self.sites() * 2
    }

    pub fn sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, site: SiteIndex) -> usize {
        1 + site.linear(self.nx)
    }

    pub fn site_index(&self, m: usize, n: usize, spin: Spin) -> usize {
        self.index(SiteIndex::new(m, n, spin))
    }

    /// Site `(m, n)` lies on the outer perimeter.
    pub fn is_edge(&self, m: usize, n: usize) -> bool {
        m == 0 || n == 0 || m + 1 == self.nx || n + 1 == self.ny
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub data: Array2<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Invariants {
    pub fn hold(&self) -> bool {
        self.hermiticity <= HERMITICITY_TOL && self.trace_error <= TRACE_TOL && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

impl DensityMatrix {
    /// Validated density matrix.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Contract(format!("density matrix shape {:?} is not square", data.dim())));
        }
        let rho = Self { data };
        let inv = rho.invariants()?;
        if !inv.hold() {
            return Err(Error::param(format!("not a density matrix: {inv:?}")));
        }
        Ok(rho)
    }

    /// `|psi><psi|` for basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param(format!("basis index {index} out of range 0..{dim}")));
        }
        let mut data = Array2::zeros((dim, dim));
        data[[index, index]] = C64::new(1.0, 0.0);
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn invariants(&self) -> Result<Invariants> {
        let n = self.dim();
        let mut herm: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                herm = herm.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        let sym = (&self.data + &self.data.t().mapv(|x| x.conj())) * C64::new(0.5, 0.0);
        let (w, _) = eigh(&sym)?;
        let tr = self.trace();
        Ok(Invariants {
            hermiticity: herm,
            trace_error: (tr - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue: w.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

/// Excitation populations: `P1` on perimeter sites, `P2` on inner sites, `P3 = P1 + P2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub edge: f64,
    pub inner: f64,
    pub total: f64,
}

pub fn populations(rho: &DensityMatrix, basis: &SubspaceBasis) -> Result<Populations> {
    if rho.dim() != basis.dim() {
        return Err(Error::Contract(format!(
            "density matrix dimension {} does not match basis dimension {}",
            rho.dim(),
            basis.dim()
        )));
    }
    let (mut edge, mut inner) = (0.0, 0.0);
    for n in 0..basis.ny {
        for m in 0..basis.nx {
            let p: f64 = Spin::BOTH.iter().map(|&s| {
                let i = basis.site_index(m, n, s);
                rho.data[[i, i]].re
            }).sum();
            if basis.is_edge(m, n) {
                edge += p;
            } else {
                inner += p;
            }
        }
    }
    Ok(Populations { edge, inner, total: edge + inner })
}

/// Excited population from the vacuum element, `1 - <G|ρ|G>` (uses the trace).
pub fn excited_population(rho: &DensityMatrix) -> f64 {
    rho.trace().re - rho.data[[0, 0]].re
}
