// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time reversal `Θ = (⊕ iσy) K` on spin-doublet bases.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64 as C64;

use super::builders::{bloch_hamiltonian, open_hamiltonian};
use super::operator::HermitianOperator;
use super::params::ModelParams;
use crate::error::Result;

/// Which form of the Hamiltonian to test.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Open,
    /// Bloch form sampled at the listed `(kx, ky)` points.
    Bloch(Vec<(f64, f64)>),
}

impl Representation {
    /// Bloch representation on an `n x n` grid covering the magnetic zone, offset
    /// from the time-reversal-invariant momenta.
    pub fn bloch_grid(params: &ModelParams, n: usize) -> Self {
        let cell = params.alpha.magnetic_cell_height() as f64;
        let tau = 2.0 * std::f64::consts::PI;
        let pts = (0..n)
            .flat_map(|i| {
                (0..n).map(move |j| {
                    let kx = -tau / 2.0 + tau * (i as f64 + 0.37) / n as f64;
                    let ky = (-tau / 2.0 + tau * (j as f64 + 0.21) / n as f64) / cell;
                    (kx, ky)
                })
            })
            .collect();
        Representation::Bloch(pts)
    }
}

fn parity(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Θψ = U ψ*` with `U = iσy` on every doublet.
pub fn apply_time_reversal(state: ArrayView1<C64>) -> Array1<C64> {
    Array1::from_shape_fn(state.len(), |i| parity(i) * state[i ^ 1].conj())
}

/// `max |(Θ A Θ⁻¹)_ij - B_ij|`; entries of `Θ A Θ⁻¹` are `u_i u_j conj(A[ī, j̄])`.
pub fn time_reversal_residual(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let forward = a
        .entries()
        .into_iter()
        .map(|(i, j, v)| {
            let (ti, tj) = (i ^ 1, j ^ 1);
            (parity(ti) * parity(tj) * v.conj() - b.get(ti, tj)).norm()
        })
        .fold(0.0, f64::max);
    // Entries present in `b` but absent from the image of `a`.
    let backward = b
        .entries()
        .into_iter()
        .map(|(i, j, v)| {
            let image = parity(i) * parity(j) * a.get(i ^ 1, j ^ 1).conj();
            (image - v).norm()
        })
        .fold(0.0, f64::max);
    forward.max(backward)
}

/// Largest violation of `Θ H Θ⁻¹ = H` (open) or `Θ H(k) Θ⁻¹ = H(-k)` (Bloch).
pub fn time_reversal_check(params: &ModelParams, representation: &Representation) -> Result<f64> {
    match representation {
        Representation::Open => {
            let h = open_hamiltonian(params)?;
            Ok(time_reversal_residual(&h, &h))
        }
        Representation::Bloch(points) => {
            let mut worst: f64 = 0.0;
            for &(kx, ky) in points {
                let h = bloch_hamiltonian(params, kx, ky)?;
                let hm = bloch_hamiltonian(params, -kx, -ky)?;
                worst = worst.max(time_reversal_residual(&h, &hm));
            }
            Ok(worst)
        }
    }
}
