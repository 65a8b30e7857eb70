// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! The spinful flux lattice: parameters, Hamiltonian builders and time reversal.

mod builders;
mod operator;
mod params;
mod symmetry;

pub use builders::{
    bloch_hamiltonian, open_hamiltonian, ribbon_hamiltonian, spin_sector, wrap_momentum,
    x_hop_block, y_hop_block, SpinBlock,
};
pub use operator::{BasisLabel, CsrMatrix, HermitianOperator, Storage, HERMITICITY_TOL, SPARSE_THRESHOLD};
pub use params::{Flux, ModelParams, SiteIndex, Spin};
pub use symmetry::{
    apply_time_reversal, time_reversal_check, time_reversal_residual, Representation,
};
