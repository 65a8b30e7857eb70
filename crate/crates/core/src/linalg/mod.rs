// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense LAPACK wrappers, banded LU and the interior eigensolver.

pub mod banded;
pub mod dense;
pub mod interior;

pub use dense::{conj_t, eigh, eigh_into, max_abs_diff, unitarity_defect, unitary_exp};
pub use interior::{nearest_eigenpairs, window_eigenpairs, InteriorOptions};
