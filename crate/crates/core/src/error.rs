// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or task parameter.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative eigensolver or LAPACK call did not converge.
    #[error("solver error: {message} (iterations: {iterations}, max residual: {residual:.3e})")]
    Solver {
        message: String,
        iterations: usize,
        residual: f64,
    },

    /// Selected bands touch the rest of the spectrum, or tones collide.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    /// Lattice field-strength sum is not close enough to an integer.
    #[error("resolution error: Chern sum {value:.6} is {residual:.3e} away from an integer; refine the grid")]
    Resolution { value: f64, residual: f64 },

    /// The operation is not defined for these parameters (e.g. spin Chern number with spin mixing).
    #[error("domain error: {0}")]
    Domain(String),

    /// A time integrator failed its accuracy or invariant checks.
    #[error("integration accuracy error: {0}")]
    Accuracy(String),

    /// Arguments have incompatible shapes.
    #[error("contract error: {0}")]
    Contract(String),

    /// Configuration parsing or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
