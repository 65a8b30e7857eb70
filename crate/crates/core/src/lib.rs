// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of a quantum-spin-Hall flux lattice and its realization on a lattice
//! of coupled resonator-transmon cells.
//!
//! * [`model`]: spinful flux-lattice Hamiltonians (open, ribbon, Bloch) and time reversal.
//! * [`spectra`]: eigensolves, band structures and gap detection.
//! * [`topology`]: Chern numbers, the Z₂ index and the β-λ phase diagram.
//! * [`edge`]: open-lattice edge states and their localization.
//! * [`circuit`]: dressed cells, drive-tone planning and rotating-wave validation.
//! * [`open_system`]: Lindblad dynamics of the edge-detection protocol.
//! * [`io`]: run configuration, task dispatch and CSV/JSON output.

pub mod circuit;
pub mod edge;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod open_system;
pub mod spectra;
pub mod topology;

pub use error::{Error, Result};
