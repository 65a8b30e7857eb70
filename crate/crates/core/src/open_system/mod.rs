// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Open-system dynamics of the edge-detection protocol in the single-excitation
//! sector of the circuit lattice.

mod lindblad;
mod state;

pub use lindblad::{
    decay_scan, detection_time, gamma_khz, lindblad_evolve, subspace_jump_operators, DecayProtocol, DecayRow,
    LindbladOptions, LindbladSpec, Stepper, Trajectory, TrajectoryPoint, DEFAULT_DT, STABILITY_FACTOR,
};
pub use state::{
    excited_population, populations, DensityMatrix, Invariants, Populations, SubspaceBasis, HERMITICITY_TOL,
    MAX_SIDE, POSITIVITY_TOL, TRACE_TOL,
};
