// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Circuit layer: dressed resonator-transmon cells, coupler tone plans and
//! validation of the rotating-wave lattice model against the full drive.

mod cell;
mod evolve;
mod tones;

pub use cell::{
    device_cells, dressed_energies, photon_sign, CellParams, DressedSpectrum, MIN_OMEGA_OVER_G, T0_MHZ,
};
pub use evolve::{
    dressed_to_bare, effective_propagator, full_evolve, product_space_evolve, rwa_fidelity, EvolveOptions,
    FullEvolution, ProductEvolution, MAX_PRODUCT_CELLS, POINTS_PER_PERIOD, UNITARITY_TOL,
};
pub use tones::{
    addressing_margin, bond_transitions, tone_plan, transition_margin, waveform, Bond, Direction, Plaquette,
    Tone, TonePlan, CHANNEL_CUTOFF, FREQUENCY_TOL,
};
