// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Resonator-transmon cells and their single-excitation dressed states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Spin;

/// Smallest allowed `omega / g`; below this the two-level dressed picture breaks down.
pub const MIN_OMEGA_OVER_G: f64 = 5.0;

/// Hopping unit `t0 / 2π` in MHz for the reference device.
pub const T0_MHZ: f64 = 3.0;

/// One cell: resonator and transmon at frequency `omega`, coupled with strength `g`
/// (both in units of `t0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub omega: f64,
    pub g: f64,
    /// Sublattice colour 1..=4 of the four-cell plaquette.
    pub sublattice_id: u8,
}

impl CellParams {
    pub fn new(omega: f64, g: f64, sublattice_id: u8) -> Result<Self> {
        let cell = Self { omega, g, sublattice_id };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.sublattice_id) {
            return Err(Error::param(format!("sublattice id must be 1..=4, got {}", self.sublattice_id)));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::param(format!("coupling g must be positive, got {}", self.g)));
        }
        if !(self.omega.is_finite() && self.omega / self.g >= MIN_OMEGA_OVER_G) {
            return Err(Error::param(format!(
                "omega/g must be at least {MIN_OMEGA_OVER_G}, got omega = {}, g = {}",
                self.omega, self.g
            )));
        }
        Ok(())
    }
}

/// The reference four-cell device, sublattices 1..=4 in order.
pub fn device_cells() -> [CellParams; 4] {
    [
        CellParams { omega: 2700.0, g: 250.0, sublattice_id: 1 },
        CellParams { omega: 3000.0, g: 150.0, sublattice_id: 2 },
        CellParams { omega: 2650.0, g: 150.0, sublattice_id: 3 },
        CellParams { omega: 2900.0, g: 200.0, sublattice_id: 4 },
    ]
}

/// Energies of `|up> = (|0e> + |1g>)/√2` and `|down> = (|0e> - |1g>)/√2`;
/// the cell ground state `|0g>` sits at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedSpectrum {
    pub e_up: f64,
    pub e_down: f64,
}

impl DressedSpectrum {
    pub fn energy(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.e_up,
            Spin::Down => self.e_down,
        }
    }

    /// Frame energies for a cell that should carry the on-site term `onsite` in the
    /// rotating frame.
    pub fn with_onsite(&self, onsite: f64) -> Self {
        Self { e_up: self.e_up - onsite, e_down: self.e_down - onsite }
    }
}

pub fn dressed_energies(cell: &CellParams) -> DressedSpectrum {
    DressedSpectrum { e_up: cell.omega + cell.g, e_down: cell.omega - cell.g }
}

/// Sign of the photon component of a dressed state: `a|up> = +|0g>/√2`,
/// `a|down> = -|0g>/√2`.
pub fn photon_sign(spin: Spin) -> f64 {
    match spin {
        Spin::Up => 1.0,
        Spin::Down => -1.0,
    }
}
