// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Chern numbers of isolated band groups, spin Chern numbers and the Z2 index.

use qsh_core::model::{Flux, ModelParams, Spin};
use qsh_core::topology::{band_groups, chern_fhs, spin_chern, z2_invariant, BandSelector, SpinSector, Z2Options};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.0, 0.0);
    for spin in Spin::BOTH {
        let sector = SpinSector::Only(spin);
        let mut values = Vec::new();
        for group in band_groups(&params, sector, (24, 24))? {
            values.push(chern_fhs(&params, sector, &BandSelector::Indices(group), (48, 48))?.value);
        }
        println!("{spin:?} band groups: {values:?}");
    }
    let (up, down) = spin_chern(&params, 1.5, (24, 24))?;
    let z2 = z2_invariant(&params, 1.5, &Z2Options::default())?;
    println!("below E_F = 1.5: C_up = {up}, C_down = {down}, nu = {} ({} crossings)", z2.nu, z2.crossings);
    Ok(())
}
