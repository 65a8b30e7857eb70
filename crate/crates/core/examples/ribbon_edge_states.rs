// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ribbon spectrum: list the edge-localized branches inside the Fermi window.

use qsh_core::model::{Flux, ModelParams};
use qsh_core::spectra::{periodic_grid, ribbon_bands};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.0, 0.0);
    let kx = periodic_grid(128);
    let bands = ribbon_bands(&params, 42, &kx)?;
    let tags = bands.localization.as_ref().expect("ribbon bands carry edge tags");
    for (i, k) in kx.iter().enumerate().step_by(16) {
        let edge: Vec<String> = bands.energies[i]
            .iter()
            .zip(&tags[i])
            .filter(|(e, t)| (1.0..2.0).contains(*e) && t.max() > 0.5)
            .map(|(e, t)| format!("{e:.3}{}", if t.bottom > t.top { "b" } else { "t" }))
            .collect();
        println!("kx={k:+.3}: {}", edge.join(" "));
    }
    Ok(())
}
