// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Site density of the open-lattice state nearest the Fermi energy.

use qsh_core::edge::{edge_eigenstates, edge_weight, site_density, SpinChannel, DEFAULT_RING_DEPTH};
use qsh_core::model::{Flux, ModelParams};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.0, 0.0);
    let states = edge_eigenstates(&params, 1.5, 2)?;
    let s = &states[0];
    let map = site_density(s.state.view(), params.nx, params.ny, s.energy, SpinChannel::Both)?;
    println!("E = {:.6} t0", s.energy);
    for n in (0..params.ny).rev() {
        let row: Vec<String> = (0..params.nx).map(|m| format!("{:.3}", map.density[(n, m)])).collect();
        println!("{}", row.join(" "));
    }
    println!(
        "edge weight: depth {DEFAULT_RING_DEPTH} {:.3}, perimeter {:.3}",
        edge_weight(&map, DEFAULT_RING_DEPTH)?,
        edge_weight(&map, 1)?
    );
    Ok(())
}
