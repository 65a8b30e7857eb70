// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Build the open-lattice and Bloch Hamiltonians and check their symmetries.

use qsh_core::model::{
    bloch_hamiltonian, open_hamiltonian, time_reversal_check, Flux, ModelParams, Representation,
};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.1, 1.0);
    let open = open_hamiltonian(&params)?;
    println!("open 6x6: dim {}, hermiticity residual {:.1e}", open.dim(), open.hermiticity_residual());

    let bloch = bloch_hamiltonian(&params, 0.3, 0.1)?;
    println!("bloch cell height {}: dim {}", params.alpha.magnetic_cell_height(), bloch.dim());

    let tr_open = time_reversal_check(&params, &Representation::Open)?;
    let tr_bloch = time_reversal_check(&params, &Representation::bloch_grid(&params, 8))?;
    println!("time reversal residual: open {tr_open:.1e}, bloch {tr_bloch:.1e}");
    Ok(())
}
