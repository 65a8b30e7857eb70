// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Full driven two-cell circuit against the rotating-wave hopping model.

use std::f64::consts::PI;

use qsh_core::circuit::{effective_propagator, full_evolve, rwa_fidelity, EvolveOptions, Plaquette};
use qsh_core::model::{Flux, ModelParams};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.0, 0.0);
    let plaq = Plaquette::device_pair(&params, 1)?;
    let opts = EvolveOptions { samples: 4, ..Default::default() };
    let ev = full_evolve(&plaq, PI / 2.0, &opts)?;
    println!("dt = {:.3e}, {} steps", ev.dt, ev.steps);
    for (k, &t) in ev.times.iter().enumerate() {
        let full = ev.rotating_block(k, &plaq.onsite)?;
        let eff = effective_propagator(&plaq, t)?;
        println!("t = {t:.4}: fidelity {:.6}", rwa_fidelity(&full, &eff)?);
    }
    Ok(())
}
