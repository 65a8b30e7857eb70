// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Coupler tones for the four-cell device plaquette and their addressing margins.

use qsh_core::circuit::{addressing_margin, Plaquette, T0_MHZ};
use qsh_core::model::{Flux, ModelParams};

fn main() -> qsh_core::Result<()> {
    let params = ModelParams::new(Flux::new(1, 3)?, 0.05, 0.5);
    let plaq = Plaquette::device(&params, 1)?;
    for plan in &plaq.plans {
        for t in &plan.tones {
            println!(
                "{} {:8} freq {:6.1} t0 ({:7.1} MHz)  amp {:.4}  phase {:.4}  sign {:+}",
                plan.bond,
                t.channel_label(),
                t.freq,
                t.freq * T0_MHZ,
                t.amplitude,
                t.phase,
                t.sign
            );
        }
    }
    let (min_freq, min_sep) = addressing_margin(&plaq.plans)?;
    println!("min tone {min_freq} t0, min separation on a bond {min_sep} t0");
    Ok(())
}
