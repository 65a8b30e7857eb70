// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bulk bands on a periodic grid and the gap inside the Fermi window.

use qsh_core::model::{Flux, ModelParams};
use qsh_core::spectra::{bulk_bands, gap_in_window, DEFAULT_GAP_THRESHOLD};

fn main() -> qsh_core::Result<()> {
    for (beta, lambda) in [(0.0, 0.0), (0.0, 1.0), (0.1, 1.0)] {
        let params = ModelParams::new(Flux::new(1, 3)?, beta, lambda);
        let bands = bulk_bands(&params, (32, 32))?;
        let gap = gap_in_window(&bands, (1.0, 2.0), DEFAULT_GAP_THRESHOLD)?;
        print!("beta={beta} lambda={lambda}: {} bands, ", bands.band_count());
        match gap.gap {
            Some((lo, hi)) if gap.is_gapped => println!("gap ({lo:.3}, {hi:.3})"),
            _ => println!("no gap in (1, 2)"),
        }
    }
    Ok(())
}
