// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Edge-detection protocol: excite the corner and measure edge and bulk populations.

use qsh_core::open_system::{decay_scan, gamma_khz, DecayProtocol};

fn main() -> qsh_core::Result<()> {
    let protocol = DecayProtocol::standard();
    let rows = decay_scan(&[0.0, 1.0 / 600.0, 1.0 / 300.0], &protocol)?;
    println!("T = {:.3} / t0", protocol.duration);
    for r in rows {
        println!(
            "gamma {:7.2} kHz: P1 {:.4}  P2 {:.4}  P3 {:.4}  exp(-gT) {:.4}",
            gamma_khz(r.gamma),
            r.populations.edge,
            r.populations.inner,
            r.populations.total,
            (-r.gamma * protocol.duration).exp()
        );
    }
    Ok(())
}
