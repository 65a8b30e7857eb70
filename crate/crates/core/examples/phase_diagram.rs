// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Coarse phase diagram over (beta, lambda) printed as a character map.
//!
//! T = topological, M = metal, . = trivial, ? = failed point.

use qsh_core::model::{Flux, ModelParams};
use qsh_core::topology::{phase_diagram, ClassifyOptions, Phase};

fn main() -> qsh_core::Result<()> {
    let base = ModelParams::new(Flux::new(1, 3)?, 0.0, 0.0);
    let map = phase_diagram(&base, (0.0, 0.25), (0.0, 2.0), (16, 16), &ClassifyOptions::default())?;
    println!("lambda down, beta across [0, 0.25]");
    for j in (0..map.lambda_grid.len()).rev() {
        let row: String = (0..map.beta_grid.len())
            .map(|i| match map.phase_at(i, j) {
                Some(Phase::Topological) => 'T',
                Some(Phase::Metal) => 'M',
                Some(Phase::Trivial) => '.',
                None => '?',
            })
            .collect();
        println!("{:5.2} {row}", map.lambda_grid[j]);
    }
    Ok(())
}
