// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Parse a JSON run configuration and execute it the way `qsh` does.

use qsh_core::io::{parse_config_str, run, RunOptions};

fn main() -> qsh_core::Result<()> {
    let config = parse_config_str(
        r#"{
            "model": { "alpha": "1/3", "beta": 0.0, "lambda": 0.0 },
            "edge_states": { "fermi_energy": 1.5, "ring_depth": 2 }
        }"#,
    )?;
    let out = std::env::temp_dir().join("qsh-example-run");
    let opts = RunOptions { force: true, ..RunOptions::new(&out) };
    let report = run(&config, &opts)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    println!("manifest {}", report.manifest.display());
    Ok(())
}
