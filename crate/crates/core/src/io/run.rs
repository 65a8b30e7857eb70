// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Task execution, output files, run manifest and result cache.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{
    hex, BandsTask, EdgeStatesTask, Format, LindbladTask, PhaseDiagramTask, RibbonTask, RunConfig, RwaCheckTask,
    Task, TonesTask,
};
use super::tables::{Cell, Table};
use crate::circuit::{effective_propagator, full_evolve, rwa_fidelity, EvolveOptions, Plaquette};
use crate::edge::{edge_eigenstates, edge_weight, site_density};
use crate::error::{Error, Result};
use crate::linalg::unitarity_defect;
use crate::model::ModelParams;
use crate::open_system::{decay_scan, DecayProtocol, LindbladOptions};
use crate::spectra::{bulk_bands, periodic_grid, ribbon_bands, KGrid};
use crate::topology::{phase_diagram, ClassifyOptions, Phase, Z2Options};

/// Environment variable that overrides the cache directory.
pub const CACHE_ENV: &str = "QSH_CACHE_DIR";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const LOCK_NAME: &str = ".qsh.lock";
const CACHE_INDEX: &str = "files.json";

/// Files and metadata produced by one task.
#[derive(Clone, Debug, Default)]
pub struct TaskOutput {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    /// Per-point failures that did not abort the task.
    pub errors: Vec<String>,
    pub metadata: Value,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Recompute even when a cached result exists.
    pub force: bool,
    /// Explicit cache directory; otherwise `QSH_CACHE_DIR`, otherwise `<out>/.qsh-cache`.
    pub cache_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: out_dir.into(), force: false, cache_dir: None }
    }

    pub fn resolved_cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| self.out_dir.join(".qsh-cache"))
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub cache_hit: bool,
    pub errors: Vec<String>,
    pub elapsed_s: f64,
}

/// Removes the lock file when dropped.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self(path)),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::Io(std::io::Error::new(
                ErrorKind::AlreadyExists,
                format!("{} is in use by another run (delete {} if it is stale)", dir.display(), path.display()),
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Runs the configured task into `opts.out_dir`, reusing a cached result when possible.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    fs::create_dir_all(&opts.out_dir)?;
    let _lock = DirLock::acquire(&opts.out_dir)?;
    let hash = config.config_hash();
    let entry = opts.resolved_cache_dir().join(&hash);

    let cached = if opts.force { None } else { read_cache(&entry) };
    let cache_hit = cached.is_some();
    let output = match cached {
        Some(out) => {
            log::info!("cache hit for {hash}");
            out
        }
        None => {
            let out = match config.threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::param(format!("cannot build a pool of {n} threads: {e}")))?
                    .install(|| compute(config)),
                None => compute(config),
            }?;
            if let Err(e) = write_cache(&entry, &out) {
                log::warn!("could not write cache entry {}: {e}", entry.display());
            }
            out
        }
    };

    let mut files = Vec::new();
    let mut listing = Vec::new();
    for (name, contents) in &output.files {
        let path = opts.out_dir.join(name);
        fs::write(&path, contents)?;
        listing.push(json!({ "name": name, "sha256": sha256_hex(contents.as_bytes()), "bytes": contents.len() }));
        files.push(path);
    }
    let elapsed_s = start.elapsed().as_secs_f64();
    let manifest = json!({
        "tool": "qsh",
        "version": env!("CARGO_PKG_VERSION"),
        "task": config.task.name(),
        "config": serde_json::from_str::<Value>(&config.canonical_json()).expect("canonical config is JSON"),
        "config_sha256": hash,
        "format": config.format,
        "threads": config.threads.unwrap_or_else(rayon::current_num_threads),
        "cache": if cache_hit { "hit" } else { "miss" },
        "files": listing,
        "errors": output.errors,
        "warnings": config.warnings,
        "metadata": output.metadata,
        "timings_s": { "total": elapsed_s },
    });
    let manifest_path = opts.out_dir.join(MANIFEST_NAME);
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(RunReport { files, manifest: manifest_path, cache_hit, errors: output.errors, elapsed_s })
}

fn read_cache(entry: &Path) -> Option<TaskOutput> {
    let index: Value = serde_json::from_str(&fs::read_to_string(entry.join(CACHE_INDEX)).ok()?).ok()?;
    let mut out = TaskOutput {
        errors: serde_json::from_value(index.get("errors")?.clone()).ok()?,
        metadata: index.get("metadata")?.clone(),
        ..Default::default()
    };
    for f in index.get("files")?.as_array()? {
        let name = f.get("name")?.as_str()?;
        let contents = fs::read_to_string(entry.join(name)).ok()?;
        if sha256_hex(contents.as_bytes()) != f.get("sha256")?.as_str()? {
            log::warn!("cache entry {} is corrupt; recomputing", entry.display());
            return None;
        }
        out.files.push((name.to_string(), contents));
    }
    Some(out)
}

fn write_cache(entry: &Path, out: &TaskOutput) -> Result<()> {
    fs::create_dir_all(entry)?;
    let mut listing = Vec::new();
    for (name, contents) in &out.files {
        fs::write(entry.join(name), contents)?;
        listing.push(json!({ "name": name, "sha256": sha256_hex(contents.as_bytes()) }));
    }
    let index = json!({ "files": listing, "errors": out.errors, "metadata": out.metadata });
    fs::write(entry.join(CACHE_INDEX), serde_json::to_string_pretty(&index).expect("index serializes"))?;
    Ok(())
}

/// Computes the task's tables without touching the filesystem.
pub fn compute(config: &RunConfig) -> Result<TaskOutput> {
    let p = &config.model;
    let f = config.format;
    match &config.task {
        Task::Bands(t) => bands(p, t, f),
        Task::Ribbon(t) => ribbon(p, t, f),
        Task::PhaseDiagram(t) => phase(p, t, f),
        Task::EdgeStates(t) => edge_states(p, t, f),
        Task::Tones(t) => tones(p, t, f),
        Task::RwaCheck(t) => rwa_check(p, t, f),
        Task::Lindblad(t) => lindblad(p, t, f),
    }
}

fn file(stem: &str, table: &Table, format: Format) -> (String, String) {
    (format!("{stem}.{}", format.extension()), table.encode(format))
}

fn bands(p: &ModelParams, t: &BandsTask, format: Format) -> Result<TaskOutput> {
    let data = bulk_bands(p, t.grid)?;
    let KGrid::Plane { points, .. } = &data.kgrid else {
        return Err(Error::Contract("bulk bands returned a line grid".into()));
    };
    let mut table = Table::new(&["kx", "ky", "band_index", "E_t0"]);
    for (&(kx, ky), energies) in points.iter().zip(&data.energies) {
        for (b, e) in energies.iter().enumerate() {
            table.push(vec![kx.into(), ky.into(), b.into(), (e / p.t0).into()]);
        }
    }
    let metadata = json!({ "grid": t.grid, "bands": data.band_count() });
    Ok(TaskOutput { files: vec![file("bands", &table, format)], errors: vec![], metadata })
}

fn ribbon(p: &ModelParams, t: &RibbonTask, format: Format) -> Result<TaskOutput> {
    let kx = periodic_grid(t.kx_points);
    let data = ribbon_bands(p, t.rows, &kx)?;
    let tags = data.localization.as_ref();
    let mut table = Table::new(&["kx", "band_index", "E_t0", "bottom_weight", "top_weight"]);
    for (i, energies) in data.energies.iter().enumerate() {
        for (b, e) in energies.iter().enumerate() {
            let tag = tags.map(|l| l[i][b]);
            table.push(vec![
                kx[i].into(),
                b.into(),
                (e / p.t0).into(),
                tag.map(|g| g.bottom).into(),
                tag.map(|g| g.top).into(),
            ]);
        }
    }
    let metadata = json!({ "rows": t.rows, "kx_points": t.kx_points, "boundary": "periodic x, open y" });
    Ok(TaskOutput { files: vec![file("ribbon", &table, format)], errors: vec![], metadata })
}

fn phase(p: &ModelParams, t: &PhaseDiagramTask, format: Format) -> Result<TaskOutput> {
    let opts = ClassifyOptions { window: t.window, z2: Z2Options { gap_threshold: t.gap_threshold, ..Default::default() } };
    let map = phase_diagram(p, t.beta_range, t.lambda_range, t.resolution, &opts)?;
    let mut table = Table::new(&["beta", "lambda", "phase", "nu"]);
    let mut errors = Vec::new();
    let mut counts = [0usize; 3];
    for (i, &beta) in map.beta_grid.iter().enumerate() {
        for (j, &lambda) in map.lambda_grid.iter().enumerate() {
            match &map.points[i][j] {
                Ok(pt) => {
                    counts[pt.phase as usize] += 1;
                    table.push(vec![beta.into(), lambda.into(), pt.phase.label().into(), pt.nu.map(i64::from).into()]);
                }
                Err(e) => {
                    errors.push(format!("beta={beta}, lambda={lambda}: {e}"));
                    table.push(vec![beta.into(), lambda.into(), "error".into(), Cell::Empty]);
                }
            }
        }
    }
    if errors.len() == table.len() {
        return Err(Error::Solver {
            message: format!("every phase-diagram point failed; first: {}", errors[0]),
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let metadata = json!({
        "window": t.window,
        "counts": {
            Phase::Topological.label(): counts[Phase::Topological as usize],
            Phase::Metal.label(): counts[Phase::Metal as usize],
            Phase::Trivial.label(): counts[Phase::Trivial as usize],
            "error": errors.len(),
        },
    });
    Ok(TaskOutput { files: vec![file("phase_diagram", &table, format)], errors, metadata })
}

fn edge_states(p: &ModelParams, t: &EdgeStatesTask, format: Format) -> Result<TaskOutput> {
    let states = edge_eigenstates(p, t.fermi_energy, t.count)?;
    let mut summary = Table::new(&["rank", "E_t0", "edge_weight", "perimeter_weight"]);
    let mut density = Table::new(&["m", "n", "density"]);
    for (rank, s) in states.iter().enumerate() {
        let map = site_density(s.state.view(), p.nx, p.ny, s.energy, t.spin_channel)?;
        let ring = edge_weight(&map, t.ring_depth)?;
        let perimeter = edge_weight(&map, 1).ok();
        summary.push(vec![rank.into(), (s.energy / p.t0).into(), ring.into(), perimeter.into()]);
        if rank == 0 {
            for (m, n, d) in map.rows() {
                density.push(vec![m.into(), n.into(), d.into()]);
            }
        }
    }
    let metadata = json!({
        "fermi_energy": t.fermi_energy,
        "ring_depth": t.ring_depth,
        "spin_channel": t.spin_channel,
        "density_state_energy": states[0].energy,
    });
    Ok(TaskOutput {
        files: vec![file("density", &density, format), file("states", &summary, format)],
        errors: vec![],
        metadata,
    })
}

fn tones(p: &ModelParams, t: &TonesTask, format: Format) -> Result<TaskOutput> {
    let plaq = Plaquette::device(p, t.row)?;
    let mut cols = vec!["bond", "channel", "freq_t0", "amplitude_t0", "phase_rad", "sign"];
    if t.physical_units {
        cols.extend(["freq_MHz", "amplitude_MHz"]);
    }
    let mut table = Table::new(&cols);
    for plan in &plaq.plans {
        for tone in &plan.tones {
            let mut row = vec![
                plan.bond.to_string().into(),
                tone.channel_label().into(),
                tone.freq.into(),
                tone.amplitude.into(),
                tone.phase.into(),
                i64::from(tone.sign).into(),
            ];
            if t.physical_units {
                row.extend([(tone.freq * t.t0_mhz).into(), (tone.amplitude * t.t0_mhz).into()]);
            }
            table.push(row);
        }
    }
    let metadata = json!({ "row": t.row, "t0_over_2pi_MHz": t.t0_mhz, "onsite": plaq.onsite });
    Ok(TaskOutput { files: vec![file("tones", &table, format)], errors: vec![], metadata })
}

fn rwa_check(p: &ModelParams, t: &RwaCheckTask, format: Format) -> Result<TaskOutput> {
    let plaq = if t.cells == 2 { Plaquette::device_pair(p, t.row)? } else { Plaquette::device(p, t.row)? };
    let opts = EvolveOptions { samples: t.samples, ..Default::default() };
    let ev = full_evolve(&plaq, t.duration, &opts)?;
    let mut table = Table::new(&["time_t0", "fidelity", "unitarity_defect"]);
    for (k, &time) in ev.times.iter().enumerate() {
        let full = ev.rotating_block(k, &plaq.onsite)?;
        let eff = effective_propagator(&plaq, time)?;
        let fid = rwa_fidelity(&full, &eff)?;
        table.push(vec![time.into(), fid.into(), unitarity_defect(&ev.interaction[k]).into()]);
    }
    let metadata = json!({ "cells": t.cells, "row": t.row, "dt": ev.dt, "steps": ev.steps, "frame": "rotating, on-site terms static" });
    Ok(TaskOutput { files: vec![file("rwa", &table, format)], errors: vec![], metadata })
}

fn lindblad(p: &ModelParams, t: &LindbladTask, format: Format) -> Result<TaskOutput> {
    let (m, n) = t.initial_site;
    let protocol = DecayProtocol {
        params: p.clone(),
        initial: (m - 1, n - 1, t.initial_spin),
        duration: t.duration_t0(),
        options: LindbladOptions { dt: t.dt, samples: t.samples, ..Default::default() },
    };
    let gammas = t.resolved_gammas();
    let rows = decay_scan(&gammas, &protocol)?;
    let mut table =
        Table::new(&["gamma_t0", "gamma_kHz_over_2pi", "P1", "P2", "P3", "min_eigenvalue", "max_trace_error"]);
    for r in &rows {
        table.push(vec![
            r.gamma.into(),
            (r.gamma * t.t0_mhz * 1000.0).into(),
            r.populations.edge.into(),
            r.populations.inner.into(),
            r.populations.total.into(),
            r.min_eigenvalue.into(),
            r.max_trace_error.into(),
        ]);
    }
    let metadata = json!({
        "frame": "rotating frame of the lattice model; secular photon and transmon loss",
        "dt": t.dt,
        "T_t0": protocol.duration,
        "T_us": t.duration_us,
        "t0_over_2pi_MHz": t.t0_mhz,
        "initial_site": [m, n],
        "initial_spin": t.initial_spin,
    });
    let meta_file = ("decay_metadata.json".to_string(), serde_json::to_string_pretty(&metadata).expect("metadata") + "\n");
    Ok(TaskOutput { files: vec![file("decay", &table, format), meta_file], errors: vec![], metadata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_config_str;

    fn run_in(dir: &Path, text: &str, force: bool) -> RunReport {
        let cfg = parse_config_str(text).unwrap();
        let opts = RunOptions { out_dir: dir.to_path_buf(), force, cache_dir: Some(dir.join("cache")) };
        run(&cfg, &opts).unwrap()
    }

    #[test]
    fn tones_run_writes_table_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_in(dir.path(), r#"{"alpha":"1/3","task":"tones","physical_units":true}"#, false);
        assert!(!report.cache_hit);
        let csv = fs::read_to_string(dir.path().join("tones.csv")).unwrap();
        assert!(csv.starts_with("bond,channel,freq_t0,amplitude_t0,phase_rad,sign,freq_MHz,amplitude_MHz\n"));
        // At beta = 0 each of the four bonds carries an up-up and a down-down tone.
        assert_eq!(csv.lines().count(), 1 + 4 * 2);
        let manifest: Value = serde_json::from_str(&fs::read_to_string(&report.manifest).unwrap()).unwrap();
        assert_eq!(manifest["task"], "tones");
        assert_eq!(manifest["cache"], "miss");
        assert!(!dir.path().join(LOCK_NAME).exists());

        let again = run_in(dir.path(), r#"{"alpha":"1/3","task":"tones","physical_units":true}"#, false);
        assert!(again.cache_hit);
        assert_eq!(fs::read_to_string(dir.path().join("tones.csv")).unwrap(), csv);
        let forced = run_in(dir.path(), r#"{"alpha":"1/3","task":"tones","physical_units":true}"#, true);
        assert!(!forced.cache_hit);
    }

    #[test]
    fn lock_blocks_concurrent_runs() {
        let dir = tempfile::tempdir().unwrap();
        let _held = DirLock::acquire(dir.path()).unwrap();
        let cfg = parse_config_str(r#"{"alpha":"1/3","task":"tones"}"#).unwrap();
        let err = run(&cfg, &RunOptions::new(dir.path())).unwrap_err();
        assert!(err.to_string().contains("in use"), "{err}");
    }
}
