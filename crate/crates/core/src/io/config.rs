// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration.
//!
//! Model fields (`alpha`, `beta`, `lambda`, `t0`, `nx`, `ny`) sit at the top level or
//! in a `model` object. The task is named either by `"task": "<name>"` with its
//! fields inline, or by a single block `"<name>": { ... }`.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::circuit::T0_MHZ;
use crate::edge::{SpinChannel, DEFAULT_RING_DEPTH};
use crate::error::{Error, Result};
use crate::model::{Flux, ModelParams, Spin};
use crate::open_system::{DEFAULT_DT, MAX_SIDE};
use crate::spectra::DEFAULT_GAP_THRESHOLD;
use crate::topology::{DEFAULT_FERMI_ENERGY, DEFAULT_WINDOW};

pub const TASK_NAMES: [&str; 7] = ["bands", "ribbon", "phase_diagram", "edge_states", "tones", "rwa_check", "lindblad"];

const MODEL_KEYS: [&str; 6] = ["alpha", "beta", "lambda", "t0", "nx", "ny"];
const GENERAL_KEYS: [&str; 6] = ["model", "task", "output", "format", "threads", "seed"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsTask {
    pub grid: (usize, usize),
}

impl Default for BandsTask {
    fn default() -> Self {
        Self { grid: (64, 64) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RibbonTask {
    pub rows: usize,
    pub kx_points: usize,
}

impl Default for RibbonTask {
    fn default() -> Self {
        Self { rows: 42, kx_points: 201 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramTask {
    pub beta_range: (f64, f64),
    pub lambda_range: (f64, f64),
    pub resolution: (usize, usize),
    pub window: (f64, f64),
    pub gap_threshold: f64,
}

impl Default for PhaseDiagramTask {
    fn default() -> Self {
        Self {
            beta_range: (0.0, 0.25),
            lambda_range: (0.0, 2.0),
            resolution: (32, 32),
            window: DEFAULT_WINDOW,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeStatesTask {
    pub fermi_energy: f64,
    pub count: usize,
    pub ring_depth: usize,
    pub spin_channel: SpinChannel,
}

impl Default for EdgeStatesTask {
    fn default() -> Self {
        Self {
            fermi_energy: DEFAULT_FERMI_ENERGY,
            count: 2,
            ring_depth: DEFAULT_RING_DEPTH,
            spin_channel: SpinChannel::Both,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TonesTask {
    /// Row of the plaquette's lower cells (0-based).
    pub row: usize,
    /// Adds MHz columns using `t0/2π = t0_mhz`.
    pub physical_units: bool,
    pub t0_mhz: f64,
}

impl Default for TonesTask {
    fn default() -> Self {
        Self { row: 1, physical_units: false, t0_mhz: T0_MHZ }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RwaCheckTask {
    /// 2 (x bond of cells 1-2) or 4 (full plaquette).
    pub cells: usize,
    pub row: usize,
    /// Evolution time in units of `1/t0`.
    pub duration: f64,
    pub samples: usize,
}

impl Default for RwaCheckTask {
    fn default() -> Self {
        Self { cells: 2, row: 1, duration: PI / 2.0, samples: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LindbladTask {
    /// Decay rates in units of `t0`; empty means ten points from 0 to `t0/300`.
    pub gammas: Vec<f64>,
    pub duration_us: f64,
    pub dt: f64,
    /// 1-based `(m, n)` of the initially excited site.
    pub initial_site: (usize, usize),
    pub initial_spin: Spin,
    pub samples: usize,
    pub t0_mhz: f64,
}

impl Default for LindbladTask {
    fn default() -> Self {
        Self {
            gammas: Vec::new(),
            duration_us: 2.0,
            dt: DEFAULT_DT,
            initial_site: (1, 1),
            initial_spin: Spin::Up,
            samples: 10,
            t0_mhz: T0_MHZ,
        }
    }
}

impl LindbladTask {
    pub fn resolved_gammas(&self) -> Vec<f64> {
        if self.gammas.is_empty() {
            crate::topology::linspace(0.0, 1.0 / 300.0, 10)
        } else {
            self.gammas.clone()
        }
    }

    pub fn duration_t0(&self) -> f64 {
        2.0 * PI * self.t0_mhz * self.duration_us
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Task {
    Bands(BandsTask),
    Ribbon(RibbonTask),
    PhaseDiagram(PhaseDiagramTask),
    EdgeStates(EdgeStatesTask),
    Tones(TonesTask),
    RwaCheck(RwaCheckTask),
    Lindblad(LindbladTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Bands(_) => "bands",
            Task::Ribbon(_) => "ribbon",
            Task::PhaseDiagram(_) => "phase_diagram",
            Task::EdgeStates(_) => "edge_states",
            Task::Tones(_) => "tones",
            Task::RwaCheck(_) => "rwa_check",
            Task::Lindblad(_) => "lindblad",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub task: Task,
    pub format: Format,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Accepted for forward compatibility; every computation is deterministic.
    pub seed: u64,
    /// Non-fatal notes from parsing, such as a reduced flux fraction.
    pub warnings: Vec<String>,
}

impl RunConfig {
    /// Sorted-key JSON of everything that affects the outputs.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::json!({
            "model": self.model,
            "task": self.task,
            "format": self.format,
        });
        // serde_json maps are ordered by key.
        serde_json::to_string(&value).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex(&Sha256::digest(self.canonical_json().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_for(path, None)
}

/// Like [`parse_config`], with the task implied by the caller (a CLI subcommand).
/// A config that names a different task is rejected.
pub fn parse_config_for(path: &Path, task: Option<&str>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str_for(&text, task).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    parse_config_str_for(text, None)
}

pub fn parse_config_str_for(text: &str, expected: Option<&str>) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        config_err(format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let Value::Object(mut root) = root else {
        return Err(config_err("top level must be a JSON object"));
    };

    let mut warnings = Vec::new();
    let model = parse_model(&mut root, &mut warnings)?;

    let task_name = match root.remove("task") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(other) => return Err(config_err(format!("task: expected a task name, got {other}"))),
    };
    let blocks: Vec<String> = TASK_NAMES.iter().filter(|n| root.contains_key(**n)).map(|n| n.to_string()).collect();
    if blocks.len() > 1 {
        return Err(config_err(format!("exactly one task block is allowed, found {}", blocks.join(", "))));
    }
    let name = match (&task_name, blocks.first()) {
        (Some(t), Some(b)) if t != b => {
            return Err(config_err(format!("task {t:?} does not match the {b:?} block")));
        }
        (Some(t), _) => t.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => match expected {
            Some(e) => e.to_string(),
            None => return Err(config_err("no task given: set \"task\" or add a task block")),
        },
    };
    if let Some(e) = expected {
        if e != name {
            return Err(config_err(format!("config describes task {name:?} but {e:?} was requested")));
        }
    }
    if !TASK_NAMES.contains(&name.as_str()) {
        return Err(config_err(format!("task: unknown task {name:?}, expected one of {}", TASK_NAMES.join(", "))));
    }
    let mut fields = match root.remove(&name) {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(other) => return Err(config_err(format!("{name}: expected an object, got {other}"))),
    };

    let (format, out_dir) = parse_output(&mut root)?;
    let threads = match root.remove("threads") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .filter(|&n| n >= 1)
                .ok_or_else(|| config_err(format!("threads: expected a positive integer, got {v}")))?
                as usize,
        ),
    };
    let seed = match root.remove("seed") {
        None => 0,
        Some(v) => v.as_u64().ok_or_else(|| config_err(format!("seed: expected an integer, got {v}")))?,
    };

    // Anything left at the top level belongs to the task.
    for (k, v) in std::mem::take(&mut root) {
        if fields.contains_key(&k) {
            return Err(config_err(format!("{name}.{k}: given both inline and in the task block")));
        }
        if GENERAL_KEYS.contains(&k.as_str()) || MODEL_KEYS.contains(&k.as_str()) {
            return Err(config_err(format!("{k}: duplicated")));
        }
        fields.insert(k, v);
    }
    let task = parse_task(&name, fields)?;
    validate_task(&task, &model)?;
    Ok(RunConfig { model, task, format, out_dir, threads, seed, warnings })
}

fn parse_model(root: &mut Map<String, Value>, warnings: &mut Vec<String>) -> Result<ModelParams> {
    let mut fields = match root.remove("model") {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(other) => return Err(config_err(format!("model: expected an object, got {other}"))),
    };
    for key in MODEL_KEYS {
        if let Some(v) = root.remove(key) {
            if fields.insert(key.to_string(), v).is_some() {
                return Err(config_err(format!("{key}: given both at top level and in model")));
            }
        }
    }
    if let Some(k) = fields.keys().find(|k| !MODEL_KEYS.contains(&k.as_str())) {
        return Err(config_err(format!("model.{k}: unknown field, expected one of {}", MODEL_KEYS.join(", "))));
    }
    let alpha = match fields.get("alpha") {
        Some(Value::String(s)) => {
            let (flux, reduced) = Flux::parse_reporting(s).map_err(|e| config_err(format!("alpha: {e}")))?;
            if reduced {
                let msg = format!("alpha {s:?} normalized to {flux}");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            flux
        }
        Some(other) => return Err(config_err(format!("alpha: expected a fraction string like \"1/3\", got {other}"))),
        None => return Err(config_err("alpha: missing (rational flux such as \"1/3\")")),
    };
    let num = |key: &str, default: f64| -> Result<f64> {
        match fields.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| config_err(format!("{key}: expected a number, got {v}"))),
        }
    };
    let int = |key: &str, default: usize| -> Result<usize> {
        match fields.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| config_err(format!("{key}: expected a non-negative integer, got {v}"))),
        }
    };
    let mut params = ModelParams::new(alpha, num("beta", 0.0)?, num("lambda", 0.0)?)
        .with_size(int("nx", 6)?, int("ny", 6)?);
    params.t0 = num("t0", 1.0)?;
    params.validate().map_err(|e| config_err(format!("model: {e}")))?;
    Ok(params)
}

fn parse_output(root: &mut Map<String, Value>) -> Result<(Format, Option<PathBuf>)> {
    let mut format = Format::default();
    let mut dir = None;
    if let Some(v) = root.remove("output") {
        let Value::Object(m) = v else {
            return Err(config_err("output: expected an object with dir and format"));
        };
        for (k, v) in m {
            match (k.as_str(), v) {
                ("dir", Value::String(s)) => dir = Some(PathBuf::from(s)),
                ("format", Value::String(s)) => format = s.parse().map_err(|e| prefix("output.format", e))?,
                (k, v) => return Err(config_err(format!("output.{k}: unexpected value {v}"))),
            }
        }
    }
    if let Some(v) = root.remove("format") {
        let s = v.as_str().ok_or_else(|| config_err("format: expected \"csv\" or \"json\""))?;
        format = s.parse().map_err(|e| prefix("format", e))?;
    }
    Ok((format, dir))
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => config_err(format!("{field}: {m}")),
        other => other,
    }
}

fn block<T: DeserializeOwned>(name: &str, fields: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(fields)).map_err(|e| config_err(format!("{name}: {e}")))
}

fn parse_task(name: &str, fields: Map<String, Value>) -> Result<Task> {
    Ok(match name {
        "bands" => Task::Bands(block(name, fields)?),
        "ribbon" => Task::Ribbon(block(name, fields)?),
        "phase_diagram" => Task::PhaseDiagram(block(name, fields)?),
        "edge_states" => Task::EdgeStates(block(name, fields)?),
        "tones" => Task::Tones(block(name, fields)?),
        "rwa_check" => Task::RwaCheck(block(name, fields)?),
        "lindblad" => Task::Lindblad(block(name, fields)?),
        other => return Err(config_err(format!("task: unknown task {other:?}"))),
    })
}

fn validate_task(task: &Task, model: &ModelParams) -> Result<()> {
    let fail = |field: &str, msg: String| Err(config_err(format!("{}.{field}: {msg}", task.name())));
    match task {
        Task::Bands(t) => {
            if t.grid.0 < 16 || t.grid.1 < 16 {
                return fail("grid", format!("must be at least 16x16, got {:?}", t.grid));
            }
        }
        Task::Ribbon(t) => {
            let q = model.alpha.magnetic_cell_height();
            if t.rows < 2 * q {
                return fail("rows", format!("must be at least {} for this flux, got {}", 2 * q, t.rows));
            }
            if t.kx_points < 101 {
                return fail("kx_points", format!("must be at least 101, got {}", t.kx_points));
            }
        }
        Task::PhaseDiagram(t) => {
            if t.resolution.0 < 16 || t.resolution.1 < 16 {
                return fail("resolution", format!("must be at least 16x16, got {:?}", t.resolution));
            }
            if !(t.window.0 < t.window.1) {
                return fail("window", format!("lower bound must be below upper bound, got {:?}", t.window));
            }
            if !(t.gap_threshold > 0.0) {
                return fail("gap_threshold", format!("must be positive, got {}", t.gap_threshold));
            }
        }
        Task::EdgeStates(t) => {
            model.validate_lattice().map_err(|e| config_err(format!("model: {e}")))?;
            if t.count == 0 || t.count > 2 * model.nx * model.ny {
                return fail("count", format!("must be between 1 and the lattice dimension, got {}", t.count));
            }
            if t.ring_depth == 0 || 2 * t.ring_depth >= model.nx.min(model.ny) {
                return fail("ring_depth", format!("must satisfy 1 <= depth < min(nx, ny)/2, got {}", t.ring_depth));
            }
        }
        Task::Tones(t) => {
            if !(t.t0_mhz > 0.0) {
                return fail("t0_mhz", format!("must be positive, got {}", t.t0_mhz));
            }
        }
        Task::RwaCheck(t) => {
            if t.cells != 2 && t.cells != 4 {
                return fail("cells", format!("must be 2 or 4, got {}", t.cells));
            }
            if !(t.duration >= 0.0 && t.duration.is_finite()) {
                return fail("duration", format!("must be non-negative, got {}", t.duration));
            }
            if t.samples == 0 {
                return fail("samples", "must be at least 1".into());
            }
        }
        Task::Lindblad(t) => {
            if t.resolved_gammas().iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return fail("gammas", "rates must be non-negative".into());
            }
            if !(t.duration_us >= 0.0) || !(t.t0_mhz > 0.0) || !(t.dt > 0.0) || t.samples == 0 {
                return fail("duration_us", "duration, dt, t0_mhz and samples must be positive".into());
            }
            if model.nx > MAX_SIDE || model.ny > MAX_SIDE || model.nx < 2 || model.ny < 2 {
                return Err(config_err(format!(
                    "model: master-equation lattice must be between 2x2 and {MAX_SIDE}x{MAX_SIDE}, got {}x{}",
                    model.nx, model.ny
                )));
            }
            let (m, n) = t.initial_site;
            if m == 0 || n == 0 || m > model.nx || n > model.ny {
                return fail("initial_site", format!("(m, n) is 1-based and must lie on the lattice, got {:?}", t.initial_site));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_bands_config_gets_defaults() {
        let c = parse_config_str(r#"{"alpha":"1/3","beta":0,"lambda":0,"task":"bands","grid":[64,64]}"#).unwrap();
        assert_eq!(c.task, Task::Bands(BandsTask { grid: (64, 64) }));
        assert_eq!(c.format, Format::Csv);
        assert_eq!((c.model.nx, c.model.ny, c.model.t0), (6, 6, 1.0));
        assert!(c.warnings.is_empty());
        let e = parse_config_str(r#"{"alpha":"1/3","task":"edge_states"}"#).unwrap();
        match e.task {
            Task::EdgeStates(t) => {
                assert_eq!(t.fermi_energy, 1.5);
                assert_eq!(t.ring_depth, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_form_is_equivalent() {
        let flat = parse_config_str(r#"{"alpha":"1/3","task":"bands","grid":[32,32]}"#).unwrap();
        let nested = parse_config_str(r#"{"model":{"alpha":"1/3"},"bands":{"grid":[32,32]}}"#).unwrap();
        assert_eq!(flat.canonical_json(), nested.canonical_json());
        assert_eq!(flat.config_hash(), nested.config_hash());
    }

    #[test]
    fn flux_is_normalized_with_warning() {
        let c = parse_config_str(r#"{"alpha":"2/4","task":"bands"}"#).unwrap();
        assert_eq!(c.model.alpha, Flux::new(1, 2).unwrap());
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn two_task_blocks_are_rejected() {
        let e = parse_config_str(r#"{"alpha":"1/3","bands":{},"ribbon":{}}"#).unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("exactly one task block")), "{e}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = parse_config_str("{\n  \"alpha\": \"1/3\",\n  \"task\": bands\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            (r#"{"alpha":"1/3","task":"bands","grid":[8,8]}"#, "bands.grid"),
            (r#"{"alpha":0.33,"task":"bands"}"#, "alpha"),
            (r#"{"task":"bands"}"#, "alpha"),
            (r#"{"alpha":"1/3","task":"bands","gird":[64,64]}"#, "gird"),
            (r#"{"alpha":"1/3","task":"rwa_check","cells":3}"#, "rwa_check.cells"),
            (r#"{"alpha":"1/3","task":"lindblad","initial_site":[0,1]}"#, "lindblad.initial_site"),
            (r#"{"alpha":"1/3","task":"bands","format":"xml"}"#, "format"),
            (r#"{"alpha":"1/3","task":"nope"}"#, "task"),
        ];
        for (text, field) in cases {
            let msg = parse_config_str(text).unwrap_err().to_string();
            assert!(msg.contains(field), "{text}: {msg}");
        }
    }

    #[test]
    fn expected_task_fills_in_or_conflicts() {
        let c = parse_config_str_for(r#"{"alpha":"1/3"}"#, Some("ribbon")).unwrap();
        assert_eq!(c.task.name(), "ribbon");
        let e = parse_config_str_for(r#"{"alpha":"1/3","task":"bands"}"#, Some("ribbon")).unwrap_err();
        assert!(e.to_string().contains("requested"), "{e}");
    }

    #[test]
    fn output_and_threads_do_not_change_the_hash() {
        let a = parse_config_str(r#"{"alpha":"1/3","task":"bands","threads":4,"output":{"dir":"x"}}"#).unwrap();
        let b = parse_config_str(r#"{"alpha":"1/3","task":"bands"}"#).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.threads, Some(4));
        let c = parse_config_str(r#"{"alpha":"1/3","task":"bands","format":"json"}"#).unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }
}
