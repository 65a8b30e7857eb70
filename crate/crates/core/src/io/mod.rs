// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration, table export and the cached task runner behind `qsh`.

mod config;
mod run;
mod tables;

pub use config::{
    parse_config, parse_config_for, parse_config_str, parse_config_str_for, BandsTask, EdgeStatesTask, Format, LindbladTask, PhaseDiagramTask, RibbonTask,
    RunConfig, RwaCheckTask, Task, TonesTask, TASK_NAMES,
};
pub use run::{compute, run, RunOptions, RunReport, TaskOutput, CACHE_ENV, LOCK_NAME, MANIFEST_NAME};
pub use tables::{format_float, Cell, Table, SIGNIFICANT_DIGITS};
