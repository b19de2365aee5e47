//! File-based experiment pipelines: JSON configs, execution, reports.
//!
//! A config declares model objects in the crate's JSON formats, an
//! optional pipeline of steps (`set_state`, `apply_observable`,
//! `apply_instrument`, `condition`, `compose`, `sample`,
//! `sample_consecutive`), plus queries and invariant checks to emit.
//! Reports come out as JSON or an aligned text table; a report passes when
//! every check holds and every sampling comparison stays inside its sigma
//! band. Identical config and seed give byte-identical JSON for any worker
//! count.

mod config;
mod demo;
mod report;
mod runner;

pub use config::{
    CheckDef, ComplexMatrixDef, ConfigFile, DensityDef, EmbeddedDef, ExtendedDef, KrausDef, Model,
    NamedSpaceDef, ObservableDef, PovmDef, QueryDef, SpaceDef, StateDef, StepDef,
};
pub use demo::{demo_config, DEMO_NAMES};
pub use report::{CheckResult, Declaration, Report, ResultEntry};
pub use runner::{
    run_config, run_config_source, validate_config, validate_config_source, RunOptions,
};
