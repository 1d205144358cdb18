//! Scenario runner behind the `slowcav` command line tool.
//!
//! A run reads one JSON [`config::ScenarioConfig`], validates it, evaluates
//! the pipeline stages the command needs and writes CSV or JSON tables plus a
//! `manifest.json` into the output directory.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ScenarioConfig, ValidationReport, Violation};
pub use error::CliError;
pub use output::{Format, Manifest};
pub use run::{run, Outcome, Stage};

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ScenarioConfig::from_json(&text).map_err(|e| CliError::Parse(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct EmitOptions {
    /// Overrides the config's `output_dir`.
    pub out: Option<PathBuf>,
    pub normalize: bool,
    pub format: Format,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            out: None,
            normalize: false,
            format: Format::Csv,
        }
    }
}

/// Runs `stage` for `config` and writes its artifacts.
pub fn execute(config: &ScenarioConfig, stage: Stage, opts: &EmitOptions) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let outcome = run(config, stage)?;
    let dir = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let mut w = output::Writer::create(dir)?;
    let f = opts.format;

    w.write("config.json", &(config.to_json() + "\n"))?;
    let all = stage == Stage::All;
    if all || stage == Stage::Profile || stage == Stage::Dispersion {
        w.table(&output::profile_table(&outcome), f)?;
    }
    if all || stage == Stage::Dispersion {
        if let Some(t) = output::dispersion_table(&outcome) {
            w.table(&t, f)?;
        }
    }
    if all || stage == Stage::Spectrum {
        if let Some(t) = output::transmission_table(&outcome) {
            w.table(&t, f)?;
        }
    }
    if all || stage == Stage::Spectrum || stage == Stage::Modes {
        if let Some(t) = output::modes_table(&outcome) {
            w.table(&t, f)?;
        }
    }
    if all || stage == Stage::Modes {
        if let Some(t) = output::report_table(&outcome) {
            w.table(&t, f)?;
        }
    }
    if all || stage == Stage::Pulse {
        for t in output::pulse_tables(&outcome, opts.normalize) {
            w.table(&t, f)?;
        }
    }
    if all || stage == Stage::Sweep {
        if let Some(t) = output::sweep_table(&outcome) {
            w.table(&t, f)?;
        }
    }
    let summary = serde_json::to_string_pretty(&outcome.summary()).expect("summary serializes");
    w.write("summary.json", &(summary + "\n"))?;
    w.finish(config, start.elapsed().as_secs_f64())
}
