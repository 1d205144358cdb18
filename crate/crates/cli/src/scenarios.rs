//! Scenario configurations shipped with the binary.

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const NAMES: [&str; 6] = ["fig1a", "fig1b", "fig1c", "fig3a", "fig3b", "tb-sweep"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => include_str!("../scenarios/fig1a.json"),
        "fig1b" => include_str!("../scenarios/fig1b.json"),
        "fig1c" => include_str!("../scenarios/fig1c.json"),
        "fig3a" => include_str!("../scenarios/fig3a.json"),
        "fig3b" => include_str!("../scenarios/fig3b.json"),
        "tb-sweep" => include_str!("../scenarios/tb-sweep.json"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<ScenarioConfig, CliError> {
    let text = source(name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    ScenarioConfig::from_json(text).map_err(|e| CliError::Parse(format!("{name}: {e}")))
}
