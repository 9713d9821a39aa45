//! Versioned JSON instance files (schema version 1).
//!
//! Top level: `version`, `name`, `seed`, `overload_penalty`, `network`
//! (`nodes`, `arcs`, `demands`, `supplies`), `scenarios`. Arc references in
//! `outaged_arcs` are zero-based indices into `arcs`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelError, Network, Scenario, TwoStageInstance};

const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u64,
    name: String,
    seed: u64,
    overload_penalty: f64,
    network: Network,
    scenarios: Vec<Scenario>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

pub fn write_instance(inst: &TwoStageInstance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let file = InstanceFile {
        version: SCHEMA_VERSION,
        name: inst.name.clone(),
        seed: inst.seed,
        overload_penalty: inst.overload_penalty,
        network: inst.network.clone(),
        scenarios: inst.scenarios.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| ModelError::ParseError(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<TwoStageInstance, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let probe: VersionProbe = serde_json::from_str(&text)
        .map_err(|e| ModelError::ParseError(format!("{}: {e}", path.display())))?;
    if probe.version != SCHEMA_VERSION {
        return Err(ModelError::SchemaVersionMismatch {
            found: probe.version,
            expected: SCHEMA_VERSION,
        });
    }
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| ModelError::ParseError(format!("{}: {e}", path.display())))?;
    let inst = TwoStageInstance {
        name: file.name,
        seed: file.seed,
        overload_penalty: file.overload_penalty,
        network: file.network,
        scenarios: file.scenarios,
    };
    inst.validate()?;
    Ok(inst)
}
