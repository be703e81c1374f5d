use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Envelope for every persisted stage output. The hash ties the payload to
/// the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact<T> {
    pub config_hash: String,
    pub stage: String,
    pub data: T,
}

pub fn artifact_path(dir: &Path, stage: &str) -> PathBuf {
    dir.join(format!("{stage}.json"))
}

fn io(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io(format!("{}: {e}", path.display()))
}

/// Writes `<dir>/<stage>.json` as pretty JSON with a trailing newline.
pub fn write_artifact<T: Serialize>(dir: &Path, stage: &str, config_hash: &str, data: &T) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = artifact_path(dir, stage);
    let envelope = Artifact { config_hash: config_hash.to_string(), stage: stage.to_string(), data };
    let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| io(&path, e))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(path)
}

/// Reads a stage artifact and refuses it when it belongs to another stage or
/// was produced under a different config.
pub fn read_artifact<T: DeserializeOwned>(dir: &Path, stage: &str, config_hash: &str) -> Result<T, PipelineError> {
    let path = artifact_path(dir, stage);
    let text = fs::read_to_string(&path)
        .map_err(|e| PipelineError::Data(format!("{}: {e} (run the `{stage}` step first)", path.display())))?;
    let artifact: Artifact<T> =
        serde_json::from_str(&text).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    if artifact.stage != stage {
        return Err(PipelineError::Data(format!("{}: holds stage `{}`, expected `{stage}`", path.display(), artifact.stage)));
    }
    if artifact.config_hash != config_hash {
        return Err(PipelineError::Data(format!(
            "{}: produced by config {}, current config is {config_hash}; refusing to mix artifacts",
            path.display(),
            artifact.config_hash
        )));
    }
    Ok(artifact.data)
}
