//! Pipeline manifest: one JSON document accumulating, per stage, the file
//! paths, seeds, and configuration that produced each artifact. Timestamps
//! live in a dedicated field so reproducibility checks can exclude them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::formats::FormatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    pub timestamp: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl PipelineManifest {
    pub fn load_or_default(path: &Path) -> Result<PipelineManifest, FormatError> {
        if !path.exists() {
            return Ok(PipelineManifest::default());
        }
        let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| FormatError::Malformed {
            path: path.display().to_string(),
            reason: format!("parse: {}", e),
        })
    }

    /// Records a completed stage; every referenced output must exist.
    pub fn record(
        &mut self,
        stage: &str,
        mut record: StageRecord,
    ) -> Result<(), FormatError> {
        for out in &record.outputs {
            if !out.exists() {
                return Err(FormatError::Malformed {
                    path: out.display().to_string(),
                    reason: "recorded output does not exist".into(),
                });
            }
        }
        record.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.stages.insert(stage.to_string(), record);
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| FormatError::Malformed {
            path: path.display().to_string(),
            reason: format!("serialize: {}", e),
        })?;
        std::fs::write(path, json + "\n").map_err(|e| FormatError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Updates the manifest at `path` (when given) with a completed stage.
pub fn record_stage(
    path: Option<&Path>,
    stage: &str,
    record: StageRecord,
) -> Result<(), FormatError> {
    let Some(path) = path else { return Ok(()) };
    let mut manifest = PipelineManifest::load_or_default(path)?;
    manifest.record(stage, record)?;
    manifest.save(path)
}
