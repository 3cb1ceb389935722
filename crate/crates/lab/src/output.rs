use std::path::Path;

use anyhow::{Context, Result};
use qbm_core::training::TrainingTrace;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// A named output file held in memory until the run is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            contents,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut contents = serde_json::to_vec_pretty(value)?;
        contents.push(b'\n');
        Ok(Artifact::new(name, contents))
    }

    pub fn trace(name: impl Into<String>, trace: &TrainingTrace, timing: bool) -> Result<Self> {
        let mut contents = Vec::new();
        trace.write_csv(&mut contents, timing)?;
        Ok(Artifact::new(name, contents))
    }
}

/// Everything one experiment run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    /// False when a verification experiment found a violation.
    pub passed: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    files: Vec<&'a str>,
}

impl RunOutput {
    /// All files of the run, including `summary.json` and `manifest.json`.
    pub fn files(&self, config: &ExperimentConfig) -> Result<Vec<Artifact>> {
        let mut files = self.artifacts.clone();
        let summary = serde_json::json!({
            "experiment": config.experiment.name(),
            "config": config,
            "results": self.summary,
            "passed": self.passed,
        });
        files.push(Artifact::json("summary.json", &summary)?);
        let names: Vec<String> = files.iter().map(|a| a.name.clone()).collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment: config.experiment.name(),
            seed: config.seed,
            config,
            files: names.iter().map(String::as_str).collect(),
        };
        files.push(Artifact::json("manifest.json", &manifest)?);
        Ok(files)
    }

    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<Vec<Artifact>> {
        let files = self.files(config)?;
        for file in &files {
            let path = dir.join(&file.name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(&path, &file.contents).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(files)
    }
}
