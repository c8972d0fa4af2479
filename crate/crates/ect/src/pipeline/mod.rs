//! End-to-end experiment plumbing: configuration, dataset manifests,
//! synthetic mesh generation, preprocessing, training, embedding and the
//! isometry-invariance analysis.

pub mod run;
pub mod synth;

pub use run::{
    embed_meshes, embeddings_to_csv, field_path, invariance_error_analysis, load_checkpoint,
    preprocess_ect, train_model, EmbeddingRow, InvarianceReport, TrainReport,
};
pub use synth::{synth_dataset, MeshClass};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EctError, Result};
use crate::net::{OptimizerKind, TrainConfig};

fn config_err(field: &str, msg: impl Into<String>) -> EctError {
    EctError::Config { field: field.into(), msg: msg.into() }
}

/// Experiment configuration; every field has the default used in the
/// experiments, so an empty JSON object is a valid config.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Icosphere subdivision level for the direction set.
    pub level: u32,
    /// Euler-curve range bound.
    pub a: f64,
    /// Euler-curve resolution.
    pub t: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_after_drop: f64,
    pub lr_drop_epoch: usize,
    pub beta: f64,
    pub k: usize,
    pub slope: f64,
    pub channels: usize,
    pub seed: u64,
    /// Number of shape classes (octagon targets support at most 8).
    pub classes: usize,
    /// Training meshes per class.
    pub per_class: usize,
    /// Held-out meshes per class.
    pub eval_per_class: usize,
    /// Random isometries per mesh in the invariance analysis.
    pub num_transforms: usize,
    /// Independent repeats of the invariance analysis.
    pub num_repeats: usize,
    pub optimizer: String,
    /// Landscape depth for diagnostic exports.
    pub landscape_depth: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            level: 4,
            a: 8.0,
            t: 512,
            epochs: 400,
            batch_size: 16,
            lr: 0.001,
            lr_after_drop: 0.0001,
            lr_drop_epoch: 200,
            beta: 0.1,
            k: 39,
            slope: 0.01,
            channels: 128,
            seed: 0,
            classes: 4,
            per_class: 5,
            eval_per_class: 3,
            num_transforms: 10,
            num_repeats: 8,
            optimizer: "adam".into(),
            landscape_depth: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(config_err("a", format!("must be positive, got {}", self.a)));
        }
        if self.t < 29 {
            return Err(config_err(
                "t",
                format!("resolution must be at least 29 for the convolution stack, got {}", self.t),
            ));
        }
        if self.level == 0 {
            return Err(config_err("level", "must be at least 1"));
        }
        if self.classes == 0 || self.classes > 8 {
            return Err(config_err(
                "classes",
                format!("must be in 1..=8 (octagon targets), got {}", self.classes),
            ));
        }
        for (name, v) in [
            ("per_class", self.per_class),
            ("eval_per_class", self.eval_per_class),
            ("num_transforms", self.num_transforms),
            ("num_repeats", self.num_repeats),
            ("landscape_depth", self.landscape_depth),
        ] {
            if v == 0 {
                return Err(config_err(name, "must be positive"));
            }
        }
        self.optimizer_kind()?;
        self.train_config().validate()
    }

    pub fn optimizer_kind(&self) -> Result<OptimizerKind> {
        match self.optimizer.as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(config_err("optimizer", format!("unknown optimizer {other:?}"))),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            lr_after_drop: self.lr_after_drop,
            lr_drop_epoch: self.lr_drop_epoch,
            beta: self.beta,
            k_hops: self.k,
            leaky_slope: self.slope,
            channels: self.channels,
            seed: self.seed,
            optimizer: self.optimizer_kind().unwrap_or(OptimizerKind::Adam),
        }
    }
}

/// Loads and validates a JSON config; unknown keys are rejected.
pub fn run_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: usize,
    pub split: Split,
}

/// Dataset index: one entry per mesh file, with contiguous class labels and
/// a train/eval split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Loads the manifest and checks its invariants: files exist, labels
    /// are contiguous 0..C-1, and the train split has `per_class` meshes
    /// per class when `per_class` is given.
    pub fn load(path: &Path, per_class: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let manifest: Self = serde_json::from_str(&text)?;
        manifest.validate(path.parent().unwrap_or(Path::new(".")), per_class)?;
        Ok(manifest)
    }

    pub fn num_classes(&self) -> usize {
        self.entries.iter().map(|e| e.label + 1).max().unwrap_or(0)
    }

    /// Resolves an entry path relative to the manifest location.
    pub fn resolve(base: &Path, entry_path: &str) -> std::path::PathBuf {
        let p = Path::new(entry_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    pub fn validate(&self, base: &Path, per_class: Option<usize>) -> Result<()> {
        if self.entries.is_empty() {
            return Err(EctError::InvalidComplex("manifest has no entries".into())).map_err(
                |_| EctError::Argument("manifest has no entries".into()),
            );
        }
        let c = self.num_classes();
        let mut seen = vec![false; c];
        let mut train_counts = vec![0usize; c];
        for e in &self.entries {
            seen[e.label] = true;
            if e.split == Split::Train {
                train_counts[e.label] += 1;
            }
            let path = Self::resolve(base, &e.path);
            if !path.exists() {
                return Err(EctError::MissingArtifact {
                    mesh: e.path.clone(),
                    path: path.display().to_string(),
                });
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(EctError::Argument(format!(
                "labels must be contiguous; class {missing} has no entries"
            )));
        }
        if let Some(expect) = per_class {
            for (label, &count) in train_counts.iter().enumerate() {
                if count != expect {
                    return Err(EctError::Argument(format!(
                        "class {label} has {count} training meshes, expected {expect}"
                    )));
                }
            }
        }
        Ok(())
    }
}
