//! Pipeline stages: preprocessing meshes into Euler-curve fields, training,
//! embedding, and the isometry-invariance error analysis.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{DatasetManifest, ExperimentConfig, ManifestEntry, Split};
use crate::complex::{parse_obj, parse_off, random_isometry, EmbeddedComplex, Isometry};
use crate::error::{EctError, Result};
use crate::net::{
    class_targets, compute_gradients, model_forward, normalized_adjacency, optimizer_step,
    AdamState, ModelParams, NormalizedAdjacency, TrainConfig,
};
use crate::sphere::{icosphere, DirectionSet};
use crate::topo::{ect_field, read_ectf, write_ectf, EctField};

/// Where the preprocessed field for a mesh lives: the mesh file name with
/// its extension replaced by `.ectf`, under `fields_dir`.
pub fn field_path(fields_dir: &Path, mesh_path: &str) -> PathBuf {
    let stem = Path::new(mesh_path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| mesh_path.to_string());
    fields_dir.join(format!("{stem}.ectf"))
}

fn load_mesh(path: &Path) -> Result<EmbeddedComplex> {
    let text = std::fs::read_to_string(path)?;
    let mesh = if path.extension().map(|e| e == "obj").unwrap_or(false) {
        parse_obj(&text)?
    } else {
        parse_off(&text)?
    };
    let report = mesh.validate();
    if report.has_errors() {
        return Err(EctError::InvalidComplex(format!(
            "{}: {}",
            path.display(),
            report.errors.join("; ")
        )));
    }
    Ok(mesh)
}

fn preprocess_one(
    mesh: &EmbeddedComplex,
    directions: &DirectionSet,
    cfg: &ExperimentConfig,
) -> Result<EctField> {
    let normalized = mesh.normalize_scale()?;
    ect_field(&normalized, directions, cfg.a, cfg.t)
}

/// Computes one Euler-curve field file per manifest entry. `base` is the
/// directory manifest paths are relative to. Deterministic given the config,
/// so re-runs produce byte-identical files.
pub fn preprocess_ect(
    manifest: &DatasetManifest,
    base: &Path,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let (directions, _) = icosphere(cfg.level)?;
    for entry in &manifest.entries {
        let mesh = load_mesh(&DatasetManifest::resolve(base, &entry.path))?;
        let field = preprocess_one(&mesh, &directions, cfg)?;
        let out = field_path(out_dir, &entry.path);
        write_ectf(&field, BufWriter::new(File::create(&out)?))?;
    }
    Ok(())
}

fn load_field(
    fields_dir: &Path,
    entry: &ManifestEntry,
    directions: &DirectionSet,
    cfg: &ExperimentConfig,
) -> Result<EctField> {
    let path = field_path(fields_dir, &entry.path);
    let file = File::open(&path).map_err(|_| EctError::MissingArtifact {
        mesh: entry.path.clone(),
        path: path.display().to_string(),
    })?;
    let field = read_ectf(BufReader::new(file))?;
    if field.num_directions() != directions.len() || field.grid().len() != cfg.t {
        return Err(EctError::Shape(format!(
            "field for {} has {} directions x {} bins, config expects {} x {}",
            entry.path,
            field.num_directions(),
            field.grid().len(),
            directions.len(),
            cfg.t
        )));
    }
    Ok(field)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean training loss per epoch, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
}

fn targets_for(manifest: &DatasetManifest, cfg: &ExperimentConfig) -> Result<Vec<[f64; 2]>> {
    let classes = manifest.num_classes().max(cfg.classes);
    class_targets(classes)
}

/// Trains on the manifest's train split toward the octagon class targets,
/// writing an `ECTW` checkpoint and a CSV loss log (`epoch,lr,train_loss`).
/// Fully deterministic given the config seed.
pub fn train_model(
    manifest: &DatasetManifest,
    cfg: &ExperimentConfig,
    fields_dir: &Path,
    checkpoint_out: &Path,
    log_out: &Path,
) -> Result<TrainReport> {
    let tc = cfg.train_config();
    tc.validate()?;
    let (directions, graph) = icosphere(cfg.level)?;
    let adj = normalized_adjacency(&graph);
    let targets = targets_for(manifest, cfg)?;

    let train: Vec<&ManifestEntry> =
        manifest.entries.iter().filter(|e| e.split == Split::Train).collect();
    if train.is_empty() {
        return Err(EctError::Argument("manifest has no training entries".into()));
    }
    let fields: Vec<EctField> = train
        .iter()
        .map(|e| load_field(fields_dir, e, &directions, cfg))
        .collect::<Result<_>>()?;

    let mut params = ModelParams::init(tc.channels, tc.seed);
    let mut state = AdamState::new(&params);
    let mut log = BufWriter::new(File::create(log_out)?);
    writeln!(log, "epoch,lr,train_loss")?;
    let mut epoch_losses = Vec::with_capacity(tc.epochs);
    for epoch in 0..tc.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(tc.seed ^ (epoch as u64).wrapping_mul(0x9e3779b97f4a7c15));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(tc.batch_size) {
            let batch: Vec<(&EctField, [f64; 2])> =
                chunk.iter().map(|&i| (&fields[i], targets[train[i].label])).collect();
            let (loss, grads) = compute_gradients(&batch, &adj, &params, &tc)?;
            optimizer_step(&mut params, &grads, &mut state, epoch, &tc);
            epoch_loss += loss * chunk.len() as f64;
        }
        epoch_loss /= train.len() as f64;
        writeln!(log, "{epoch},{:.16e},{epoch_loss:.16e}", tc.learning_rate(epoch))?;
        epoch_losses.push(epoch_loss);
    }
    log.flush()?;
    params.save(&tc, BufWriter::new(File::create(checkpoint_out)?))?;
    let final_loss = *epoch_losses.last().unwrap_or(&f64::NAN);
    Ok(TrainReport { epoch_losses, final_loss })
}

/// Loads a checkpoint and reconciles it with the config: the architecture
/// hyperparameters (k, slope, channels) come from the checkpoint; a channel
/// mismatch with the config is an error.
pub fn load_checkpoint(path: &Path, cfg: &ExperimentConfig) -> Result<(ModelParams, TrainConfig)> {
    let (params, k, slope) = ModelParams::load(BufReader::new(File::open(path)?))?;
    if params.channels != cfg.channels {
        return Err(EctError::Shape(format!(
            "checkpoint has {} channels, config expects {}",
            params.channels, cfg.channels
        )));
    }
    let tc = TrainConfig { k_hops: k, leaky_slope: slope, ..cfg.train_config() };
    Ok((params, tc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub mesh: String,
    pub label: usize,
    pub x: f64,
    pub y: f64,
}

/// Embeds every manifest entry (in manifest order) with a trained
/// checkpoint; one row per entry.
pub fn embed_meshes(
    manifest: &DatasetManifest,
    cfg: &ExperimentConfig,
    fields_dir: &Path,
    checkpoint: &Path,
) -> Result<Vec<EmbeddingRow>> {
    let (params, tc) = load_checkpoint(checkpoint, cfg)?;
    let (directions, graph) = icosphere(cfg.level)?;
    let adj = normalized_adjacency(&graph);
    manifest
        .entries
        .iter()
        .map(|e| {
            let field = load_field(fields_dir, e, &directions, cfg)?;
            let [x, y] = model_forward(&field, &adj, &params, &tc)?;
            Ok(EmbeddingRow { mesh: e.path.clone(), label: e.label, x, y })
        })
        .collect()
}

pub fn embeddings_to_csv(rows: &[EmbeddingRow]) -> String {
    let mut out = String::from("mesh,label,x,y\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.16e},{:.16e}\n", r.mesh, r.label, r.x, r.y));
    }
    out
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    /// One deviation per (repeat, mesh): the standard deviation of the
    /// transformed embeddings around their mean, in embedding units.
    pub rows: Vec<(usize, String, usize, f64)>,
    /// Mean deviation over meshes, one per repeat.
    pub per_repeat: Vec<f64>,
    /// The isometry invariance error: per-repeat means averaged.
    pub summary: f64,
}

impl InvarianceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("repeat,mesh,label,deviation\n");
        for (repeat, mesh, label, dev) in &self.rows {
            out.push_str(&format!("{repeat},{mesh},{label},{dev:.16e}\n"));
        }
        out
    }
}

/// Measures how far the pipeline is from exact isometry invariance: each
/// mesh is moved by `num_transforms` random rigid motions, re-preprocessed
/// from scratch and re-embedded; the spread of the resulting embeddings is
/// averaged over meshes and over `num_repeats` independently seeded repeats.
/// With `identity_transforms` the rigid motions are all the identity, which
/// must give exactly zero.
pub fn invariance_error_analysis(
    manifest: &DatasetManifest,
    base: &Path,
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    identity_transforms: bool,
) -> Result<InvarianceReport> {
    let (params, tc) = load_checkpoint(checkpoint, cfg)?;
    let (directions, graph) = icosphere(cfg.level)?;
    let adj = normalized_adjacency(&graph);
    let meshes: Vec<(&ManifestEntry, EmbeddedComplex)> = manifest
        .entries
        .iter()
        .map(|e| Ok((e, load_mesh(&DatasetManifest::resolve(base, &e.path))?)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut per_repeat = Vec::with_capacity(cfg.num_repeats);
    for repeat in 0..cfg.num_repeats {
        let mut mesh_mean = 0.0;
        for (mesh_idx, (entry, mesh)) in meshes.iter().enumerate() {
            let dev = embedding_spread(
                mesh,
                &directions,
                &adj,
                &params,
                &tc,
                cfg,
                |j| transform_seed(cfg.seed, repeat, mesh_idx, j),
                identity_transforms,
            )?;
            rows.push((repeat, entry.path.clone(), entry.label, dev));
            mesh_mean += dev / meshes.len() as f64;
        }
        per_repeat.push(mesh_mean);
    }
    let summary = per_repeat.iter().sum::<f64>() / per_repeat.len() as f64;
    Ok(InvarianceReport { rows, per_repeat, summary })
}

fn transform_seed(base_seed: u64, repeat: usize, mesh_idx: usize, j: usize) -> u64 {
    base_seed
        .wrapping_add((repeat as u64).wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add((mesh_idx as u64).wrapping_mul(0xd1b54a32d192ed03))
        .wrapping_add((j as u64).wrapping_mul(0x94d049bb133111eb))
        .wrapping_add(1)
}

#[allow(clippy::too_many_arguments)]
fn embedding_spread(
    mesh: &EmbeddedComplex,
    directions: &DirectionSet,
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    tc: &TrainConfig,
    cfg: &ExperimentConfig,
    seed_of: impl Fn(usize) -> u64,
    identity_transforms: bool,
) -> Result<f64> {
    let mut embeddings = Vec::with_capacity(cfg.num_transforms);
    for j in 0..cfg.num_transforms {
        let iso = if identity_transforms {
            Isometry::identity(3)
        } else {
            random_isometry(seed_of(j))
        };
        let moved = mesh.apply_isometry(&iso)?;
        let field = preprocess_one(&moved, directions, cfg)?;
        embeddings.push(model_forward(&field, adj, params, tc)?);
    }
    let n = embeddings.len() as f64;
    let mean = embeddings.iter().fold([0.0f64; 2], |acc, e| {
        [acc[0] + e[0] / n, acc[1] + e[1] / n]
    });
    // Standard deviation of the embeddings around their mean: the root mean
    // squared Euclidean distance from the mean embedding.
    let var = embeddings
        .iter()
        .map(|e| (e[0] - mean[0]).powi(2) + (e[1] - mean[1]).powi(2))
        .sum::<f64>()
        / n;
    Ok(var.sqrt())
}
