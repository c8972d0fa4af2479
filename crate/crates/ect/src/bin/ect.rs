//! Command-line interface: synthetic dataset generation, Euler-curve-field
//! preprocessing, training, embedding and the isometry-invariance analysis.
//!
//! Exit codes: 0 on success, 1 on validation/configuration errors, 2 on
//! I/O errors. The `ECT_THREADS` environment variable (or rayon's own
//! `RAYON_NUM_THREADS`) caps worker threads; the default is the available
//! parallelism.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ect::error::EctError;
use ect::pipeline::{
    embed_meshes, embeddings_to_csv, invariance_error_analysis, preprocess_ect, run_config,
    synth_dataset, train_model, DatasetManifest, ExperimentConfig, MeshClass,
};

#[derive(Parser)]
#[command(
    name = "ect",
    about = "Isometry-invariant shape embeddings from Euler curve transforms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; omit for all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's icosphere direction level.
    #[arg(long)]
    level: Option<u32>,
    /// Override the config's Euler-curve resolution t.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, EctError> {
        let mut cfg = match &self.config {
            Some(path) => run_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(level) = self.level {
            cfg.level = level;
        }
        if let Some(t) = self.resolution {
            cfg.t = t;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate deformed synthetic meshes (OFF) and a manifest.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Output directory for meshes and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute one Euler-curve field file per manifest mesh.
    Preprocess {
        #[command(flatten)]
        common: Common,
        /// Dataset manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for .ectf files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the embedding network on the manifest's train split.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding the preprocessed .ectf files.
        #[arg(long)]
        fields: PathBuf,
        /// Checkpoint output path; the loss log is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed every manifest mesh with a trained checkpoint; CSV to --out.
    Embed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        fields: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Isometry-invariance error: random rigid motions, re-preprocess,
    /// re-embed, report the averaged embedding spread.
    Invariance {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// CSV output path (per-repeat, per-mesh deviations).
        #[arg(long)]
        out: PathBuf,
        /// Use identity transforms instead of random isometries.
        #[arg(long)]
        identity: bool,
    },
}

fn run(cli: Cli) -> Result<(), EctError> {
    match cli.command {
        Command::Synth { common, out } => {
            let cfg = common.load()?;
            if cfg.classes > MeshClass::ALL.len() {
                return Err(EctError::Config {
                    field: "classes".into(),
                    msg: format!(
                        "synthetic dataset provides {} classes, got {}",
                        MeshClass::ALL.len(),
                        cfg.classes
                    ),
                });
            }
            let classes = &MeshClass::ALL[..cfg.classes];
            let manifest =
                synth_dataset(&out, classes, cfg.per_class, cfg.eval_per_class, cfg.seed)?;
            println!(
                "wrote {} meshes and manifest.json to {}",
                manifest.entries.len(),
                out.display()
            );
        }
        Command::Preprocess { common, manifest, out } => {
            let cfg = common.load()?;
            let base = manifest.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
            let manifest = DatasetManifest::load(&manifest, None)?;
            preprocess_ect(&manifest, &base, &cfg, &out)?;
            println!("wrote {} field files to {}", manifest.entries.len(), out.display());
        }
        Command::Train { common, manifest, fields, out } => {
            let cfg = common.load()?;
            let manifest = DatasetManifest::load(&manifest, Some(cfg.per_class))?;
            let log = out.with_extension("loss.csv");
            let report = train_model(&manifest, &cfg, &fields, &out, &log)?;
            println!(
                "trained {} epochs, final loss {:.6e}; checkpoint {}, log {}",
                report.epoch_losses.len(),
                report.final_loss,
                out.display(),
                log.display()
            );
        }
        Command::Embed { common, manifest, fields, checkpoint, out } => {
            let cfg = common.load()?;
            let manifest = DatasetManifest::load(&manifest, None)?;
            let rows = embed_meshes(&manifest, &cfg, &fields, &checkpoint)?;
            std::fs::write(&out, embeddings_to_csv(&rows))?;
            println!("wrote {} embeddings to {}", rows.len(), out.display());
        }
        Command::Invariance { common, manifest, checkpoint, out, identity } => {
            let cfg = common.load()?;
            let base = manifest.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
            let manifest = DatasetManifest::load(&manifest, None)?;
            let report =
                invariance_error_analysis(&manifest, &base, &cfg, &checkpoint, identity)?;
            std::fs::write(&out, report.to_csv())?;
            println!("isometry invariance error: {:.16e}", report.summary);
        }
    }
    Ok(())
}

fn exit_code_for(err: &EctError) -> ExitCode {
    match err {
        EctError::Io(_) | EctError::MissingArtifact { .. } | EctError::Checkpoint(_) => {
            ExitCode::from(2)
        }
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ECT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
