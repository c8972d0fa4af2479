//! The learnable pipeline: a translation-invariant 1D convolution head per
//! direction, simplified graph convolutions over the sphere graph with
//! global pooling, the loss/optimizer, and equivariance diagnostics.

pub mod conv;
pub mod diagnostics;
pub mod graph;
pub mod model;
pub mod optim;

pub use conv::{conv_out_len, head_output_lengths, translation_head_forward};
pub use diagnostics::{
    equivariance_error, equivariance_error_probed, equivariance_error_resampled,
    random_rotation, random_rotations, rotation_max_correlation, Resampling,
};
pub use graph::{mpnn_layer, normalized_adjacency, sgconv_layer, NormalizedAdjacency, PiecewiseGTable};
pub use model::{compute_gradients, model_forward, smooth_l1_loss, ModelGrads};
pub use optim::{optimizer_step, AdamState, OptimizerKind};

use std::io::{Read, Write};

use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{EctError, Result};

pub const ECTW_MAGIC: &[u8; 4] = b"ECTW";
pub const ECTW_VERSION: u32 = 1;

/// Training hyperparameters. Defaults follow the experimental setup: 400
/// epochs, batch 16, learning rate 0.001 dropped to 0.0001 after epoch 200,
/// smooth-L1 beta 0.1, 39 graph hops, LeakyReLU slope 0.01, 128 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_after_drop: f64,
    pub lr_drop_epoch: usize,
    pub beta: f64,
    pub k_hops: usize,
    pub leaky_slope: f64,
    pub channels: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 400,
            batch_size: 16,
            lr: 0.001,
            lr_after_drop: 0.0001,
            lr_drop_epoch: 200,
            beta: 0.1,
            k_hops: 39,
            leaky_slope: 0.01,
            channels: 128,
            seed: 0,
            optimizer: OptimizerKind::Adam,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs as f64),
            ("batch_size", self.batch_size as f64),
            ("lr", self.lr),
            ("lr_after_drop", self.lr_after_drop),
            ("beta", self.beta),
            ("channels", self.channels as f64),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(EctError::Config {
                    field: field.into(),
                    msg: format!("must be positive, got {v}"),
                });
            }
        }
        if self.lr_drop_epoch >= self.epochs {
            return Err(EctError::Config {
                field: "lr_drop_epoch".into(),
                msg: format!(
                    "learning-rate drop epoch {} must be below epochs {}",
                    self.lr_drop_epoch, self.epochs
                ),
            });
        }
        Ok(())
    }

    /// Scheduled learning rate for a 0-based epoch index.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if epoch >= self.lr_drop_epoch {
            self.lr_after_drop
        } else {
            self.lr
        }
    }
}

/// All learnable tensors. `channels` is 128 in the experiments but kept
/// adjustable so gradient checks can run on a small instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub channels: usize,
    /// (channels, 1, 5)
    pub conv1_w: Array3<f64>,
    pub conv1_b: Array1<f64>,
    /// (channels, channels, 5)
    pub conv2_w: Array3<f64>,
    pub conv2_b: Array1<f64>,
    pub conv3_w: Array3<f64>,
    pub conv3_b: Array1<f64>,
    /// (channels, channels)
    pub sg1_w: Array2<f64>,
    pub sg2_w: Array2<f64>,
    /// (2, channels)
    pub fc_w: Array2<f64>,
    pub fc_b: Array1<f64>,
}

impl ModelParams {
    /// Seeded initialization: each tensor uniform in +-1/sqrt(fan_in).
    pub fn init(channels: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = channels;
        let mut uniform = |bound: f64, len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.gen_range(-bound..bound)).collect()
        };
        let b1 = 1.0 / (5.0f64).sqrt();
        let bc = 1.0 / (c as f64 * 5.0).sqrt();
        let bs = 1.0 / (c as f64).sqrt();
        Self {
            channels: c,
            conv1_w: Array3::from_shape_vec((c, 1, 5), uniform(b1, c * 5)).unwrap(),
            conv1_b: Array1::from_vec(uniform(b1, c)),
            conv2_w: Array3::from_shape_vec((c, c, 5), uniform(bc, c * c * 5)).unwrap(),
            conv2_b: Array1::from_vec(uniform(bc, c)),
            conv3_w: Array3::from_shape_vec((c, c, 5), uniform(bc, c * c * 5)).unwrap(),
            conv3_b: Array1::from_vec(uniform(bc, c)),
            sg1_w: Array2::from_shape_vec((c, c), uniform(bs, c * c)).unwrap(),
            sg2_w: Array2::from_shape_vec((c, c), uniform(bs, c * c)).unwrap(),
            fc_w: Array2::from_shape_vec((2, c), uniform(bs, 2 * c)).unwrap(),
            fc_b: Array1::from_vec(uniform(bs, 2)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let c = self.channels;
        Self {
            channels: c,
            conv1_w: Array3::zeros((c, 1, 5)),
            conv1_b: Array1::zeros(c),
            conv2_w: Array3::zeros((c, c, 5)),
            conv2_b: Array1::zeros(c),
            conv3_w: Array3::zeros((c, c, 5)),
            conv3_b: Array1::zeros(c),
            sg1_w: Array2::zeros((c, c)),
            sg2_w: Array2::zeros((c, c)),
            fc_w: Array2::zeros((2, c)),
            fc_b: Array1::zeros(2),
        }
    }

    /// Flat views of every tensor, in declaration order.
    pub fn flat(&self) -> Vec<&[f64]> {
        vec![
            self.conv1_w.as_slice().unwrap(),
            self.conv1_b.as_slice().unwrap(),
            self.conv2_w.as_slice().unwrap(),
            self.conv2_b.as_slice().unwrap(),
            self.conv3_w.as_slice().unwrap(),
            self.conv3_b.as_slice().unwrap(),
            self.sg1_w.as_slice().unwrap(),
            self.sg2_w.as_slice().unwrap(),
            self.fc_w.as_slice().unwrap(),
            self.fc_b.as_slice().unwrap(),
        ]
    }

    pub fn flat_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.conv1_w.as_slice_mut().unwrap(),
            self.conv1_b.as_slice_mut().unwrap(),
            self.conv2_w.as_slice_mut().unwrap(),
            self.conv2_b.as_slice_mut().unwrap(),
            self.conv3_w.as_slice_mut().unwrap(),
            self.conv3_b.as_slice_mut().unwrap(),
            self.sg1_w.as_slice_mut().unwrap(),
            self.sg2_w.as_slice_mut().unwrap(),
            self.fc_w.as_slice_mut().unwrap(),
            self.fc_b.as_slice_mut().unwrap(),
        ]
    }

    pub fn num_parameters(&self) -> usize {
        self.flat().iter().map(|s| s.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.flat().iter().all(|s| s.iter().all(|x| x.is_finite()))
    }

    /// Writes the checkpoint: "ECTW" magic, version, then k, slope and
    /// channels as a config echo, then every tensor in declaration order as
    /// 64-bit LE floats.
    pub fn save<W: Write>(&self, cfg: &TrainConfig, mut w: W) -> Result<()> {
        w.write_all(ECTW_MAGIC)?;
        w.write_all(&ECTW_VERSION.to_le_bytes())?;
        w.write_all(&(cfg.k_hops as u32).to_le_bytes())?;
        w.write_all(&cfg.leaky_slope.to_le_bytes())?;
        w.write_all(&(self.channels as u32).to_le_bytes())?;
        for tensor in self.flat() {
            for &x in tensor {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a checkpoint, returning the parameters and the echoed
    /// (k, slope) pair.
    pub fn load<R: Read>(mut r: R) -> Result<(Self, usize, f64)> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != ECTW_MAGIC {
            return Err(EctError::Checkpoint(format!("bad magic bytes {magic:?}")));
        }
        let mut u32buf = [0u8; 4];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != ECTW_VERSION {
            return Err(EctError::Checkpoint(format!("unsupported version {version}")));
        }
        r.read_exact(&mut u32buf)?;
        let k = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut f64buf)?;
        let slope = f64::from_le_bytes(f64buf);
        r.read_exact(&mut u32buf)?;
        let channels = u32::from_le_bytes(u32buf) as usize;
        if channels == 0 {
            return Err(EctError::Checkpoint("zero channel count".into()));
        }
        let mut params = Self::init(channels, 0).zeros_like();
        for tensor in params.flat_mut() {
            for x in tensor.iter_mut() {
                r.read_exact(&mut f64buf)?;
                *x = f64::from_le_bytes(f64buf);
            }
        }
        if !params.all_finite() {
            return Err(EctError::Checkpoint("non-finite parameter value".into()));
        }
        Ok((params, k, slope))
    }
}

/// Per-class 2-vector targets: the vertices of the regular octagon in S^1,
/// at angles 2*pi*c/8 for class c (the first `classes` of them).
pub fn class_targets(classes: usize) -> Result<Vec<[f64; 2]>> {
    if classes == 0 || classes > 8 {
        return Err(EctError::Argument(format!(
            "class count must be in 1..=8 (octagon targets), got {classes}"
        )));
    }
    Ok((0..classes)
        .map(|c| {
            let angle = 2.0 * std::f64::consts::PI * c as f64 / 8.0;
            [angle.cos(), angle.sin()]
        })
        .collect())
}
