//! The full model: convolution head per direction, two simplified graph
//! convolutions with LeakyReLU, global average pooling and a final affine
//! map to R^2; with loss and exact reverse-mode gradients.

use ndarray::{Array1, Array2, Axis};

use super::conv::{head_backward, head_forward, leaky_relu, leaky_relu_grad, HeadCache};
use super::graph::NormalizedAdjacency;
use super::{ModelParams, TrainConfig};
use crate::error::{EctError, Result};
use crate::topo::EctField;

/// Gradients carry exactly the parameter shapes.
pub type ModelGrads = ModelParams;

struct ForwardCache {
    head: HeadCache,
    m1: Array2<f64>, // A~^k X
    s1: Array2<f64>, // M1 W_sg1 (pre-activation)
    m2: Array2<f64>, // A~^k leaky(S1)
    s2: Array2<f64>,
    pooled: Array1<f64>,
    embedding: [f64; 2],
}

fn field_to_curves(field: &EctField) -> Array2<f64> {
    let (n, t) = field.values.dim();
    Array2::from_shape_fn((n, t), |(i, j)| field.values[(i, j)] as f64)
}

fn forward_cached(
    field: &EctField,
    adj: &NormalizedAdjacency,
    p: &ModelParams,
    cfg: &TrainConfig,
) -> Result<ForwardCache> {
    if field.num_directions() != adj.n {
        return Err(EctError::Shape(format!(
            "field has {} directions, graph has {} nodes",
            field.num_directions(),
            adj.n
        )));
    }
    let curves = field_to_curves(field);
    let head = head_forward(&curves, p, cfg.leaky_slope)?;

    let m1 = adj.apply_power(&head.h, cfg.k_hops)?;
    let s1 = m1.dot(&p.sg1_w);
    let z1 = leaky_relu(&s1, cfg.leaky_slope);
    let m2 = adj.apply_power(&z1, cfg.k_hops)?;
    let s2 = m2.dot(&p.sg2_w);
    let z2 = leaky_relu(&s2, cfg.leaky_slope);
    let pooled = z2.mean_axis(Axis(0)).expect("at least one node");
    let e = p.fc_w.dot(&pooled) + &p.fc_b;
    Ok(ForwardCache { head, m1, s1, m2, s2, pooled, embedding: [e[0], e[1]] })
}

/// Embedding of one Euler-curve field in R^2.
pub fn model_forward(
    field: &EctField,
    adj: &NormalizedAdjacency,
    p: &ModelParams,
    cfg: &TrainConfig,
) -> Result<[f64; 2]> {
    Ok(forward_cached(field, adj, p, cfg)?.embedding)
}

/// Smooth L1 (Huber-style) loss, averaged over the two coordinates:
/// per-coordinate 0.5 d^2 / beta when |d| < beta, else |d| - 0.5 beta.
/// Returns the loss and its gradient with respect to `pred`.
pub fn smooth_l1_loss(pred: [f64; 2], target: [f64; 2], beta: f64) -> (f64, [f64; 2]) {
    assert!(beta > 0.0, "smooth-l1 beta must be positive");
    let mut loss = 0.0;
    let mut grad = [0.0f64; 2];
    for c in 0..2 {
        let d = pred[c] - target[c];
        if d.abs() < beta {
            loss += 0.5 * d * d / beta;
            grad[c] = d / beta / 2.0;
        } else {
            loss += d.abs() - 0.5 * beta;
            grad[c] = d.signum() / 2.0;
        }
    }
    (loss / 2.0, grad)
}

/// Mean smooth-L1 loss of a batch and the exact gradient of every parameter
/// tensor. Batch items are processed in index order, so accumulation is
/// deterministic.
pub fn compute_gradients(
    batch: &[(&EctField, [f64; 2])],
    adj: &NormalizedAdjacency,
    p: &ModelParams,
    cfg: &TrainConfig,
) -> Result<(f64, ModelGrads)> {
    if batch.is_empty() {
        return Err(EctError::Argument("empty batch".into()));
    }
    let mut grads = p.zeros_like();
    let mut total_loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for &(field, target) in batch {
        let cache = forward_cached(field, adj, p, cfg)?;
        let (loss, dloss) = smooth_l1_loss(cache.embedding, target, cfg.beta);
        total_loss += scale * loss;
        let de = Array1::from_vec(vec![scale * dloss[0], scale * dloss[1]]);

        // Final affine map.
        let n_nodes = adj.n as f64;
        for c in 0..2 {
            grads.fc_b[c] += de[c];
            for ch in 0..p.channels {
                grads.fc_w[(c, ch)] += de[c] * cache.pooled[ch];
            }
        }
        let dpooled = p.fc_w.t().dot(&de);

        // Average pool spreads the gradient uniformly over nodes.
        let dz2 = Array2::from_shape_fn((adj.n, p.channels), |(_, ch)| dpooled[ch] / n_nodes);
        let ds2 = &dz2 * &leaky_relu_grad(&cache.s2, cfg.leaky_slope);
        grads.sg2_w += &cache.m2.t().dot(&ds2);
        let dm2 = ds2.dot(&p.sg2_w.t());
        // A~ is symmetric, so the adjoint of A~^k is A~^k.
        let dz1 = adj.apply_power(&dm2, cfg.k_hops)?;
        let ds1 = &dz1 * &leaky_relu_grad(&cache.s1, cfg.leaky_slope);
        grads.sg1_w += &cache.m1.t().dot(&ds1);
        let dm1 = ds1.dot(&p.sg1_w.t());
        let dh = adj.apply_power(&dm1, cfg.k_hops)?;

        head_backward(&cache.head, p, cfg.leaky_slope, &dh, &mut grads);
    }
    Ok((total_loss, grads))
}
