//! Parameter updates: Adam (default) or plain SGD, with the two-stage
//! learning-rate schedule.

use super::{ModelGrads, ModelParams, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Adam moment estimates; `zeros_like` the parameters at the start.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub m: ModelParams,
    pub v: ModelParams,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        Self { step: 0, m: params.zeros_like(), v: params.zeros_like() }
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// One in-place update with the learning rate scheduled by `epoch`
/// (0-based). Deterministic given parameters, gradients and state.
pub fn optimizer_step(
    params: &mut ModelParams,
    grads: &ModelGrads,
    state: &mut AdamState,
    epoch: usize,
    cfg: &TrainConfig,
) {
    let lr = cfg.learning_rate(epoch);
    match cfg.optimizer {
        OptimizerKind::Sgd => {
            for (p, g) in params.flat_mut().into_iter().zip(grads.flat()) {
                for (x, &dx) in p.iter_mut().zip(g) {
                    *x -= lr * dx;
                }
            }
        }
        OptimizerKind::Adam => {
            state.step += 1;
            let t = state.step as f64;
            let bc1 = 1.0 - ADAM_BETA1.powf(t);
            let bc2 = 1.0 - ADAM_BETA2.powf(t);
            let mut m = state.m.flat_mut();
            let mut v = state.v.flat_mut();
            for (i, (p, g)) in params.flat_mut().into_iter().zip(grads.flat()).enumerate() {
                let m = &mut m[i];
                let v = &mut v[i];
                for (k, (x, &dx)) in p.iter_mut().zip(g).enumerate() {
                    m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * dx;
                    v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * dx * dx;
                    let m_hat = m[k] / bc1;
                    let v_hat = v[k] / bc2;
                    *x -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
    }
}
