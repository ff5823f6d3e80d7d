use super::tensor::ParamStore;

pub const DEFAULT_LEARNING_RATE: f64 = 0.0037;
pub const DEFAULT_CLIP_NORM: f64 = 5.0;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Adam moments for every tensor of one [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step: u64,
    pub learning_rate: f64,
    pub clip_norm: f64,
}

impl OptimizerState {
    pub fn new(store: &ParamStore, learning_rate: f64, clip_norm: f64) -> Self {
        let zeros: Vec<Vec<f64>> = store.iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        OptimizerState { first_moment: zeros.clone(), second_moment: zeros, step: 0, learning_rate, clip_norm }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the factor applied (1 when nothing changed).
pub fn clip_gradients(store: &mut ParamStore, max_norm: f64) -> f64 {
    let norm = store.grad_norm();
    if norm <= max_norm || norm == 0.0 {
        return 1.0;
    }
    let scale = max_norm / norm;
    for t in store.tensors_mut() {
        if t.grad().is_some() {
            t.grad_mut().iter_mut().for_each(|g| *g *= scale);
        }
    }
    scale
}

/// One bias-corrected Adam update; gradients are zeroed afterwards.
/// Tensors without a gradient accumulator count as zero gradient.
pub fn adam_step(state: &mut OptimizerState, store: &mut ParamStore) {
    state.step += 1;
    let t = state.step as f64;
    let correction1 = 1.0 - BETA1.powf(t);
    let correction2 = 1.0 - BETA2.powf(t);
    let lr = state.learning_rate;

    for ((tensor, m), v) in store.tensors_mut().zip(state.first_moment.iter_mut()).zip(state.second_moment.iter_mut()) {
        let (data, grad) = tensor.data_and_grad_mut();
        for i in 0..data.len() {
            let g = grad[i];
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            data[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
            grad[i] = 0.0;
        }
    }
}
