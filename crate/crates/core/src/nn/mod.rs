//! Minimal float64 numerics: tensors, a reverse-mode tape, recurrent and
//! dense layers, Adam, gradient clipping and a finite-difference checker.

pub mod checkpoint;
mod gradcheck;
mod graph;
mod layers;
mod optim;
mod tensor;

pub use gradcheck::{grad_check, relative_error, GradCheckOptions, GradCheckReport, ParamCheck};
pub use graph::{sigmoid, softmax, Graph, Var};
pub use layers::{
    bilstm_encode, dropout, dropout_mask, embedding_lookup, linear, lstm_run, lstm_step, tanh_map, BiLstmOutput,
    BiLstmParams, Linear, LstmParams, FORGET_BIAS_INIT,
};
pub use optim::{adam_step, clip_gradients, OptimizerState, DEFAULT_CLIP_NORM, DEFAULT_LEARNING_RATE};
pub use tensor::{Gradients, ParamId, ParamStore, Tensor};
