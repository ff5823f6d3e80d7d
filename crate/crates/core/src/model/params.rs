use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::nn::{BiLstmParams, Linear, LstmParams, ParamId, ParamStore, Tensor};

/// Every trainable tensor of the generator, registered by name in `store`.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub store: ParamStore,
    /// Shared by contexts, profile and decoder input.
    pub word_embedding: ParamId,
    pub char_embedding: ParamId,
    pub char_encoder: BiLstmParams,
    pub char_merge: Linear,
    pub pre_encoder: BiLstmParams,
    pub post_encoder: BiLstmParams,
    pub profile_encoder: BiLstmParams,
    /// `W_d`, no bias.
    pub context_merge: Linear,
    pub decoder: LstmParams,
    pub attn_states: Linear,
    pub attn_decoder: Linear,
    pub attn_bias: ParamId,
    /// `v`, stored as a one-row matrix.
    pub attn_score: ParamId,
    /// `V` and `b` of the vocabulary softmax.
    pub output: Linear,
    pub switch_context: Linear,
    pub switch_init: Linear,
    pub switch_state: Linear,
    pub switch_input: Linear,
    pub switch_bias: ParamId,
}

pub const SWITCH_COPY: usize = 0;
pub const SWITCH_PRO: usize = 1;
pub const SWITCH_GEN: usize = 2;

impl ModelParams {
    /// Fresh parameters: weights uniform in ±init_scale, biases zero except
    /// the LSTM forget gates.
    pub fn new(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if config.vocab_size == 0 || config.char_vocab_size == 0 {
            return Err(Error::InvalidArgument("vocab_size and char_vocab_size must be set".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let rng = &mut rng;
        let s = config.init_scale;
        let (e, h, a) = (config.word_embed_dim, config.word_hidden, config.attention_dim);
        let mut store = ParamStore::new();
        let st = &mut store;

        let word_embedding = st.add("word_embedding", Tensor::uniform(vec![config.vocab_size, e], s, rng));
        let char_embedding =
            st.add("char_embedding", Tensor::uniform(vec![config.char_vocab_size, config.char_embed_dim], s, rng));
        let char_encoder =
            BiLstmParams::register(st, "char_encoder", config.char_embed_dim, config.char_hidden, s, rng);
        let char_merge =
            Linear::register(st, "char_merge", config.char_merge_dim, 2 * config.char_hidden, true, s, rng);
        let pre_encoder = BiLstmParams::register(st, "pre_encoder", e, h, s, rng);
        let post_encoder = BiLstmParams::register(st, "post_encoder", e, h, s, rng);
        let profile_encoder = BiLstmParams::register(st, "profile_encoder", e + config.char_merge_dim, h, s, rng);
        let context_merge = Linear::register(st, "context_merge", h, 4 * h, false, s, rng);
        let decoder = LstmParams::register(st, "decoder", e, h, s, rng);
        let attn_states = Linear::register(st, "attention.w_h", a, 2 * h, false, s, rng);
        let attn_decoder = Linear::register(st, "attention.w_s", a, h, false, s, rng);
        let attn_bias = st.add("attention.bias", Tensor::zeros(vec![a]));
        let attn_score = st.add("attention.v", Tensor::uniform(vec![1, a], s, rng));
        let output = Linear::register(st, "output", config.vocab_size, 3 * h, true, s, rng);
        let switch_context = Linear::register(st, "switch.h_context", 3, 2 * h, false, s, rng);
        let switch_init = Linear::register(st, "switch.h_init", 3, h, false, s, rng);
        let switch_state = Linear::register(st, "switch.h_state", 3, h, false, s, rng);
        let switch_input = Linear::register(st, "switch.h_input", 3, e, false, s, rng);
        let switch_bias = st.add("switch.bias", Tensor::zeros(vec![3]));

        Ok(ModelParams {
            config: config.clone(),
            store,
            word_embedding,
            char_embedding,
            char_encoder,
            char_merge,
            pre_encoder,
            post_encoder,
            profile_encoder,
            context_merge,
            decoder,
            attn_states,
            attn_decoder,
            attn_bias,
            attn_score,
            output,
            switch_context,
            switch_init,
            switch_state,
            switch_input,
            switch_bias,
        })
    }

    /// Rebuilds the layout from `config` and takes every tensor from `loaded`,
    /// which must match it name for name and shape for shape.
    pub fn from_store(config: &ModelConfig, loaded: ParamStore) -> Result<Self> {
        let mut params = ModelParams::new(config)?;
        if loaded.len() != params.store.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} tensors, model expects {}",
                loaded.len(),
                params.store.len()
            )));
        }
        for id in params.store.ids().collect::<Vec<_>>() {
            let name = params.store.name(id).to_string();
            let src = loaded.by_name(&name).ok_or_else(|| Error::Checkpoint(format!("checkpoint lacks `{name}`")))?;
            let dst = params.store.get_mut(id);
            if src.shape() != dst.shape() {
                return Err(Error::Checkpoint(format!(
                    "`{name}` has shape {:?}, expected {:?}",
                    src.shape(),
                    dst.shape()
                )));
            }
            dst.data_mut().copy_from_slice(src.data());
        }
        Ok(params)
    }

    pub fn num_parameters(&self) -> usize {
        self.store.iter().map(|(_, t)| t.len()).sum()
    }
}
