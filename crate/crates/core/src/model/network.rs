//! Forward computation on a [`Graph`]: encoders, attention, output and
//! switch distributions, and the probability of a target word.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::{ModelParams, SWITCH_COPY, SWITCH_GEN, SWITCH_PRO};
use crate::corpus::{Vocabulary, BOS_INDEX, EOS_INDEX, UNK_INDEX};
use crate::error::{Error, Result};
use crate::nn::{self, bilstm_encode, embedding_lookup, linear, lstm_step, Graph, Var};

/// Dropout source for one forward pass; `off()` disables it.
#[derive(Debug, Clone)]
pub struct Dropout {
    rate: f64,
    rng: Option<ChaCha8Rng>,
}

impl Dropout {
    pub fn off() -> Self {
        Dropout { rate: 0.0, rng: None }
    }

    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn on(rate: f64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Dropout { rate, rng: Some(rng) }
    }

    pub fn apply(&mut self, g: &mut Graph, x: Var) -> Result<Var> {
        match &mut self.rng {
            Some(rng) => nn::dropout(g, x, self.rate, true, rng),
            None => Ok(x),
        }
    }
}

fn embed_dropped(g: &mut Graph, p: &ModelParams, indices: &[usize], drop: &mut Dropout) -> Result<Vec<Var>> {
    embedding_lookup(g, p.word_embedding, indices)?.into_iter().map(|x| drop.apply(g, x)).collect()
}

/// Word indices of a context, with the substitute token when it is empty.
pub fn context_indices(vocab: &Vocabulary, tokens: &[String], empty: usize) -> Vec<usize> {
    if tokens.is_empty() {
        vec![empty]
    } else {
        vocab.encode(tokens)
    }
}

/// `d_c = tanh(W_d [h_pre ; h_post])` from the final states of the two
/// context encoders.
pub fn encode_contexts(
    g: &mut Graph,
    p: &ModelParams,
    pre: &[usize],
    post: &[usize],
    drop: &mut Dropout,
) -> Result<Var> {
    let pre_in = embed_dropped(g, p, pre, drop)?;
    let post_in = embed_dropped(g, p, post, drop)?;
    let pre_out = bilstm_encode(g, &p.pre_encoder, &pre_in)?;
    let post_out = bilstm_encode(g, &p.post_encoder, &post_in)?;
    let joined = g.concat(&[pre_out.final_state, post_out.final_state]);
    let merged = linear(g, p.context_merge, joined)?;
    Ok(g.tanh(merged))
}

/// Character BiLSTM over one word, merged by `tanh(W [fw ; bw] + b)`.
pub fn char_encode(g: &mut Graph, p: &ModelParams, chars: &[usize]) -> Result<Var> {
    if chars.is_empty() {
        return Err(Error::InvalidArgument("cannot encode an empty word".into()));
    }
    let inputs = embedding_lookup(g, p.char_embedding, chars)?;
    let out = bilstm_encode(g, &p.char_encoder, &inputs)?;
    let merged = linear(g, p.char_merge, out.final_state)?;
    Ok(g.tanh(merged))
}

/// Encoder states of one profile, plus the attention projections of each
/// state (they do not depend on the decoder step).
#[derive(Debug, Clone)]
pub struct EncodedProfile {
    pub states: Vec<Var>,
    pub keys: Vec<Var>,
    pub tokens: Vec<String>,
}

pub fn encode_profile(
    g: &mut Graph,
    p: &ModelParams,
    vocab: &Vocabulary,
    tokens: &[String],
    drop: &mut Dropout,
) -> Result<EncodedProfile> {
    if tokens.is_empty() {
        return Err(Error::InvalidArgument("empty profile".into()));
    }
    let mut char_cache: HashMap<&str, Var> = HashMap::new();
    let mut inputs = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let word = g.row(p.word_embedding, vocab.index_of(tok))?;
        let chars = match char_cache.get(tok.as_str()) {
            Some(v) => *v,
            None => {
                let v = char_encode(g, p, &vocab.encode_chars(tok))?;
                char_cache.insert(tok, v);
                v
            }
        };
        let x = g.concat(&[word, chars]);
        inputs.push(drop.apply(g, x)?);
    }
    let out = bilstm_encode(g, &p.profile_encoder, &inputs)?;
    let keys = out.states.iter().map(|h| g.matvec(p.attn_states.weight, *h)).collect::<Result<_>>()?;
    Ok(EncodedProfile { states: out.states, keys, tokens: tokens.to_vec() })
}

/// Returns `(e, a, h*)`: scores `v' tanh(W_h h_i + W_s s + b_attn)`, their
/// softmax, and the attention-weighted state.
pub fn attend(g: &mut Graph, p: &ModelParams, s: Var, enc: &EncodedProfile) -> Result<(Var, Var, Var)> {
    let ws = g.matvec(p.attn_decoder.weight, s)?;
    let b = g.param(p.attn_bias);
    let query = g.add(ws, b)?;
    let mut scores = Vec::with_capacity(enc.keys.len());
    for k in &enc.keys {
        let z = g.add(*k, query)?;
        let z = g.tanh(z);
        scores.push(g.matvec(p.attn_score, z)?);
    }
    let e = g.concat(&scores);
    let a = g.softmax(e);
    let context = g.weighted_sum(a, &enc.states)?;
    Ok((e, a, context))
}

/// `softmax(V [s ; h*] + b)`.
pub fn vocab_distribution(g: &mut Graph, p: &ModelParams, s: Var, context: Var) -> Result<Var> {
    let x = g.concat(&[s, context]);
    let logits = linear(g, p.output, x)?;
    Ok(g.softmax(logits))
}

/// `softmax(H_h* h* + H_d d_c + H_s s + H_x x + b_s)`, ordered copy, pronoun, generate.
pub fn switch_probs(g: &mut Graph, p: &ModelParams, context: Var, d_c: Var, s: Var, x: Var) -> Result<Var> {
    let parts = [
        g.matvec(p.switch_context.weight, context)?,
        g.matvec(p.switch_init.weight, d_c)?,
        g.matvec(p.switch_state.weight, s)?,
        g.matvec(p.switch_input.weight, x)?,
    ];
    let mut sum = g.param(p.switch_bias);
    for part in parts {
        sum = g.add(sum, part)?;
    }
    Ok(g.softmax(sum))
}

/// Fixed vocabulary followed by the profile tokens it lacks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVocab {
    pub base_len: usize,
    /// Profile-only words, in order of first occurrence.
    pub extra: Vec<String>,
    /// Extended index of each profile position.
    pub positions: Vec<usize>,
}

impl ExtendedVocab {
    pub fn new(vocab: &Vocabulary, profile_tokens: &[String]) -> Self {
        let base_len = vocab.len();
        let mut extra: Vec<String> = Vec::new();
        let mut positions = Vec::with_capacity(profile_tokens.len());
        for tok in profile_tokens {
            let idx = match vocab.get(tok) {
                Some(i) => i,
                None => match extra.iter().position(|w| w == tok) {
                    Some(j) => base_len + j,
                    None => {
                        extra.push(tok.clone());
                        base_len + extra.len() - 1
                    }
                },
            };
            positions.push(idx);
        }
        ExtendedVocab { base_len, extra, positions }
    }

    pub fn len(&self) -> usize {
        self.base_len + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn word<'a>(&'a self, vocab: &'a Vocabulary, index: usize) -> &'a str {
        if index < self.base_len {
            vocab.word_of(index)
        } else {
            &self.extra[index - self.base_len]
        }
    }

    /// Extended index of `word`, if it has one.
    pub fn index_of(&self, vocab: &Vocabulary, word: &str) -> Option<usize> {
        vocab.get(word).or_else(|| self.extra.iter().position(|w| w == word).map(|j| self.base_len + j))
    }

    /// Profile positions holding extended word `index`.
    pub fn positions_of(&self, index: usize) -> Vec<usize> {
        self.positions.iter().enumerate().filter(|(_, &x)| x == index).map(|(i, _)| i).collect()
    }
}

/// Normalizer of the case rule: `σ_pro p + σ_gen (1 − p) + σ_copy`, where
/// `p` is the pronoun mass of `P_voc`.
pub fn case_rule_mass(p_voc: &[f64], switch: [f64; 3], pronoun: &[bool]) -> f64 {
    let p: f64 = p_voc.iter().zip(pronoun).filter(|(_, &is)| is).map(|(v, _)| v).sum();
    switch[SWITCH_PRO] * p + switch[SWITCH_GEN] * (1.0 - p) + switch[SWITCH_COPY]
}

/// Final distribution over the extended vocabulary: pronoun entries weigh
/// `P_voc` by `σ_pro`, other entries by `σ_gen`, every profile position adds
/// `σ_copy a_i` to its word; the result is divided by [`case_rule_mass`].
/// `pronoun[k]` marks the pronoun entries of the fixed vocabulary.
pub fn final_distribution_with(
    attention: &[f64],
    p_voc: &[f64],
    switch: [f64; 3],
    ext: &ExtendedVocab,
    pronoun: &[bool],
) -> Vec<f64> {
    let mut out = vec![0.0; ext.len()];
    for (k, pv) in p_voc.iter().enumerate() {
        let w = if pronoun[k] { switch[SWITCH_PRO] } else { switch[SWITCH_GEN] };
        out[k] = w * pv;
    }
    for (&pos, a) in ext.positions.iter().zip(attention) {
        out[pos] += switch[SWITCH_COPY] * a;
    }
    let z = case_rule_mass(p_voc, switch, pronoun);
    out.iter_mut().for_each(|v| *v /= z);
    out
}

pub fn pronoun_mask(vocab: &Vocabulary) -> Vec<bool> {
    (0..vocab.len()).map(|k| vocab.is_pronoun_index(k)).collect()
}

pub fn final_distribution(
    attention: &[f64],
    p_voc: &[f64],
    switch: [f64; 3],
    ext: &ExtendedVocab,
    vocab: &Vocabulary,
) -> Vec<f64> {
    final_distribution_with(attention, p_voc, switch, ext, &pronoun_mask(vocab))
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Where a target word gets its probability from.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSlots {
    /// Fixed-vocabulary index (UNK when the word is neither in the
    /// vocabulary nor in the profile).
    pub vocab_index: Option<usize>,
    pub profile_positions: Vec<usize>,
}

impl TargetSlots {
    pub fn new(word: &str, vocab: &Vocabulary, ext: &ExtendedVocab) -> Self {
        match ext.index_of(vocab, word) {
            Some(i) => {
                TargetSlots { vocab_index: (i < ext.base_len).then_some(i), profile_positions: ext.positions_of(i) }
            }
            None => TargetSlots { vocab_index: Some(UNK_INDEX), profile_positions: Vec::new() },
        }
    }
}

/// Graph node holding the final-distribution probability of one target.
pub fn target_probability(
    g: &mut Graph,
    attention: Var,
    p_voc: Var,
    switch: Var,
    target: &TargetSlots,
    vocab: &Vocabulary,
) -> Result<Var> {
    let s_copy = g.pick(switch, &[SWITCH_COPY])?;
    let s_pro = g.pick(switch, &[SWITCH_PRO])?;
    let s_gen = g.pick(switch, &[SWITCH_GEN])?;

    let mut num: Option<Var> = None;
    if let Some(k) = target.vocab_index {
        let pk = g.pick(p_voc, &[k])?;
        let w = if vocab.is_pronoun_index(k) { s_pro } else { s_gen };
        num = Some(g.mul(w, pk)?);
    }
    if !target.profile_positions.is_empty() {
        let mass = g.pick(attention, &target.profile_positions)?;
        let copy = g.mul(s_copy, mass)?;
        num = Some(match num {
            Some(n) => g.add(n, copy)?,
            None => copy,
        });
    }
    let num = match num {
        Some(n) => n,
        None => g.input(vec![0.0]),
    };

    let pron = g.pick(p_voc, vocab.pronoun_indices())?;
    let non_pron = g.affine(pron, -1.0, 1.0);
    let a = g.mul(s_pro, pron)?;
    let b = g.mul(s_gen, non_pron)?;
    let z = g.add(a, b)?;
    let z = g.add(z, s_copy)?;
    g.div(num, z)
}

/// Graph nodes of one decoder step.
#[derive(Debug, Clone, Copy)]
pub struct StepVars {
    pub state: Var,
    pub cell: Var,
    pub input: Var,
    pub scores: Var,
    pub attention: Var,
    pub context: Var,
    pub p_voc: Var,
    pub switch: Var,
}

/// Everything computed at one decoding step, as plain values.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderStep {
    pub state: Vec<f64>,
    pub input: Vec<f64>,
    pub scores: Vec<f64>,
    pub attention: Vec<f64>,
    pub context: Vec<f64>,
    pub p_voc: Vec<f64>,
    pub switch: [f64; 3],
    pub distribution: Vec<f64>,
}

/// Encoded sample ready for decoding.
pub struct Encoded {
    pub d_c: Var,
    pub profile: EncodedProfile,
    pub ext: ExtendedVocab,
}

pub fn encode_sample(
    g: &mut Graph,
    p: &ModelParams,
    vocab: &Vocabulary,
    pre: &[String],
    post: &[String],
    profile_tokens: &[String],
    drop: &mut Dropout,
) -> Result<Encoded> {
    let pre = context_indices(vocab, pre, BOS_INDEX);
    let post = context_indices(vocab, post, EOS_INDEX);
    let d_c = encode_contexts(g, p, &pre, &post, drop)?;
    let profile = encode_profile(g, p, vocab, profile_tokens, drop)?;
    let ext = ExtendedVocab::new(vocab, profile_tokens);
    Ok(Encoded { d_c, profile, ext })
}

/// Runs the decoder one step on input word `input_index`.
pub fn decoder_step(
    g: &mut Graph,
    p: &ModelParams,
    enc: &Encoded,
    prev_state: Var,
    prev_cell: Var,
    input_index: usize,
    drop: &mut Dropout,
) -> Result<StepVars> {
    let x = g.row(p.word_embedding, input_index)?;
    let x = drop.apply(g, x)?;
    let (state, cell) = lstm_step(g, &p.decoder, x, prev_state, prev_cell)?;
    let (scores, attention, context) = attend(g, p, state, &enc.profile)?;
    let p_voc = vocab_distribution(g, p, state, context)?;
    let switch = switch_probs(g, p, context, enc.d_c, state, x)?;
    Ok(StepVars { state, cell, input: x, scores, attention, context, p_voc, switch })
}

pub fn step_values(g: &Graph, vars: &StepVars, ext: &ExtendedVocab, vocab: &Vocabulary) -> DecoderStep {
    let sw = g.value(vars.switch);
    let switch = [sw[0], sw[1], sw[2]];
    let attention = g.value(vars.attention).to_vec();
    let p_voc = g.value(vars.p_voc).to_vec();
    let distribution = final_distribution(&attention, &p_voc, switch, ext, vocab);
    DecoderStep {
        state: g.value(vars.state).to_vec(),
        input: g.value(vars.input).to_vec(),
        scores: g.value(vars.scores).to_vec(),
        attention,
        context: g.value(vars.context).to_vec(),
        p_voc,
        switch,
        distribution,
    }
}
