//! Teacher-forced loss, greedy decoding and switch statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::network::{
    argmax, decoder_step, encode_sample, step_values, target_probability, DecoderStep, Dropout, StepVars, TargetSlots,
};
use super::params::ModelParams;
use crate::corpus::{
    target_tokens, Profile, ProfileSet, RefForm, Sample, Vocabulary, BOS_INDEX, EOS, EOS_INDEX, UNK_INDEX,
};
use crate::error::{Error, Result};
use crate::nn::{grad_check, GradCheckOptions, GradCheckReport, Gradients, Graph, ParamStore, Var};

pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Decoder targets: the lowercased gold tokens followed by EOS.
pub fn decoder_targets(sample: &Sample) -> Vec<String> {
    let mut t = target_tokens(&sample.gold_expression);
    t.push(EOS.to_string());
    t
}

struct Forced<'a> {
    graph: Graph<'a>,
    steps: Vec<StepVars>,
    probs: Vec<Var>,
}

/// Runs the decoder over the gold expression, feeding gold tokens.
fn teacher_force<'a>(
    p: &ModelParams,
    store: &'a ParamStore,
    sample: &Sample,
    profile: &Profile,
    vocab: &Vocabulary,
    drop: &mut Dropout,
) -> Result<Forced<'a>> {
    let mut g = Graph::new(store);
    let enc = encode_sample(&mut g, p, vocab, &sample.pre_context, &sample.post_context, &profile.tokens, drop)?;
    let targets = decoder_targets(sample);
    let mut state = enc.d_c;
    let mut cell = g.input(vec![0.0; p.config.word_hidden]);
    let mut input = BOS_INDEX;
    let mut steps = Vec::with_capacity(targets.len());
    let mut probs = Vec::with_capacity(targets.len());
    for word in &targets {
        let vars = decoder_step(&mut g, p, &enc, state, cell, input, drop)?;
        let slots = TargetSlots::new(word, vocab, &enc.ext);
        probs.push(target_probability(&mut g, vars.attention, vars.p_voc, vars.switch, &slots, vocab)?);
        steps.push(vars);
        state = vars.state;
        cell = vars.cell;
        input = vocab.index_of(word);
    }
    Ok(Forced { graph: g, steps, probs })
}

fn loss_node(forced: &mut Forced, sample: &Sample) -> Result<Var> {
    let g = &mut forced.graph;
    let mut terms = Vec::with_capacity(forced.probs.len());
    for &pv in &forced.probs {
        let prob = g.scalar(pv);
        if prob < PROBABILITY_FLOOR {
            log::warn!(
                "target probability {prob:e} below floor for sample {} ({})",
                sample.wiki_id,
                sample.gold_expression.join(" ")
            );
        }
        let ln = g.ln_floor(pv, PROBABILITY_FLOOR);
        terms.push(g.affine(ln, -1.0, 0.0));
    }
    g.mean(&terms)
}

/// Mean negative log probability of the gold tokens (and EOS), computed
/// against `store`, which must have the layout of `p`.
pub fn sample_loss_with(
    p: &ModelParams,
    store: &ParamStore,
    sample: &Sample,
    profile: &Profile,
    vocab: &Vocabulary,
) -> Result<f64> {
    let mut forced = teacher_force(p, store, sample, profile, vocab, &mut Dropout::off())?;
    let loss = loss_node(&mut forced, sample)?;
    Ok(forced.graph.scalar(loss))
}

pub fn sample_loss(p: &ModelParams, sample: &Sample, profile: &Profile, vocab: &Vocabulary) -> Result<f64> {
    sample_loss_with(p, &p.store, sample, profile, vocab)
}

/// Loss and its gradient for one sample.
pub fn sample_loss_and_grad(
    p: &ModelParams,
    sample: &Sample,
    profile: &Profile,
    vocab: &Vocabulary,
    drop: &mut Dropout,
) -> Result<(f64, Gradients)> {
    let mut forced = teacher_force(p, &p.store, sample, profile, vocab, drop)?;
    let loss = loss_node(&mut forced, sample)?;
    let value = forced.graph.scalar(loss);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!(
            "loss {value} on sample {} ({})",
            sample.wiki_id,
            sample.gold_expression.join(" ")
        )));
    }
    Ok((value, forced.graph.backward(loss)))
}

/// Finite-difference check of the loss gradient on one sample, dropout off.
pub fn check_gradients(
    p: &ModelParams,
    sample: &Sample,
    profile: &Profile,
    vocab: &Vocabulary,
    options: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let (_, grads) = sample_loss_and_grad(p, sample, profile, vocab, &mut Dropout::off())?;
    let mut store = p.store.clone();
    grad_check(&mut store, |s| sample_loss_with(p, s, sample, profile, vocab), &grads, options)
}

/// Generated tokens and the per-step quantities behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    pub tokens: Vec<String>,
    pub steps: Vec<DecoderStep>,
}

/// Greedy decoding: emit the argmax of each step's final distribution until
/// EOS or `max_len` tokens. A copied word outside the vocabulary is fed
/// back as UNK.
pub fn greedy_decode_trace(
    p: &ModelParams,
    pre: &[String],
    post: &[String],
    profile: &Profile,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<DecodeTrace> {
    let mut g = Graph::new(&p.store);
    let mut drop = Dropout::off();
    let enc = encode_sample(&mut g, p, vocab, pre, post, &profile.tokens, &mut drop)?;
    let mut state = enc.d_c;
    let mut cell = g.input(vec![0.0; p.config.word_hidden]);
    let mut input = BOS_INDEX;
    let mut trace = DecodeTrace { tokens: Vec::new(), steps: Vec::new() };
    while trace.tokens.len() < max_len {
        let vars = decoder_step(&mut g, p, &enc, state, cell, input, &mut drop)?;
        let step = step_values(&g, &vars, &enc.ext, vocab);
        let best = argmax(&step.distribution);
        trace.steps.push(step);
        if best == EOS_INDEX {
            break;
        }
        trace.tokens.push(enc.ext.word(vocab, best).to_string());
        state = vars.state;
        cell = vars.cell;
        input = if best < enc.ext.base_len { best } else { UNK_INDEX };
    }
    Ok(trace)
}

pub fn greedy_decode(
    p: &ModelParams,
    sample: &Sample,
    profile: &Profile,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<Vec<String>> {
    Ok(greedy_decode_trace(p, &sample.pre_context, &sample.post_context, profile, vocab, max_len)?.tokens)
}

/// Decodes every sample (in parallel, output in input order).
pub fn generate_all(
    p: &ModelParams,
    samples: &[Sample],
    profiles: &ProfileSet,
    vocab: &Vocabulary,
) -> Result<Vec<Vec<String>>> {
    samples
        .par_iter()
        .map(|s| greedy_decode(p, s, &profiles.get_or_fallback(&s.wiki_id), vocab, p.config.max_decode_len))
        .collect()
}

/// Mean switch probabilities of one referential form.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchStat {
    pub form: RefForm,
    /// (σ_copy, σ_pro, σ_gen).
    pub mean: [f64; 3],
    pub samples: usize,
    pub steps: usize,
}

/// Teacher-forced switch triples of one sample, one per expression token
/// (the closing EOS step is left out).
pub fn switch_trace(p: &ModelParams, sample: &Sample, profile: &Profile, vocab: &Vocabulary) -> Result<Vec<[f64; 3]>> {
    let forced = teacher_force(p, &p.store, sample, profile, vocab, &mut Dropout::off())?;
    let n = forced.steps.len() - 1;
    Ok(forced.steps[..n]
        .iter()
        .map(|s| {
            let v = forced.graph.value(s.switch);
            [v[0], v[1], v[2]]
        })
        .collect())
}

/// Per-form average of the switch triple over all expression steps of the
/// samples with that form. Forms without samples are left out.
pub fn switch_statistics(
    p: &ModelParams,
    samples: &[Sample],
    profiles: &ProfileSet,
    vocab: &Vocabulary,
) -> Result<Vec<SwitchStat>> {
    let traces: Vec<Vec<[f64; 3]>> = samples
        .par_iter()
        .map(|s| switch_trace(p, s, &profiles.get_or_fallback(&s.wiki_id), vocab))
        .collect::<Result<_>>()?;
    let mut acc: BTreeMap<RefForm, ([f64; 3], usize, usize)> = BTreeMap::new();
    for (s, trace) in samples.iter().zip(&traces) {
        let entry = acc.entry(s.form()).or_insert(([0.0; 3], 0, 0));
        for sw in trace {
            for (total, v) in entry.0.iter_mut().zip(sw) {
                *total += v;
            }
        }
        entry.1 += 1;
        entry.2 += trace.len();
    }
    Ok(acc
        .into_iter()
        .filter(|(_, (_, _, steps))| *steps > 0)
        .map(|(form, (sum, samples, steps))| SwitchStat { form, mean: sum.map(|v| v / steps as f64), samples, steps })
        .collect())
}
