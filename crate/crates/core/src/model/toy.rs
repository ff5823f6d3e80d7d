//! A fixed miniature problem for gradient checks and smoke runs.

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::corpus::{normalize_profile, Profile, Sample, Vocabulary};
use crate::error::Result;

pub const TOY_WORDS: &str = "was a pilot born the";
pub const TOY_CHARS: &str = "abcdefghijklmnopqrstuvwxyz.";

#[derive(Debug, Clone)]
pub struct ToyProblem {
    pub params: ModelParams,
    pub sample: Sample,
    pub profile: Profile,
    pub vocab: Vocabulary,
}

/// 25-word vocabulary, a five-token profile and one sample whose gold
/// expression only occurs in the profile. `config` gets the vocabulary
/// sizes filled in.
pub fn toy_problem_with(config: &ModelConfig) -> Result<ToyProblem> {
    let vocab = Vocabulary::from_parts(TOY_WORDS.split_whitespace().map(String::from), TOY_CHARS.chars());
    let toks = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let sample = Sample::new("zork_the", toks("Zork"), toks("the pilot was born ."), toks("was a pilot"));
    let profile = normalize_profile("Zork was a pilot born", "zork_the");
    let cfg = ModelConfig { vocab_size: vocab.len(), char_vocab_size: vocab.char_len(), ..config.clone() };
    Ok(ToyProblem { params: ModelParams::new(&cfg)?, sample, profile, vocab })
}

pub fn toy_problem(seed: u64) -> Result<ToyProblem> {
    toy_problem_with(&ModelConfig { seed, ..ModelConfig::toy() })
}
