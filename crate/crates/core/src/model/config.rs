use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::{DEFAULT_CLIP_NORM, DEFAULT_LEARNING_RATE};

/// Network sizes and training schedule. `vocab_size` and `char_vocab_size`
/// are filled in from the vocabulary when a model is built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub word_embed_dim: usize,
    pub char_embed_dim: usize,
    pub word_hidden: usize,
    pub char_hidden: usize,
    /// Output size of the layer merging the two char LSTM states.
    pub char_merge_dim: usize,
    pub attention_dim: usize,
    pub vocab_size: usize,
    pub char_vocab_size: usize,
    pub max_decode_len: usize,
    pub dropout_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    /// Half-width of the uniform weight initialization.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_embed_dim: 100,
            char_embed_dim: 100,
            word_hidden: 100,
            char_hidden: 50,
            char_merge_dim: 50,
            attention_dim: 100,
            vocab_size: 0,
            char_vocab_size: 0,
            max_decode_len: 30,
            dropout_rate: 0.5,
            batch_size: 64,
            max_epochs: 35,
            patience: 5,
            learning_rate: DEFAULT_LEARNING_RATE,
            clip_norm: DEFAULT_CLIP_NORM,
            init_scale: 0.1,
            seed: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value.trim().parse().map_err(|e| Error::InvalidArgument(format!("{key} = `{value}`: {e}")))
}

impl ModelConfig {
    pub const KEYS: [&'static str; 17] = [
        "word_embed_dim",
        "char_embed_dim",
        "word_hidden",
        "char_hidden",
        "char_merge_dim",
        "attention_dim",
        "vocab_size",
        "char_vocab_size",
        "max_decode_len",
        "dropout_rate",
        "batch_size",
        "max_epochs",
        "patience",
        "learning_rate",
        "clip_norm",
        "init_scale",
        "seed",
    ];

    /// Tiny sizes for tests and gradient checks. The wider initialization
    /// keeps gradients well above finite-difference round-off.
    pub fn toy() -> Self {
        ModelConfig {
            word_embed_dim: 6,
            char_embed_dim: 4,
            word_hidden: 8,
            char_hidden: 4,
            char_merge_dim: 4,
            attention_dim: 8,
            dropout_rate: 0.0,
            batch_size: 4,
            max_epochs: 5,
            patience: 2,
            init_scale: 1.0,
            ..ModelConfig::default()
        }
    }

    pub fn is_key(key: &str) -> bool {
        Self::KEYS.contains(&key)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "word_embed_dim" => self.word_embed_dim = parse(key, value)?,
            "char_embed_dim" => self.char_embed_dim = parse(key, value)?,
            "word_hidden" => self.word_hidden = parse(key, value)?,
            "char_hidden" => self.char_hidden = parse(key, value)?,
            "char_merge_dim" => self.char_merge_dim = parse(key, value)?,
            "attention_dim" => self.attention_dim = parse(key, value)?,
            "vocab_size" => self.vocab_size = parse(key, value)?,
            "char_vocab_size" => self.char_vocab_size = parse(key, value)?,
            "max_decode_len" => self.max_decode_len = parse(key, value)?,
            "dropout_rate" => self.dropout_rate = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "patience" => self.patience = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse(key, value)?,
            "init_scale" => self.init_scale = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(Error::InvalidArgument(format!("unknown model setting `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "word_embed_dim" => self.word_embed_dim.to_string(),
            "char_embed_dim" => self.char_embed_dim.to_string(),
            "word_hidden" => self.word_hidden.to_string(),
            "char_hidden" => self.char_hidden.to_string(),
            "char_merge_dim" => self.char_merge_dim.to_string(),
            "attention_dim" => self.attention_dim.to_string(),
            "vocab_size" => self.vocab_size.to_string(),
            "char_vocab_size" => self.char_vocab_size.to_string(),
            "max_decode_len" => self.max_decode_len.to_string(),
            "dropout_rate" => self.dropout_rate.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "max_epochs" => self.max_epochs.to_string(),
            "patience" => self.patience.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "clip_norm" => self.clip_norm.to_string(),
            "init_scale" => self.init_scale.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        Self::KEYS.iter().map(|k| (*k, self.get(k).unwrap())).collect()
    }

    /// `key = value` lines for every setting.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("word_embed_dim", self.word_embed_dim),
            ("char_embed_dim", self.char_embed_dim),
            ("word_hidden", self.word_hidden),
            ("char_hidden", self.char_hidden),
            ("char_merge_dim", self.char_merge_dim),
            ("attention_dim", self.attention_dim),
            ("max_decode_len", self.max_decode_len),
            ("batch_size", self.batch_size),
        ];
        if let Some((k, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{k} must be positive")));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidArgument(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!("dropout_rate {} outside [0, 1)", self.dropout_rate)));
        }
        for (k, v) in
            [("learning_rate", self.learning_rate), ("clip_norm", self.clip_norm), ("init_scale", self.init_scale)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
