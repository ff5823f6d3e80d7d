use std::fs;
use std::path::Path;

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::nn::checkpoint;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const MODEL_CONFIG_FILE: &str = "model.conf";

/// Writes parameters, vocabulary and model settings into `dir`.
pub fn save_model(dir: &Path, params: &ModelParams, vocab: &Vocabulary) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    checkpoint::save(&params.store, &dir.join(CHECKPOINT_FILE))?;
    vocab.save(&dir.join(VOCAB_FILE))?;
    let conf = dir.join(MODEL_CONFIG_FILE);
    fs::write(&conf, params.config.to_text()).map_err(|e| Error::io(&conf, e))
}

pub fn load_model(dir: &Path) -> Result<(ModelParams, Vocabulary)> {
    let conf = dir.join(MODEL_CONFIG_FILE);
    let text = fs::read_to_string(&conf).map_err(|e| Error::io(&conf, e))?;
    let config = ModelConfig::from_text(&text)?;
    let vocab = Vocabulary::load(&dir.join(VOCAB_FILE))?;
    if vocab.len() != config.vocab_size || vocab.char_len() != config.char_vocab_size {
        return Err(Error::Checkpoint("vocabulary does not match the saved model settings".into()));
    }
    let store = checkpoint::load(&dir.join(CHECKPOINT_FILE))?;
    Ok((ModelParams::from_store(&config, store)?, vocab))
}

/// Copies vectors from a `word v1 v2 ...` text file into the word embedding
/// rows of matching vocabulary entries. Returns how many rows were set.
pub fn load_pretrained_embeddings(path: &Path, params: &mut ModelParams, vocab: &Vocabulary) -> Result<usize> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let dim = params.config.word_embed_dim;
    let table = params.store.get_mut(params.word_embedding);
    let mut loaded = 0;
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values: Vec<f64> = parts
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("bad embedding value: {e}") })?;
        if values.len() != dim {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("embedding has {} values, expected {dim}", values.len()),
            });
        }
        if let Some(idx) = vocab.get(&word.to_lowercase()) {
            table.row_mut(idx).copy_from_slice(&values);
            loaded += 1;
        }
    }
    Ok(loaded)
}
