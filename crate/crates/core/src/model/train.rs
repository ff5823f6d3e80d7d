use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::decode::{generate_all, sample_loss_and_grad};
use super::network::Dropout;
use super::params::ModelParams;
use crate::corpus::{ProfileSet, Sample, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::normalize_expression;
use crate::nn::{adam_step, clip_gradients, Gradients, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub dev_accuracy: f64,
}

impl EpochRecord {
    pub fn to_line(&self) -> String {
        format!("{},{:.6},{:.6}", self.epoch, self.mean_loss, self.dev_accuracy)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best dev epoch.
    pub params: ModelParams,
    pub log: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
}

impl TrainOutcome {
    /// `epoch,mean_loss,dev_accuracy` lines, with a header.
    pub fn log_text(&self) -> String {
        let mut s = String::from("epoch,mean_loss,dev_accuracy\n");
        for r in &self.log {
            s.push_str(&r.to_line());
            s.push('\n');
        }
        s
    }
}

/// Share of samples whose greedy output matches the gold expression.
pub fn accuracy(p: &ModelParams, samples: &[Sample], profiles: &ProfileSet, vocab: &Vocabulary) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("accuracy over no samples".into()));
    }
    let generated = generate_all(p, samples, profiles, vocab)?;
    let hits = samples
        .iter()
        .zip(&generated)
        .filter(|(s, g)| normalize_expression(&s.gold_expression) == normalize_expression(g))
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Mini-batch training with Adam, gradient clipping and early stopping on
/// dev accuracy. `params` supplies the initial weights and the schedule;
/// `on_epoch` sees each record as it is produced.
pub fn train_from(
    params: ModelParams,
    train: &[Sample],
    dev: &[Sample],
    profiles: &ProfileSet,
    vocab: &Vocabulary,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    if train.is_empty() || dev.is_empty() {
        return Err(Error::InvalidArgument("training needs non-empty train and dev sets".into()));
    }
    let cfg = params.config.clone();
    cfg.validate()?;
    let mut params = params;
    let mut opt = OptimizerState::new(&params.store, cfg.learning_rate, cfg.clip_norm);
    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let profile_of: Vec<_> = train.iter().map(|s| profiles.get_or_fallback(&s.wiki_id)).collect();

    let mut best: Option<(ModelParams, usize, f64)> = None;
    let mut stale = 0;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<(f64, Gradients)> = batch
                .par_iter()
                .map(|&i| {
                    let stream = ((epoch as u64) << 32) | i as u64;
                    let mut drop = if cfg.dropout_rate > 0.0 {
                        Dropout::on(cfg.dropout_rate, cfg.seed, stream)
                    } else {
                        Dropout::off()
                    };
                    sample_loss_and_grad(&params, &train[i], &profile_of[i], vocab, &mut drop)
                })
                .collect::<Result<_>>()?;
            let scale = 1.0 / batch.len() as f64;
            for (loss, grads) in &results {
                loss_sum += loss;
                params.store.accumulate(grads, scale);
            }
            clip_gradients(&mut params.store, cfg.clip_norm);
            adam_step(&mut opt, &mut params.store);
        }
        let dev_accuracy = accuracy(&params, dev, profiles, vocab)?;
        let record = EpochRecord { epoch, mean_loss: loss_sum / train.len() as f64, dev_accuracy };
        log::info!("epoch {epoch}: loss {:.4}, dev accuracy {:.4}", record.mean_loss, dev_accuracy);
        on_epoch(&record);
        log.push(record);

        if best.as_ref().is_none_or(|(_, _, acc)| dev_accuracy > *acc) {
            best = Some((params.clone(), epoch, dev_accuracy));
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience.max(1) {
                break;
            }
        }
    }
    let (params, best_epoch, best_dev_accuracy) = match best {
        Some(b) => b,
        None => (params, 0, 0.0),
    };
    Ok(TrainOutcome { params, log, best_epoch, best_dev_accuracy })
}

/// Builds fresh parameters from `params_config` and trains them.
pub fn train(
    config: &super::config::ModelConfig,
    train_set: &[Sample],
    dev: &[Sample],
    profiles: &ProfileSet,
    vocab: &Vocabulary,
) -> Result<TrainOutcome> {
    let mut cfg = config.clone();
    cfg.vocab_size = vocab.len();
    cfg.char_vocab_size = vocab.char_len();
    train_from(ModelParams::new(&cfg)?, train_set, dev, profiles, vocab, |_| {})
}
