use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use profilereg::baselines::{ferreira_realize, nb_train, only_name, sample_features};
use profilereg::corpus::{
    build_vocabulary, parse_profiles, parse_samples, relexicalize_samples, split_entity_separated, split_original,
    split_random, DatasetSplit, Manifest, ProfileSet, Sample, SplitKind,
};
use profilereg::eval::{evaluate, read_predictions, write_predictions, EvalPair};
use profilereg::model::{
    check_gradients, generate_all, load_model, load_pretrained_embeddings, save_model, switch_statistics,
    toy_problem_with, train_from, ModelConfig, ModelParams,
};
use profilereg::nn::GradCheckOptions;

use crate::config::{Baseline, Partition, RunConfig};
use crate::failure::Failure;

pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const TRAIN_LOG_FILE: &str = "train.log";
pub const REPORT_STEM: &str = "report";
pub const STATS_FILE: &str = "stats.tsv";
pub const NB_MODEL_FILE: &str = "nb_model.txt";

type Outcome = Result<(), Failure>;

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

/// Samples with their contexts relexicalized from the entity ids.
fn load_samples(cfg: &RunConfig, profiles: Option<&ProfileSet>) -> Result<Vec<Sample>, Failure> {
    let mut samples = parse_samples(cfg.require(&cfg.samples, "samples")?)?;
    let mut ids: BTreeSet<String> = samples.iter().map(|s| s.wiki_id.clone()).collect();
    if let Some(p) = profiles {
        ids.extend(p.ids().map(str::to_string));
    }
    relexicalize_samples(&mut samples, &ids)?;
    Ok(samples)
}

fn load_profiles(cfg: &RunConfig) -> Result<ProfileSet, Failure> {
    Ok(parse_profiles(cfg.require(&cfg.profiles, "profiles")?, cfg.profile_cap)?)
}

fn read_split(cfg: &RunConfig, samples: &[Sample]) -> Result<DatasetSplit, Failure> {
    let dir = cfg.require(&cfg.split_dir, "split_dir")?;
    Ok(split_original(samples, Manifest::read(dir, samples)?)?)
}

/// Samples of the configured partition, narrowed to `form_filter`, plus the
/// training entities (empty without a split).
fn selected(cfg: &RunConfig, samples: &[Sample]) -> Result<(Vec<Sample>, BTreeSet<String>), Failure> {
    let (mut chosen, seen) = match cfg.partition {
        Partition::All => {
            let seen = match &cfg.split_dir {
                Some(_) => read_split(cfg, samples)?.train_entities().into_iter().map(String::from).collect(),
                None => BTreeSet::new(),
            };
            (samples.to_vec(), seen)
        }
        part => {
            let split = read_split(cfg, samples)?;
            let seen = split.train_entities().into_iter().map(String::from).collect();
            let chosen = match part {
                Partition::Train => split.train,
                Partition::Dev => split.dev,
                _ => split.test,
            };
            (chosen, seen)
        }
    };
    if let Some(form) = cfg.form_filter {
        chosen.retain(|s| s.form() == form);
    }
    if chosen.is_empty() {
        return Err(Failure::Data(format!("no samples in partition `{}`", cfg.partition.as_str())));
    }
    Ok((chosen, seen))
}

pub fn split(cfg: &RunConfig) -> Outcome {
    let samples = load_samples(cfg, None)?;
    let split = match cfg.split_kind {
        SplitKind::Random => split_random(&samples, cfg.split_seed)?,
        SplitKind::EntitySeparated => split_entity_separated(&samples, cfg.split_seed)?,
        SplitKind::Original => read_split(cfg, &samples)?,
    };
    split.manifest.write(&cfg.output)?;
    cfg.persist(&cfg.output)?;
    println!(
        "{} split: train {}, dev {}, test {} -> {}",
        split.kind,
        split.train.len(),
        split.dev.len(),
        split.test.len(),
        cfg.output.display()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Outcome {
    let profiles = load_profiles(cfg)?;
    let samples = load_samples(cfg, Some(&profiles))?;
    let split = read_split(cfg, &samples)?;
    let entities = split.train_entities();
    let train_profiles: Vec<_> = profiles.iter().filter(|p| entities.contains(p.wiki_id.as_str())).collect();
    let vocab = build_vocabulary(&split.train, train_profiles, cfg.min_count)?;
    let model_cfg = ModelConfig { vocab_size: vocab.len(), char_vocab_size: vocab.char_len(), ..cfg.model.clone() };
    let mut params = ModelParams::new(&model_cfg)?;
    if cfg.embeddings.is_some() {
        let n = load_pretrained_embeddings(cfg.require(&cfg.embeddings, "embeddings")?, &mut params, &vocab)?;
        log::info!("loaded {n} pretrained word vectors");
    }
    log::info!(
        "training on {} samples, dev {}, vocabulary {}, {} parameters",
        split.train.len(),
        split.dev.len(),
        vocab.len(),
        params.num_parameters()
    );
    let outcome = train_from(params, &split.train, &split.dev, &profiles, &vocab, |r| println!("{}", r.to_line()))?;
    save_model(&cfg.output, &outcome.params, &vocab)?;
    write_file(&cfg.output.join(TRAIN_LOG_FILE), &outcome.log_text())?;
    cfg.persist(&cfg.output)?;
    println!(
        "best epoch {} (dev accuracy {:.4}) -> {}",
        outcome.best_epoch,
        outcome.best_dev_accuracy,
        cfg.output.display()
    );
    Ok(())
}

fn write_rows(cfg: &RunConfig, samples: &[Sample], generated: Vec<Vec<String>>) -> Outcome {
    let rows: Vec<(String, Vec<String>)> = samples.iter().map(|s| s.wiki_id.clone()).zip(generated).collect();
    fs::create_dir_all(&cfg.output).map_err(|e| Failure::Data(format!("cannot create output: {e}")))?;
    let path = cfg.output.join(PREDICTIONS_FILE);
    write_predictions(&path, &rows)?;
    cfg.persist(&cfg.output)?;
    println!("{} predictions -> {}", rows.len(), path.display());
    Ok(())
}

pub fn generate(cfg: &RunConfig) -> Outcome {
    let (params, vocab) = load_model(cfg.require(&cfg.model_dir, "model_dir")?)?;
    let profiles = load_profiles(cfg)?;
    let samples = load_samples(cfg, Some(&profiles))?;
    let (chosen, _) = selected(cfg, &samples)?;
    let generated = generate_all(&params, &chosen, &profiles, &vocab)?;
    write_rows(cfg, &chosen, generated)
}

pub fn baseline(cfg: &RunConfig) -> Outcome {
    let profiles = load_profiles(cfg)?;
    let samples = load_samples(cfg, Some(&profiles))?;
    let (chosen, _) = selected(cfg, &samples)?;
    let generated: Vec<Vec<String>> = match cfg.baseline {
        Baseline::OnlyName => chosen.iter().map(|s| only_name(&profiles.get_or_fallback(&s.wiki_id).raw)).collect(),
        Baseline::Ferreira => {
            let split = read_split(cfg, &samples)?;
            let table: Vec<_> = split.train.iter().map(|s| (sample_features(s), s.form())).collect();
            let model = nb_train(&table, cfg.nb_alpha)?;
            fs::create_dir_all(&cfg.output).map_err(|e| Failure::Data(format!("cannot create output: {e}")))?;
            model.save(&cfg.output.join(NB_MODEL_FILE))?;
            chosen
                .iter()
                .map(|s| {
                    let form = model.predict(&sample_features(s));
                    ferreira_realize(form, &profiles.get_or_fallback(&s.wiki_id), &s.gold_expression)
                })
                .collect()
        }
    };
    write_rows(cfg, &chosen, generated)
}

pub fn evaluate_cmd(cfg: &RunConfig) -> Outcome {
    let profiles = match &cfg.profiles {
        Some(_) => Some(load_profiles(cfg)?),
        None => None,
    };
    let samples = load_samples(cfg, profiles.as_ref())?;
    let (chosen, seen) = selected(cfg, &samples)?;
    let predictions = read_predictions(cfg.require(&cfg.predictions, "predictions")?)?;
    if predictions.len() != chosen.len() {
        return Err(Failure::Data(format!(
            "{} predictions for {} samples in partition `{}`",
            predictions.len(),
            chosen.len(),
            cfg.partition.as_str()
        )));
    }
    let seen: BTreeSet<&str> = seen.iter().map(String::as_str).collect();
    let mut pairs = Vec::with_capacity(chosen.len());
    for (i, (s, (id, generated))) in chosen.iter().zip(predictions).enumerate() {
        if *id != s.wiki_id {
            return Err(Failure::Data(format!("prediction {} is for `{id}`, expected `{}`", i + 1, s.wiki_id)));
        }
        pairs.push(EvalPair::from_sample(s, generated, &seen));
    }
    let report = evaluate(&pairs, cfg.granularity)?;
    report.write(&cfg.output, REPORT_STEM)?;
    cfg.persist(&cfg.output)?;
    print!("{}", report.to_table());
    Ok(())
}

pub fn gradcheck(cfg: &RunConfig) -> Outcome {
    let toy = toy_problem_with(&cfg.model)?;
    let options = GradCheckOptions {
        epsilon: cfg.gradcheck_epsilon,
        coords_per_param: cfg.gradcheck_coords,
        seed: cfg.model.seed,
    };
    let report = check_gradients(&toy.params, &toy.sample, &toy.profile, &toy.vocab, &options)?;
    for c in &report.params {
        println!("{}\t{}\t{:.3e}", c.name, c.coords_checked, c.max_relative_error);
    }
    let worst = report.max_relative_error();
    println!("max relative error {worst:.3e} over {} coordinates", report.coords_checked());
    if worst.is_nan() || worst > cfg.gradcheck_tolerance {
        return Err(Failure::Numerical(format!(
            "max relative error {worst:.3e} exceeds {:.1e}",
            cfg.gradcheck_tolerance
        )));
    }
    Ok(())
}

pub fn stats(cfg: &RunConfig) -> Outcome {
    let (params, vocab) = load_model(cfg.require(&cfg.model_dir, "model_dir")?)?;
    let profiles = load_profiles(cfg)?;
    let samples = load_samples(cfg, Some(&profiles))?;
    let (chosen, _) = selected(cfg, &samples)?;
    let table = switch_statistics(&params, &chosen, &profiles, &vocab)?;
    let mut tsv = String::from("form\tsamples\tsteps\tcopy\tpro\tgen\n");
    let mut shown = format!("{:<14}{:>8}{:>8}{:>9}{:>9}{:>9}\n", "form", "samples", "steps", "copy", "pro", "gen");
    for s in &table {
        let [c, p, g] = s.mean;
        let _ = writeln!(tsv, "{}\t{}\t{}\t{c:.6}\t{p:.6}\t{g:.6}", s.form, s.samples, s.steps);
        let _ = writeln!(shown, "{:<14}{:>8}{:>8}{c:>9.4}{p:>9.4}{g:>9.4}", s.form.as_str(), s.samples, s.steps);
    }
    fs::create_dir_all(&cfg.output).map_err(|e| Failure::Data(format!("cannot create output: {e}")))?;
    write_file(&cfg.output.join(STATS_FILE), &tsv)?;
    cfg.persist(&cfg.output)?;
    print!("{shown}");
    Ok(())
}
