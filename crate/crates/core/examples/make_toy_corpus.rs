//! Writes a small generated corpus for trying the command-line pipeline.
//!
//!     cargo run -p profilereg-core --example make_toy_corpus -- DIR [ENTITIES] [PER_ENTITY] [SEED]

use std::path::PathBuf;
use std::process::ExitCode;

use profilereg::corpus::synthetic::synthetic_corpus;
use profilereg::corpus::{write_profiles, write_samples};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(dir) = args.first().map(PathBuf::from) else {
        eprintln!("usage: make_toy_corpus DIR [ENTITIES] [PER_ENTITY] [SEED]");
        return ExitCode::from(1);
    };
    let num = |i: usize, default: u64| args.get(i).and_then(|v| v.parse().ok()).unwrap_or(default);
    let corpus = synthetic_corpus(num(1, 10) as usize, num(2, 5) as usize, num(3, 1));
    let written = std::fs::create_dir_all(&dir)
        .map_err(|e| e.to_string())
        .and_then(|_| write_samples(&corpus.samples, &dir.join("samples.tsv")).map_err(|e| e.to_string()))
        .and_then(|_| write_profiles(corpus.profiles.iter(), &dir.join("profiles.tsv")).map_err(|e| e.to_string()));
    match written {
        Ok(()) => {
            println!("{} samples, {} profiles -> {}", corpus.samples.len(), corpus.profiles.len(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
