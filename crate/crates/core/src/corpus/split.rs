use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sample::Sample;
use crate::error::{Error, Result};

pub const MIN_SPLIT_UNITS: usize = 10;
pub const MANIFEST_FILES: [&str; 3] = ["train.txt", "dev.txt", "test.txt"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Original,
    EntitySeparated,
    Random,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Original => "original",
            SplitKind::EntitySeparated => "entity",
            SplitKind::Random => "random",
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "original" => Ok(SplitKind::Original),
            "entity" | "entity_separated" | "entity-separated" => Ok(SplitKind::EntitySeparated),
            "random" => Ok(SplitKind::Random),
            other => Err(format!("unknown split kind `{other}` (original, entity, random)")),
        }
    }
}

/// Sample positions (indices into the parsed corpus) for each partition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

impl Manifest {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.dev, &self.test]
    }

    /// Writes `train.txt`, `dev.txt`, `test.txt` of sample indices.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, part) in MANIFEST_FILES.iter().zip(self.parts()) {
            let path = dir.join(name);
            let text: String = part.iter().map(|i| format!("{i}\n")).collect();
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Reads the three manifest files. Lines may be sample indices or
    /// wiki_ids; with ids, every sample of that entity joins the partition.
    pub fn read(dir: &Path, samples: &[Sample]) -> Result<Manifest> {
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for name in MANIFEST_FILES {
            let path = dir.join(name);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
            parts.push(resolve_manifest_lines(&lines, samples)?);
        }
        let test = parts.pop().unwrap();
        let dev = parts.pop().unwrap();
        let train = parts.pop().unwrap();
        Ok(Manifest { train, dev, test })
    }
}

fn resolve_manifest_lines(lines: &[&str], samples: &[Sample]) -> Result<Vec<usize>> {
    let numeric: Option<Vec<usize>> = lines.iter().map(|l| l.parse().ok()).collect();
    if let Some(indices) = numeric {
        return Ok(indices);
    }
    let mut by_id: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        by_id.entry(s.wiki_id.as_str()).or_default().push(i);
    }
    let mut out = Vec::new();
    for id in lines {
        match by_id.get(id) {
            Some(idx) => out.extend(idx),
            None => return Err(Error::Split(format!("manifest names unknown entity `{id}`"))),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<Sample>,
    pub dev: Vec<Sample>,
    pub test: Vec<Sample>,
    pub kind: SplitKind,
    pub seed: u64,
    pub manifest: Manifest,
}

impl DatasetSplit {
    fn from_manifest(samples: &[Sample], manifest: Manifest, kind: SplitKind, seed: u64) -> Self {
        let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect();
        DatasetSplit {
            train: pick(&manifest.train),
            dev: pick(&manifest.dev),
            test: pick(&manifest.test),
            kind,
            seed,
            manifest,
        }
    }

    pub fn train_entities(&self) -> BTreeSet<&str> {
        self.train.iter().map(|s| s.wiki_id.as_str()).collect()
    }
}

/// Held-out partition size: a tenth of `n`, rounded.
fn tenth(n: usize) -> usize {
    (n + 5) / 10
}

/// Reproduces a predefined partition; every sample must land in exactly one part.
pub fn split_original(samples: &[Sample], manifest: Manifest) -> Result<DatasetSplit> {
    let mut owner = vec![None; samples.len()];
    for (p, part) in manifest.parts().into_iter().enumerate() {
        for &i in part {
            let slot = owner.get_mut(i).ok_or_else(|| {
                Error::Split(format!("manifest index {i} out of range for {} samples", samples.len()))
            })?;
            if slot.is_some() {
                return Err(Error::Split(format!("sample {i} appears in more than one partition")));
            }
            *slot = Some(p);
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::Split(format!("sample {i} ({}) is in no partition", samples[i].wiki_id)));
    }
    Ok(DatasetSplit::from_manifest(samples, manifest, SplitKind::Original, 0))
}

/// Shuffles distinct entities with `seed` and assigns them 8:1:1; samples
/// follow their entity and keep corpus order within a partition.
pub fn split_entity_separated(samples: &[Sample], seed: u64) -> Result<DatasetSplit> {
    let mut entities: Vec<&str> =
        samples.iter().map(|s| s.wiki_id.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    if entities.len() < MIN_SPLIT_UNITS {
        return Err(Error::Split(format!(
            "need at least {MIN_SPLIT_UNITS} distinct entities, found {}",
            entities.len()
        )));
    }
    entities.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = entities.len();
    let (n_dev, n_test) = (tenth(n), tenth(n));
    let n_train = n - n_dev - n_test;
    let part_of: HashMap<&str, usize> = entities
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (
                *e,
                if i < n_train {
                    0
                } else if i < n_train + n_dev {
                    1
                } else {
                    2
                },
            )
        })
        .collect();
    let mut manifest = Manifest::default();
    for (i, s) in samples.iter().enumerate() {
        match part_of[s.wiki_id.as_str()] {
            0 => manifest.train.push(i),
            1 => manifest.dev.push(i),
            _ => manifest.test.push(i),
        }
    }
    Ok(DatasetSplit::from_manifest(samples, manifest, SplitKind::EntitySeparated, seed))
}

/// Shuffles sample positions with `seed` and assigns them 8:1:1.
pub fn split_random(samples: &[Sample], seed: u64) -> Result<DatasetSplit> {
    let n = samples.len();
    if n < MIN_SPLIT_UNITS {
        return Err(Error::Split(format!("need at least {MIN_SPLIT_UNITS} samples, found {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_dev, n_test) = (tenth(n), tenth(n));
    let n_train = n - n_dev - n_test;
    let sorted = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    let manifest =
        Manifest { train: sorted(0..n_train), dev: sorted(n_train..n_train + n_dev), test: sorted(n_train + n_dev..n) };
    Ok(DatasetSplit::from_manifest(samples, manifest, SplitKind::Random, seed))
}
