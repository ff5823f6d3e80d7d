use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use profilereg::corpus::{RefForm, SplitKind, DEFAULT_PROFILE_CAP};
use profilereg::eval::SedGranularity;
use profilereg::model::ModelConfig;

use crate::failure::Failure;

pub const RUN_CONFIG_FILE: &str = "run.conf";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train,
    Dev,
    Test,
    All,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Dev => "dev",
            Partition::Test => "test",
            Partition::All => "all",
        }
    }
}

impl FromStr for Partition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Partition::Train),
            "dev" => Ok(Partition::Dev),
            "test" => Ok(Partition::Test),
            "all" => Ok(Partition::All),
            _ => Err(format!("unknown partition `{s}` (train, dev, test, all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    OnlyName,
    Ferreira,
}

impl Baseline {
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::OnlyName => "onlyname",
            Baseline::Ferreira => "ferreira",
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "onlyname" | "only_name" => Ok(Baseline::OnlyName),
            "ferreira" => Ok(Baseline::Ferreira),
            _ => Err(format!("unknown baseline `{s}` (onlyname, ferreira)")),
        }
    }
}

/// Everything one invocation needs. Model settings share the flat key
/// space with the run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub samples: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
    pub split_dir: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub output: PathBuf,
    pub split_kind: SplitKind,
    pub split_seed: u64,
    pub partition: Partition,
    pub form_filter: Option<RefForm>,
    pub profile_cap: usize,
    pub min_count: usize,
    pub baseline: Baseline,
    pub nb_alpha: f64,
    pub granularity: SedGranularity,
    pub gradcheck_epsilon: f64,
    pub gradcheck_coords: usize,
    pub gradcheck_tolerance: f64,
    pub model: ModelConfig,
}

const RUN_KEYS: [&str; 19] = [
    "samples",
    "profiles",
    "embeddings",
    "model_dir",
    "split_dir",
    "predictions",
    "output",
    "split_kind",
    "split_seed",
    "partition",
    "form_filter",
    "profile_cap",
    "min_count",
    "baseline",
    "nb_alpha",
    "granularity",
    "gradcheck_epsilon",
    "gradcheck_coords",
    "gradcheck_tolerance",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, Failure>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Failure::Usage(format!("{key} = `{value}`: {e}")))
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            samples: None,
            profiles: None,
            embeddings: None,
            model_dir: None,
            split_dir: None,
            predictions: None,
            output: PathBuf::from("out"),
            split_kind: SplitKind::Random,
            split_seed: 1,
            partition: Partition::Test,
            form_filter: None,
            profile_cap: DEFAULT_PROFILE_CAP,
            min_count: 1,
            baseline: Baseline::OnlyName,
            nb_alpha: 1.0,
            granularity: SedGranularity::Char,
            gradcheck_epsilon: 1e-5,
            gradcheck_coords: 64,
            gradcheck_tolerance: 1e-4,
            model: ModelConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let value = value.trim();
        match key {
            "samples" => self.samples = path(value),
            "profiles" => self.profiles = path(value),
            "embeddings" => self.embeddings = path(value),
            "model_dir" => self.model_dir = path(value),
            "split_dir" => self.split_dir = path(value),
            "predictions" => self.predictions = path(value),
            "output" => self.output = path(value).ok_or_else(|| Failure::Usage("output must not be empty".into()))?,
            "split_kind" => self.split_kind = parse(key, value)?,
            "split_seed" => self.split_seed = parse(key, value)?,
            "partition" => self.partition = parse(key, value)?,
            "form_filter" => self.form_filter = if value.is_empty() { None } else { Some(parse(key, value)?) },
            "profile_cap" => self.profile_cap = parse(key, value)?,
            "min_count" => self.min_count = parse(key, value)?,
            "baseline" => self.baseline = parse(key, value)?,
            "nb_alpha" => self.nb_alpha = parse(key, value)?,
            "granularity" => self.granularity = parse(key, value)?,
            "gradcheck_epsilon" => self.gradcheck_epsilon = parse(key, value)?,
            "gradcheck_coords" => self.gradcheck_coords = parse(key, value)?,
            "gradcheck_tolerance" => self.gradcheck_tolerance = parse(key, value)?,
            _ if ModelConfig::is_key(key) => self.model.set(key, value).map_err(|e| Failure::Usage(e.to_string()))?,
            _ => return Err(Failure::Usage(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), Failure> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, file: &Path) -> Result<(), Failure> {
        let text = fs::read_to_string(file)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", file.display())))?;
        self.apply_text(&text, &file.display().to_string())
    }

    /// `KEY=VALUE` from the command line.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), Failure> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
        self.set(k.trim(), v)
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("samples", show(&self.samples)),
            ("profiles", show(&self.profiles)),
            ("embeddings", show(&self.embeddings)),
            ("model_dir", show(&self.model_dir)),
            ("split_dir", show(&self.split_dir)),
            ("predictions", show(&self.predictions)),
            ("output", self.output.display().to_string()),
            ("split_kind", self.split_kind.as_str().to_string()),
            ("split_seed", self.split_seed.to_string()),
            ("partition", self.partition.as_str().to_string()),
            ("form_filter", self.form_filter.map(|f| f.as_str().to_string()).unwrap_or_default()),
            ("profile_cap", self.profile_cap.to_string()),
            ("min_count", self.min_count.to_string()),
            ("baseline", self.baseline.as_str().to_string()),
            ("nb_alpha", self.nb_alpha.to_string()),
            ("granularity", self.granularity.as_str().to_string()),
            ("gradcheck_epsilon", self.gradcheck_epsilon.to_string()),
            ("gradcheck_coords", self.gradcheck_coords.to_string()),
            ("gradcheck_tolerance", self.gradcheck_tolerance.to_string()),
        ];
        debug_assert_eq!(out.len(), RUN_KEYS.len());
        out.extend(self.model.entries());
        out
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Writes the effective settings into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<(), Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
        let file = dir.join(RUN_CONFIG_FILE);
        fs::write(&file, self.to_text()).map_err(|e| Failure::Data(format!("cannot write {}: {e}", file.display())))
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, Failure> {
        let p = value.as_deref().ok_or_else(|| Failure::Usage(format!("`{key}` is not set")))?;
        if !p.exists() {
            return Err(Failure::Data(format!("{key} {} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.model.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        if self.min_count == 0 || self.profile_cap == 0 || self.gradcheck_coords == 0 {
            return Err(Failure::Usage("min_count, profile_cap and gradcheck_coords must be positive".into()));
        }
        for (k, v) in [
            ("nb_alpha", self.nb_alpha),
            ("gradcheck_epsilon", self.gradcheck_epsilon),
            ("gradcheck_tolerance", self.gradcheck_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
