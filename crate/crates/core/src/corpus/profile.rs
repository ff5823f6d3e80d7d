use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::sample::id_realization;
use crate::error::{Error, Result};

pub const DEFAULT_PROFILE_CAP: usize = 120;

/// Normalized description of an entity; `raw` keeps the original casing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub wiki_id: String,
    pub raw: String,
    /// Lowercased, filtered, at most the configured cap.
    pub tokens: Vec<String>,
}

const KEPT_PUNCT: [char; 8] = ['.', ',', ':', ';', '\'', '(', ')', '-'];
const SPLIT_TRAILING: [char; 4] = [')', ',', ';', ':'];

fn is_phonetic(c: char) -> bool {
    // IPA extensions and spacing modifier letters
    ('\u{0250}'..='\u{02FF}').contains(&c)
}

fn keep_char(c: char) -> bool {
    (c.is_alphanumeric() && !is_phonetic(c)) || KEPT_PUNCT.contains(&c)
}

/// Drops `[...]` spans, the usual home of phonetic transcriptions.
fn strip_brackets(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let mut rest = chunk;
    while let Some(r) = rest.strip_prefix('(') {
        out.push("(".into());
        rest = r;
    }
    let mut trailing = Vec::new();
    while let Some(last) = rest.chars().last() {
        let body = &rest[..rest.len() - last.len_utf8()];
        let split_dot = last == '.' && !body.is_empty() && !body.contains('.');
        if SPLIT_TRAILING.contains(&last) || split_dot {
            trailing.push(last.to_string());
            rest = body;
        } else {
            break;
        }
    }
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out.extend(trailing.into_iter().rev());
}

/// Case-preserving tokenizer shared by profile normalization and the
/// name-extraction baseline.
pub fn tokenize_text(text: &str) -> Vec<String> {
    let cleaned: String = strip_brackets(text).chars().map(|c| if keep_char(c) { c } else { ' ' }).collect();
    let mut out = Vec::new();
    for chunk in cleaned.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

fn is_number_or_date(id: &str) -> bool {
    id.chars().any(|c| c.is_ascii_digit()) && id.chars().all(|c| c.is_ascii_digit() || "-_.:/,".contains(c))
}

pub fn normalize_profile(raw: &str, wiki_id: &str) -> Profile {
    normalize_profile_with_cap(raw, wiki_id, DEFAULT_PROFILE_CAP)
}

pub fn normalize_profile_with_cap(raw: &str, wiki_id: &str, cap: usize) -> Profile {
    let mut tokens = tokenize_text(&raw.to_lowercase());
    let mut raw = raw.to_string();
    if tokens.is_empty() || is_number_or_date(wiki_id) {
        raw = wiki_id.replace('_', " ");
        tokens = id_realization(wiki_id);
        if tokens.is_empty() {
            tokens.push(wiki_id.to_lowercase());
        }
    }
    tokens.truncate(cap.max(1));
    Profile { wiki_id: wiki_id.to_string(), raw, tokens }
}

/// Profiles keyed by wiki id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileSet {
    profiles: BTreeMap<String, Profile>,
    cap: usize,
}

impl ProfileSet {
    pub fn new(cap: usize) -> Self {
        ProfileSet { profiles: BTreeMap::new(), cap }
    }

    pub fn insert(&mut self, profile: Profile) {
        self.profiles.insert(profile.wiki_id.clone(), profile);
    }

    /// The stored profile, or one derived from the id when none exists.
    pub fn get_or_fallback(&self, wiki_id: &str) -> Profile {
        self.profiles.get(wiki_id).cloned().unwrap_or_else(|| normalize_profile_with_cap("", wiki_id, self.cap))
    }

    pub fn get(&self, wiki_id: &str) -> Option<&Profile> {
        self.profiles.get(wiki_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Profile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }
}

/// Parses `wiki_id<TAB>profile_text` lines.
pub fn parse_profiles_str(text: &str, cap: usize) -> Result<ProfileSet> {
    let mut set = ProfileSet::new(cap);
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, body)) = line.split_once('\t') else {
            return Err(Error::MissingField { line: i + 1, field: "profile_text" });
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::Parse { line: i + 1, message: "empty wiki_id".into() });
        }
        set.insert(normalize_profile_with_cap(body, id, cap));
    }
    Ok(set)
}

pub fn parse_profiles(path: &Path, cap: usize) -> Result<ProfileSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profiles_str(&text, cap)
}

pub fn write_profiles<'a>(profiles: impl IntoIterator<Item = &'a Profile>, path: &Path) -> Result<()> {
    let mut text = String::new();
    for p in profiles {
        text.push_str(&p.wiki_id);
        text.push('\t');
        text.push_str(&p.raw.replace(['\t', '\n'], " "));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
