use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use super::profile::Profile;
use super::sample::{Sample, PRONOUNS};
use crate::error::{Error, Result};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;
pub const BOS_INDEX: usize = 2;
pub const EOS_INDEX: usize = 3;

pub const CHAR_PAD_INDEX: usize = 0;
pub const CHAR_UNK_INDEX: usize = 1;

const HEADER: &str = "profilereg-vocab 1";

/// Word and character indices. Words are lowercased.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    word_index: HashMap<String, usize>,
    pronoun_indices: Vec<usize>,
    /// Characters from index 2 on; 0 and 1 are pad and unknown.
    chars: Vec<char>,
    char_index: HashMap<char, usize>,
}

impl Vocabulary {
    /// Specials first, then the pronoun inventory, then `words` in order.
    pub fn from_parts(words: impl IntoIterator<Item = String>, chars: impl IntoIterator<Item = char>) -> Self {
        let mut list: Vec<String> = [PAD, UNK, BOS, EOS].iter().map(|s| s.to_string()).collect();
        list.extend(PRONOUNS.iter().map(|s| s.to_string()));
        let mut seen: BTreeSet<String> = list.iter().cloned().collect();
        for w in words {
            if seen.insert(w.clone()) {
                list.push(w);
            }
        }
        let word_index: HashMap<String, usize> = list.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let pronoun_indices = PRONOUNS.iter().map(|p| word_index[*p]).collect();

        let mut char_list: Vec<char> = Vec::new();
        let mut char_seen = BTreeSet::new();
        for c in chars {
            if char_seen.insert(c) {
                char_list.push(c);
            }
        }
        let char_index = char_list.iter().enumerate().map(|(i, c)| (*c, i + 2)).collect();
        Vocabulary { words: list, word_index, pronoun_indices, chars: char_list, char_index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn char_len(&self) -> usize {
        self.chars.len() + 2
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    /// Index of `word`, or UNK.
    pub fn index_of(&self, word: &str) -> usize {
        self.get(word).unwrap_or(UNK_INDEX)
    }

    pub fn word_of(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn pronoun_indices(&self) -> &[usize] {
        &self.pronoun_indices
    }

    pub fn is_pronoun_index(&self, index: usize) -> bool {
        self.pronoun_indices.contains(&index)
    }

    pub fn char_index_of(&self, c: char) -> usize {
        self.char_index.get(&c).copied().unwrap_or(CHAR_UNK_INDEX)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.index_of(t)).collect()
    }

    pub fn encode_chars(&self, word: &str) -> Vec<usize> {
        word.chars().map(|c| self.char_index_of(c)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nwords {}\n", self.words.len());
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out.push_str(&format!("chars {}\n", self.chars.len()));
        for c in &self.chars {
            out.push(*c);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("vocabulary truncated before {what}") })
        };
        let (_, header) = next("header")?;
        if header != HEADER {
            return Err(Error::Parse { line: 1, message: format!("bad vocabulary header `{header}`") });
        }
        let count = |line: (usize, &str), key: &str| -> Result<usize> {
            line.1
                .strip_prefix(key)
                .and_then(|n| n.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: line.0 + 1, message: format!("expected `{key} N`") })
        };
        let n_words = count(next("word count")?, "words ")?;
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(next("word")?.1.to_string());
        }
        let n_chars = count(next("char count")?, "chars ")?;
        let mut chars = Vec::with_capacity(n_chars);
        for _ in 0..n_chars {
            let (i, l) = next("char")?;
            let mut it = l.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(c),
                _ => return Err(Error::Parse { line: i + 1, message: "expected one character".into() }),
            }
        }
        let specials = [PAD, UNK, BOS, EOS];
        if words.len() < specials.len() + PRONOUNS.len()
            || words.iter().zip(specials.iter().chain(PRONOUNS.iter())).any(|(a, b)| a != b)
        {
            return Err(Error::Parse {
                line: 3,
                message: "vocabulary does not start with specials and pronouns".into(),
            });
        }
        let vocab = Vocabulary::from_parts(words.iter().skip(specials.len() + PRONOUNS.len()).cloned(), chars);
        if vocab.words != words {
            return Err(Error::Parse { line: 3, message: "duplicate words in vocabulary".into() });
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Lowercased decoder targets for a gold expression.
pub fn target_tokens(expression: &[String]) -> Vec<String> {
    expression.iter().map(|t| t.to_lowercase()).collect()
}

/// Words from training contexts, gold expressions and profiles seen at
/// least `min_count` times, most frequent first (ties alphabetical).
pub fn build_vocabulary<'a>(
    train: &[Sample],
    profiles: impl IntoIterator<Item = &'a Profile>,
    min_count: usize,
) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be at least 1".into()));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut bump = |t: &str| *counts.entry(t.to_string()).or_default() += 1;
    for s in train {
        s.pre_context.iter().chain(&s.post_context).for_each(|t| bump(t));
        target_tokens(&s.gold_expression).iter().for_each(|t| bump(t));
    }
    for p in profiles {
        p.tokens.iter().for_each(|t| bump(t));
    }
    let chars: BTreeSet<char> = counts.keys().flat_map(|w| w.chars()).collect();
    let mut kept: Vec<(&String, &usize)> = counts.iter().filter(|(_, &c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_parts(kept.into_iter().map(|(w, _)| w.clone()), chars))
}
