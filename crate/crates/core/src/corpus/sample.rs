use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Third-person pronouns the generator may emit as a pronoun-form reference.
pub const PRONOUNS: [&str; 16] = [
    "he",
    "she",
    "it",
    "they",
    "him",
    "her",
    "them",
    "his",
    "hers",
    "its",
    "their",
    "theirs",
    "himself",
    "herself",
    "itself",
    "themselves",
];

const DEMONSTRATIVES: [&str; 4] = ["this", "that", "these", "those"];
const FUNCTION_WORDS: [&str; 6] = ["of", "the", "and", "de", "du", "von"];
const SENTENCE_END: [&str; 3] = [".", "!", "?"];

pub fn is_pronoun(token: &str) -> bool {
    let lower = token.to_lowercase();
    PRONOUNS.contains(&lower.as_str())
}

pub fn is_sentence_end(token: &str) -> bool {
    SENTENCE_END.contains(&token)
}

/// Referential form of an expression. The declaration order is the
/// tie-breaking order used elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefForm {
    Name,
    Pronoun,
    Description,
    Demonstrative,
}

impl RefForm {
    pub const ALL: [RefForm; 4] = [RefForm::Name, RefForm::Pronoun, RefForm::Description, RefForm::Demonstrative];

    pub fn as_str(self) -> &'static str {
        match self {
            RefForm::Name => "name",
            RefForm::Pronoun => "pronoun",
            RefForm::Description => "description",
            RefForm::Demonstrative => "demonstrative",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RefForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        RefForm::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| format!("unknown referential form `{s}`"))
    }
}

/// Heuristic form label for an unannotated expression.
pub fn classify_form(expression: &[String]) -> RefForm {
    match expression {
        [only] if is_pronoun(only) => RefForm::Pronoun,
        [first, ..] if DEMONSTRATIVES.contains(&first.to_lowercase().as_str()) => RefForm::Demonstrative,
        _ => {
            let mut content = expression
                .iter()
                .filter(|t| !FUNCTION_WORDS.contains(&t.to_lowercase().as_str()))
                .filter(|t| t.chars().any(char::is_alphabetic))
                .peekable();
            if content.peek().is_some() && content.all(|t| t.chars().next().is_some_and(char::is_uppercase)) {
                RefForm::Name
            } else {
                RefForm::Description
            }
        }
    }
}

/// Mention history of the referenced entity before its reference slot,
/// measured on the delexicalized pre-context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Discourse {
    pub prior_mentions: usize,
    /// Tokens from the last prior mention to the slot.
    pub tokens_since_last: Option<usize>,
    pub mentioned_in_sentence: bool,
    pub slot_sentence_initial: bool,
}

impl Discourse {
    pub fn from_context(pre_context: &[String], wiki_id: &str) -> Self {
        let slot = pre_context.len();
        let sentence_start = pre_context.iter().rposition(|t| is_sentence_end(t)).map_or(0, |i| i + 1);
        let mentions: Vec<usize> =
            pre_context.iter().enumerate().filter(|(_, t)| t.as_str() == wiki_id).map(|(i, _)| i).collect();
        Discourse {
            prior_mentions: mentions.len(),
            tokens_since_last: mentions.last().map(|&i| slot - i),
            mentioned_in_sentence: mentions.iter().any(|&i| i >= sentence_start),
            slot_sentence_initial: sentence_start == slot,
        }
    }
}

/// One referring-expression instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub wiki_id: String,
    /// True-cased.
    pub gold_expression: Vec<String>,
    /// Lowercased.
    pub pre_context: Vec<String>,
    /// Lowercased.
    pub post_context: Vec<String>,
    pub gold_form: Option<RefForm>,
    pub discourse: Discourse,
}

impl Sample {
    pub fn new(
        wiki_id: impl Into<String>,
        gold_expression: Vec<String>,
        pre_context: Vec<String>,
        post_context: Vec<String>,
    ) -> Self {
        let wiki_id = wiki_id.into();
        let pre_context: Vec<String> = pre_context.iter().map(|t| t.to_lowercase()).collect();
        let discourse = Discourse::from_context(&pre_context, &wiki_id);
        Sample {
            wiki_id,
            gold_expression,
            pre_context,
            post_context: post_context.iter().map(|t| t.to_lowercase()).collect(),
            gold_form: None,
            discourse,
        }
    }

    pub fn with_form(mut self, form: RefForm) -> Self {
        self.gold_form = Some(form);
        self
    }

    /// Annotated form, falling back to [`classify_form`].
    pub fn form(&self) -> RefForm {
        self.gold_form.unwrap_or_else(|| classify_form(&self.gold_expression))
    }

    /// Tab-separated record as read by [`parse_samples`].
    pub fn to_record(&self) -> String {
        let mut line = format!(
            "{}\t{}\t{}\t{}",
            self.wiki_id,
            self.gold_expression.join(" "),
            self.pre_context.join(" "),
            self.post_context.join(" ")
        );
        if let Some(form) = self.gold_form {
            line.push('\t');
            line.push_str(form.as_str());
        }
        line
    }
}

fn tokens(field: &str) -> Vec<String> {
    field.split_whitespace().map(str::to_string).collect()
}

const FIELDS: [&str; 4] = ["wiki_id", "expression", "pre_context", "post_context"];

/// Parses `wiki_id<TAB>expression<TAB>pre_context<TAB>post_context[<TAB>form]`
/// records. Blank lines are skipped.
pub fn parse_samples_str(text: &str) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < FIELDS.len() {
            return Err(Error::MissingField { line: line_no, field: FIELDS[fields.len()] });
        }
        if fields.len() > FIELDS.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 or 5 fields, found {}", fields.len()),
            });
        }
        let wiki_id = fields[0].trim();
        if wiki_id.is_empty() || wiki_id.contains(' ') {
            return Err(Error::Parse { line: line_no, message: format!("invalid wiki_id `{wiki_id}`") });
        }
        let expression = tokens(fields[1]);
        if expression.is_empty() {
            return Err(Error::Parse { line: line_no, message: "empty expression".into() });
        }
        let mut sample = Sample::new(wiki_id, expression, tokens(fields[2]), tokens(fields[3]));
        if let Some(form) = fields.get(4).filter(|f| !f.trim().is_empty()) {
            let form = form.parse().map_err(|message| Error::Parse { line: line_no, message })?;
            sample.gold_form = Some(form);
        }
        out.push(sample);
    }
    Ok(out)
}

pub fn parse_samples(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples_str(&text)
}

pub fn write_samples(samples: &[Sample], path: &Path) -> Result<()> {
    let mut text = String::new();
    for s in samples {
        text.push_str(&s.to_record());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Placeholder tokens (known entity ids) present in `text`.
pub fn find_placeholders<'a>(text: &'a [String], known_ids: &BTreeSet<String>) -> Vec<&'a str> {
    text.iter().filter(|t| known_ids.contains(*t)).map(String::as_str).collect()
}

/// Replaces every known-id token with its realization (lowercased).
pub fn relexicalize(
    text: &[String],
    known_ids: &BTreeSet<String>,
    realizations: &HashMap<String, Vec<String>>,
) -> Result<Vec<String>> {
    let mut missing = BTreeSet::new();
    let mut out = Vec::with_capacity(text.len());
    for tok in text {
        if known_ids.contains(tok) {
            match realizations.get(tok) {
                Some(expr) => out.extend(expr.iter().map(|t| t.to_lowercase())),
                None => {
                    missing.insert(tok.clone());
                }
            }
        } else {
            out.push(tok.clone());
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Error::UnknownPlaceholder(missing.into_iter().collect()))
    }
}

/// Realization of an id read off the id itself: `st._louis` -> `st. louis`.
pub fn id_realization(wiki_id: &str) -> Vec<String> {
    wiki_id.split('_').filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Relexicalizes the contexts of every sample using id-derived realizations.
pub fn relexicalize_samples(samples: &mut [Sample], known_ids: &BTreeSet<String>) -> Result<()> {
    let realizations: HashMap<String, Vec<String>> =
        known_ids.iter().map(|id| (id.clone(), id_realization(id))).collect();
    for s in samples.iter_mut() {
        s.pre_context = relexicalize(&s.pre_context, known_ids, &realizations)?;
        s.post_context = relexicalize(&s.post_context, known_ids, &realizations)?;
    }
    Ok(())
}
