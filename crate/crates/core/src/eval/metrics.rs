use std::collections::{BTreeMap, BTreeSet};

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{is_pronoun, RefForm, Sample};

/// Canonical comparison string: joined, lowercased, diacritics removed,
/// only `[a-z0-9 ]` kept, whitespace collapsed.
pub fn normalize_expression<S: AsRef<str>>(tokens: &[S]) -> String {
    let joined = tokens.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ");
    let kept: String = joined
        .to_lowercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c.is_whitespace())
        .collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Levenshtein distance with unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character-level edit distance between two canonical strings.
pub fn string_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b)
}

/// Edit distance over space-separated tokens.
pub fn token_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<&str> = a.split_whitespace().collect();
    let b: Vec<&str> = b.split_whitespace().collect();
    levenshtein(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SedGranularity {
    #[default]
    Char,
    Token,
}

impl std::str::FromStr for SedGranularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "char" => Ok(SedGranularity::Char),
            "token" => Ok(SedGranularity::Token),
            other => Err(format!("unknown SED granularity `{other}` (char, token)")),
        }
    }
}

impl SedGranularity {
    pub fn as_str(self) -> &'static str {
        match self {
            SedGranularity::Char => "char",
            SedGranularity::Token => "token",
        }
    }

    pub fn distance(self, a: &str, b: &str) -> usize {
        match self {
            SedGranularity::Char => string_edit_distance(a, b),
            SedGranularity::Token => token_edit_distance(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub wiki_id: String,
    pub gold: Vec<String>,
    pub generated: Vec<String>,
    pub gold_form: RefForm,
    /// The entity occurs in the training partition.
    pub seen: bool,
}

impl EvalPair {
    pub fn from_sample(sample: &Sample, generated: Vec<String>, train_entities: &BTreeSet<&str>) -> Self {
        EvalPair {
            wiki_id: sample.wiki_id.clone(),
            gold: sample.gold_expression.clone(),
            generated,
            gold_form: sample.form(),
            seen: train_entities.contains(sample.wiki_id.as_str()),
        }
    }

    pub fn is_match(&self) -> bool {
        normalize_expression(&self.gold) == normalize_expression(&self.generated)
    }

    pub fn sed(&self, granularity: SedGranularity) -> usize {
        granularity.distance(&normalize_expression(&self.gold), &normalize_expression(&self.generated))
    }

    /// A single inventory token counts as a generated pronoun.
    pub fn generated_is_pronoun(&self) -> bool {
        matches!(self.generated.as_slice(), [only] if is_pronoun(only))
    }
}

fn fraction(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Share of exact (normalized) matches; `None` for no pairs.
pub fn total_accuracy(pairs: &[EvalPair]) -> Option<f64> {
    fraction(pairs.iter().filter(|p| p.is_match()).count(), pairs.len())
}

/// Accuracy over the pairs whose gold form is `form`; `None` when absent.
pub fn form_accuracy(pairs: &[EvalPair], form: RefForm) -> Option<f64> {
    let of_form: Vec<&EvalPair> = pairs.iter().filter(|p| p.gold_form == form).collect();
    fraction(of_form.iter().filter(|p| p.is_match()).count(), of_form.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl Prf {
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Prf { precision, recall, f1, true_pos, false_pos, false_neg }
    }
}

/// Pronoun vs non-pronoun classification scores, ignoring content.
pub fn pronoun_prf(pairs: &[EvalPair]) -> Prf {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for p in pairs {
        match (p.gold_form == RefForm::Pronoun, p.generated_is_pronoun()) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    Prf::from_counts(tp, fp, fn_)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormRow {
    pub accuracy: f64,
    pub support: usize,
}

pub fn per_form_table(pairs: &[EvalPair]) -> BTreeMap<RefForm, FormRow> {
    let mut out = BTreeMap::new();
    for form in RefForm::ALL {
        let support = pairs.iter().filter(|p| p.gold_form == form).count();
        if let Some(accuracy) = form_accuracy(pairs, form) {
            out.insert(form, FormRow { accuracy, support });
        }
    }
    out
}

/// Per-form table plus total for one side of the seen/unseen partition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Breakdown {
    pub per_form: BTreeMap<RefForm, FormRow>,
    pub total: Option<FormRow>,
}

impl Breakdown {
    fn of(pairs: &[EvalPair]) -> Self {
        Breakdown {
            per_form: per_form_table(pairs),
            total: total_accuracy(pairs).map(|accuracy| FormRow { accuracy, support: pairs.len() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeenUnseen {
    pub seen: Breakdown,
    pub unseen: Breakdown,
}

/// Splits pairs by whether their entity is in `train_entities`.
pub fn seen_unseen_report(pairs: &[EvalPair], train_entities: &BTreeSet<&str>) -> SeenUnseen {
    let (seen, unseen): (Vec<EvalPair>, Vec<EvalPair>) =
        pairs.iter().cloned().partition(|p| train_entities.contains(p.wiki_id.as_str()));
    SeenUnseen { seen: Breakdown::of(&seen), unseen: Breakdown::of(&unseen) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn pair(gold: &str, generated: &str, form: RefForm, seen: bool) -> EvalPair {
        EvalPair {
            wiki_id: if seen { "a".into() } else { "b".into() },
            gold: t(gold),
            generated: t(generated),
            gold_form: form,
            seen,
        }
    }

    fn naive(a: &[u8], b: &[u8]) -> usize {
        match (a, b) {
            ([], _) => b.len(),
            (_, []) => a.len(),
            ([x, ar @ ..], [y, br @ ..]) => {
                let sub = naive(ar, br) + usize::from(x != y);
                sub.min(naive(ar, b) + 1).min(naive(a, br) + 1)
            }
        }
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_expression(&t("Tranmere Rovers F.C.")), normalize_expression(&t("Tranmere Rovers FC")));
        assert_eq!(normalize_expression(&["De\u{015f}teapt\u{0103}-te"]), "desteaptate");
        assert_eq!(normalize_expression(&["Desteapta-te"]), "desteaptate");
        assert_eq!(normalize_expression::<&str>(&[]), "");
        assert_eq!(normalize_expression(&t("  The   U. of Texas ")), "the u of texas");
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(string_edit_distance("abc", "abc"), 0);
        assert_eq!(string_edit_distance("", "abc"), 3);
        assert_eq!(string_edit_distance("kitten", "sitting"), naive(b"kitten", b"sitting"));
        assert_eq!(string_edit_distance("kitten", "sitting"), 3);
        assert_eq!(token_edit_distance("the big cat", "the cat"), 1);
        assert_eq!(SedGranularity::Token.distance("a b", "a c"), 1);
        assert_eq!(SedGranularity::Char.distance("a b", "a cd"), 2);
    }

    #[test]
    fn accuracies() {
        let pairs = vec![pair("He", "he", RefForm::Pronoun, true), pair("Elliot See", "See", RefForm::Name, true)];
        assert_eq!(total_accuracy(&pairs), Some(0.5));
        assert_eq!(form_accuracy(&pairs, RefForm::Pronoun), Some(1.0));
        assert_eq!(form_accuracy(&pairs, RefForm::Description), None);
        assert_eq!(total_accuracy(&[]), None);
        let table = per_form_table(&pairs);
        assert_eq!(table[&RefForm::Name], FormRow { accuracy: 0.0, support: 1 });
        assert!(!table.contains_key(&RefForm::Demonstrative));
    }

    #[test]
    fn prf_examples() {
        let pairs = vec![
            pair("He", "he", RefForm::Pronoun, true),
            pair("She", "she", RefForm::Pronoun, true),
            pair("X", "it", RefForm::Name, true),
            pair("Y Z", "they", RefForm::Name, true),
        ];
        let prf = pronoun_prf(&pairs);
        assert_eq!((prf.precision, prf.recall), (0.5, 1.0));
        assert!((prf.f1 - 2.0 / 3.0).abs() < 1e-15);
        let none = pronoun_prf(&[pair("He", "Elliot See", RefForm::Pronoun, true)]);
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        let perfect = pronoun_prf(&pairs[..2]);
        assert_eq!((perfect.precision, perfect.recall, perfect.f1), (1.0, 1.0, 1.0));
        // "he said" is two tokens, so not a generated pronoun
        assert!(!pair("x", "he said", RefForm::Name, true).generated_is_pronoun());
    }

    #[test]
    fn seen_unseen_split() {
        let pairs = vec![
            pair("A", "A", RefForm::Name, true),
            pair("A", "B", RefForm::Name, true),
            pair("he", "he", RefForm::Pronoun, false),
            pair("C", "C", RefForm::Name, false),
        ];
        let train: BTreeSet<&str> = ["a"].into();
        let r = seen_unseen_report(&pairs, &train);
        assert_eq!(r.seen.total.unwrap().accuracy, 0.5);
        assert_eq!(r.unseen.total.unwrap().accuracy, 1.0);
        assert_eq!(r.unseen.per_form[&RefForm::Pronoun].support, 1);
        let all: BTreeSet<&str> = ["a", "b"].into();
        let r = seen_unseen_report(&pairs, &all);
        assert!(r.unseen.total.is_none() && r.unseen.per_form.is_empty());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(words in prop::collection::vec("[A-Za-zéăş.\\- ]{0,8}", 0..5)) {
            let once = normalize_expression(&words);
            prop_assert_eq!(normalize_expression(&[once.as_str()]), once.clone());
        }

        #[test]
        fn prf_ignores_order(flags in prop::collection::vec((any::<bool>(), any::<bool>()), 0..20), seed in any::<u64>()) {
            let pairs: Vec<EvalPair> = flags
                .iter()
                .map(|(g, p)| pair("x", if *p { "he" } else { "x y" }, if *g { RefForm::Pronoun } else { RefForm::Name }, true))
                .collect();
            let mut shuffled = pairs.clone();
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(pronoun_prf(&pairs), pronoun_prf(&shuffled));
        }

        #[test]
        fn edit_distance_is_a_metric(a in "[a-c]{0,6}", b in "[a-c]{0,6}", c in "[a-c]{0,6}") {
            let d = string_edit_distance;
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == 0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }
    }
}
