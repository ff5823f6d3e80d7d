use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::only_name::only_name;
use crate::corpus::{Discourse, Profile, RefForm, Sample, PRONOUNS};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntacticPosition {
    Subject,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Initial,
    Subsequent,
}

/// Tokens since the previous mention of the same entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recency {
    First,
    UpTo10,
    UpTo40,
    Beyond40,
}

impl Recency {
    pub fn from_distance(distance: Option<usize>) -> Self {
        match distance {
            None => Recency::First,
            Some(d) if d <= 10 => Recency::UpTo10,
            Some(d) if d <= 40 => Recency::UpTo40,
            Some(_) => Recency::Beyond40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub syntactic_position: SyntacticPosition,
    pub status_text: Status,
    pub status_sentence: Status,
    pub recency: Recency,
}

pub const FEATURE_NAMES: [&str; 4] = ["syntactic_position", "status_text", "status_sentence", "recency"];
const FEATURE_VALUES: [&[&str]; 4] =
    [&["subject", "other"], &["initial", "subsequent"], &["initial", "subsequent"], &["first", "le10", "le40", "gt40"]];

impl FeatureVector {
    /// Value index of each feature, in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [usize; 4] {
        [
            self.syntactic_position as usize,
            self.status_text as usize,
            self.status_sentence as usize,
            self.recency as usize,
        ]
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.values();
        let names: Vec<&str> = (0..4).map(|k| FEATURE_VALUES[k][v[k]]).collect();
        write!(f, "({})", names.join(", "))
    }
}

/// Surface approximation of the features: a slot at the start of a
/// sentence counts as subject position.
pub fn extract_features(discourse: &Discourse) -> FeatureVector {
    let status = |b: bool| if b { Status::Subsequent } else { Status::Initial };
    FeatureVector {
        syntactic_position: if discourse.slot_sentence_initial {
            SyntacticPosition::Subject
        } else {
            SyntacticPosition::Other
        },
        status_text: status(discourse.prior_mentions > 0),
        status_sentence: status(discourse.mentioned_in_sentence),
        recency: Recency::from_distance(discourse.tokens_since_last),
    }
}

pub fn sample_features(sample: &Sample) -> FeatureVector {
    extract_features(&sample.discourse)
}

/// Class priors and per-feature likelihood tables, both Laplace smoothed.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    pub priors: [f64; 4],
    /// `likelihoods[feature][form][value]`.
    pub likelihoods: [[Vec<f64>; 4]; 4],
}

pub fn nb_train(data: &[(FeatureVector, RefForm)], alpha: f64) -> Result<NaiveBayesModel> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("naive Bayes needs at least one training sample".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing constant must be positive, got {alpha}")));
    }
    let k = RefForm::ALL.len() as f64;
    let mut class_counts = [0usize; 4];
    let mut counts: [[Vec<usize>; 4]; 4] =
        std::array::from_fn(|f| std::array::from_fn(|_| vec![0; FEATURE_VALUES[f].len()]));
    for (fv, form) in data {
        let c = form.index();
        class_counts[c] += 1;
        for (f, v) in fv.values().into_iter().enumerate() {
            counts[f][c][v] += 1;
        }
    }
    let n = data.len() as f64;
    let priors = std::array::from_fn(|c| (class_counts[c] as f64 + alpha) / (n + k * alpha));
    let likelihoods = std::array::from_fn(|f| {
        let width = FEATURE_VALUES[f].len() as f64;
        std::array::from_fn(|c| {
            counts[f][c].iter().map(|&x| (x as f64 + alpha) / (class_counts[c] as f64 + width * alpha)).collect()
        })
    });
    Ok(NaiveBayesModel { alpha, priors, likelihoods })
}

/// Index of the largest score; the earliest form wins ties.
pub fn argmax_form(scores: &[f64; 4]) -> RefForm {
    let mut best = 0;
    for c in 1..4 {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    RefForm::ALL[best]
}

impl NaiveBayesModel {
    /// prior times the product of feature likelihoods, per form.
    pub fn scores(&self, features: &FeatureVector) -> [f64; 4] {
        let v = features.values();
        std::array::from_fn(|c| (0..4).fold(self.priors[c], |acc, f| acc * self.likelihoods[f][c][v[f]]))
    }

    pub fn posteriors(&self, features: &FeatureVector) -> [f64; 4] {
        let s = self.scores(features);
        let z: f64 = s.iter().sum();
        s.map(|x| x / z)
    }

    pub fn predict(&self, features: &FeatureVector) -> RefForm {
        argmax_form(&self.scores(features))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("profilereg-nb 1\nalpha {}\n", self.alpha);
        for form in RefForm::ALL {
            s.push_str(&format!("prior {} {}\n", form, self.priors[form.index()]));
        }
        for (f, name) in FEATURE_NAMES.iter().enumerate() {
            for form in RefForm::ALL {
                for (v, value) in FEATURE_VALUES[f].iter().enumerate() {
                    s.push_str(&format!("likelihood {name} {form} {value} {}\n", self.likelihoods[f][form.index()][v]));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, "profilereg-nb 1")) => {}
            _ => return Err(Error::Parse { line: 1, message: "missing naive Bayes header".into() }),
        }
        let mut alpha = None;
        let mut priors = [f64::NAN; 4];
        let mut likelihoods: [[Vec<f64>; 4]; 4] =
            std::array::from_fn(|f| std::array::from_fn(|_| vec![f64::NAN; FEATURE_VALUES[f].len()]));
        for (i, line) in lines {
            let bad = |message: String| Error::Parse { line: i + 1, message };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let number = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")));
            let form = |s: &str| RefForm::from_str(s).map_err(bad);
            match parts.as_slice() {
                ["alpha", a] => alpha = Some(number(a)?),
                ["prior", f, p] => priors[form(f)?.index()] = number(p)?,
                ["likelihood", name, f, value, p] => {
                    let fi = FEATURE_NAMES
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| bad(format!("unknown feature `{name}`")))?;
                    let vi = FEATURE_VALUES[fi]
                        .iter()
                        .position(|v| v == value)
                        .ok_or_else(|| bad(format!("unknown value `{value}` for {name}")))?;
                    likelihoods[fi][form(f)?.index()][vi] = number(p)?;
                }
                _ => return Err(bad(format!("unexpected line `{line}`"))),
            }
        }
        let alpha = alpha.ok_or(Error::Missing("alpha".into()))?;
        if priors.iter().chain(likelihoods.iter().flatten().flatten()).any(|p| p.is_nan()) {
            return Err(Error::Missing("naive Bayes table entries".into()));
        }
        Ok(NaiveBayesModel { alpha, priors, likelihoods })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Pronoun occurring most often in the profile, `it` when none does.
pub fn most_frequent_pronoun(profile: &Profile) -> &'static str {
    let counts = PRONOUNS.map(|p| profile.tokens.iter().filter(|t| t.to_lowercase() == p).count());
    let mut best = None;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|b: usize| c > counts[b]) {
            best = Some(i);
        }
    }
    best.map_or("it", |i| PRONOUNS[i])
}

/// Content for a predicted form. Descriptions and demonstratives reuse the
/// gold expression.
pub fn ferreira_realize(form: RefForm, profile: &Profile, gold_expression: &[String]) -> Vec<String> {
    match form {
        RefForm::Name => only_name(&profile.raw),
        RefForm::Pronoun => vec![most_frequent_pronoun(profile).to_string()],
        RefForm::Description | RefForm::Demonstrative => gold_expression.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize_profile;
    use proptest::prelude::*;

    fn fv(subject: bool, text_sub: bool, sent_sub: bool, recency: Recency) -> FeatureVector {
        let st = |b| if b { Status::Subsequent } else { Status::Initial };
        FeatureVector {
            syntactic_position: if subject { SyntacticPosition::Subject } else { SyntacticPosition::Other },
            status_text: st(text_sub),
            status_sentence: st(sent_sub),
            recency,
        }
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn features_from_context() {
        let first = extract_features(&Discourse::from_context(&[], "x"));
        assert_eq!(first, fv(true, false, false, Recency::First));
        let second = extract_features(&Discourse::from_context(&toks("x saw a b c d"), "x"));
        assert_eq!(second, fv(false, true, true, Recency::UpTo10));
        let elliot = toks("elliot_see was born on 1927-07-23 in dallas .");
        let he = extract_features(&Discourse::from_context(&elliot, "elliot_see"));
        assert_eq!(he, fv(true, true, false, Recency::UpTo10));
        assert_eq!(Recency::from_distance(Some(40)), Recency::UpTo40);
        assert_eq!(Recency::from_distance(Some(41)), Recency::Beyond40);
    }

    #[test]
    fn uniform_priors_from_one_per_form() {
        let f = fv(true, false, false, Recency::First);
        let data: Vec<_> = RefForm::ALL.iter().map(|&form| (f, form)).collect();
        let m = nb_train(&data, 1.0).unwrap();
        assert_eq!(m.priors, [0.25; 4]);
        assert_eq!(m.predict(&f), RefForm::Name);
        assert!(nb_train(&[], 1.0).is_err());
        assert!(nb_train(&data, 0.0).is_err());
    }

    // Six rows over two forms, posteriors worked out by hand.
    fn six_rows() -> Vec<(FeatureVector, RefForm)> {
        vec![
            (fv(true, false, false, Recency::First), RefForm::Name),
            (fv(true, false, false, Recency::First), RefForm::Name),
            (fv(false, true, true, Recency::UpTo10), RefForm::Name),
            (fv(true, true, false, Recency::UpTo10), RefForm::Pronoun),
            (fv(true, true, true, Recency::UpTo10), RefForm::Pronoun),
            (fv(false, true, false, Recency::UpTo40), RefForm::Description),
        ]
    }

    #[test]
    fn six_row_posteriors_by_hand() {
        let m = nb_train(&six_rows(), 1.0).unwrap();
        // priors: (c+1)/(6+4)
        assert_eq!(m.priors, [0.4, 0.3, 0.2, 0.1]);
        let q = fv(true, true, false, Recency::UpTo10);
        // name: subject 3/5, text subsequent 2/5, sentence initial 3/5, le10 2/7
        let name = 0.4 * (3.0 / 5.0) * (2.0 / 5.0) * (3.0 / 5.0) * (2.0 / 7.0);
        // pronoun: 3/4, 3/4, 2/4, 3/6
        let pron = 0.3 * (3.0 / 4.0) * (3.0 / 4.0) * (2.0 / 4.0) * (3.0 / 6.0);
        // description: 1/3, 2/3, 2/3, 1/5
        let desc = 0.2 * (1.0 / 3.0) * (2.0 / 3.0) * (2.0 / 3.0) * (1.0 / 5.0);
        // demonstrative: 1/2, 1/2, 1/2, 1/4
        let demo = 0.1 * 0.5 * 0.5 * 0.5 * 0.25;
        let z = name + pron + desc + demo;
        let post = m.posteriors(&q);
        for (got, want) in post.iter().zip([name / z, pron / z, desc / z, demo / z]) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        assert_eq!(m.predict(&q), RefForm::Pronoun);
        let q2 = fv(true, false, false, Recency::First);
        assert_eq!(m.predict(&q2), RefForm::Name);
    }

    #[test]
    fn likelihood_rows_sum_to_one_and_flatten_with_alpha() {
        let m = nb_train(&six_rows(), 1.0).unwrap();
        assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for table in &m.likelihoods {
            for row in table {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&p| p > 0.0));
            }
        }
        let big = nb_train(&six_rows(), 1e9).unwrap();
        for (f, table) in big.likelihoods.iter().enumerate() {
            let u = 1.0 / FEATURE_VALUES[f].len() as f64;
            for row in table {
                assert!(row.iter().all(|p| (p - u).abs() < 1e-6));
            }
        }
    }

    #[test]
    fn degenerate_prior_predicts_pronoun() {
        let mut m = nb_train(&six_rows(), 1.0).unwrap();
        m.priors = [0.0, 1.0, 0.0, 0.0];
        for row in six_rows() {
            assert_eq!(m.predict(&row.0), RefForm::Pronoun);
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = nb_train(&six_rows(), 0.37).unwrap();
        let back = NaiveBayesModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(NaiveBayesModel::from_text("nope").is_err());
        let truncated: String = m.to_text().lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(NaiveBayesModel::from_text(&truncated).is_err());
    }

    #[test]
    fn pronoun_choice() {
        let elliot = normalize_profile(
            "Elliot See was an American engineer , naval aviator , test pilot , and NASA astronaut . He was selected for NASA 's second group of astronauts in 1962 .",
            "elliot_see",
        );
        assert_eq!(most_frequent_pronoun(&elliot), "he");
        assert_eq!(ferreira_realize(RefForm::Pronoun, &elliot, &toks("See")), ["he"]);
        assert_eq!(ferreira_realize(RefForm::Name, &elliot, &toks("See")), ["Elliot", "See"]);
        let none = normalize_profile("A quiet village by the sea .", "v");
        assert_eq!(most_frequent_pronoun(&none), "it");
        let tie = normalize_profile("It is here and he is there .", "t");
        assert_eq!(most_frequent_pronoun(&tie), "he");
        let gold = toks("the institute");
        assert_eq!(ferreira_realize(RefForm::Description, &none, &gold), gold);
        assert_eq!(ferreira_realize(RefForm::Demonstrative, &none, &gold), gold);
    }

    fn any_fv() -> impl Strategy<Value = FeatureVector> {
        (any::<bool>(), any::<bool>(), any::<bool>(), 0usize..4).prop_map(|(a, b, c, r)| {
            let recency = [Recency::First, Recency::UpTo10, Recency::UpTo40, Recency::Beyond40][r];
            fv(a, b, c, recency)
        })
    }

    proptest! {
        #[test]
        fn argmax_ignores_positive_scale(scores in prop::array::uniform4(0.0f64..1.0), k in 1e-6f64..1e6) {
            prop_assert_eq!(argmax_form(&scores), argmax_form(&scores.map(|s| s * k)));
        }

        #[test]
        fn posteriors_normalize(rows in prop::collection::vec((any_fv(), 0usize..4), 1..30), q in any_fv()) {
            let data: Vec<_> = rows.into_iter().map(|(f, c)| (f, RefForm::ALL[c])).collect();
            let m = nb_train(&data, 1.0).unwrap();
            let p = m.posteriors(&q);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(m.predict(&q), argmax_form(&p));
        }

        #[test]
        fn realized_pronoun_is_one_inventory_token(text in "[A-Za-z ]{0,60}") {
            let prof = normalize_profile(&text, "e");
            let out = ferreira_realize(RefForm::Pronoun, &prof, &[]);
            prop_assert_eq!(out.len(), 1);
            prop_assert!(PRONOUNS.contains(&out[0].as_str()));
        }
    }
}
