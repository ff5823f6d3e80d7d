//! Small generated corpora for tests and smoke runs. Entities get invented
//! names that only occur in their profile and context, and the referential
//! form of every sample is fixed by its context:
//! first mention -> name, sentence-initial subsequent mention -> pronoun,
//! mention right after "and" -> description.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::profile::{normalize_profile, ProfileSet, DEFAULT_PROFILE_CAP};
use super::sample::{RefForm, Sample};

const ONSETS: [&str; 12] = ["b", "d", "f", "k", "l", "m", "n", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 6] = ["", "n", "r", "l", "th", "s"];

struct Kind {
    noun: &'static str,
    pronoun: &'static str,
    verb: &'static str,
}

const KINDS: [Kind; 6] = [
    Kind { noun: "painter", pronoun: "he", verb: "paints" },
    Kind { noun: "singer", pronoun: "she", verb: "sings" },
    Kind { noun: "airport", pronoun: "it", verb: "serves" },
    Kind { noun: "river", pronoun: "it", verb: "flows" },
    Kind { noun: "pilot", pronoun: "he", verb: "flies" },
    Kind { noun: "poet", pronoun: "she", verb: "writes" },
];

const PLACES: [&str; 5] = ["texas", "auckland", "dallas", "bangalore", "romania"];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub samples: Vec<Sample>,
    pub profiles: ProfileSet,
}

fn invent_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(VOWELS.choose(rng).unwrap());
    }
    w.push_str(CODAS.choose(rng).unwrap());
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// `entities` entities with `per_entity` samples each, cycling through
/// name, pronoun, description, name, pronoun, ...
pub fn synthetic_corpus(entities: usize, per_entity: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let mut samples = Vec::new();
    let mut profiles = ProfileSet::new(DEFAULT_PROFILE_CAP);
    for e in 0..entities {
        let (first, last) = loop {
            let pair = (invent_word(&mut rng), invent_word(&mut rng));
            if used.insert(pair.0.clone()) && used.insert(pair.1.clone()) {
                break pair;
            }
        };
        let kind = &KINDS[e % KINDS.len()];
        let place = PLACES[rng.random_range(0..PLACES.len())];
        let id = format!("{first}_{last}");
        let name = vec![capitalize(&first), capitalize(&last)];
        // every other profile has no pronoun in it
        let subject = if e % 2 == 0 { format!("The {}", kind.noun) } else { capitalize(kind.pronoun) };
        let raw = format!(
            "{} {} is a {} from {}. {subject} {} in {}.",
            name[0],
            name[1],
            kind.noun,
            capitalize(place),
            kind.verb,
            capitalize(place)
        );
        profiles.insert(normalize_profile(&raw, &id));

        for k in 0..per_entity {
            let form = [RefForm::Name, RefForm::Pronoun, RefForm::Description][k % 3];
            let round = k / 3;
            let (expr, pre, post) = match form {
                RefForm::Name => (
                    name.clone(),
                    if round == 0 { String::new() } else { format!("in {place} ,") },
                    format!("is a {} from {place} .", kind.noun),
                ),
                RefForm::Pronoun => (
                    vec![capitalize(kind.pronoun)],
                    format!("{id} is a {} . ", kind.noun),
                    format!("{} in {place} .", kind.verb),
                ),
                _ => (
                    vec!["the".to_string(), kind.noun.to_string()],
                    format!("{id} lives in {place} and"),
                    format!("{} there .", kind.verb),
                ),
            };
            let post = if round > 0 { format!("{post} it was year {round} .") } else { post };
            samples.push(Sample::new(id.clone(), expr, toks(&pre), toks(&post)).with_form(form));
        }
    }
    SyntheticCorpus { samples, profiles }
}
