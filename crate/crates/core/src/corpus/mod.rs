//! Corpus records, entity profiles, vocabularies and dataset splits.

mod profile;
mod sample;
mod split;
pub mod synthetic;
mod vocab;

pub use profile::{
    normalize_profile, normalize_profile_with_cap, parse_profiles, parse_profiles_str, tokenize_text, write_profiles,
    Profile, ProfileSet, DEFAULT_PROFILE_CAP,
};
pub use sample::{
    classify_form, find_placeholders, id_realization, is_pronoun, is_sentence_end, parse_samples, parse_samples_str,
    relexicalize, relexicalize_samples, write_samples, Discourse, RefForm, Sample, PRONOUNS,
};
pub use split::{
    split_entity_separated, split_original, split_random, DatasetSplit, Manifest, SplitKind, MANIFEST_FILES,
    MIN_SPLIT_UNITS,
};
pub use vocab::{
    build_vocabulary, target_tokens, Vocabulary, BOS, BOS_INDEX, CHAR_PAD_INDEX, CHAR_UNK_INDEX, EOS, EOS_INDEX, PAD,
    PAD_INDEX, UNK, UNK_INDEX,
};
