//! Name-extraction and naive Bayes reference systems.

mod ferreira;
mod only_name;

pub use ferreira::{
    argmax_form, extract_features, ferreira_realize, most_frequent_pronoun, nb_train, sample_features, FeatureVector,
    NaiveBayesModel, Recency, Status, SyntacticPosition, DEFAULT_ALPHA, FEATURE_NAMES,
};
pub use only_name::only_name;
