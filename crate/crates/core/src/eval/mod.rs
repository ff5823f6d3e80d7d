//! Edit distance, accuracies, pronoun classification scores and reports.

mod metrics;
mod report;

pub use metrics::{
    form_accuracy, levenshtein, normalize_expression, per_form_table, pronoun_prf, seen_unseen_report,
    string_edit_distance, token_edit_distance, total_accuracy, Breakdown, EvalPair, FormRow, Prf, SedGranularity,
    SeenUnseen,
};
pub use report::{evaluate, read_predictions, write_predictions, EvalReport};
