//! The profile-conditioned generator: encoders, attention decoder with a
//! copy / pronoun / generate switch, loss, training and decoding.

mod config;
mod decode;
mod io;
mod network;
mod params;
mod toy;
mod train;


pub use config::ModelConfig;
pub use decode::{
    check_gradients, decoder_targets, generate_all, greedy_decode, greedy_decode_trace, sample_loss,
    sample_loss_and_grad, sample_loss_with, switch_statistics, switch_trace, DecodeTrace, SwitchStat,
    PROBABILITY_FLOOR,
};
pub use io::{load_model, load_pretrained_embeddings, save_model, CHECKPOINT_FILE, MODEL_CONFIG_FILE, VOCAB_FILE};
pub use network::{
    argmax, attend, case_rule_mass, char_encode, context_indices, decoder_step, encode_contexts, encode_profile,
    encode_sample, final_distribution, final_distribution_with, pronoun_mask, step_values, switch_probs,
    target_probability, vocab_distribution, DecoderStep, Dropout, Encoded, EncodedProfile, ExtendedVocab, StepVars,
    TargetSlots,
};
pub use params::{ModelParams, SWITCH_COPY, SWITCH_GEN, SWITCH_PRO};
pub use toy::{toy_problem, toy_problem_with, ToyProblem, TOY_CHARS, TOY_WORDS};
pub use train::{accuracy, train, train_from, EpochRecord, TrainOutcome};
