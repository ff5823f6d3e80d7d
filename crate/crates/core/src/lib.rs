pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod nn;

pub use error::{Error, Result};
