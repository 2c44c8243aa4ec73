//! Matrix exponential and controllability Gramian factor by scaling and
//! squaring with Padé/Legendre initial approximations.

pub mod bounds;
pub mod coefficients;
mod error;
pub mod expgram;
pub mod matrix;
pub mod oracle;

pub use error::{Error, Result};
pub use expgram::{exp_and_gram, ExpGramResult, OrderScaling, Problem};
pub use matrix::DenseMatrix;
