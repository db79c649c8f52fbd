//! Secure rank statistics (k-th element, median, percentiles) over threshold Paillier.
//!
//! Users submit encrypted inputs with zero-knowledge proofs; workers run a binary
//! search over the input range, learning only the sign of an encrypted count each
//! round. Two protocol variants are provided: an interactive one where users answer
//! every round, and a non-interactive one where workers mask inputs with
//! preprocessed randomness.

pub mod arith;
pub mod codec;
pub mod error;
pub mod masking;
pub mod nirank;
pub mod paillier;
pub mod rank;
pub mod sim;
pub mod zkp;

pub use error::{Abort, Error, Party, Result};
