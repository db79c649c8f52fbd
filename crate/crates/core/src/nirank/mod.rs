//! Non-interactive variant: workers mask each user's encoded difference with
//! preprocessed shared randomness and learn only the sign.
//!
//! Each step is split into the part one worker computes and the check everyone else
//! runs on the published result, so a driver can route the messages itself. The
//! `ddec`, `reshare`, `shared_mul`, `prep_chain` and `nirank_round` functions run a
//! whole step in-process.

pub mod bank;
pub mod ddec;
pub mod mul;
pub mod online;
pub mod prep;
pub mod reshare;

pub use bank::TripleBank;
pub use ddec::{combine_shares, ddec, DecShare};
pub use mul::{combine_mul, reconstruct, shared_mul, MulShare};
pub use online::{check_scale, masked_sign, nirank_round, MaskedRound, MAX_SCALE};
pub use prep::{chain_triple, prep_chain, ChainStep, PrepConfig, PrepTriple};
pub use reshare::{reshare, ReshareOutput};
