//! Plaintext execution of the search, sharing the state machine with the protocols.

use serde::{Deserialize, Serialize};

use super::search::{SearchState, Step};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MirrorOutcome {
    pub result: i64,
    pub z_sequence: Vec<i64>,
    pub guesses: Vec<i64>,
    /// Some round ended with `z = 0`.
    pub hit_zero: bool,
}

impl MirrorOutcome {
    pub fn rounds(&self) -> usize {
        self.z_sequence.len()
    }
}

/// `Σ φ(x - m) + offset` for a half-integer guess given as `twice_guess = 2m`.
pub fn sign_sum(values: &[i64], twice_guess: i64, offset: i64) -> i64 {
    values
        .iter()
        .map(|&x| if 2 * x > twice_guess { 1 } else { -1 })
        .sum::<i64>()
        + offset
}

/// Runs the search on plaintext inputs.
pub fn run_mirror(values: &[i64], state: SearchState) -> Result<MirrorOutcome> {
    let mut state = state;
    let mut z_sequence = Vec::new();
    let mut guesses = Vec::new();
    loop {
        let z = sign_sum(values, state.guess.twice(), state.offset());
        z_sequence.push(z);
        guesses.push(state.guess.twice());
        match state.update(z) {
            Step::Continue(next) => state = next,
            Step::Done(result) => {
                let hit_zero = z_sequence.contains(&0);
                return Ok(MirrorOutcome {
                    result,
                    z_sequence,
                    guesses,
                    hit_zero,
                });
            }
        }
    }
}

/// The `k`-th smallest value (1-based).
pub fn kth_smallest(values: &[i64], k: usize) -> i64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted[k.clamp(1, sorted.len()) - 1]
}

/// Sorted-middle median; the lower middle element for even counts.
pub fn median_oracle(values: &[i64]) -> i64 {
    kth_smallest(values, values.len().div_ceil(2))
}
