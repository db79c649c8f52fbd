//! Distributed multiplicative masking of a nonzero value and its sign.
//!
//! Each party contributes `r_j = (-1)^Ξ_j · Π τ`, a product of primes from the
//! plaintext space with party-chosen frequencies. The combined `r = Π r_j` hides
//! `q` in `y = q·r` unless some prime of the space is absent from every party's
//! product, which happens with the probability given by [`zero_freq_probability`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_FREQUENCY: u32 = 4;
pub const DEFAULT_ZERO_FREQUENCY: f64 = 0.1;

/// Per-party frequency sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySampler {
    /// Largest frequency drawn for a prime.
    pub max_frequency: u32,
    /// Probability that a prime is left out entirely.
    pub zero_probability: f64,
}

impl Default for FrequencySampler {
    fn default() -> Self {
        FrequencySampler {
            max_frequency: DEFAULT_MAX_FREQUENCY,
            zero_probability: DEFAULT_ZERO_FREQUENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskingConfig {
    /// The space `X = [low, high] \ {0}`.
    pub low: i64,
    pub high: i64,
    /// Magnitude bound of the combined randomness.
    pub randomness_bound: BigInt,
    pub sampler: FrequencySampler,
}

/// One party's masking contribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyRandomness {
    pub r: BigInt,
    /// `Ξ_j`; the sign of `r` is `(-1)^Ξ_j`.
    pub sign_flips: u32,
    /// Prime factors of `|r|`, with multiplicity.
    pub factors: Vec<u64>,
}

impl MaskingConfig {
    /// Space `[low, high]` with bound `(n-1) / (16·(high-low))`.
    pub fn new(n: &BigInt, low: i64, high: i64, sampler: FrequencySampler) -> Result<Self> {
        if low >= high {
            return Err(Error::InvalidParameter(format!(
                "empty space [{low}, {high}]"
            )));
        }
        let width = BigInt::from(high) - BigInt::from(low);
        let randomness_bound: BigInt = (n - 1) / (width * 16);
        if !randomness_bound.is_positive() {
            return Err(Error::InvalidParameter(
                "modulus too small for the space".into(),
            ));
        }
        Self::with_bound(low, high, randomness_bound, sampler)
    }

    pub fn with_bound(
        low: i64,
        high: i64,
        randomness_bound: BigInt,
        sampler: FrequencySampler,
    ) -> Result<Self> {
        if low >= high {
            return Err(Error::InvalidParameter(format!(
                "empty space [{low}, {high}]"
            )));
        }
        if !(0.0..=1.0).contains(&sampler.zero_probability) {
            return Err(Error::InvalidParameter(
                "zero-frequency probability outside [0, 1]".into(),
            ));
        }
        Ok(MaskingConfig {
            low,
            high,
            randomness_bound,
            sampler,
        })
    }

    /// Primes `p` with `p` or `-p` in the space.
    pub fn primes(&self) -> Vec<u64> {
        let top = self
            .high
            .max(0)
            .unsigned_abs()
            .max(self.low.min(0).unsigned_abs());
        primes_up_to(top)
    }

    /// Floor of the `parties`-th root of the randomness bound.
    pub fn per_party_bound(&self, parties: usize) -> BigInt {
        self.randomness_bound.nth_root(parties as u32)
    }
}

fn primes_up_to(top: u64) -> Vec<u64> {
    (2..=top)
        .filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .collect()
}

/// Draws `r_j` with `|r_j| <= per_party_bound`.
///
/// Primes are visited in random order; each gets a frequency that is zero with the
/// configured probability and otherwise uniform in `[1, max_frequency]`, and is
/// multiplied in as many times as that frequency and the remaining budget allow.
pub fn sample_party_randomness<R: RngCore + ?Sized>(
    cfg: &MaskingConfig,
    per_party_bound: &BigInt,
    rng: &mut R,
) -> Result<PartyRandomness> {
    let mut primes = cfg.primes();
    match primes.first() {
        Some(&p) if per_party_bound >= &BigInt::from(p) => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "bound {per_party_bound} fits no prime of [{}, {}]",
                cfg.low, cfg.high
            )))
        }
    }
    primes.shuffle(rng);
    let mut magnitude = BigInt::one();
    let mut factors = Vec::new();
    for p in primes {
        if rng.random_bool(cfg.sampler.zero_probability) {
            continue;
        }
        let freq = rng.random_range(1..=cfg.sampler.max_frequency.max(1));
        for _ in 0..freq {
            let next = &magnitude * p;
            if &next > per_party_bound {
                break;
            }
            magnitude = next;
            factors.push(p);
        }
    }
    factors.sort_unstable();
    let sign_flips = rng.random_range(0..=1u32);
    let r = if sign_flips.is_odd() {
        -magnitude
    } else {
        magnitude
    };
    Ok(PartyRandomness {
        r,
        sign_flips,
        factors,
    })
}

/// `y = q·r`, checked against the signed plaintext half-range.
pub fn mask(q: &BigInt, r: &BigInt, half_range: &BigInt) -> Result<BigInt> {
    if q.is_zero() || r.is_zero() {
        return Err(Error::Precondition("masking needs nonzero operands".into()));
    }
    let y = q * r;
    if &y.abs() > half_range {
        return Err(Error::PlaintextRange(y.to_string()));
    }
    Ok(y)
}

/// `φ(θ)`: `1` for positive, `-1` for negative, `None` at zero.
pub fn sign(x: &BigInt) -> Option<i8> {
    if x.is_positive() {
        Some(1)
    } else if x.is_negative() {
        Some(-1)
    } else {
        None
    }
}

/// Recovers `φ(q)` from `φ(q·r)` and `φ(r)`.
pub fn unmask_sign(sign_y: i8, sign_r: i8) -> i8 {
    sign_y * sign_r
}

/// Probability that at least one of `space_size` primes gets frequency zero from every
/// party, when party `j` leaves a prime out with probability `p_j`.
pub fn zero_freq_probability(p_list: &[f64], space_size: usize) -> f64 {
    let all_zero: f64 = p_list.iter().product();
    1.0 - (1.0 - all_zero).powi(space_size as i32)
}
