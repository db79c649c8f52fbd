//! Probabilistic primality and safe-prime generation.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::arith::{random_below, random_bits};
use crate::error::{Error, Result};

/// Miller-Rabin rounds used for key material.
pub const KEY_MR_ROUNDS: usize = 64;

const SIEVE_LIMIT: u32 = 4096;

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = SIEVE_LIMIT as usize;
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

/// Returns false if `n` has a small prime factor other than itself.
pub(crate) fn passes_trial_division(n: &BigUint) -> bool {
    for &p in small_primes() {
        let rem = (n % p).to_u32().unwrap_or(0);
        if rem == 0 {
            return *n == BigUint::from(p);
        }
    }
    true
}

/// Miller-Rabin with `rounds` uniformly random bases.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    if n.to_u32().is_some_and(|v| v <= SIEVE_LIMIT) {
        return small_primes().binary_search(&n.to_u32().unwrap()).is_ok();
    }
    if n.is_even() || !passes_trial_division(n) {
        return false;
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let range = n - 3u32;
    'witness: for _ in 0..rounds {
        let a = random_below(rng, &range) + 2u32;
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Generates a safe prime `p = 2p' + 1` of exactly `bits` bits.
///
/// Candidates for `p'` are sieved so that neither `p'` nor `2p'+1` has a small factor,
/// then both are tested with [`KEY_MR_ROUNDS`] Miller-Rabin rounds. Gives up after
/// `max_candidates` sieve survivors.
pub fn generate_safe_prime<R: RngCore + ?Sized>(
    bits: u64,
    max_candidates: usize,
    rng: &mut R,
) -> Result<BigUint> {
    if bits < 16 {
        return Err(Error::InvalidParameter(format!(
            "safe prime of {bits} bits is too small"
        )));
    }
    let mut survivors = 0usize;
    loop {
        // Top two bits of p' set so a product of two such primes keeps full length.
        // p' ≡ 3 (mod 4) keeps p ≡ 7 (mod 8).
        let mut sub = random_bits(rng, bits - 1);
        sub.set_bit(bits - 2, true);
        sub.set_bit(bits - 3, true);
        sub.set_bit(0, true);
        sub.set_bit(1, true);
        let residues: Vec<u32> = small_primes()
            .iter()
            .map(|&q| (&sub % q).to_u32().unwrap())
            .collect();
        // Walk p' in steps of 4 for a bounded window before resampling.
        for step in 0..2048u32 {
            let offset = 4 * step;
            let clean = small_primes().iter().zip(&residues).all(|(&q, &r)| {
                let r = ((r as u64 + offset as u64) % q as u64) as u32;
                // p' ≢ 0 and 2p'+1 ≢ 0 (mod q)
                r != 0 && !(2 * r as u64 + 1).is_multiple_of(q as u64)
            });
            if !clean {
                continue;
            }
            let candidate_sub = &sub + offset;
            if candidate_sub.bits() != bits - 1 {
                break;
            }
            survivors += 1;
            if survivors > max_candidates {
                return Err(Error::Setup(format!(
                    "no {bits}-bit safe prime found within {max_candidates} candidates"
                )));
            }
            let p = (&candidate_sub << 1u32) + 1u32;
            // Cheap single-round filter on both before the full test.
            if !is_probable_prime(&candidate_sub, 1, rng) || !is_probable_prime(&p, 1, rng) {
                continue;
            }
            if is_probable_prime(&candidate_sub, KEY_MR_ROUNDS, rng)
                && is_probable_prime(&p, KEY_MR_ROUNDS, rng)
            {
                return Ok(p);
            }
        }
    }
}

/// True if `p` is (probably) a safe prime.
pub fn is_safe_prime<R: RngCore + ?Sized>(p: &BigUint, rng: &mut R) -> bool {
    if p.is_zero() || p.is_even() {
        return false;
    }
    let sub = (p - 1u32) >> 1u32;
    is_probable_prime(&sub, KEY_MR_ROUNDS, rng) && is_probable_prime(p, KEY_MR_ROUNDS, rng)
}
