//! Sums of three squares for the range proof.

use num_bigint::BigUint;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::arith::random_below;
use crate::error::{Error, Result};
use crate::paillier::primes::is_probable_prime;

/// Inputs up to this size are decomposed by exhaustive search.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeSquares {
    pub x1: BigUint,
    pub x2: BigUint,
    pub x3: BigUint,
}

impl ThreeSquares {
    pub fn sum(&self) -> BigUint {
        &self.x1 * &self.x1 + &self.x2 * &self.x2 + &self.x3 * &self.x3
    }

    pub fn as_array(&self) -> [&BigUint; 3] {
        [&self.x1, &self.x2, &self.x3]
    }
}

/// `4x(B-x) + 1`, the value decomposed in a range proof of `x ∈ [0, B]`.
pub fn range_target(x: &BigUint, bound: &BigUint) -> BigUint {
    BigUint::from(4u32) * x * (bound - x) + 1u32
}

/// Writes `t` as a sum of three squares.
///
/// Small inputs take the lexicographically largest decomposition found by a
/// descending search. Larger ones pick a random even `x1` until `t - x1²` is a prime
/// `≡ 1 (mod 4)`, then split that prime with Cornacchia's algorithm.
pub fn decompose_three_squares<R: RngCore + ?Sized>(
    t: &BigUint,
    rng: &mut R,
) -> Result<ThreeSquares> {
    if let Some(small) = t.to_u64().filter(|&v| v <= EXHAUSTIVE_LIMIT) {
        return exhaustive(small)
            .map(|(a, b, c)| ThreeSquares {
                x1: a.into(),
                x2: b.into(),
                x3: c.into(),
            })
            .ok_or_else(|| Error::Internal(format!("{small} is not a sum of three squares")));
    }
    if t.mod_floor(&BigUint::from(4u32)) != BigUint::one() {
        return Err(Error::Precondition("large targets must be 1 mod 4".into()));
    }
    let root = t.sqrt();
    let half = &root >> 1u32;
    for _ in 0..MAX_ATTEMPTS {
        let x1 = random_below(rng, &(&half + 1u32)) << 1u32;
        let rest = t - &x1 * &x1;
        if rest.is_one() {
            return Ok(ThreeSquares {
                x1,
                x2: BigUint::one(),
                x3: BigUint::zero(),
            });
        }
        // A pseudoprime only fails the split below, so a couple of rounds suffice.
        if !crate::paillier::primes::passes_trial_division(&rest)
            || !is_probable_prime(&rest, 2, rng)
        {
            continue;
        }
        if let Some((x2, x3)) = two_squares_prime(&rest, rng) {
            return Ok(ThreeSquares { x1, x2, x3 });
        }
    }
    Err(Error::Internal("three-squares search exhausted".into()))
}

fn exhaustive(t: u64) -> Option<(u64, u64, u64)> {
    let mut a = t.sqrt();
    loop {
        let rest = t - a * a;
        let mut b = rest.sqrt();
        loop {
            let last = rest - b * b;
            let c = last.sqrt();
            if c > b {
                break;
            }
            if c * c == last {
                return Some((a, b, c));
            }
            if b == 0 {
                break;
            }
            b -= 1;
        }
        if a == 0 {
            return None;
        }
        a -= 1;
    }
}

/// Splits a prime `p ≡ 1 (mod 4)` into two squares.
fn two_squares_prime<R: RngCore + ?Sized>(p: &BigUint, rng: &mut R) -> Option<(BigUint, BigUint)> {
    let p_minus_1 = p - 1u32;
    let quarter = &p_minus_1 >> 2u32;
    let two = BigUint::from(2u32);
    let mut root = None;
    for _ in 0..128 {
        let c = random_below(rng, &(p - 3u32)) + 2u32;
        let s = c.modpow(&quarter, p);
        if (&s * &s) % p == p_minus_1 {
            root = Some(s);
            break;
        }
    }
    let mut s = root?;
    if &s * &two > *p {
        s = p - s;
    }
    let limit = p.sqrt();
    let (mut a, mut b) = (p.clone(), s);
    while b > limit {
        let r = &a % &b;
        a = b;
        b = r;
    }
    let rest = p - &b * &b;
    let c = rest.sqrt();
    (&c * &c == rest).then_some((b, c))
}
