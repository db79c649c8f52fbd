//! Trusted-dealer key generation.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::RngCore;

use super::primes::{generate_safe_prime, is_safe_prime};
use super::{PublicParams, SecretKeyShare};
use crate::arith::{self, random_below};
use crate::error::{Error, Result};

pub const SUPPORTED_BITS: [u64; 4] = [512, 1024, 1536, 2048];

/// Sieve survivors tried per prime before giving up.
const MAX_CANDIDATES: usize = 200_000;

/// Generates a fresh modulus of `bits` bits and deals `workers` key shares.
pub fn keygen<R: RngCore + ?Sized>(
    bits: u64,
    workers: usize,
    rng: &mut R,
) -> Result<(PublicParams, Vec<SecretKeyShare>)> {
    if !SUPPORTED_BITS.contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "modulus size {bits} not in {SUPPORTED_BITS:?}"
        )));
    }
    check_workers(workers)?;
    let p = generate_safe_prime(bits / 2, MAX_CANDIDATES, rng)?;
    let q = loop {
        let q = generate_safe_prime(bits / 2, MAX_CANDIDATES, rng)?;
        if q != p {
            break q;
        }
    };
    deal(&p, &q, workers, rng)
}

/// Deals key shares for a modulus built from two caller-supplied safe primes.
pub fn keygen_from_primes<R: RngCore + ?Sized>(
    p: &BigUint,
    q: &BigUint,
    workers: usize,
    rng: &mut R,
) -> Result<(PublicParams, Vec<SecretKeyShare>)> {
    check_workers(workers)?;
    if p == q {
        return Err(Error::Setup("the two primes must differ".into()));
    }
    if !is_safe_prime(p, rng) || !is_safe_prime(q, rng) {
        return Err(Error::Setup("supplied primes are not safe primes".into()));
    }
    deal(p, q, workers, rng)
}

fn check_workers(workers: usize) -> Result<()> {
    if workers < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 workers, got {workers}"
        )));
    }
    Ok(())
}

fn deal<R: RngCore + ?Sized>(
    p: &BigUint,
    q: &BigUint,
    workers: usize,
    rng: &mut R,
) -> Result<(PublicParams, Vec<SecretKeyShare>)> {
    let n = p * q;
    let m = (p >> 1u32) * (q >> 1u32);
    let nm = &n * &m;
    if !m.gcd(&n).is_one() {
        return Err(Error::Setup("p'q' shares a factor with n".into()));
    }
    let m_inv =
        arith::mod_inv(&m, &n).ok_or_else(|| Error::Setup("m not invertible mod n".into()))?;
    // d ≡ 0 (mod m), d ≡ 1 (mod n)
    let d = (&m * m_inv) % &nm;

    let coefficients: Vec<BigUint> = std::iter::once(d)
        .chain((1..workers).map(|_| random_below(rng, &nm)))
        .collect();
    let shares: Vec<SecretKeyShare> = (1..=workers)
        .map(|i| {
            let x = BigUint::from(i);
            let share = coefficients
                .iter()
                .rev()
                .fold(BigUint::ZERO, |acc, a| (acc * &x + a) % &nm);
            SecretKeyShare { index: i, share }
        })
        .collect();

    let n_sq = &n * &n;
    let r = arith::random_unit(rng, &n_sq);
    let v = (&r * &r) % &n_sq;
    let delta = arith::factorial(workers);
    let verification_keys = shares
        .iter()
        .map(|s| v.modpow(&(&delta * &s.share), &n_sq))
        .collect();
    debug_assert!(!v.is_one());
    Ok((PublicParams::new(n, workers, v, verification_keys), shares))
}
