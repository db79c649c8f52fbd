//! Proof that a partial decryption was produced with the worker's registered key share.
//!
//! The secret exponent lives in a group of unknown order, so the response is the
//! unreduced integer `r + e·Δ·sk` with `r` wide enough to statistically hide it.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

use super::{absorb_params, absorb_sq, all_units, challenge_bound, Transcript};
use crate::arith::random_bits;
use crate::paillier::{Ciphertext, PartialDecryption, PublicParams, SecretKeyShare};

const TAG: &str = "secrank/pd";

/// Statistical hiding margin of the masked response, in bits.
pub const HIDING_BITS: u64 = 80;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdProof {
    /// `c^(4r)`
    pub a: BigUint,
    /// `v^r`
    pub b: BigUint,
    pub p: BigUint,
}

/// Bit length of the mask `r`: covers `e·Δ·sk` with `sk < n^2`.
pub fn mask_bits(params: &PublicParams) -> u64 {
    2 * params.bits + params.delta.bits() + super::CHALLENGE_BITS + HIDING_BITS
}

/// Bytes of the response field.
pub fn response_width(params: &PublicParams) -> usize {
    (mask_bits(params) + 1).div_ceil(8) as usize
}

fn transcript(
    params: &PublicParams,
    c: &Ciphertext,
    part: &PartialDecryption,
) -> Option<Transcript> {
    let vk = params.verification_key(part.index)?;
    let mut t = Transcript::new(TAG);
    absorb_params(&mut t, params);
    t.absorb_u64(part.index as u64);
    absorb_sq(&mut t, params, &params.v);
    absorb_sq(&mut t, params, vk);
    absorb_sq(&mut t, params, c.value());
    absorb_sq(&mut t, params, &part.share);
    Some(t)
}

pub fn prove_pd<R: RngCore + ?Sized>(
    params: &PublicParams,
    key: &SecretKeyShare,
    c: &Ciphertext,
    part: &PartialDecryption,
    rng: &mut R,
) -> PdProof {
    let n_sq = &params.n_sq;
    let r = random_bits(rng, mask_bits(params));
    let a = c.value().modpow(&(&r << 2u32), n_sq);
    let b = params.v.modpow(&r, n_sq);
    // An index without a verification key yields a proof nobody accepts.
    let e = match transcript(params, c, part) {
        Some(mut t) => {
            absorb_sq(&mut t, params, &a);
            absorb_sq(&mut t, params, &b);
            t.challenge(&challenge_bound())
        }
        None => BigUint::one(),
    };
    let p = r + e * &params.delta * &key.share;
    PdProof { a, b, p }
}

pub fn verify_pd(
    params: &PublicParams,
    c: &Ciphertext,
    part: &PartialDecryption,
    proof: &PdProof,
) -> bool {
    let n_sq = &params.n_sq;
    let Some(vk) = params.verification_key(part.index) else {
        return false;
    };
    let Some(mut t) = transcript(params, c, part) else {
        return false;
    };
    if !all_units(params, &[&proof.a, &proof.b, c.value(), &part.share]) {
        return false;
    }
    if proof.p.bits() > 8 * response_width(params) as u64 {
        return false;
    }
    absorb_sq(&mut t, params, &proof.a);
    absorb_sq(&mut t, params, &proof.b);
    let e = t.challenge(&challenge_bound());
    let lhs1 = c.value().modpow(&(&proof.p << 2u32), n_sq);
    let rhs1 = &proof.a * part.share.modpow(&(&e << 1u32), n_sq) % n_sq;
    if lhs1 != rhs1 {
        return false;
    }
    params.v.modpow(&proof.p, n_sq) == &proof.b * vk.modpow(&e, n_sq) % n_sq
}
