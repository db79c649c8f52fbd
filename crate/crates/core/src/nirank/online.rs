//! One online round: every user's encoded difference is masked, its sign learned and
//! corrected, and the corrected signs summed.

use num_bigint::BigInt;
use rand::RngCore;

use super::ddec::ddec;
use super::mul::shared_mul;
use super::prep::PrepTriple;
use crate::error::{Error, Result};
use crate::masking::sign;
use crate::paillier::{signed_to_i64, Ciphertext, PublicParams, ScaleFactor, SecretKeyShare};
use crate::rank::submission::aggregate_signs;

/// Largest scale factor the masking bound leaves room for.
pub const MAX_SCALE: u32 = 8;

pub fn check_scale(eta: ScaleFactor) -> Result<()> {
    if eta.get() > MAX_SCALE {
        return Err(Error::InvalidParameter(format!(
            "scale factor {} exceeds {MAX_SCALE}",
            eta.get()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedRound {
    /// `z = Σ φ(q_i) + offset`
    pub z: i64,
    /// The masked values `y_i = q_i·R_i` the workers saw.
    pub masked: Vec<BigInt>,
    pub enc_signs: Vec<Ciphertext>,
}

/// Masks `E(y_i) = E(q_i·R_i)`, decrypts `y_i`, and corrects `φ(y_i)` by `φ(R_i)`.
pub fn masked_sign<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    enc_q: &Ciphertext,
    triple: &PrepTriple,
    rng: &mut R,
) -> Result<(BigInt, Ciphertext)> {
    let enc_y = shared_mul(params, enc_q, &triple.shares_r, rng)?;
    let y = ddec(params, keys, &enc_y, rng)?.0;
    let phi = sign(&y).ok_or_else(|| Error::Precondition("masked difference is zero".into()))?;
    let enc_phi = params.encrypt_public(&BigInt::from(phi))?;
    let enc_sign = shared_mul(params, &enc_phi, &triple.shares_sign, rng)?;
    Ok((y, enc_sign))
}

pub fn nirank_round<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    enc_qs: &[Ciphertext],
    triples: &[&PrepTriple],
    offset: i64,
    rng: &mut R,
) -> Result<MaskedRound> {
    if enc_qs.len() != triples.len() {
        return Err(Error::InvalidParameter(
            "one triple per user expected".into(),
        ));
    }
    let mut masked = Vec::with_capacity(enc_qs.len());
    let mut enc_signs = Vec::with_capacity(enc_qs.len());
    for (enc_q, triple) in enc_qs.iter().zip(triples) {
        let (y, s) = masked_sign(params, keys, enc_q, triple, rng)?;
        masked.push(y);
        enc_signs.push(s);
    }
    let refs: Vec<_> = enc_signs.iter().collect();
    let total = aggregate_signs(params, &refs, offset)?;
    let z = ddec(params, keys, &total, rng)?;
    let z = signed_to_i64(&z).ok_or_else(|| Error::Internal("sign sum out of range".into()))?;
    Ok(MaskedRound {
        z,
        masked,
        enc_signs,
    })
}
