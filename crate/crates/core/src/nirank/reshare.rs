//! Converting a ciphertext into additive plaintext shares held by the workers.
//!
//! Worker `j` publishes `E(v_j)`; the workers jointly decrypt `E(x + Σv_j)` and each
//! worker derives its share: `x_1 = (x + v) - v_1`, `x_j = -v_j` for `j > 1`, all
//! modulo `n`. The masked value is re-encrypted with randomness 1, so worker 1 knows
//! the randomness of `E(x_1) = g^(x+v) · E(v_1)^-1`.

use num_bigint::BigUint;
use rand::RngCore;

use super::ddec::{combine_shares, DecShare};
use crate::arith::{mod_inv, random_below, to_bigint};
use crate::error::{Error, Result};
use crate::paillier::{Ciphertext, Opening, PublicParams, SecretKeyShare};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReshareOutput {
    /// 1-based worker index.
    pub party: usize,
    /// `x_j` as a residue modulo `n`.
    pub plain_share: BigUint,
    /// Randomness of `enc_share`.
    pub randomness: BigUint,
    pub enc_share: Ciphertext,
}

impl ReshareOutput {
    pub fn opening(&self) -> Opening {
        Opening {
            ciphertext: self.enc_share.clone(),
            value: to_bigint(&self.plain_share),
            randomness: self.randomness.clone(),
        }
    }
}

/// A worker's secret mask `v_j` and its published encryption.
#[derive(Debug, Clone)]
pub struct ReshareMask {
    pub party: usize,
    pub v: BigUint,
    pub r: BigUint,
    pub enc_v: Ciphertext,
}

impl ReshareMask {
    pub fn new<R: RngCore + ?Sized>(params: &PublicParams, party: usize, rng: &mut R) -> Self {
        let v = random_below(rng, &params.n);
        let r = params.random_unit(rng);
        let enc_v = Ciphertext(params.encrypt_raw(&to_bigint(&v), &r));
        ReshareMask { party, v, r, enc_v }
    }

    /// Derives this worker's share from the decrypted masked value `x + v mod n`.
    pub fn finish(&self, params: &PublicParams, masked: &BigUint) -> Result<ReshareOutput> {
        let n_sq = &params.n_sq;
        let neg_v = (&params.n - &self.v) % &params.n;
        let r_inv =
            mod_inv(&self.r, n_sq).ok_or_else(|| Error::Internal("mask randomness".into()))?;
        let v_inv = mod_inv(self.enc_v.value(), n_sq)
            .ok_or_else(|| Error::Internal("mask ciphertext".into()))?;
        let (plain_share, enc_share) = if self.party == 1 {
            let share = (masked + &neg_v) % &params.n;
            let c = params.g_pow(&to_bigint(masked)) * v_inv % n_sq;
            (share, Ciphertext(c))
        } else {
            (neg_v, Ciphertext(v_inv))
        };
        Ok(ReshareOutput {
            party: self.party,
            plain_share,
            randomness: r_inv,
            enc_share,
        })
    }
}

/// `c · Π E(v_j)`
pub fn masked_ciphertext(
    params: &PublicParams,
    c: &Ciphertext,
    masks: &[&Ciphertext],
) -> Ciphertext {
    masks.iter().fold(c.clone(), |acc, m| params.add(&acc, m))
}

/// Public share ciphertexts: `g^(x+v) · E(v_1)^-1` for worker 1 and `E(v_j)^-1` otherwise.
pub fn public_share(
    params: &PublicParams,
    party: usize,
    masked: &BigUint,
    enc_v: &Ciphertext,
) -> Result<Ciphertext> {
    let v_inv = mod_inv(enc_v.value(), &params.n_sq)
        .ok_or_else(|| Error::Decode("mask ciphertext is not a unit".into()))?;
    Ok(if party == 1 {
        Ciphertext(params.g_pow(&to_bigint(masked)) * v_inv % &params.n_sq)
    } else {
        Ciphertext(v_inv)
    })
}

/// Runs the whole reshare of `c` among the holders of `keys`.
pub fn reshare<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    c: &Ciphertext,
    rng: &mut R,
) -> Result<Vec<ReshareOutput>> {
    if keys.is_empty() {
        return Err(Error::InvalidParameter(
            "reshare needs at least one worker".into(),
        ));
    }
    let masks: Vec<_> = keys
        .iter()
        .map(|k| ReshareMask::new(params, k.index, rng))
        .collect();
    let enc_vs: Vec<_> = masks.iter().map(|m| &m.enc_v).collect();
    let masked_ct = masked_ciphertext(params, c, &enc_vs);
    let shares: Vec<_> = keys
        .iter()
        .map(|k| DecShare::new(params, k, &masked_ct, rng))
        .collect();
    let masked = combine_shares(params, &masked_ct, &shares)?;
    let masked = params.encode_signed(&masked.0)?;
    masks.iter().map(|m| m.finish(params, &masked)).collect()
}
