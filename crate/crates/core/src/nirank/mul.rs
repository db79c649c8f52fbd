//! Multiplying an encrypted value by a secret shared among the workers.
//!
//! Worker `j` holding `δ_j` with public `E(δ_j)` publishes `E(θ)^δ_j` and proves it.
//! The product of all contributions encrypts `θ·Σδ_j`.

use num_bigint::BigInt;
use rand::RngCore;

use super::reshare::ReshareOutput;
use crate::arith::to_bigint;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Party, Result};
use crate::paillier::{Ciphertext, PublicParams};
use crate::zkp::mtp::{prove_mtp, scale_by_known, verify_mtp};
use crate::zkp::{MtpProof, MtpStatement, MtpWitness, ProofKind, SigmaProof};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulShare {
    pub worker: usize,
    pub z: Ciphertext,
    pub proof: MtpProof,
}

impl MulShare {
    pub fn new<R: RngCore + ?Sized>(
        params: &PublicParams,
        theta: &Ciphertext,
        share: &ReshareOutput,
        rng: &mut R,
    ) -> Self {
        let y = to_bigint(&share.plain_share);
        let (z, nu) = scale_by_known(params, theta, &y, rng);
        let stmt = MtpStatement {
            x: theta,
            y: &share.enc_share,
            z: &z,
        };
        let wit = MtpWitness {
            y,
            gamma: share.randomness.clone(),
            nu,
        };
        let proof = prove_mtp(params, &stmt, &wit, rng);
        MulShare {
            worker: share.party,
            z,
            proof,
        }
    }

    /// Contribution for a share offset by one, with a proof for the honest share.
    pub fn tampered<R: RngCore + ?Sized>(
        params: &PublicParams,
        theta: &Ciphertext,
        share: &ReshareOutput,
        rng: &mut R,
    ) -> Self {
        let mut honest = MulShare::new(params, theta, share, rng);
        honest.z = params.add(&honest.z, theta);
        honest
    }

    pub fn verify(
        &self,
        params: &PublicParams,
        theta: &Ciphertext,
        enc_share: &Ciphertext,
    ) -> bool {
        verify_mtp(
            params,
            &MtpStatement {
                x: theta,
                y: enc_share,
                z: &self.z,
            },
            &self.proof,
        )
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.ciphertext(params, &self.z)?;
        SigmaProof::Mtp(self.proof.clone()).write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, worker: usize, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let z = r.ciphertext(params)?;
        let SigmaProof::Mtp(proof) = SigmaProof::read_body(params, ProofKind::Mtp, &mut r)? else {
            unreachable!("kind fixed to mtp")
        };
        r.finish()?;
        Ok(MulShare { worker, z, proof })
    }
}

/// Verifies every contribution against the public share ciphertexts and combines them.
pub fn combine_mul(
    params: &PublicParams,
    theta: &Ciphertext,
    enc_shares: &[&Ciphertext],
    parts: &[MulShare],
) -> Result<Ciphertext> {
    if parts.len() != enc_shares.len() || parts.is_empty() {
        return Err(Error::InvalidParameter(
            "one contribution per share expected".into(),
        ));
    }
    for (part, enc_share) in parts.iter().zip(enc_shares) {
        if !part.verify(params, theta, enc_share) {
            return Err(Error::abort(
                Party::Worker(part.worker),
                "multiplication proof rejected",
            ));
        }
    }
    Ok(params.sum(parts.iter().map(|p| &p.z)).expect("non-empty"))
}

/// `E(θ·x)` where `x` is shared as `shares`.
pub fn shared_mul<R: RngCore + ?Sized>(
    params: &PublicParams,
    theta: &Ciphertext,
    shares: &[ReshareOutput],
    rng: &mut R,
) -> Result<Ciphertext> {
    let parts: Vec<_> = shares
        .iter()
        .map(|s| MulShare::new(params, theta, s, rng))
        .collect();
    let enc: Vec<_> = shares.iter().map(|s| &s.enc_share).collect();
    combine_mul(params, theta, &enc, &parts)
}

/// Sum of plaintext shares as a signed value.
pub fn reconstruct(params: &PublicParams, shares: &[ReshareOutput]) -> BigInt {
    let total = shares
        .iter()
        .fold(num_bigint::BigUint::default(), |acc, s| {
            (acc + &s.plain_share) % &params.n
        });
    params.decode_signed(&total)
}
