//! Joint decryption: every worker publishes a partial decryption with its proof.

use rand::RngCore;

use crate::codec::{Reader, Writer};
use crate::error::Result;
use crate::paillier::{
    Ciphertext, PartialDecryption, PublicParams, SecretKeyShare, SignedPlaintext,
};
use crate::zkp::{PdProof, ProofKind, SigmaProof};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecShare {
    pub part: PartialDecryption,
    pub proof: PdProof,
}

impl DecShare {
    pub fn new<R: RngCore + ?Sized>(
        params: &PublicParams,
        key: &SecretKeyShare,
        c: &Ciphertext,
        rng: &mut R,
    ) -> Self {
        let (part, proof) = params.partial_decrypt(key, c, rng);
        DecShare { part, proof }
    }

    /// A share computed with a random exponent, paired with a proof for the honest one.
    pub fn forged<R: RngCore + ?Sized>(
        params: &PublicParams,
        key: &SecretKeyShare,
        c: &Ciphertext,
        rng: &mut R,
    ) -> Self {
        let mut share = DecShare::new(params, key, c, rng);
        let junk = params.random_unit(rng);
        share.part.share =
            share.part.share * junk.modpow(&2u32.into(), &params.n_sq) % &params.n_sq;
        share
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.uint(&self.part.share, params.squared_width())?;
        SigmaProof::Pd(self.proof.clone()).write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, index: usize, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let share = r.group(params)?;
        let SigmaProof::Pd(proof) = SigmaProof::read_body(params, ProofKind::Pd, &mut r)? else {
            unreachable!("kind fixed to pd")
        };
        r.finish()?;
        Ok(DecShare {
            part: PartialDecryption { index, share },
            proof,
        })
    }
}

/// Combines published shares, aborting on the first worker whose proof fails.
pub fn combine_shares(
    params: &PublicParams,
    c: &Ciphertext,
    shares: &[DecShare],
) -> Result<SignedPlaintext> {
    let parts: Vec<_> = shares
        .iter()
        .map(|s| (s.part.clone(), s.proof.clone()))
        .collect();
    params.combine(c, &parts)
}

/// Decrypts `c` with all workers' keys.
pub fn ddec<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    c: &Ciphertext,
    rng: &mut R,
) -> Result<SignedPlaintext> {
    let shares: Vec<_> = keys
        .iter()
        .map(|k| DecShare::new(params, k, c, rng))
        .collect();
    combine_shares(params, c, &shares)
}
