//! Proof that `E(x)` encrypts `-1` or `1`.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::RngCore;

use super::{absorb_params, absorb_sq, all_units, Transcript};
use crate::arith::{random_below, reduce_signed, to_bigint};
use crate::error::{Error, Result};
use crate::paillier::{Ciphertext, Opening, PublicParams};

const TAG: &str = "secrank/mbs";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbsProof {
    pub enc_m: BigUint,
    pub enc_2mx: BigUint,
    pub enc_m2: BigUint,
    pub p: BigUint,
    pub w: BigUint,
    pub u: BigUint,
}

pub struct MbsCommit {
    m: BigUint,
    lambda: BigUint,
    theta: BigUint,
    nu: BigUint,
    enc_m: BigUint,
    enc_2mx: BigUint,
    enc_m2: BigUint,
}

impl MbsCommit {
    /// Follows the prover steps for any `x`; only `x ∈ {-1, 1}` yields a valid proof.
    pub fn new<R: RngCore + ?Sized>(params: &PublicParams, x: &BigInt, rng: &mut R) -> Self {
        let m = random_below(rng, &params.n);
        let lambda = params.random_unit(rng);
        let theta = params.random_unit(rng);
        let nu = params.random_unit(rng);
        let mi = to_bigint(&m);
        let enc_m = params.encrypt_raw(&mi, &lambda);
        let enc_2mx = params.encrypt_raw(&(BigInt::from(2) * &mi * x), &theta);
        let enc_m2 = params.encrypt_raw(&(&mi * &mi), &nu);
        MbsCommit {
            m,
            lambda,
            theta,
            nu,
            enc_m,
            enc_2mx,
            enc_m2,
        }
    }

    pub fn absorb(&self, params: &PublicParams, t: &mut Transcript) {
        for c in [&self.enc_m, &self.enc_2mx, &self.enc_m2] {
            absorb_sq(t, params, c);
        }
    }

    pub fn respond(self, params: &PublicParams, opening: &Opening, e: &BigUint) -> MbsProof {
        let n_sq = &params.n_sq;
        let x = reduce_signed(&opening.value, &params.n);
        let p = (&self.m + e * x) % &params.n;
        let w = &self.lambda * opening.randomness.modpow(e, n_sq) % n_sq;
        let u = &self.nu * self.theta.modpow(e, n_sq) % n_sq;
        MbsProof {
            enc_m: self.enc_m,
            enc_2mx: self.enc_2mx,
            enc_m2: self.enc_m2,
            p,
            w,
            u,
        }
    }
}

impl MbsProof {
    pub fn absorb_commitments(&self, params: &PublicParams, t: &mut Transcript) {
        for c in [&self.enc_m, &self.enc_2mx, &self.enc_m2] {
            absorb_sq(t, params, c);
        }
    }

    pub fn check(&self, params: &PublicParams, x: &Ciphertext, e: &BigUint) -> bool {
        let n_sq = &params.n_sq;
        if self.p >= params.n
            || !all_units(
                params,
                &[
                    &self.enc_m,
                    &self.enc_2mx,
                    &self.enc_m2,
                    &self.w,
                    &self.u,
                    x.value(),
                ],
            )
        {
            return false;
        }
        let lhs1 = params.g_pow(&to_bigint(&self.p)) * self.w.modpow(&params.n, n_sq) % n_sq;
        let rhs1 = &self.enc_m * x.value().modpow(e, n_sq) % n_sq;
        if lhs1 != rhs1 {
            return false;
        }
        let p = to_bigint(&self.p);
        let e_int = to_bigint(e);
        let lhs2 =
            params.g_pow(&(&p * &p - &e_int * &e_int)) * self.u.modpow(&params.n, n_sq) % n_sq;
        let rhs2 = &self.enc_m2 * self.enc_2mx.modpow(e, n_sq) % n_sq;
        lhs2 == rhs2
    }
}

fn transcript(params: &PublicParams, x: &Ciphertext) -> Transcript {
    let mut t = Transcript::new(TAG);
    absorb_params(&mut t, params);
    absorb_sq(&mut t, params, x.value());
    t
}

pub fn prove_mbs<R: RngCore + ?Sized>(
    params: &PublicParams,
    opening: &Opening,
    rng: &mut R,
) -> Result<MbsProof> {
    if (&opening.value * &opening.value) != BigInt::one() {
        return Err(Error::Precondition(format!(
            "{} is not a sign",
            opening.value
        )));
    }
    Ok(prove_mbs_unchecked(params, opening, rng))
}

/// Runs the prover steps without checking the witness.
pub fn prove_mbs_unchecked<R: RngCore + ?Sized>(
    params: &PublicParams,
    opening: &Opening,
    rng: &mut R,
) -> MbsProof {
    let mut t = transcript(params, &opening.ciphertext);
    let commit = MbsCommit::new(params, &opening.value, rng);
    commit.absorb(params, &mut t);
    let e = t.challenge(&params.n);
    commit.respond(params, opening, &e)
}

pub fn verify_mbs(params: &PublicParams, x: &Ciphertext, proof: &MbsProof) -> bool {
    let mut t = transcript(params, x);
    proof.absorb_commitments(params, &mut t);
    let e = t.challenge(&params.n);
    proof.check(params, x, &e)
}
