//! Proof that `E(x)` encrypts a nonzero value, via an encryption of its inverse.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::RngCore;

use super::{absorb_params, absorb_sq, all_units, Transcript};
use crate::arith::{mod_inv, pow_signed, random_below, reduce_signed, to_bigint};
use crate::error::{Error, Result};
use crate::paillier::{Ciphertext, Opening, PublicParams};

const TAG: &str = "secrank/nz";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NzProof {
    pub enc_y: BigUint,
    pub enc_m: BigUint,
    pub enc_xm: BigUint,
    pub p: BigUint,
    pub w: BigUint,
    pub u: BigUint,
}

pub struct NzCommit {
    y: BigUint,
    r_y: BigUint,
    m: BigUint,
    r_m: BigUint,
    v: BigUint,
    enc_y: BigUint,
    enc_m: BigUint,
    enc_xm: BigUint,
}

impl NzCommit {
    pub fn new<R: RngCore + ?Sized>(
        params: &PublicParams,
        opening: &Opening,
        rng: &mut R,
    ) -> Result<Self> {
        let x = reduce_signed(&opening.value, &params.n);
        if x.is_zero() {
            return Err(Error::Precondition("zero has no inverse".into()));
        }
        let y = mod_inv(&x, &params.n)
            .ok_or_else(|| Error::Precondition("plaintext shares a factor with n".into()))?;
        let r_y = params.random_unit(rng);
        let m = random_below(rng, &params.n);
        let r_m = params.random_unit(rng);
        let v = params.random_unit(rng);
        let enc_y = params.encrypt_raw(&to_bigint(&y), &r_y);
        let enc_m = params.encrypt_raw(&to_bigint(&m), &r_m);
        let n_sq = &params.n_sq;
        let enc_xm = opening.ciphertext.value().modpow(&m, n_sq) * v.modpow(&params.n, n_sq) % n_sq;
        Ok(NzCommit {
            y,
            r_y,
            m,
            r_m,
            v,
            enc_y,
            enc_m,
            enc_xm,
        })
    }

    pub fn absorb(&self, params: &PublicParams, t: &mut Transcript) {
        for c in [&self.enc_y, &self.enc_m, &self.enc_xm] {
            absorb_sq(t, params, c);
        }
    }

    pub fn respond(self, params: &PublicParams, opening: &Opening, e: &BigUint) -> NzProof {
        let n_sq = &params.n_sq;
        let full = &self.m + e * &self.y;
        let t = &full / &params.n;
        let p = full % &params.n;
        let w = &self.r_m * self.r_y.modpow(e, n_sq) % n_sq;
        let exponent: BigInt = to_bigint(&(&t * &params.n)) - to_bigint(&(e * &self.y));
        let u = pow_signed(&opening.randomness, &exponent, n_sq).expect("randomness is a unit")
            * &self.v
            % n_sq;
        NzProof {
            enc_y: self.enc_y,
            enc_m: self.enc_m,
            enc_xm: self.enc_xm,
            p,
            w,
            u,
        }
    }
}

impl NzProof {
    pub fn absorb_commitments(&self, params: &PublicParams, t: &mut Transcript) {
        for c in [&self.enc_y, &self.enc_m, &self.enc_xm] {
            absorb_sq(t, params, c);
        }
    }

    pub fn check(&self, params: &PublicParams, x: &Ciphertext, e: &BigUint) -> bool {
        let n_sq = &params.n_sq;
        if self.p >= params.n
            || !all_units(
                params,
                &[
                    &self.enc_y,
                    &self.enc_m,
                    &self.enc_xm,
                    &self.w,
                    &self.u,
                    x.value(),
                ],
            )
        {
            return false;
        }
        let lhs1 = params.g_pow(&to_bigint(&self.p)) * self.w.modpow(&params.n, n_sq) % n_sq;
        let rhs1 = &self.enc_m * self.enc_y.modpow(e, n_sq) % n_sq;
        if lhs1 != rhs1 {
            return false;
        }
        let lhs2 = x.value().modpow(&self.p, n_sq) * self.u.modpow(&params.n, n_sq) % n_sq;
        let rhs2 = &self.enc_xm * params.g_pow(&to_bigint(e)) % n_sq;
        lhs2 == rhs2
    }
}

fn transcript(params: &PublicParams, x: &Ciphertext) -> Transcript {
    let mut t = Transcript::new(TAG);
    absorb_params(&mut t, params);
    absorb_sq(&mut t, params, x.value());
    t
}

pub fn prove_nz<R: RngCore + ?Sized>(
    params: &PublicParams,
    opening: &Opening,
    rng: &mut R,
) -> Result<NzProof> {
    let mut t = transcript(params, &opening.ciphertext);
    let commit = NzCommit::new(params, opening, rng)?;
    commit.absorb(params, &mut t);
    let e = t.challenge(&params.n);
    Ok(commit.respond(params, opening, &e))
}

pub fn verify_nz(params: &PublicParams, x: &Ciphertext, proof: &NzProof) -> bool {
    let mut t = transcript(params, x);
    proof.absorb_commitments(params, &mut t);
    let e = t.challenge(&params.n);
    proof.check(params, x, &e)
}
